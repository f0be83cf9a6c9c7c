// Copyright 2026 The Pointsoup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ply.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <optional>
#include <string_view>
#include <vector>

#include "pointsoup/base/error.h"

namespace pointsoup::cli {
namespace {

enum class Scalar { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::optional<Scalar> ScalarFromName(std::string_view name) {
  if (name == "char" || name == "int8") return Scalar::kInt8;
  if (name == "uchar" || name == "uint8") return Scalar::kUint8;
  if (name == "short" || name == "int16") return Scalar::kInt16;
  if (name == "ushort" || name == "uint16") return Scalar::kUint16;
  if (name == "int" || name == "int32") return Scalar::kInt32;
  if (name == "uint" || name == "uint32") return Scalar::kUint32;
  if (name == "float" || name == "float32") return Scalar::kFloat32;
  if (name == "double" || name == "float64") return Scalar::kFloat64;
  return std::nullopt;
}

size_t ScalarSize(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUint8:
      return 1;
    case Scalar::kInt16:
    case Scalar::kUint16:
      return 2;
    case Scalar::kInt32:
    case Scalar::kUint32:
    case Scalar::kFloat32:
      return 4;
    case Scalar::kFloat64:
      return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUint8;
};

struct Element {
  std::string name;
  uint64_t count = 0;
  std::vector<Property> properties;
};

[[noreturn]] void Malformed(const std::string& what) {
  Fail(ErrorCode::kFormat, "ply: " + what);
}

std::vector<std::string_view> Split(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Sequential reader over the payload, binary or ascii.
class PayloadReader {
 public:
  PayloadReader(std::span<const uint8_t> data, bool ascii) : data_(data), ascii_(ascii) {}

  double Read(Scalar type) {
    return ascii_ ? ReadAscii() : ReadBinary(type);
  }

  // Bytes still needed to hold `n` more binary values of `size` bytes.
  void RequireBinary(uint64_t n, size_t size) const {
    const long double need = static_cast<long double>(n) * size;
    if (need > static_cast<long double>(data_.size() - pos_)) {
      const auto missing = static_cast<uint64_t>(need) - (data_.size() - pos_);
      Malformed("truncated payload: missing " + std::to_string(missing) + " bytes");
    }
  }

 private:
  double ReadBinary(Scalar type) {
    const size_t n = ScalarSize(type);
    RequireBinary(1, n);
    const uint8_t* p = data_.data() + pos_;
    pos_ += n;
    switch (type) {
      case Scalar::kInt8:
        return static_cast<int8_t>(p[0]);
      case Scalar::kUint8:
        return p[0];
      case Scalar::kInt16: {
        int16_t v;
        std::memcpy(&v, p, 2);
        return v;
      }
      case Scalar::kUint16: {
        uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
      }
      case Scalar::kInt32: {
        int32_t v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case Scalar::kUint32: {
        uint32_t v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case Scalar::kFloat32: {
        float v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case Scalar::kFloat64: {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
    }
    return 0.0;
  }

  double ReadAscii() {
    while (pos_ < data_.size() && std::isspace(data_[pos_])) ++pos_;
    if (pos_ == data_.size()) Malformed("truncated payload: ran out of ascii values");
    const char* begin = reinterpret_cast<const char*>(data_.data()) + pos_;
    size_t len = 0;
    while (pos_ + len < data_.size() && !std::isspace(data_[pos_ + len])) ++len;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(begin, begin + len, v);
    if (ec != std::errc() || end != begin + len) {
      Malformed("bad ascii value '" + std::string(begin, std::min<size_t>(len, 32)) + "'");
    }
    pos_ += len;
    return v;
  }

  std::span<const uint8_t> data_;
  bool ascii_;
  size_t pos_ = 0;
};

struct Header {
  bool ascii = false;
  std::vector<Element> elements;
  size_t payload_offset = 0;
};

Header ParseHeader(std::span<const uint8_t> bytes) {
  Header h;
  size_t pos = 0;
  bool saw_format = false;
  int line_no = 0;
  while (true) {
    if (pos >= bytes.size()) Malformed("header has no end_header line");
    size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    if (end - pos > 4096) Malformed("header line too long");
    std::string_view line(reinterpret_cast<const char*>(bytes.data()) + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "ply") Malformed("missing 'ply' magic line");
      continue;
    }
    const auto tok = Split(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) Malformed("bad format line");
      if (tok[1] == "ascii") {
        h.ascii = true;
      } else if (tok[1] == "binary_little_endian") {
        h.ascii = false;
      } else {
        Malformed("unsupported format '" + std::string(tok[1]) + "'");
      }
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) Malformed("bad element line");
      Element e;
      e.name = tok[1];
      const auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (ec != std::errc() || p != tok[2].data() + tok[2].size()) {
        Malformed("bad element count '" + std::string(tok[2]) + "'");
      }
      h.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (h.elements.empty()) Malformed("property before any element");
      Property prop;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto count = ScalarFromName(tok[2]);
        const auto item = ScalarFromName(tok[3]);
        if (!count || !item || *count == Scalar::kFloat32 || *count == Scalar::kFloat64) {
          Malformed("bad list property types");
        }
        prop.is_list = true;
        prop.count_type = *count;
        prop.type = *item;
        prop.name = tok[4];
      } else if (tok.size() == 3) {
        const auto type = ScalarFromName(tok[1]);
        if (!type) Malformed("unknown property type '" + std::string(tok[1]) + "'");
        prop.type = *type;
        prop.name = tok[2];
      } else {
        Malformed("bad property line");
      }
      h.elements.back().properties.push_back(std::move(prop));
    } else {
      Malformed("unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_format) Malformed("header has no format line");
  h.payload_offset = pos;
  return h;
}

void SkipRow(PayloadReader& reader, const Element& e) {
  for (const Property& p : e.properties) {
    if (p.is_list) {
      const double n = reader.Read(p.count_type);
      if (n < 0 || n > 1e9 || n != std::floor(n)) Malformed("bad list length");
      for (uint64_t i = 0; i < static_cast<uint64_t>(n); ++i) reader.Read(p.type);
    } else {
      reader.Read(p.type);
    }
  }
}

}  // namespace

geom::PointCloud ParsePly(std::span<const uint8_t> bytes) {
  const Header h = ParseHeader(bytes);
  PayloadReader reader(bytes.subspan(h.payload_offset), h.ascii);
  for (const Element& e : h.elements) {
    if (e.name != "vertex") {
      for (uint64_t r = 0; r < e.count; ++r) SkipRow(reader, e);
      continue;
    }
    int axis_of[3] = {-1, -1, -1};
    bool has_list = false;
    size_t stride = 0;
    for (size_t i = 0; i < e.properties.size(); ++i) {
      const Property& p = e.properties[i];
      has_list = has_list || p.is_list;
      stride += ScalarSize(p.type);
      for (int a = 0; a < 3; ++a) {
        if (p.name == std::string(1, static_cast<char>('x' + a))) {
          if (p.is_list) Malformed("coordinate property is a list");
          axis_of[a] = static_cast<int>(i);
        }
      }
    }
    for (int a = 0; a < 3; ++a) {
      if (axis_of[a] < 0) {
        Malformed(std::string("vertex element has no '") + static_cast<char>('x' + a) +
                  "' property");
      }
    }
    if (!h.ascii && !has_list) reader.RequireBinary(e.count, stride);
    if (e.count > bytes.size()) Malformed("vertex count exceeds the payload size");
    std::vector<geom::Vec3> points(e.count);
    for (uint64_t r = 0; r < e.count; ++r) {
      for (size_t i = 0; i < e.properties.size(); ++i) {
        const Property& p = e.properties[i];
        if (p.is_list) {
          SkipRow(reader, Element{"", 1, {p}});
          continue;
        }
        const double v = reader.Read(p.type);
        for (int a = 0; a < 3; ++a) {
          if (axis_of[a] == static_cast<int>(i)) points[r][a] = v;
        }
      }
      for (double v : points[r]) {
        if (!std::isfinite(v)) Malformed("non-finite coordinate at vertex " + std::to_string(r));
      }
    }
    return geom::PointCloud(std::move(points));
  }
  Malformed("no vertex element");
}

geom::PointCloud ReadPly(const std::string& path) {
  const Bytes bytes = ReadFileBytes(path);
  try {
    return ParsePly(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

Bytes SerializePly(const geom::PointCloud& cloud, PlyFormat format, PlyScalar scalar) {
  const char* type = scalar == PlyScalar::kDouble ? "double" : "float";
  std::string header = "ply\nformat ";
  header += format == PlyFormat::kAscii ? "ascii" : "binary_little_endian";
  header += " 1.0\nelement vertex " + std::to_string(cloud.size()) + "\n";
  for (const char* axis : {"x", "y", "z"}) {
    header += std::string("property ") + type + " " + axis + "\n";
  }
  header += "end_header\n";
  Bytes out(header.begin(), header.end());
  ByteWriter w(&out);
  char buf[96];
  for (const geom::Vec3& p : cloud.points()) {
    if (format == PlyFormat::kAscii) {
      const int n = scalar == PlyScalar::kDouble
                        ? std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2])
                        : std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n",
                                        static_cast<double>(static_cast<float>(p[0])),
                                        static_cast<double>(static_cast<float>(p[1])),
                                        static_cast<double>(static_cast<float>(p[2])));
      w.Raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(buf), n));
    } else if (scalar == PlyScalar::kDouble) {
      for (double v : p) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        w.U64(bits);
      }
    } else {
      for (double v : p) w.F32(static_cast<float>(v));
    }
  }
  return out;
}

void WritePly(const geom::PointCloud& cloud, const std::string& path, PlyFormat format,
              PlyScalar scalar) {
  WriteFileBytes(path, SerializePly(cloud, format, scalar));
}

}  // namespace pointsoup::cli
