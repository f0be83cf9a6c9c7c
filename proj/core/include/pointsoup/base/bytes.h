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

#ifndef POINTSOUP_BASE_BYTES_H_
#define POINTSOUP_BASE_BYTES_H_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pointsoup/base/error.h"

namespace pointsoup {

using Bytes = std::vector<uint8_t>;

// Little-endian append helpers.
class ByteWriter {
 public:
  explicit ByteWriter(Bytes* out) : out_(out) {}

  void U8(uint8_t v) { out_->push_back(v); }
  void U16(uint16_t v) { Put(v, 2); }
  void U32(uint32_t v) { Put(v, 4); }
  void U64(uint64_t v) { Put(v, 8); }
  void F32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    U32(bits);
  }
  void Raw(std::span<const uint8_t> data) {
    out_->insert(out_->end(), data.begin(), data.end());
  }
  void Str(const std::string& s) {
    out_->insert(out_->end(), s.begin(), s.end());
  }

 private:
  void Put(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_->push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  Bytes* out_;
};

// Bounds-checked little-endian reader; overruns raise kFormat errors.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t U8() { return static_cast<uint8_t>(Get(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Get(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Get(4)); }
  uint64_t U64() { return Get(8); }
  float F32() {
    const uint32_t bits = U32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::span<const uint8_t> Raw(size_t n) {
    Need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string Str(size_t n) {
    auto s = Raw(n);
    return std::string(s.begin(), s.end());
  }

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (n > remaining()) {
      Fail(ErrorCode::kFormat,
           "truncated data: need " + std::to_string(n) + " bytes at offset " +
               std::to_string(pos_) + ", " + std::to_string(remaining()) +
               " available");
    }
  }
  uint64_t Get(int n) {
    Need(static_cast<size_t>(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<size_t>(n);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

Bytes ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const uint8_t> data);

}  // namespace pointsoup

#endif  // POINTSOUP_BASE_BYTES_H_
