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

#ifndef POINTSOUP_TOOLS_PLY_H_
#define POINTSOUP_TOOLS_PLY_H_

#include <span>
#include <string>

#include "pointsoup/base/bytes.h"
#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::cli {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Scalar type written for x/y/z. Double keeps decoded clouds lossless.
enum class PlyScalar { kFloat, kDouble };

// Reads the x/y/z properties of the "vertex" element. Other vertex
// properties are skipped, as are elements after the vertices. Elements
// before the vertices are skipped if they have no list properties. Throws
// kFormat naming the problem on malformed input.
geom::PointCloud ParsePly(std::span<const uint8_t> bytes);
geom::PointCloud ReadPly(const std::string& path);

Bytes SerializePly(const geom::PointCloud& cloud, PlyFormat format,
                   PlyScalar scalar = PlyScalar::kDouble);
void WritePly(const geom::PointCloud& cloud, const std::string& path, PlyFormat format,
              PlyScalar scalar = PlyScalar::kDouble);

}  // namespace pointsoup::cli

#endif  // POINTSOUP_TOOLS_PLY_H_
