/*
 * dirsynth : registration-based multi-contrast MR image synthesis
 *
 * Copyright 2026 the dirsynth authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DIRSYNTH_IO_HPP
#define DIRSYNTH_IO_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dirsynth/transform.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

// Minimal NIfTI-1 persistence: little-endian single-file (.nii) images with
// a 348-byte header, magic "n+1\0", and datatype float32 / int16 / uint8.
// Orientation is carried by spacing (pixdim) and origin (qoffset) only.
//
// Loading rules:
//   - float32, 3-component (dim[0]=5, dim[5]=3)   -> DisplacementField
//     (values stored in mm, converted to voxel units via spacing)
//   - integer data with trivial scaling           -> LabelMap
//   - anything else supported                     -> Volume
//     (scl_slope/scl_inter applied when slope != 0)
using LoadedImage = std::variant<Volume, LabelMap, DisplacementField>;

LoadedImage read_volume(const std::string& path);

// All writers emit deterministic bytes (scl_slope=1, scl_inter=0) and write
// atomically via a temp file + rename.
void write_volume(const Volume& v, const std::string& path);                 // float32
void write_labels(const LabelMap& l, const std::string& path);               // int16; labels must fit
void write_mask(const Index3& dims, const Vec3& spacing, const Vec3& origin,
                const std::vector<std::uint8_t>& mask, const std::string& path); // uint8
void write_displacement(const DisplacementField& u, const std::string& path); // 3-comp float32, voxel->mm

// Convenience accessors that throw std::invalid_argument on a kind mismatch,
// naming the path.
Volume read_as_volume(const std::string& path);
LabelMap read_as_labels(const std::string& path);
DisplacementField read_as_displacement(const std::string& path);
std::vector<std::uint8_t> read_as_mask(const std::string& path);

// Text output helpers shared by the CLI: atomic replace, UTF-8, '.' decimal.
void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double value); // shortest round-trip decimal

} // namespace dirsynth

#endif
