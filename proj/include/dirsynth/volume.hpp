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

#ifndef DIRSYNTH_VOLUME_HPP
#define DIRSYNTH_VOLUME_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "dirsynth/types.hpp"

namespace dirsynth {

// A 3D scalar grid. Voxel (x,y,z) lives at data[flat_index(dims,x,y,z)];
// spacing is mm per voxel, origin is the mm position of voxel (0,0,0).
// The optional mask marks foreground voxels (nonzero = foreground).
struct Volume {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<double> data;
    std::optional<std::vector<std::uint8_t>> mask;

    std::size_t voxel_count() const { return dirsynth::voxel_count(dims); }
    std::size_t index(int x, int y, int z) const { return flat_index(dims, x, y, z); }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }
    double& at(int x, int y, int z) { return data[index(x, y, z)]; }

    static Volume zeros(const Index3& dims, const Vec3& spacing = {1.0, 1.0, 1.0});
};

// Integer segmentation labels on a Volume-compatible grid. Label 0 is
// background. label_set holds the sorted distinct values present in labels.
struct LabelMap {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<std::int32_t> labels;
    std::vector<std::int32_t> label_set;

    std::size_t voxel_count() const { return dirsynth::voxel_count(dims); }
    std::size_t index(int x, int y, int z) const { return flat_index(dims, x, y, z); }
    std::int32_t at(int x, int y, int z) const { return labels[index(x, y, z)]; }

    void recompute_label_set();
};

struct PyramidLevel {
    Volume volume;
    std::optional<LabelMap> labels;
    int factor = 1;
};

// Multi-resolution stack, coarsest level first, finest (factor 1) last.
// Every level is downsampled from the original, so level dims are
// ceil(original/factor) and level spacing is original spacing * factor.
struct Pyramid {
    std::vector<PyramidLevel> levels;
};

// Throw std::invalid_argument when structural invariants are broken.
void validate(const Volume& v);
void validate(const LabelMap& l);

// Block-mean downsampling. Edge blocks average over the voxels that exist;
// masks are reduced by majority vote with ties resolved to foreground.
Volume downsample(const Volume& v, int factor);

// Modal label per block, ties broken by the smallest label value.
LabelMap downsample_labels(const LabelMap& l, int factor);

// schedule runs coarse to fine, non-increasing, and must end with factor 1.
Pyramid build_pyramid(const Volume& v, const LabelMap* labels, const std::vector<int>& schedule);

} // namespace dirsynth

#endif
