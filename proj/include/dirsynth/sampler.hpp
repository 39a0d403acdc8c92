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

#ifndef DIRSYNTH_SAMPLER_HPP
#define DIRSYNTH_SAMPLER_HPP

#include <utility>
#include <vector>

#include "dirsynth/transform.hpp"
#include "dirsynth/types.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

// Derivative of the warped intensity at each voxel with respect to that
// voxel's displacement vector. This is what makes the warp differentiable:
// dissimilarity gradients chain through it.
struct WarpGradient {
    Index3 dims{0, 0, 0};
    std::vector<Vec3> vectors;
};

// output(x) = trilinear sample of moving at x + u(x), coordinates clamped to
// the grid. A mask on the moving volume is warped as 0/1 intensities and
// re-thresholded at 0.5 (ties to foreground).
Volume warp(const Volume& moving, const DisplacementField& u);

// Nearest-neighbor label resampling at x + u(x), clamped. The output
// label_set is recomputed and is a subset of the input's.
LabelMap warp_labels(const LabelMap& moving, const DisplacementField& u);

// warp() plus its analytic derivative. The Volume component is bit-identical
// to warp(moving, u); the gradient is the trilinear interpolant's derivative
// with respect to the sample coordinate, zeroed on clamped axes.
std::pair<Volume, WarpGradient> warp_with_gradient(const Volume& moving, const DisplacementField& u);

} // namespace dirsynth

#endif
