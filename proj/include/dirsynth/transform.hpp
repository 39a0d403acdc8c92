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

#ifndef DIRSYNTH_TRANSFORM_HPP
#define DIRSYNTH_TRANSFORM_HPP

#include <vector>

#include "dirsynth/types.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

// Stationary velocity field, in voxel units per unit flow time.
struct VelocityField {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    std::vector<Vec3> vectors;

    std::size_t voxel_count() const { return dirsynth::voxel_count(dims); }
    static VelocityField zeros(const Index3& dims, const Vec3& spacing = {1.0, 1.0, 1.0});
};

enum class FieldProvenance { direct, exponential };

// Dense displacement field in voxel units: the mapped position of voxel x is
// x + vectors[x]. Fields produced by exponentiate() carry the exponential
// provenance tag together with the step count used.
struct DisplacementField {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    std::vector<Vec3> vectors;
    FieldProvenance provenance = FieldProvenance::direct;
    int exp_steps = 0;

    std::size_t voxel_count() const { return dirsynth::voxel_count(dims); }
    static DisplacementField zeros(const Index3& dims, const Vec3& spacing = {1.0, 1.0, 1.0});
};

// Largest Euclidean vector norm over the field; 0 for empty fields.
double max_vector_norm(const VelocityField& v);
double max_vector_norm(const DisplacementField& u);

// Smallest step count satisfying the scaling-and-squaring stability guard
// 2^-steps * max|v| < 0.5 voxel.
int required_exp_steps(const VelocityField& v);

// Scaling and squaring: halve the field `steps` times, then self-compose
// `steps` times. Throws std::invalid_argument when the stability guard is
// violated, naming the required step count.
DisplacementField exponentiate(const VelocityField& v, int steps);

// result(x) = inner(x) + outer(x + inner(x)), outer sampled trilinearly with
// edge clamping. Applying the result warps like applying inner then outer.
DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner);

// Per-voxel determinant of the Jacobian of (identity + u), central
// differences inside and one-sided at the boundary, in voxel coordinates.
Volume jacobian_determinant(const DisplacementField& u);

// Minimum over strictly interior voxels; requires dims >= 3 per axis.
double min_interior_value(const Volume& v);

} // namespace dirsynth

#endif
