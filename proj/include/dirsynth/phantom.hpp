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

#ifndef DIRSYNTH_PHANTOM_HPP
#define DIRSYNTH_PHANTOM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dirsynth/synthesis.hpp"
#include "dirsynth/transform.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

// Deterministic ellipsoid-based multi-contrast head phantom. Contrast values
// come from the inversion-recovery signal model per tissue; inter-subject
// variation comes from seeded smooth random deformations with known ground
// truth.

struct TissueSpec {
    std::string name;
    std::int32_t label = 0;
    double m0 = 1.0;
    double t1_ms = 1000.0;
};

struct StructureSpec {
    int count = 8;                 // extra seeded ellipsoids inside the brain
    double min_radius_vox = 5.0;
    double max_radius_vox = 9.0;
};

struct DeformationSpec {
    double smoothness_vox = 8.0;   // Gaussian sigma of the random velocity
    double max_magnitude_vox = 5.0;
};

struct PhantomSpec {
    Index3 dims{64, 64, 64};
    Vec3 spacing{1.0, 1.0, 1.0};   // the CLI default: isotropic 1 mm
    std::uint64_t seed = 0;
    std::vector<TissueSpec> tissues; // defaults applied when empty
    StructureSpec structures;
    DeformationSpec deformation;
    double noise_sigma = 0.02;     // fraction of the noiseless intensity range
    std::vector<double> inversion_times_ms{400.0, 1400.0};
};

// dims >= 32 per axis, max deformation magnitude <= min(dims)/8, distinct
// tissue t1 values.
void validate(const PhantomSpec& spec);

// CSF-like, gray-like, white-like, thalamus-like (labels 1..4).
std::vector<TissueSpec> default_tissues();

// "wmn" for TI 400, "csfn" for TI 1400, "ti<value>" otherwise.
std::string contrast_name_for_ti(double ti_ms);

struct PhantomSubject {
    LabelMap tissue_map;
    std::map<std::string, Volume> contrasts;
    std::optional<DisplacementField> true_displacement;
    std::vector<std::uint8_t> mask;
};

// Deterministic under spec.seed. Throws GenerationError when the requested
// structures cannot be placed after bounded retries.
PhantomSubject generate(const PhantomSpec& spec);

// Warp every channel of a subject with a seeded smooth random deformation
// (Gaussian-smoothed white noise scaled to the requested magnitude, then
// exponentiated). The resulting true_displacement composes with any prior.
PhantomSubject deform_subject(const PhantomSubject& subject, const DeformationSpec& deformation,
                              std::uint64_t seed);

// n subjects with shared base anatomy and distinct deformations:
// subject i = deform_subject(generate(spec), spec.deformation, spec.seed + i).
std::vector<PhantomSubject> generate_cohort(const PhantomSpec& spec, int n);

// Adapter for the synthesis layer: the CSFn-role contrast becomes the primary
// and every contrast stays addressable by name.
AtlasSubject to_atlas_subject(const PhantomSubject& subject, const std::string& id,
                              const std::string& primary_contrast = "csfn");

} // namespace dirsynth

#endif
