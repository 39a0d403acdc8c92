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

#ifndef DIRSYNTH_SYNTHESIS_HPP
#define DIRSYNTH_SYNTHESIS_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirsynth/registration.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

// One subject: the primary contrast drives registration, the named secondary
// contrasts ride along under the same transform.
struct AtlasSubject {
    std::string id;
    Volume primary_contrast;
    std::map<std::string, Volume> secondary_contrasts;
    std::optional<LabelMap> labels;
};

void validate(const AtlasSubject& subject);

enum class FusionMethod { mean, median, weighted_mean };

std::string to_string(FusionMethod method);
FusionMethod fusion_method_from_string(const std::string& name);

struct FusionResult {
    Volume synthetic;
    FusionMethod method = FusionMethod::mean;
    std::vector<double> weights;      // non-negative, sum 1
    std::vector<std::string> atlas_ids;
};

// Inversion-recovery signal model: S = m0 * |1 - 2*exp(-ti/t1)|.
struct IrSignalParams {
    double m0 = 1.0;   // equilibrium signal
    double t1 = 1000.0; // ms
    double ti = 1400.0; // ms
};

double ir_signal(const IrSignalParams& params);

// Recover (m0, t1) from two magnitude samples of the model at distinct TIs.
// When the sign of the longitudinal magnetization is ambiguous, the
// shorter-TI sample is assumed pre-null. Throws FitError when no consistent
// t1 exists in [1, 1e5] ms.
IrSignalParams estimate_ir_params(double s1, double ti1, double s2, double ti2);

// Apply an estimated transformation to another contrast of the same moving
// subject; no re-optimization.
Volume transfer(const RegistrationResult& result, const AtlasSubject& atlas,
                const std::string& contrast_name);

// Voxel-wise mean / median (lower of the two middles for even counts) /
// normalized weighted mean. Order of `warped` is the fusion order.
FusionResult fuse(std::span<const Volume> warped, FusionMethod method,
                  const std::vector<double>* weights = nullptr);

// Weight per atlas proportional to the mean label-wise hard Dice between the
// warped atlas labels and the fixed labels; uniform fallback when every
// similarity is zero.
std::vector<double> label_similarity_weights(std::span<const LabelMap> warped_labels,
                                             const LabelMap& fixed_labels);

// The two-stage path used for multi-contrast synthesis: register every atlas
// once, then transfer + fuse any number of contrast names against the same
// results. Atlases are fused in ascending-id order so the synthetic volume
// does not depend on the input permutation.
struct SynthesisPlan {
    std::vector<std::size_t> order;               // indices into the atlas span, sorted by id
    std::vector<RegistrationResult> registrations; // parallel to order
};

// supervised_contrast names the contrast feeding the secondary loss term in
// supervised mode; unused otherwise.
SynthesisPlan plan_synthesis(const AtlasSubject& fixed, std::span<const AtlasSubject> atlases,
                             const RegistrationConfig& config, int workers = 1,
                             const std::string& supervised_contrast = "");

FusionResult synthesize_contrast(const SynthesisPlan& plan, const AtlasSubject& fixed,
                                 std::span<const AtlasSubject> atlases,
                                 const std::string& contrast_name, FusionMethod method);

// Single-contrast convenience wrapper over the two-stage path.
FusionResult synthesize(const AtlasSubject& fixed, std::span<const AtlasSubject> atlases,
                        const std::string& contrast_name, FusionMethod method,
                        const RegistrationConfig& config, int workers = 1);

} // namespace dirsynth

#endif
