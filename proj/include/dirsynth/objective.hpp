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

#ifndef DIRSYNTH_OBJECTIVE_HPP
#define DIRSYNTH_OBJECTIVE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dirsynth/transform.hpp"
#include "dirsynth/types.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

enum class LossKind { mse, ncc, dice, regularizer };
enum class LossTarget { primary_contrast, secondary_contrast, labels, velocity };

std::string to_string(LossKind kind);

struct LossTerm {
    LossKind kind = LossKind::mse;
    double weight = 1.0;
    LossTarget target = LossTarget::primary_contrast;
};

struct LossConfig {
    std::vector<LossTerm> terms;
    double dice_smooth = 1e-5;
};

// At least one dissimilarity term with positive weight; finite non-negative
// weights; dice_smooth > 0.
void validate(const LossConfig& config);

// mse(primary) + dice(labels) + regularizer(velocity), all weight 1.
// Supervised registration appends mse(secondary_contrast) at weight 1.
LossConfig default_unsupervised_loss();
LossConfig default_supervised_loss();

struct LossReport {
    std::vector<double> term_values; // parallel to config.terms; 0.0 for zero-weight terms
    double total = 0.0;
    std::vector<Vec3> gradient;      // displacement-shaped, see evaluate()
};

// Mean squared difference over masked voxels (all voxels when mask is null).
double mse(const Volume& a, const Volume& b, const std::vector<std::uint8_t>* mask = nullptr);

// 1 - Pearson correlation over masked voxels, range [0, 2]. Throws
// DegenerateInputError when either input is constant over the mask.
double ncc(const Volume& a, const Volume& b, const std::vector<std::uint8_t>* mask = nullptr);

// Soft Dice loss over explicit per-label soft masks (one warped one-hot
// channel per non-background label) against hard fixed labels:
//   1 - mean over labels of (2*sum(p*q) + smooth) / (sum(p) + sum(q) + smooth)
// evaluated over the union of non-background labels on either side; labels
// without a provided soft mask contribute p = 0.
double soft_dice_loss(const std::vector<std::pair<std::int32_t, Volume>>& warped_soft_masks,
                      const LabelMap& fixed_labels, double smooth);

// Mean over voxels and components of squared forward-difference gradients.
double smoothness(const VelocityField& v);

// Everything one energy evaluation needs. Dissimilarity terms warp the
// moving side internally through the differentiable sampler; only the
// targets referenced by positively weighted terms must be present.
struct EvalState {
    const VelocityField* velocity = nullptr;       // regularizer target
    const DisplacementField* displacement = nullptr;
    const Volume* fixed_primary = nullptr;
    const Volume* moving_primary = nullptr;
    const Volume* fixed_secondary = nullptr;
    const Volume* moving_secondary = nullptr;
    const LabelMap* fixed_labels = nullptr;
    const LabelMap* moving_labels = nullptr;
};

// Weighted total and its gradient. Dissimilarity gradients chain through the
// sampler's WarpGradient and are taken with respect to the displacement; the
// regularizer gradient is taken with respect to the velocity. Both are
// accumulated into the one displacement-shaped array, matching the
// small-deformation optimizer update. Zero-weight terms are skipped entirely
// so they cannot perturb the arithmetic of the remaining terms.
LossReport evaluate(const LossConfig& config, const EvalState& state);

} // namespace dirsynth

#endif
