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

#include "dirsynth/objective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dirsynth/errors.hpp"
#include "dirsynth/sampler.hpp"
#include "interp_detail.hpp"

namespace dirsynth {

std::string to_string(LossKind kind){
    switch(kind){
        case LossKind::mse: return "mse";
        case LossKind::ncc: return "ncc";
        case LossKind::dice: return "dice";
        case LossKind::regularizer: return "regularizer";
    }
    return "unknown";
}

void validate(const LossConfig& config){
    bool has_dissimilarity = false;
    for(const LossTerm& term : config.terms){
        if(!std::isfinite(term.weight) || term.weight < 0.0){
            throw std::invalid_argument("loss weights must be finite and non-negative");
        }
        if(term.kind != LossKind::regularizer && term.weight > 0.0){
            has_dissimilarity = true;
        }
    }
    if(!has_dissimilarity){
        throw std::invalid_argument("loss config needs at least one dissimilarity term with positive weight");
    }
    if(!(config.dice_smooth > 0.0)){
        throw std::invalid_argument("dice_smooth must be positive");
    }
}

LossConfig default_unsupervised_loss(){
    LossConfig c;
    c.terms = {
        {LossKind::mse, 1.0, LossTarget::primary_contrast},
        {LossKind::dice, 1.0, LossTarget::labels},
        {LossKind::regularizer, 1.0, LossTarget::velocity},
    };
    return c;
}

LossConfig default_supervised_loss(){
    LossConfig c = default_unsupervised_loss();
    c.terms.push_back({LossKind::mse, 1.0, LossTarget::secondary_contrast});
    return c;
}

namespace {

void check_same_dims(const Volume& a, const Volume& b, const char* what){
    if(!(a.dims == b.dims)){
        throw std::invalid_argument(std::string(what) + ": volume dims mismatch");
    }
}

std::size_t masked_count(std::size_t n, const std::vector<std::uint8_t>* mask, const char* what){
    if(!mask){
        return n;
    }
    if(mask->size() != n){
        throw std::invalid_argument(std::string(what) + ": mask length mismatch");
    }
    std::size_t count = 0;
    for(const std::uint8_t m : *mask){
        count += (m != 0) ? 1 : 0;
    }
    if(count == 0){
        throw std::invalid_argument(std::string(what) + ": mask is empty");
    }
    return count;
}

} // namespace

double mse(const Volume& a, const Volume& b, const std::vector<std::uint8_t>* mask){
    check_same_dims(a, b, "mse");
    const std::size_t n = masked_count(a.data.size(), mask, "mse");
    double sum = 0.0;
    for(std::size_t i = 0; i < a.data.size(); ++i){
        if(mask && (*mask)[i] == 0){ continue; }
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(n);
}

double ncc(const Volume& a, const Volume& b, const std::vector<std::uint8_t>* mask){
    check_same_dims(a, b, "ncc");
    const std::size_t n = masked_count(a.data.size(), mask, "ncc");
    if(n < 2){
        throw std::invalid_argument("ncc needs at least 2 masked voxels");
    }

    double mean_a = 0.0, mean_b = 0.0;
    for(std::size_t i = 0; i < a.data.size(); ++i){
        if(mask && (*mask)[i] == 0){ continue; }
        mean_a += a.data[i];
        mean_b += b.data[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double s_ab = 0.0, s_aa = 0.0, s_bb = 0.0;
    for(std::size_t i = 0; i < a.data.size(); ++i){
        if(mask && (*mask)[i] == 0){ continue; }
        const double da = a.data[i] - mean_a;
        const double db = b.data[i] - mean_b;
        s_ab += da * db;
        s_aa += da * da;
        s_bb += db * db;
    }
    if(s_aa == 0.0 || s_bb == 0.0){
        throw DegenerateInputError("ncc: input constant over the mask, correlation undefined");
    }
    return 1.0 - s_ab / std::sqrt(s_aa * s_bb);
}

double soft_dice_loss(const std::vector<std::pair<std::int32_t, Volume>>& warped_soft_masks,
                      const LabelMap& fixed_labels, double smooth){
    if(!(smooth > 0.0)){
        throw std::invalid_argument("soft_dice_loss: smooth must be positive");
    }
    const std::size_t n = fixed_labels.labels.size();

    std::vector<std::int32_t> union_labels;
    for(const auto& [label, vol] : warped_soft_masks){
        if(vol.data.size() != n){
            throw std::invalid_argument("soft_dice_loss: soft mask dims mismatch");
        }
        if(label != 0){
            union_labels.push_back(label);
        }
    }
    for(const std::int32_t label : fixed_labels.label_set){
        if(label != 0){
            union_labels.push_back(label);
        }
    }
    std::sort(union_labels.begin(), union_labels.end());
    union_labels.erase(std::unique(union_labels.begin(), union_labels.end()), union_labels.end());
    if(union_labels.empty()){
        throw std::invalid_argument("soft_dice_loss: no non-background labels");
    }

    double dice_sum = 0.0;
    for(const std::int32_t label : union_labels){
        const Volume* soft = nullptr;
        for(const auto& [l, vol] : warped_soft_masks){
            if(l == label){ soft = &vol; break; }
        }
        double overlap = 0.0, p_sum = 0.0, q_sum = 0.0;
        for(std::size_t i = 0; i < n; ++i){
            const double q = (fixed_labels.labels[i] == label) ? 1.0 : 0.0;
            const double p = soft ? soft->data[i] : 0.0;
            overlap += p * q;
            p_sum += p;
            q_sum += q;
        }
        dice_sum += (2.0 * overlap + smooth) / (p_sum + q_sum + smooth);
    }
    return 1.0 - dice_sum / static_cast<double>(union_labels.size());
}

double smoothness(const VelocityField& v){
    if(v.dims.x < 2 && v.dims.y < 2 && v.dims.z < 2){
        throw std::invalid_argument("smoothness requires at least 2 voxels along some axis");
    }
    const Index3 d = v.dims;
    const std::size_t strides[3] = {1, static_cast<std::size_t>(d.x),
                                    static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y)};
    const int n[3] = {d.x, d.y, d.z};

    double sum = 0.0;
    std::size_t idx = 0;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x, ++idx){
                const int pos[3] = {x, y, z};
                for(int a = 0; a < 3; ++a){
                    if(pos[a] + 1 < n[a]){
                        const Vec3 diff = v.vectors[idx + strides[a]] - v.vectors[idx];
                        sum += diff.x * diff.x + diff.y * diff.y + diff.z * diff.z;
                    }
                }
            }
        }
    }
    return sum / (3.0 * static_cast<double>(v.voxel_count()));
}

namespace {

// value + gradient of the MSE dissimilarity through the sampler
double mse_term(const Volume& moving, const Volume& fixed, const DisplacementField& u,
                double weight, std::vector<Vec3>& gradient){
    auto [warped, wgrad] = warp_with_gradient(moving, u);
    check_same_dims(warped, fixed, "evaluate/mse");
    const std::size_t n = warped.data.size();
    double sum = 0.0;
    const double scale = weight * 2.0 / static_cast<double>(n);
    for(std::size_t i = 0; i < n; ++i){
        const double diff = warped.data[i] - fixed.data[i];
        sum += diff * diff;
        gradient[i] += (scale * diff) * wgrad.vectors[i];
    }
    return sum / static_cast<double>(n);
}

double ncc_term(const Volume& moving, const Volume& fixed, const DisplacementField& u,
                double weight, std::vector<Vec3>& gradient){
    auto [warped, wgrad] = warp_with_gradient(moving, u);
    check_same_dims(warped, fixed, "evaluate/ncc");
    const std::size_t n = warped.data.size();

    double mean_a = 0.0, mean_b = 0.0;
    for(std::size_t i = 0; i < n; ++i){
        mean_a += warped.data[i];
        mean_b += fixed.data[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double s_ab = 0.0, s_aa = 0.0, s_bb = 0.0;
    for(std::size_t i = 0; i < n; ++i){
        const double da = warped.data[i] - mean_a;
        const double db = fixed.data[i] - mean_b;
        s_ab += da * db;
        s_aa += da * da;
        s_bb += db * db;
    }
    if(s_aa == 0.0 || s_bb == 0.0){
        throw DegenerateInputError("evaluate/ncc: input constant, correlation undefined");
    }

    const double denom = std::sqrt(s_aa * s_bb);
    const double r = s_ab / denom;
    // d(1-r)/d warped_i = -(b~_i - (S_ab/S_aa) a~_i) / sqrt(S_aa S_bb)
    const double ratio = s_ab / s_aa;
    for(std::size_t i = 0; i < n; ++i){
        const double da = warped.data[i] - mean_a;
        const double db = fixed.data[i] - mean_b;
        const double dloss = -(db - ratio * da) / denom;
        gradient[i] += (weight * dloss) * wgrad.vectors[i];
    }
    return 1.0 - r;
}

// Soft Dice over trilinearly warped one-hot label encodings, computed from
// cell-corner weights so cost is independent of the label count. Numerically
// identical to warping each one-hot channel and calling soft_dice_loss.
double dice_term(const LabelMap& moving, const LabelMap& fixed, const DisplacementField& u,
                 double smooth, double weight, std::vector<Vec3>& gradient){
    if(!(moving.dims == fixed.dims) || !(moving.dims == u.dims)){
        throw std::invalid_argument("evaluate/dice: label/displacement dims mismatch");
    }

    std::vector<std::int32_t> union_labels;
    union_labels.reserve(moving.label_set.size() + fixed.label_set.size());
    for(const std::int32_t l : moving.label_set){ if(l != 0){ union_labels.push_back(l); } }
    for(const std::int32_t l : fixed.label_set){ if(l != 0){ union_labels.push_back(l); } }
    std::sort(union_labels.begin(), union_labels.end());
    union_labels.erase(std::unique(union_labels.begin(), union_labels.end()), union_labels.end());
    if(union_labels.empty()){
        throw std::invalid_argument("evaluate/dice: no non-background labels");
    }

    std::map<std::int32_t, std::size_t> label_index;
    for(std::size_t i = 0; i < union_labels.size(); ++i){
        label_index[union_labels[i]] = i;
    }
    const std::size_t n_labels = union_labels.size();
    std::vector<double> overlap(n_labels, 0.0), p_sum(n_labels, 0.0), q_sum(n_labels, 0.0);

    for(std::size_t i = 0; i < fixed.labels.size(); ++i){
        const std::int32_t l = fixed.labels[i];
        if(l != 0){
            q_sum[label_index.at(l)] += 1.0;
        }
    }

    const Index3 d = u.dims;
    detail::TrilinearTaps taps;
    detail::CornerTaps corners;

    // pass 1: accumulate per-label soft sums
    std::size_t idx = 0;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x, ++idx){
                const Vec3& disp = u.vectors[idx];
                const Vec3 coord{static_cast<double>(x) + disp.x,
                                 static_cast<double>(y) + disp.y,
                                 static_cast<double>(z) + disp.z};
                detail::make_taps(d, coord, taps);
                detail::make_corner_taps(d, taps, corners);
                const std::int32_t fixed_label = fixed.labels[idx];
                for(int k = 0; k < 8; ++k){
                    const std::int32_t l = moving.labels[corners.index[k]];
                    if(l == 0){ continue; }
                    const std::size_t li = label_index.at(l);
                    p_sum[li] += corners.weight[k];
                    if(l == fixed_label){
                        overlap[li] += corners.weight[k];
                    }
                }
            }
        }
    }

    double dice_sum = 0.0;
    std::vector<double> coeff_match(n_labels), coeff_other(n_labels);
    const double inv_labels = 1.0 / static_cast<double>(n_labels);
    for(std::size_t li = 0; li < n_labels; ++li){
        const double num = 2.0 * overlap[li] + smooth;
        const double den = p_sum[li] + q_sum[li] + smooth;
        dice_sum += num / den;
        // d loss / d p_l(x): fixed label matching vs not
        coeff_match[li] = -inv_labels * (2.0 * den - num) / (den * den);
        coeff_other[li] = inv_labels * num / (den * den);
    }

    // pass 2: chain through the corner-weight gradients
    idx = 0;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x, ++idx){
                const Vec3& disp = u.vectors[idx];
                const Vec3 coord{static_cast<double>(x) + disp.x,
                                 static_cast<double>(y) + disp.y,
                                 static_cast<double>(z) + disp.z};
                detail::make_taps(d, coord, taps);
                detail::make_corner_taps(d, taps, corners);
                const std::int32_t fixed_label = fixed.labels[idx];
                Vec3 g{};
                for(int k = 0; k < 8; ++k){
                    const std::int32_t l = moving.labels[corners.index[k]];
                    if(l == 0){ continue; }
                    const std::size_t li = label_index.at(l);
                    const double c = (l == fixed_label) ? coeff_match[li] : coeff_other[li];
                    g += c * corners.weight_gradient[k];
                }
                gradient[idx] += weight * g;
            }
        }
    }

    return 1.0 - dice_sum * inv_labels;
}

double regularizer_term(const VelocityField& v, double weight, std::vector<Vec3>& gradient){
    const double value = smoothness(v);
    const Index3 d = v.dims;
    const std::size_t strides[3] = {1, static_cast<std::size_t>(d.x),
                                    static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y)};
    const int n[3] = {d.x, d.y, d.z};
    const double scale = weight * 2.0 / (3.0 * static_cast<double>(v.voxel_count()));

    std::size_t idx = 0;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x, ++idx){
                const int pos[3] = {x, y, z};
                Vec3 g{};
                for(int a = 0; a < 3; ++a){
                    if(pos[a] > 0){
                        g += v.vectors[idx] - v.vectors[idx - strides[a]];
                    }
                    if(pos[a] + 1 < n[a]){
                        g -= v.vectors[idx + strides[a]] - v.vectors[idx];
                    }
                }
                gradient[idx] += scale * g;
            }
        }
    }
    return value;
}

} // namespace

LossReport evaluate(const LossConfig& config, const EvalState& state){
    validate(config);
    if(!state.displacement){
        throw std::invalid_argument("evaluate: state.displacement is required");
    }

    LossReport report;
    report.term_values.assign(config.terms.size(), 0.0);
    report.gradient.assign(state.displacement->voxel_count(), Vec3{});

    for(std::size_t t = 0; t < config.terms.size(); ++t){
        const LossTerm& term = config.terms[t];
        if(term.weight == 0.0){
            continue; // skipped outright; cannot perturb other terms
        }
        double value = 0.0;
        switch(term.kind){
            case LossKind::mse:
            case LossKind::ncc: {
                const Volume* moving = nullptr;
                const Volume* fixed = nullptr;
                if(term.target == LossTarget::primary_contrast){
                    moving = state.moving_primary;
                    fixed = state.fixed_primary;
                }else if(term.target == LossTarget::secondary_contrast){
                    moving = state.moving_secondary;
                    fixed = state.fixed_secondary;
                }else{
                    throw std::invalid_argument("evaluate: intensity loss requires a contrast target");
                }
                if(!moving || !fixed){
                    throw std::invalid_argument("evaluate: missing " + to_string(term.kind) + " target volumes");
                }
                value = (term.kind == LossKind::mse)
                            ? mse_term(*moving, *fixed, *state.displacement, term.weight, report.gradient)
                            : ncc_term(*moving, *fixed, *state.displacement, term.weight, report.gradient);
                break;
            }
            case LossKind::dice: {
                if(term.target != LossTarget::labels){
                    throw std::invalid_argument("evaluate: dice requires the labels target");
                }
                if(!state.moving_labels || !state.fixed_labels){
                    throw std::invalid_argument("evaluate: missing label maps for dice term");
                }
                value = dice_term(*state.moving_labels, *state.fixed_labels, *state.displacement,
                                  config.dice_smooth, term.weight, report.gradient);
                break;
            }
            case LossKind::regularizer: {
                if(term.target != LossTarget::velocity){
                    throw std::invalid_argument("evaluate: regularizer requires the velocity target");
                }
                if(!state.velocity){
                    throw std::invalid_argument("evaluate: missing velocity for regularizer term");
                }
                if(!(state.velocity->dims == state.displacement->dims)){
                    throw std::invalid_argument("evaluate: velocity/displacement dims mismatch");
                }
                value = regularizer_term(*state.velocity, term.weight, report.gradient);
                break;
            }
        }
        report.term_values[t] = value;
        report.total += term.weight * value;
    }
    return report;
}

} // namespace dirsynth
