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

#include "dirsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dirsynth/errors.hpp"
#include "dirsynth/metrics.hpp"
#include "dirsynth/sampler.hpp"

namespace dirsynth {

void validate(const AtlasSubject& subject){
    if(subject.id.empty()){
        throw std::invalid_argument("atlas subject id must be non-empty");
    }
    validate(subject.primary_contrast);
    for(const auto& [name, volume] : subject.secondary_contrasts){
        if(name.empty()){
            throw std::invalid_argument("atlas contrast names must be non-empty");
        }
        if(!(volume.dims == subject.primary_contrast.dims)){
            throw std::invalid_argument("atlas contrast '" + name + "' does not share the primary dims");
        }
    }
    if(subject.labels && !(subject.labels->dims == subject.primary_contrast.dims)){
        throw std::invalid_argument("atlas labels do not share the primary dims");
    }
}

std::string to_string(FusionMethod method){
    switch(method){
        case FusionMethod::mean: return "mean";
        case FusionMethod::median: return "median";
        case FusionMethod::weighted_mean: return "weighted_mean";
    }
    return "unknown";
}

FusionMethod fusion_method_from_string(const std::string& name){
    if(name == "mean"){ return FusionMethod::mean; }
    if(name == "median"){ return FusionMethod::median; }
    if(name == "weighted_mean"){ return FusionMethod::weighted_mean; }
    throw std::invalid_argument("unknown fusion method: " + name);
}

double ir_signal(const IrSignalParams& params){
    if(!(params.m0 > 0.0) || !(params.t1 > 0.0) || !(params.ti > 0.0) ||
       !std::isfinite(params.m0) || !std::isfinite(params.t1) || !std::isfinite(params.ti)){
        throw std::invalid_argument("ir_signal parameters must be positive and finite");
    }
    return params.m0 * std::fabs(1.0 - 2.0 * std::exp(-params.ti / params.t1));
}

namespace {

constexpr double kT1Low = 1.0;
constexpr double kT1High = 1e5;

double signed_recovery(double ti, double t1){
    return 1.0 - 2.0 * std::exp(-ti / t1);
}

bool forward_consistent(double m0, double t1, double s, double ti){
    const double predicted = m0 * std::fabs(signed_recovery(ti, t1));
    return std::fabs(predicted - s) <= 1e-9 * std::max({1.0e-12, s, m0});
}

} // namespace

IrSignalParams estimate_ir_params(double s1, double ti1, double s2, double ti2){
    if(!(ti1 > 0.0) || !(ti2 > 0.0) || ti1 == ti2){
        throw std::invalid_argument("estimate_ir_params requires two distinct positive TIs");
    }
    if(s1 < 0.0 || s2 < 0.0 || !std::isfinite(s1) || !std::isfinite(s2)){
        throw std::invalid_argument("estimate_ir_params requires non-negative finite signals");
    }

    double sa = s1, ta = ti1, sb = s2, tb = ti2;
    if(ta > tb){
        std::swap(sa, sb);
        std::swap(ta, tb);
    }
    const double ln2 = std::log(2.0);

    // a sample on the null point pins t1 directly
    if(sa == 0.0 || sb == 0.0){
        if(sa == 0.0 && sb == 0.0){
            throw FitError("estimate_ir_params: both samples zero, m0 unidentifiable");
        }
        const double t1 = (sa == 0.0) ? ta / ln2 : tb / ln2;
        const double s = (sa == 0.0) ? sb : sa;
        const double ti = (sa == 0.0) ? tb : ta;
        const double denom = std::fabs(signed_recovery(ti, t1));
        if(denom == 0.0){
            throw FitError("estimate_ir_params: degenerate null-point pair");
        }
        IrSignalParams params{s / denom, t1, ti};
        return params;
    }

    // Candidate longitudinal sign patterns for (shorter TI, longer TI),
    // pre-null first so the shorter-TI sample is preferred negative when
    // more than one pattern could explain the data.
    struct Pattern {
        double sign_a;
        double sign_b;
        double lo;
        double hi;
    };
    const double null_a = ta / ln2;
    const double null_b = tb / ln2;
    const Pattern patterns[3] = {
        {-1.0, +1.0, null_a, null_b},  // null between the samples
        {-1.0, -1.0, null_b, kT1High}, // both pre-null
        {+1.0, +1.0, kT1Low, null_a},  // both post-null
    };

    for(const Pattern& p : patterns){
        double lo = std::max(p.lo, kT1Low);
        double hi = std::min(p.hi, kT1High);
        if(!(lo < hi)){ continue; }
        // keep strictly inside the pattern interval so signs are unambiguous
        const double margin = 1e-9 * (hi - lo);
        lo += margin;
        hi -= margin;

        auto f = [&](double t1){
            return p.sign_a * sa * signed_recovery(tb, t1) - p.sign_b * sb * signed_recovery(ta, t1);
        };
        double flo = f(lo);
        double fhi = f(hi);
        if(flo == 0.0){ fhi = flo; hi = lo; }
        else if(fhi != 0.0 && ((flo > 0.0) == (fhi > 0.0))){
            continue; // no sign change in this pattern's interval
        }

        while(hi - lo > 1e-10){
            const double mid = 0.5 * (lo + hi);
            const double fmid = f(mid);
            if(fmid == 0.0){
                lo = hi = mid;
                break;
            }
            if((fmid > 0.0) == (flo > 0.0)){
                lo = mid;
                flo = fmid;
            }else{
                hi = mid;
            }
        }
        const double t1 = 0.5 * (lo + hi);

        const double ga = signed_recovery(ta, t1);
        const double gb = signed_recovery(tb, t1);
        double m0 = 0.0;
        if(std::fabs(ga) >= std::fabs(gb)){
            m0 = p.sign_a * sa / ga;
        }else{
            m0 = p.sign_b * sb / gb;
        }
        if(!(m0 > 0.0) || !std::isfinite(m0)){
            continue;
        }
        if(forward_consistent(m0, t1, sa, ta) && forward_consistent(m0, t1, sb, tb)){
            return IrSignalParams{m0, t1, ta};
        }
    }
    throw FitError("estimate_ir_params: no consistent solution for t1 in [1, 1e5] ms");
}

Volume transfer(const RegistrationResult& result, const AtlasSubject& atlas,
                const std::string& contrast_name){
    const Volume* source = nullptr;
    if(auto it = atlas.secondary_contrasts.find(contrast_name); it != atlas.secondary_contrasts.end()){
        source = &it->second;
    }else if(contrast_name == "primary"){
        source = &atlas.primary_contrast;
    }else{
        throw std::invalid_argument("atlas '" + atlas.id + "' has no contrast named '" + contrast_name + "'");
    }
    if(!(source->dims == result.displacement.dims)){
        throw std::invalid_argument("transfer: contrast dims do not match the registration grid");
    }
    return warp(*source, result.displacement);
}

FusionResult fuse(std::span<const Volume> warped, FusionMethod method,
                  const std::vector<double>* weights){
    if(warped.empty()){
        throw std::invalid_argument("fuse: empty volume list");
    }
    const Index3 dims = warped.front().dims;
    for(const Volume& v : warped){
        if(!(v.dims == dims)){
            throw std::invalid_argument("fuse: volumes must share geometry");
        }
    }
    const std::size_t n = warped.size();
    const std::size_t voxels = warped.front().voxel_count();

    FusionResult result;
    result.method = method;
    result.synthetic.dims = dims;
    result.synthetic.spacing = warped.front().spacing;
    result.synthetic.origin = warped.front().origin;
    result.synthetic.data.assign(voxels, 0.0);

    std::vector<double> w;
    if(method == FusionMethod::weighted_mean){
        if(!weights || weights->size() != n){
            throw std::invalid_argument("fuse: weighted_mean requires one weight per volume");
        }
        double sum = 0.0;
        for(const double x : *weights){
            if(!(x >= 0.0) || !std::isfinite(x)){
                throw std::invalid_argument("fuse: weights must be non-negative and finite");
            }
            sum += x;
        }
        if(!(sum > 0.0)){
            throw std::invalid_argument("fuse: weights sum to zero");
        }
        w.resize(n);
        for(std::size_t i = 0; i < n; ++i){
            w[i] = (*weights)[i] / sum;
        }
    }else{
        w.assign(n, 1.0 / static_cast<double>(n));
    }
    result.weights = w;

    if(method == FusionMethod::median){
        std::vector<double> values(n);
        const std::size_t rank = (n - 1) / 2; // lower of the two middles for even counts
        for(std::size_t i = 0; i < voxels; ++i){
            for(std::size_t k = 0; k < n; ++k){
                values[k] = warped[k].data[i];
            }
            std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
            result.synthetic.data[i] = values[rank];
        }
    }else{
        // mean is the uniform-weight case of the same accumulation, so the
        // two methods agree bit for bit
        for(std::size_t k = 0; k < n; ++k){
            const double wk = w[k];
            const std::vector<double>& src = warped[k].data;
            for(std::size_t i = 0; i < voxels; ++i){
                result.synthetic.data[i] += wk * src[i];
            }
        }
    }
    return result;
}

std::vector<double> label_similarity_weights(std::span<const LabelMap> warped_labels,
                                             const LabelMap& fixed_labels){
    if(warped_labels.empty()){
        throw std::invalid_argument("label_similarity_weights: empty list");
    }
    std::vector<double> scores;
    scores.reserve(warped_labels.size());
    for(const LabelMap& l : warped_labels){
        if(!(l.dims == fixed_labels.dims)){
            throw std::invalid_argument("label_similarity_weights: geometry mismatch");
        }
        const auto dice = hard_dice(l, fixed_labels);
        double sum = 0.0;
        for(const auto& [label, value] : dice){
            sum += value;
        }
        scores.push_back(dice.empty() ? 0.0 : sum / static_cast<double>(dice.size()));
    }
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if(!(total > 0.0)){
        return std::vector<double>(warped_labels.size(), 1.0 / static_cast<double>(warped_labels.size()));
    }
    for(double& s : scores){
        s /= total;
    }
    return scores;
}

SynthesisPlan plan_synthesis(const AtlasSubject& fixed, std::span<const AtlasSubject> atlases,
                             const RegistrationConfig& config, int workers,
                             const std::string& supervised_contrast){
    if(atlases.empty()){
        throw std::invalid_argument("plan_synthesis: no atlases given");
    }
    validate(fixed);
    for(const AtlasSubject& atlas : atlases){
        validate(atlas);
    }
    if(config.mode == RegistrationMode::supervised && supervised_contrast.empty()){
        throw std::invalid_argument("plan_synthesis: supervised mode needs a supervised contrast name");
    }

    SynthesisPlan plan;
    plan.order.resize(atlases.size());
    std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
    std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::size_t a, std::size_t b){
        return atlases[a].id < atlases[b].id;
    });

    auto secondary_of = [&](const AtlasSubject& subject) -> const Volume* {
        if(supervised_contrast.empty()){
            return nullptr;
        }
        const auto it = subject.secondary_contrasts.find(supervised_contrast);
        if(it == subject.secondary_contrasts.end()){
            throw std::invalid_argument("subject '" + subject.id + "' lacks the supervised contrast '" +
                                        supervised_contrast + "'");
        }
        return &it->second;
    };

    RegistrationSubject fixed_subject;
    fixed_subject.image = &fixed.primary_contrast;
    fixed_subject.labels = fixed.labels ? &*fixed.labels : nullptr;
    fixed_subject.secondary = (config.mode == RegistrationMode::supervised) ? secondary_of(fixed) : nullptr;

    std::vector<RegistrationSubject> movers;
    movers.reserve(atlases.size());
    for(const std::size_t idx : plan.order){
        RegistrationSubject mover;
        mover.image = &atlases[idx].primary_contrast;
        mover.labels = atlases[idx].labels ? &*atlases[idx].labels : nullptr;
        mover.secondary = (config.mode == RegistrationMode::supervised) ? secondary_of(atlases[idx]) : nullptr;
        movers.push_back(mover);
    }

    plan.registrations = register_batch(fixed_subject, movers, config, workers);
    return plan;
}

FusionResult synthesize_contrast(const SynthesisPlan& plan, const AtlasSubject& fixed,
                                 std::span<const AtlasSubject> atlases,
                                 const std::string& contrast_name, FusionMethod method){
    if(plan.order.size() != plan.registrations.size() || plan.order.empty()){
        throw std::invalid_argument("synthesize_contrast: invalid plan");
    }

    std::vector<Volume> warped;
    warped.reserve(plan.order.size());
    for(std::size_t k = 0; k < plan.order.size(); ++k){
        warped.push_back(transfer(plan.registrations[k], atlases[plan.order[k]], contrast_name));
    }

    std::vector<double> weights;
    const std::vector<double>* weights_ptr = nullptr;
    if(method == FusionMethod::weighted_mean){
        if(!fixed.labels){
            throw std::invalid_argument("weighted_mean fusion requires fixed labels");
        }
        std::vector<LabelMap> warped_labels;
        warped_labels.reserve(plan.order.size());
        for(std::size_t k = 0; k < plan.order.size(); ++k){
            const AtlasSubject& atlas = atlases[plan.order[k]];
            if(!atlas.labels){
                throw std::invalid_argument("weighted_mean fusion requires labels on atlas '" + atlas.id + "'");
            }
            warped_labels.push_back(warp_labels(*atlas.labels, plan.registrations[k].displacement));
        }
        weights = label_similarity_weights(warped_labels, *fixed.labels);
        weights_ptr = &weights;
    }

    FusionResult result = fuse(warped, method, weights_ptr);
    result.atlas_ids.reserve(plan.order.size());
    for(const std::size_t idx : plan.order){
        result.atlas_ids.push_back(atlases[idx].id);
    }
    return result;
}

FusionResult synthesize(const AtlasSubject& fixed, std::span<const AtlasSubject> atlases,
                        const std::string& contrast_name, FusionMethod method,
                        const RegistrationConfig& config, int workers){
    const SynthesisPlan plan = plan_synthesis(fixed, atlases, config, workers);
    return synthesize_contrast(plan, fixed, atlases, contrast_name, method);
}

} // namespace dirsynth
