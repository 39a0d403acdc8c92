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

#include "dirsynth/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "dirsynth/errors.hpp"
#include "dirsynth/sampler.hpp"
#include "gaussian_detail.hpp"

namespace dirsynth {

std::vector<TissueSpec> default_tissues(){
    // Plausible relaxation values for a synthetic head; not measurements.
    return {
        {"csf_like", 1, 1.00, 4000.0},
        {"gray_like", 2, 0.90, 1200.0},
        {"white_like", 3, 0.85, 800.0},
        {"thalamus_like", 4, 0.88, 1000.0},
    };
}

void validate(const PhantomSpec& spec){
    if(spec.dims.x < 32 || spec.dims.y < 32 || spec.dims.z < 32){
        throw std::invalid_argument("phantom dims must be >= 32 per axis");
    }
    if(!(spec.spacing.x > 0.0) || !(spec.spacing.y > 0.0) || !(spec.spacing.z > 0.0)){
        throw std::invalid_argument("phantom spacing must be positive");
    }
    if(spec.deformation.max_magnitude_vox > static_cast<double>(spec.dims.min_component()) / 8.0){
        throw std::invalid_argument("deformation magnitude must be <= min(dims)/8 voxels");
    }
    if(spec.deformation.max_magnitude_vox < 0.0 || !(spec.deformation.smoothness_vox > 0.0)){
        throw std::invalid_argument("invalid deformation spec");
    }
    if(spec.noise_sigma < 0.0){
        throw std::invalid_argument("noise_sigma must be non-negative");
    }
    if(spec.structures.count < 0 || spec.structures.min_radius_vox <= 0.0 ||
       spec.structures.max_radius_vox < spec.structures.min_radius_vox){
        throw std::invalid_argument("invalid structure spec");
    }
    if(spec.inversion_times_ms.empty()){
        throw std::invalid_argument("at least one inversion time is required");
    }
    const std::vector<TissueSpec> tissues = spec.tissues.empty() ? default_tissues() : spec.tissues;
    std::set<double> t1s;
    std::set<std::int32_t> labels;
    for(const TissueSpec& t : tissues){
        if(t.label <= 0){
            throw std::invalid_argument("tissue labels must be positive (0 is background)");
        }
        if(!(t.m0 > 0.0) || !(t.t1_ms > 0.0)){
            throw std::invalid_argument("tissue m0 and t1 must be positive");
        }
        t1s.insert(t.t1_ms);
        labels.insert(t.label);
    }
    if(t1s.size() != tissues.size()){
        throw std::invalid_argument("tissue t1 values must be distinct");
    }
    if(labels.size() != tissues.size()){
        throw std::invalid_argument("tissue labels must be distinct");
    }
}

std::string contrast_name_for_ti(double ti_ms){
    if(ti_ms == 400.0){ return "wmn"; }
    if(ti_ms == 1400.0){ return "csfn"; }
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "ti%g", ti_ms);
    return buffer;
}

namespace {

struct Ellipsoid {
    Vec3 center;
    Vec3 radii;

    bool contains(double x, double y, double z) const {
        const double dx = (x - center.x) / radii.x;
        const double dy = (y - center.y) / radii.y;
        const double dz = (z - center.z) / radii.z;
        return dx * dx + dy * dy + dz * dz <= 1.0;
    }
};

void paint(LabelMap& map, const Ellipsoid& e, std::int32_t label){
    const Index3 d = map.dims;
    const int x0 = std::max(0, static_cast<int>(std::floor(e.center.x - e.radii.x)));
    const int x1 = std::min(d.x - 1, static_cast<int>(std::ceil(e.center.x + e.radii.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(e.center.y - e.radii.y)));
    const int y1 = std::min(d.y - 1, static_cast<int>(std::ceil(e.center.y + e.radii.y)));
    const int z0 = std::max(0, static_cast<int>(std::floor(e.center.z - e.radii.z)));
    const int z1 = std::min(d.z - 1, static_cast<int>(std::ceil(e.center.z + e.radii.z)));
    for(int z = z0; z <= z1; ++z){
        for(int y = y0; y <= y1; ++y){
            for(int x = x0; x <= x1; ++x){
                if(e.contains(x, y, z)){
                    map.labels[flat_index(d, x, y, z)] = label;
                }
            }
        }
    }
}

} // namespace

PhantomSubject generate(const PhantomSpec& spec){
    validate(spec);
    const std::vector<TissueSpec> tissues = spec.tissues.empty() ? default_tissues() : spec.tissues;
    const Index3 d = spec.dims;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    PhantomSubject subject;
    subject.tissue_map.dims = d;
    subject.tissue_map.spacing = spec.spacing;
    subject.tissue_map.labels.assign(voxel_count(d), 0);

    const Vec3 center{0.5 * (d.x - 1) + 0.01 * d.x * unit(rng),
                      0.5 * (d.y - 1) + 0.01 * d.y * unit(rng),
                      0.5 * (d.z - 1) + 0.01 * d.z * unit(rng)};
    auto jitter = [&](double base){ return base * (1.0 + 0.05 * unit(rng)); };

    // nested anatomy: head (CSF-like rim), cortex, white matter core
    const Ellipsoid head{center, {jitter(0.42 * d.x), jitter(0.42 * d.y), jitter(0.42 * d.z)}};
    const Ellipsoid gray{center, {jitter(0.35 * d.x), jitter(0.35 * d.y), jitter(0.35 * d.z)}};
    const Ellipsoid white{center, {jitter(0.27 * d.x), jitter(0.27 * d.y), jitter(0.27 * d.z)}};

    const std::int32_t csf_label = tissues[0].label;
    const std::int32_t gray_label = tissues.size() > 1 ? tissues[1].label : tissues[0].label;
    const std::int32_t white_label = tissues.size() > 2 ? tissues[2].label : gray_label;
    paint(subject.tissue_map, head, csf_label);
    paint(subject.tissue_map, gray, gray_label);
    paint(subject.tissue_map, white, white_label);

    // a thalamus-like deep pair when a fourth tissue exists
    if(tissues.size() > 3){
        const std::int32_t deep_label = tissues[3].label;
        const double off = 0.09 * d.x;
        const Vec3 radii{jitter(0.07 * d.x), jitter(0.09 * d.y), jitter(0.07 * d.z)};
        paint(subject.tissue_map, {{center.x - off, center.y, center.z}, radii}, deep_label);
        paint(subject.tissue_map, {{center.x + off, center.y, center.z}, radii}, deep_label);
    }

    // extra seeded structures inside the white/gray interior for texture
    std::uniform_real_distribution<double> unit01(0.0, 1.0);
    for(int s = 0; s < spec.structures.count; ++s){
        bool placed = false;
        for(int attempt = 0; attempt < 100 && !placed; ++attempt){
            const Vec3 pos{center.x + 0.55 * white.radii.x * unit(rng),
                           center.y + 0.55 * white.radii.y * unit(rng),
                           center.z + 0.55 * white.radii.z * unit(rng)};
            const double span = spec.structures.max_radius_vox - spec.structures.min_radius_vox;
            const Vec3 radii{spec.structures.min_radius_vox + span * unit01(rng),
                             spec.structures.min_radius_vox + span * unit01(rng),
                             spec.structures.min_radius_vox + span * unit01(rng)};
            const int cx = static_cast<int>(std::lround(pos.x));
            const int cy = static_cast<int>(std::lround(pos.y));
            const int cz = static_cast<int>(std::lround(pos.z));
            if(cx < 0 || cy < 0 || cz < 0 || cx >= d.x || cy >= d.y || cz >= d.z){
                continue;
            }
            const std::int32_t host = subject.tissue_map.labels[flat_index(d, cx, cy, cz)];
            if(host == 0 || host == csf_label){
                continue; // keep extra structures inside the brain
            }
            std::vector<std::int32_t> candidates;
            for(const TissueSpec& t : tissues){
                if(t.label != host && t.label != csf_label){
                    candidates.push_back(t.label);
                }
            }
            if(candidates.empty()){
                continue;
            }
            const std::size_t pick =
                std::min(candidates.size() - 1,
                         static_cast<std::size_t>(unit01(rng) * static_cast<double>(candidates.size())));
            paint(subject.tissue_map, {pos, radii}, candidates[pick]);
            placed = true;
        }
        if(!placed){
            throw GenerationError("phantom structure " + std::to_string(s) +
                                  " could not be placed after 100 attempts");
        }
    }
    subject.tissue_map.recompute_label_set();

    subject.mask.assign(voxel_count(d), 0);
    for(std::size_t i = 0; i < subject.mask.size(); ++i){
        subject.mask[i] = (subject.tissue_map.labels[i] != 0) ? 1 : 0;
    }

    // contrasts from the IR model per tissue, plus seeded Gaussian noise
    std::vector<double> sorted_tis = spec.inversion_times_ms;
    std::sort(sorted_tis.begin(), sorted_tis.end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for(const double ti : sorted_tis){
        Volume contrast = Volume::zeros(d, spec.spacing);
        contrast.mask = subject.mask;
        std::map<std::int32_t, double> intensity;
        for(const TissueSpec& t : tissues){
            intensity[t.label] = ir_signal(IrSignalParams{t.m0, t.t1_ms, ti});
        }
        double lo = 0.0, hi = 0.0;
        for(const auto& [label, value] : intensity){
            lo = std::min(lo, value);
            hi = std::max(hi, value);
        }
        for(std::size_t i = 0; i < contrast.data.size(); ++i){
            const std::int32_t label = subject.tissue_map.labels[i];
            contrast.data[i] = (label != 0) ? intensity[label] : 0.0;
        }
        if(spec.noise_sigma > 0.0){
            const double sigma = spec.noise_sigma * (hi - lo);
            for(double& v : contrast.data){
                v += sigma * gauss(rng);
            }
        }
        subject.contrasts.emplace(contrast_name_for_ti(ti), std::move(contrast));
    }
    return subject;
}

PhantomSubject deform_subject(const PhantomSubject& subject, const DeformationSpec& deformation,
                              std::uint64_t seed){
    if(!(deformation.smoothness_vox > 0.0) || deformation.max_magnitude_vox < 0.0){
        throw std::invalid_argument("invalid deformation spec");
    }
    const Index3 d = subject.tissue_map.dims;

    PhantomSubject out;
    if(deformation.max_magnitude_vox == 0.0){
        out = subject;
        if(!out.true_displacement){
            out.true_displacement = DisplacementField::zeros(d, subject.tissue_map.spacing);
        }
        return out;
    }

    // smooth seeded velocity: blurred white noise scaled to the target magnitude
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = voxel_count(d);
    std::vector<double> comp[3];
    for(auto& c : comp){
        c.resize(n);
    }
    for(std::size_t i = 0; i < n; ++i){
        comp[0][i] = gauss(rng);
        comp[1][i] = gauss(rng);
        comp[2][i] = gauss(rng);
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * deformation.smoothness_vox)));
    for(auto& c : comp){
        detail::gaussian_blur_inplace(c, d, deformation.smoothness_vox, radius);
    }

    VelocityField velocity;
    velocity.dims = d;
    velocity.spacing = subject.tissue_map.spacing;
    velocity.vectors.resize(n);
    double max_norm = 0.0;
    for(std::size_t i = 0; i < n; ++i){
        velocity.vectors[i] = Vec3{comp[0][i], comp[1][i], comp[2][i]};
        max_norm = std::max(max_norm, velocity.vectors[i].norm());
    }
    if(max_norm > 0.0){
        const double scale = deformation.max_magnitude_vox / max_norm;
        for(Vec3& v : velocity.vectors){
            v *= scale;
        }
    }

    const int steps = std::max(6, required_exp_steps(velocity));
    const DisplacementField u = exponentiate(velocity, steps);

    out.tissue_map = warp_labels(subject.tissue_map, u);
    for(const auto& [name, volume] : subject.contrasts){
        out.contrasts.emplace(name, warp(volume, u));
    }
    Volume mask_volume = Volume::zeros(d, subject.tissue_map.spacing);
    for(std::size_t i = 0; i < n; ++i){
        mask_volume.data[i] = (subject.mask[i] != 0) ? 1.0 : 0.0;
    }
    const Volume warped_mask = warp(mask_volume, u);
    out.mask.resize(n);
    for(std::size_t i = 0; i < n; ++i){
        out.mask[i] = (warped_mask.data[i] >= 0.5) ? 1 : 0;
    }

    out.true_displacement = subject.true_displacement ? compose(*subject.true_displacement, u) : u;
    return out;
}

std::vector<PhantomSubject> generate_cohort(const PhantomSpec& spec, int n){
    if(n < 1){
        throw std::invalid_argument("generate_cohort requires n >= 1");
    }
    const PhantomSubject base = generate(spec);
    std::vector<PhantomSubject> cohort;
    cohort.reserve(static_cast<std::size_t>(n));
    for(int i = 0; i < n; ++i){
        cohort.push_back(deform_subject(base, spec.deformation, spec.seed + static_cast<std::uint64_t>(i)));
    }
    return cohort;
}

AtlasSubject to_atlas_subject(const PhantomSubject& subject, const std::string& id,
                              const std::string& primary_contrast){
    const auto it = subject.contrasts.find(primary_contrast);
    if(it == subject.contrasts.end()){
        throw std::invalid_argument("phantom subject has no contrast named '" + primary_contrast + "'");
    }
    AtlasSubject atlas;
    atlas.id = id;
    atlas.primary_contrast = it->second;
    atlas.secondary_contrasts = subject.contrasts;
    atlas.labels = subject.tissue_map;
    return atlas;
}

} // namespace dirsynth
