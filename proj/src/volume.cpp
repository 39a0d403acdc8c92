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

#include "dirsynth/volume.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "dirsynth/errors.hpp"

namespace dirsynth {

Volume Volume::zeros(const Index3& dims, const Vec3& spacing){
    Volume v;
    v.dims = dims;
    v.spacing = spacing;
    v.data.assign(dirsynth::voxel_count(dims), 0.0);
    return v;
}

void LabelMap::recompute_label_set(){
    label_set.assign(labels.begin(), labels.end());
    std::sort(label_set.begin(), label_set.end());
    label_set.erase(std::unique(label_set.begin(), label_set.end()), label_set.end());
}

void validate(const Volume& v){
    if(v.dims.x < 1 || v.dims.y < 1 || v.dims.z < 1){
        throw std::invalid_argument("Volume dims must be positive");
    }
    if(!(v.spacing.x > 0.0) || !(v.spacing.y > 0.0) || !(v.spacing.z > 0.0)){
        throw std::invalid_argument("Volume spacing must be strictly positive");
    }
    if(v.data.size() != v.voxel_count()){
        throw std::invalid_argument("Volume data length does not match dims");
    }
    for(const double x : v.data){
        if(!std::isfinite(x)){
            throw std::invalid_argument("Volume contains non-finite intensities");
        }
    }
    if(v.mask && v.mask->size() != v.voxel_count()){
        throw std::invalid_argument("Volume mask length does not match dims");
    }
}

void validate(const LabelMap& l){
    if(l.dims.x < 1 || l.dims.y < 1 || l.dims.z < 1){
        throw std::invalid_argument("LabelMap dims must be positive");
    }
    if(!(l.spacing.x > 0.0) || !(l.spacing.y > 0.0) || !(l.spacing.z > 0.0)){
        throw std::invalid_argument("LabelMap spacing must be strictly positive");
    }
    if(l.labels.size() != l.voxel_count()){
        throw std::invalid_argument("LabelMap labels length does not match dims");
    }
    for(const std::int32_t v : l.labels){
        if(v < 0){
            throw std::invalid_argument("LabelMap labels must be non-negative");
        }
    }
    std::vector<std::int32_t> distinct(l.labels.begin(), l.labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if(distinct != l.label_set){
        throw std::invalid_argument("LabelMap label_set does not match distinct label values");
    }
}

namespace {

void check_factor(const Index3& dims, int factor){
    if(factor < 1){
        throw std::invalid_argument("downsample factor must be >= 1");
    }
    // degenerate axes shrink to 1 voxel, so only factors beyond every axis
    // are rejected
    if(factor > dims.max_component()){
        throw std::invalid_argument("downsample factor " + std::to_string(factor) +
                                    " exceeds largest axis " + std::to_string(dims.max_component()));
    }
}

Index3 downsampled_dims(const Index3& dims, int factor){
    auto up = [factor](int n){ return (n + factor - 1) / factor; };
    return Index3{up(dims.x), up(dims.y), up(dims.z)};
}

} // namespace

Volume downsample(const Volume& v, int factor){
    check_factor(v.dims, factor);
    if(factor == 1){
        return v;
    }

    Volume out;
    out.dims = downsampled_dims(v.dims, factor);
    out.spacing = Vec3{v.spacing.x * factor, v.spacing.y * factor, v.spacing.z * factor};
    out.origin = v.origin;
    out.data.resize(out.voxel_count());
    if(v.mask){
        out.mask.emplace(out.voxel_count());
    }

    for(int z = 0; z < out.dims.z; ++z){
        const int z0 = z * factor;
        const int z1 = std::min(z0 + factor, v.dims.z);
        for(int y = 0; y < out.dims.y; ++y){
            const int y0 = y * factor;
            const int y1 = std::min(y0 + factor, v.dims.y);
            for(int x = 0; x < out.dims.x; ++x){
                const int x0 = x * factor;
                const int x1 = std::min(x0 + factor, v.dims.x);

                double sum = 0.0;
                long fg = 0;
                long n = 0;
                for(int zz = z0; zz < z1; ++zz){
                    for(int yy = y0; yy < y1; ++yy){
                        for(int xx = x0; xx < x1; ++xx){
                            const std::size_t idx = v.index(xx, yy, zz);
                            sum += v.data[idx];
                            if(v.mask){
                                fg += ((*v.mask)[idx] != 0) ? 1 : 0;
                            }
                            ++n;
                        }
                    }
                }
                const std::size_t oidx = out.index(x, y, z);
                out.data[oidx] = sum / static_cast<double>(n);
                if(out.mask){
                    // majority vote, ties to foreground
                    (*out.mask)[oidx] = (2 * fg >= n) ? 1 : 0;
                }
            }
        }
    }
    return out;
}

LabelMap downsample_labels(const LabelMap& l, int factor){
    check_factor(l.dims, factor);
    if(factor == 1){
        return l;
    }

    LabelMap out;
    out.dims = downsampled_dims(l.dims, factor);
    out.spacing = Vec3{l.spacing.x * factor, l.spacing.y * factor, l.spacing.z * factor};
    out.origin = l.origin;
    out.labels.resize(out.voxel_count());

    std::map<std::int32_t, int> histogram;
    for(int z = 0; z < out.dims.z; ++z){
        const int z0 = z * factor;
        const int z1 = std::min(z0 + factor, l.dims.z);
        for(int y = 0; y < out.dims.y; ++y){
            const int y0 = y * factor;
            const int y1 = std::min(y0 + factor, l.dims.y);
            for(int x = 0; x < out.dims.x; ++x){
                const int x0 = x * factor;
                const int x1 = std::min(x0 + factor, l.dims.x);

                histogram.clear();
                for(int zz = z0; zz < z1; ++zz){
                    for(int yy = y0; yy < y1; ++yy){
                        for(int xx = x0; xx < x1; ++xx){
                            ++histogram[l.labels[l.index(xx, yy, zz)]];
                        }
                    }
                }
                // modal label; the ordered map makes ties resolve to the
                // smallest label value
                std::int32_t best_label = 0;
                int best_count = -1;
                for(const auto& [label, count] : histogram){
                    if(count > best_count){
                        best_label = label;
                        best_count = count;
                    }
                }
                out.labels[out.index(x, y, z)] = best_label;
            }
        }
    }
    out.recompute_label_set();
    return out;
}

Pyramid build_pyramid(const Volume& v, const LabelMap* labels, const std::vector<int>& schedule){
    if(schedule.empty()){
        throw std::invalid_argument("pyramid schedule must be non-empty");
    }
    if(schedule.back() != 1){
        throw std::invalid_argument("pyramid schedule must end with factor 1");
    }
    for(std::size_t i = 1; i < schedule.size(); ++i){
        if(schedule[i] > schedule[i - 1]){
            throw std::invalid_argument("pyramid schedule factors must be non-increasing toward fine levels");
        }
    }
    if(labels && !(labels->dims == v.dims)){
        throw std::invalid_argument("pyramid labels must share the volume dims");
    }

    Pyramid p;
    p.levels.reserve(schedule.size());
    for(const int factor : schedule){
        PyramidLevel level;
        level.factor = factor;
        level.volume = downsample(v, factor);
        if(labels){
            level.labels = downsample_labels(*labels, factor);
        }
        p.levels.push_back(std::move(level));
    }
    return p;
}

} // namespace dirsynth
