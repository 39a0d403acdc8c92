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

#include "dirsynth/sampler.hpp"

#include <stdexcept>
#include <string>

#include "interp_detail.hpp"

namespace dirsynth {

namespace {

void check_dims(const Index3& a, const Index3& b, const char* what){
    if(!(a == b)){
        throw std::invalid_argument(std::string(what) + ": displacement dims do not match the image grid");
    }
}

} // namespace

Volume warp(const Volume& moving, const DisplacementField& u){
    check_dims(moving.dims, u.dims, "warp");

    Volume out;
    out.dims = moving.dims;
    out.spacing = moving.spacing;
    out.origin = moving.origin;
    out.data.resize(moving.voxel_count());

    std::vector<double> mask_float;
    if(moving.mask){
        mask_float.resize(moving.mask->size());
        for(std::size_t i = 0; i < mask_float.size(); ++i){
            mask_float[i] = ((*moving.mask)[i] != 0) ? 1.0 : 0.0;
        }
        out.mask.emplace(moving.voxel_count());
    }

    detail::TrilinearTaps taps;
    std::size_t idx = 0;
    for(int z = 0; z < out.dims.z; ++z){
        for(int y = 0; y < out.dims.y; ++y){
            for(int x = 0; x < out.dims.x; ++x, ++idx){
                const Vec3& d = u.vectors[idx];
                const Vec3 coord{static_cast<double>(x) + d.x,
                                 static_cast<double>(y) + d.y,
                                 static_cast<double>(z) + d.z};
                detail::make_taps(out.dims, coord, taps);
                out.data[idx] = detail::sample(moving.data.data(), out.dims, taps);
                if(moving.mask){
                    (*out.mask)[idx] = (detail::sample(mask_float.data(), out.dims, taps) >= 0.5) ? 1 : 0;
                }
            }
        }
    }
    return out;
}

LabelMap warp_labels(const LabelMap& moving, const DisplacementField& u){
    check_dims(moving.dims, u.dims, "warp_labels");

    LabelMap out;
    out.dims = moving.dims;
    out.spacing = moving.spacing;
    out.origin = moving.origin;
    out.labels.resize(moving.voxel_count());

    std::size_t idx = 0;
    for(int z = 0; z < out.dims.z; ++z){
        for(int y = 0; y < out.dims.y; ++y){
            for(int x = 0; x < out.dims.x; ++x, ++idx){
                const Vec3& d = u.vectors[idx];
                const int sx = detail::nearest_index(out.dims.x, static_cast<double>(x) + d.x);
                const int sy = detail::nearest_index(out.dims.y, static_cast<double>(y) + d.y);
                const int sz = detail::nearest_index(out.dims.z, static_cast<double>(z) + d.z);
                out.labels[idx] = moving.labels[flat_index(out.dims, sx, sy, sz)];
            }
        }
    }
    out.recompute_label_set();
    return out;
}

std::pair<Volume, WarpGradient> warp_with_gradient(const Volume& moving, const DisplacementField& u){
    check_dims(moving.dims, u.dims, "warp_with_gradient");

    Volume out;
    out.dims = moving.dims;
    out.spacing = moving.spacing;
    out.origin = moving.origin;
    out.data.resize(moving.voxel_count());

    std::vector<double> mask_float;
    if(moving.mask){
        mask_float.resize(moving.mask->size());
        for(std::size_t i = 0; i < mask_float.size(); ++i){
            mask_float[i] = ((*moving.mask)[i] != 0) ? 1.0 : 0.0;
        }
        out.mask.emplace(moving.voxel_count());
    }

    WarpGradient grad;
    grad.dims = moving.dims;
    grad.vectors.resize(moving.voxel_count());

    detail::TrilinearTaps taps;
    std::size_t idx = 0;
    for(int z = 0; z < out.dims.z; ++z){
        for(int y = 0; y < out.dims.y; ++y){
            for(int x = 0; x < out.dims.x; ++x, ++idx){
                const Vec3& d = u.vectors[idx];
                const Vec3 coord{static_cast<double>(x) + d.x,
                                 static_cast<double>(y) + d.y,
                                 static_cast<double>(z) + d.z};
                detail::make_taps(out.dims, coord, taps);
                out.data[idx] = detail::sample(moving.data.data(), out.dims, taps);
                grad.vectors[idx] = detail::sample_gradient(moving.data.data(), out.dims, taps);
                if(moving.mask){
                    (*out.mask)[idx] = (detail::sample(mask_float.data(), out.dims, taps) >= 0.5) ? 1 : 0;
                }
            }
        }
    }
    return {std::move(out), std::move(grad)};
}

} // namespace dirsynth
