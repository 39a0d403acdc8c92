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

#ifndef DIRSYNTH_GAUSSIAN_DETAIL_HPP
#define DIRSYNTH_GAUSSIAN_DETAIL_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "dirsynth/types.hpp"

namespace dirsynth::detail {

inline std::vector<double> gaussian_kernel(double sigma, int radius){
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for(int i = -radius; i <= radius; ++i){
        const double w = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for(double& w : k){ w /= sum; }
    return k;
}

// Separable Gaussian smoothing with the kernel renormalized over the
// in-bounds taps at each position. Because the 3D window is a product of
// per-axis windows and its truncation at the border is a box, per-axis
// renormalization equals full-window renormalization, so this matches a
// direct windowed implementation.
inline void gaussian_blur_inplace(std::vector<double>& data, const Index3& dims,
                                  double sigma, int radius){
    const std::vector<double> kernel = gaussian_kernel(sigma, radius);
    const int n[3] = {dims.x, dims.y, dims.z};
    const std::size_t strides[3] = {1, static_cast<std::size_t>(dims.x),
                                    static_cast<std::size_t>(dims.x) * static_cast<std::size_t>(dims.y)};
    std::vector<double> tmp(data.size());

    for(int axis = 0; axis < 3; ++axis){
        const int len = n[axis];
        const std::size_t stride = strides[axis];
        const int n_other0 = n[(axis + 1) % 3];
        const int n_other1 = n[(axis + 2) % 3];
        const std::size_t stride_other0 = strides[(axis + 1) % 3];
        const std::size_t stride_other1 = strides[(axis + 2) % 3];

        for(int j = 0; j < n_other1; ++j){
            for(int i = 0; i < n_other0; ++i){
                const std::size_t line = static_cast<std::size_t>(i) * stride_other0 +
                                         static_cast<std::size_t>(j) * stride_other1;
                for(int p = 0; p < len; ++p){
                    const int lo = (p - radius < 0) ? -p : -radius;
                    const int hi = (p + radius > len - 1) ? (len - 1 - p) : radius;
                    double acc = 0.0;
                    double wsum = 0.0;
                    for(int k = lo; k <= hi; ++k){
                        const double w = kernel[static_cast<std::size_t>(k + radius)];
                        acc += w * data[line + static_cast<std::size_t>(p + k) * stride];
                        wsum += w;
                    }
                    tmp[line + static_cast<std::size_t>(p) * stride] = acc / wsum;
                }
            }
        }
        data.swap(tmp);
    }
}

} // namespace dirsynth::detail

#endif
