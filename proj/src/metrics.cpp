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

#include "dirsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dirsynth/errors.hpp"
#include "gaussian_detail.hpp"

namespace dirsynth {

namespace {

void check_pair(const Volume& reference, const Volume& test, const std::vector<std::uint8_t>& mask,
                const char* what){
    if(!(reference.dims == test.dims)){
        throw std::invalid_argument(std::string(what) + ": volume dims mismatch");
    }
    if(mask.size() != reference.data.size()){
        throw std::invalid_argument(std::string(what) + ": mask length mismatch");
    }
}

std::size_t count_mask(const std::vector<std::uint8_t>& mask, const char* what){
    std::size_t n = 0;
    for(const std::uint8_t m : mask){ n += (m != 0) ? 1 : 0; }
    if(n == 0){
        throw std::invalid_argument(std::string(what) + ": mask is empty");
    }
    return n;
}

} // namespace

double psnr(const Volume& reference, const Volume& test, const std::vector<std::uint8_t>& mask){
    check_pair(reference, test, mask, "psnr");
    const std::size_t n = count_mask(mask, "psnr");

    double peak = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for(std::size_t i = 0; i < mask.size(); ++i){
        if(mask[i] == 0){ continue; }
        peak = std::max(peak, reference.data[i]);
        const double d = reference.data[i] - test.data[i];
        sum += d * d;
    }
    if(peak == 0.0){
        throw DegenerateInputError("psnr: reference is all zero over the mask");
    }
    const double masked_mse = sum / static_cast<double>(n);
    if(masked_mse == 0.0){
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(peak * peak / masked_mse);
}

double ssim(const Volume& reference, const Volume& test, const std::vector<std::uint8_t>& mask,
            const SsimOptions& options){
    check_pair(reference, test, mask, "ssim");
    count_mask(mask, "ssim");

    double range = 0.0;
    if(options.dynamic_range){
        range = *options.dynamic_range;
    }else{
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for(std::size_t i = 0; i < mask.size(); ++i){
            if(mask[i] == 0){ continue; }
            lo = std::min(lo, reference.data[i]);
            hi = std::max(hi, reference.data[i]);
        }
        range = hi - lo;
    }
    if(!(range > 0.0)){
        throw DegenerateInputError("ssim: zero reference intensity range over the mask");
    }
    const double c1 = (options.k1 * range) * (options.k1 * range);
    const double c2 = (options.k2 * range) * (options.k2 * range);

    const std::size_t n = reference.data.size();
    std::vector<double> mu_a = reference.data;
    std::vector<double> mu_b = test.data;
    std::vector<double> m_aa(n), m_bb(n), m_ab(n);
    for(std::size_t i = 0; i < n; ++i){
        m_aa[i] = reference.data[i] * reference.data[i];
        m_bb[i] = test.data[i] * test.data[i];
        m_ab[i] = reference.data[i] * test.data[i];
    }
    const Index3 d = reference.dims;
    detail::gaussian_blur_inplace(mu_a, d, options.sigma, options.window_radius);
    detail::gaussian_blur_inplace(mu_b, d, options.sigma, options.window_radius);
    detail::gaussian_blur_inplace(m_aa, d, options.sigma, options.window_radius);
    detail::gaussian_blur_inplace(m_bb, d, options.sigma, options.window_radius);
    detail::gaussian_blur_inplace(m_ab, d, options.sigma, options.window_radius);

    double sum = 0.0;
    std::size_t masked = 0;
    for(std::size_t i = 0; i < n; ++i){
        if(mask[i] == 0){ continue; }
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        const double numerator = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double denominator = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
        sum += numerator / denominator;
        ++masked;
    }
    return sum / static_cast<double>(masked);
}

std::map<std::int32_t, double> hard_dice(const LabelMap& a, const LabelMap& b){
    if(!(a.dims == b.dims)){
        throw std::invalid_argument("hard_dice: label map dims mismatch");
    }
    std::vector<std::int32_t> union_labels;
    for(const std::int32_t l : a.label_set){ if(l != 0){ union_labels.push_back(l); } }
    for(const std::int32_t l : b.label_set){ if(l != 0){ union_labels.push_back(l); } }
    std::sort(union_labels.begin(), union_labels.end());
    union_labels.erase(std::unique(union_labels.begin(), union_labels.end()), union_labels.end());

    std::map<std::int32_t, std::size_t> size_a, size_b, inter;
    for(const std::int32_t l : union_labels){
        size_a[l] = 0;
        size_b[l] = 0;
        inter[l] = 0;
    }
    for(std::size_t i = 0; i < a.labels.size(); ++i){
        const std::int32_t la = a.labels[i];
        const std::int32_t lb = b.labels[i];
        if(la != 0){
            if(auto it = size_a.find(la); it != size_a.end()){ ++it->second; }
        }
        if(lb != 0){
            if(auto it = size_b.find(lb); it != size_b.end()){ ++it->second; }
        }
        if(la != 0 && la == lb){
            ++inter[la];
        }
    }

    std::map<std::int32_t, double> dice;
    for(const std::int32_t l : union_labels){
        const double denom = static_cast<double>(size_a[l] + size_b[l]);
        dice[l] = 2.0 * static_cast<double>(inter[l]) / denom;
    }
    return dice;
}

std::vector<std::uint8_t> default_foreground_mask(const Volume& reference){
    const std::size_t n = reference.data.size();
    std::vector<std::uint8_t> mask(n, 0);
    const double peak = *std::max_element(reference.data.begin(), reference.data.end());
    if(!(peak > 0.0)){
        std::fill(mask.begin(), mask.end(), 1);
        return mask;
    }
    const double threshold = 0.01 * peak;
    for(std::size_t i = 0; i < n; ++i){
        mask[i] = (reference.data[i] > threshold) ? 1 : 0;
    }

    // one-voxel dilation, 26-neighborhood
    std::vector<std::uint8_t> dilated = mask;
    const Index3 d = reference.dims;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x){
                if(mask[flat_index(d, x, y, z)] != 0){ continue; }
                bool hit = false;
                for(int dz = -1; dz <= 1 && !hit; ++dz){
                    for(int dy = -1; dy <= 1 && !hit; ++dy){
                        for(int dx = -1; dx <= 1 && !hit; ++dx){
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if(nx < 0 || ny < 0 || nz < 0 || nx >= d.x || ny >= d.y || nz >= d.z){
                                continue;
                            }
                            hit = (mask[flat_index(d, nx, ny, nz)] != 0);
                        }
                    }
                }
                if(hit){
                    dilated[flat_index(d, x, y, z)] = 1;
                }
            }
        }
    }
    return dilated;
}

MetricReport evaluate_metrics(const Volume& reference, const Volume& test,
                              const std::vector<std::uint8_t>& mask,
                              const LabelMap* reference_labels, const LabelMap* test_labels){
    MetricReport report;
    report.mask_voxels = count_mask(mask, "evaluate_metrics");
    report.psnr = psnr(reference, test, mask);
    report.ssim = ssim(reference, test, mask);
    if(reference_labels && test_labels){
        report.dice_per_label = hard_dice(*reference_labels, *test_labels);
    }
    return report;
}

} // namespace dirsynth
