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

#ifndef DIRSYNTH_METRICS_HPP
#define DIRSYNTH_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dirsynth/volume.hpp"

namespace dirsynth {

struct MetricReport {
    double psnr = 0.0; // dB; +infinity when the masked MSE is zero
    double ssim = 0.0;
    std::map<std::int32_t, double> dice_per_label;
    std::size_t mask_voxels = 0;
};

// 10*log10(peak^2 / masked MSE) with peak taken as the reference maximum over
// the mask. Zero masked MSE returns +infinity; an all-zero reference over the
// mask throws DegenerateInputError.
double psnr(const Volume& reference, const Volume& test, const std::vector<std::uint8_t>& mask);

struct SsimOptions {
    int window_radius = 5;   // 11^3 window
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    // Stabilizer scale L; derived from the reference intensity range over the
    // mask when unset (DegenerateInputError if that range is zero).
    std::optional<double> dynamic_range;
};

// Mean over masked voxels of the local Gaussian-weighted SSIM map. Window
// statistics are computed over the full volume with border renormalization;
// the mask selects only which centers are aggregated.
double ssim(const Volume& reference, const Volume& test, const std::vector<std::uint8_t>& mask,
            const SsimOptions& options = {});

// 2|A n B| / (|A| + |B|) per non-background label present in either map.
std::map<std::int32_t, double> hard_dice(const LabelMap& a, const LabelMap& b);

// Foreground used when no explicit mask is supplied: reference > 1% of its
// maximum, dilated by one voxel (26-neighborhood). All-ones when the
// reference maximum is not positive.
std::vector<std::uint8_t> default_foreground_mask(const Volume& reference);

// psnr + ssim (+ per-label Dice when both label maps are given) over the mask.
MetricReport evaluate_metrics(const Volume& reference, const Volume& test,
                              const std::vector<std::uint8_t>& mask,
                              const LabelMap* reference_labels = nullptr,
                              const LabelMap* test_labels = nullptr);

} // namespace dirsynth

#endif
