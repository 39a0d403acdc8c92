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

#ifndef DIRSYNTH_WORKFLOWS_HPP
#define DIRSYNTH_WORKFLOWS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dirsynth/phantom.hpp"
#include "dirsynth/registration.hpp"
#include "dirsynth/synthesis.hpp"

namespace dirsynth {

// Atlas manifests are explicit JSON file lists; relative paths resolve
// against the manifest's own directory.
struct AtlasManifestEntry {
    std::string id;
    std::string primary_path;
    std::string labels_path; // empty = no labels
    std::map<std::string, std::string> contrast_paths;
};

std::vector<AtlasManifestEntry> read_atlas_manifest(const std::string& path);
void write_atlas_manifest(const std::vector<AtlasManifestEntry>& entries, const std::string& path);
AtlasSubject load_atlas_subject(const AtlasManifestEntry& entry, const std::string& base_dir);

// Rank correlation of two equal-length sequences (average ranks for ties).
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

// The moving-image-count sweep: per seed, synthesize from the first k
// atlases for k = 1..max_atlases (one registration per atlas, fusion over
// prefixes) under both mean and median fusion, and evaluate masked PSNR/SSIM
// against the fixed subject's own target contrast.
struct SweepConfig {
    PhantomSpec phantom;                       // cohort spec; seed is overridden per sweep seed
    std::string target_contrast = "wmn";
    int max_atlases = 9;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    RegistrationConfig registration;
    int workers = 1;
    std::string out_dir;                       // empty = no files written
};

struct SweepCell {
    std::uint64_t seed = 0;
    int atlas_count = 0;
    std::string method;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct SweepSummary {
    std::vector<SweepCell> cells;              // fixed order: seed, then k, then method
    std::map<int, double> mean_psnr_by_k;      // mean fusion
    std::map<int, double> mean_ssim_by_k;      // mean fusion
    double spearman_psnr_vs_k = 0.0;
    bool trend_positive = false;               // spearman > 0
    int mean_beats_median_seeds = 0;           // at k = max_atlases
    int seed_count = 0;
};

void validate(const SweepConfig& config);

// Writes sweep.csv (long format, flushed per completed cell) and
// sweep_summary.json under out_dir when set. Deterministic given config.
SweepSummary run_sweep(const SweepConfig& config);

} // namespace dirsynth

#endif
