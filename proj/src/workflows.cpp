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

#include "dirsynth/workflows.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dirsynth/io.hpp"
#include "dirsynth/metrics.hpp"

namespace dirsynth {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<AtlasManifestEntry> read_atlas_manifest(const std::string& path){
    std::ifstream in(path);
    if(!in){
        throw std::invalid_argument("cannot open atlas manifest: " + path);
    }
    json doc;
    try{
        in >> doc;
    }catch(const json::exception& e){
        throw std::invalid_argument("atlas manifest " + path + " is not valid JSON: " + e.what());
    }
    if(!doc.is_array()){
        throw std::invalid_argument("atlas manifest " + path + " must be a JSON array");
    }

    std::vector<AtlasManifestEntry> entries;
    entries.reserve(doc.size());
    for(const json& item : doc){
        AtlasManifestEntry entry;
        entry.id = item.at("id").get<std::string>();
        entry.primary_path = item.at("primary").get<std::string>();
        if(item.contains("labels")){
            entry.labels_path = item.at("labels").get<std::string>();
        }
        if(item.contains("contrasts")){
            for(const auto& [name, value] : item.at("contrasts").items()){
                entry.contrast_paths[name] = value.get<std::string>();
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

void write_atlas_manifest(const std::vector<AtlasManifestEntry>& entries, const std::string& path){
    json doc = json::array();
    for(const AtlasManifestEntry& entry : entries){
        json item;
        item["id"] = entry.id;
        item["primary"] = entry.primary_path;
        if(!entry.labels_path.empty()){
            item["labels"] = entry.labels_path;
        }
        if(!entry.contrast_paths.empty()){
            json contrasts;
            for(const auto& [name, p] : entry.contrast_paths){
                contrasts[name] = p;
            }
            item["contrasts"] = contrasts;
        }
        doc.push_back(std::move(item));
    }
    write_text_file(path, doc.dump(2) + "\n");
}

AtlasSubject load_atlas_subject(const AtlasManifestEntry& entry, const std::string& base_dir){
    auto resolve = [&](const std::string& p){
        const fs::path candidate(p);
        if(candidate.is_absolute() || base_dir.empty()){
            return p;
        }
        return (fs::path(base_dir) / candidate).string();
    };

    AtlasSubject subject;
    subject.id = entry.id;
    subject.primary_contrast = read_as_volume(resolve(entry.primary_path));
    if(!entry.labels_path.empty()){
        subject.labels = read_as_labels(resolve(entry.labels_path));
    }
    for(const auto& [name, p] : entry.contrast_paths){
        subject.secondary_contrasts[name] = read_as_volume(resolve(p));
    }
    validate(subject);
    return subject;
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b){
    if(a.size() != b.size() || a.size() < 2){
        throw std::invalid_argument("spearman_correlation needs two sequences of equal length >= 2");
    }
    auto ranks = [](const std::vector<double>& v){
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j){
            return v[i] < v[j];
        });
        std::vector<double> r(n);
        std::size_t i = 0;
        while(i < n){
            std::size_t j = i;
            while(j + 1 < n && v[order[j + 1]] == v[order[i]]){
                ++j;
            }
            const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for(std::size_t k = i; k <= j; ++k){
                r[order[k]] = avg_rank;
            }
            i = j + 1;
        }
        return r;
    };

    const std::vector<double> ra = ranks(a);
    const std::vector<double> rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i){
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i){
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if(saa == 0.0 || sbb == 0.0){
        return 0.0; // a constant sequence carries no rank signal
    }
    return sab / std::sqrt(saa * sbb);
}

void validate(const SweepConfig& config){
    if(config.max_atlases < 2){
        throw std::invalid_argument("sweep needs max_atlases >= 2 for a trend");
    }
    if(config.seeds.size() < 3){
        throw std::invalid_argument("sweep needs at least 3 seeds for the trend test");
    }
    validate(config.phantom);
    validate(config.registration);
    if(config.target_contrast.empty()){
        throw std::invalid_argument("sweep target contrast must be named");
    }
}

SweepSummary run_sweep(const SweepConfig& config){
    validate(config);

    std::ofstream csv;
    std::string csv_partial;
    std::string csv_final;
    if(!config.out_dir.empty()){
        fs::create_directories(config.out_dir);
        csv_final = (fs::path(config.out_dir) / "sweep.csv").string();
        csv_partial = csv_final + ".partial";
        csv.open(csv_partial, std::ios::trunc);
        if(!csv){
            throw std::runtime_error("cannot open " + csv_partial);
        }
        csv << "seed,atlas_count,method,psnr,ssim\n";
        csv.flush();
    }

    SweepSummary summary;
    summary.seed_count = static_cast<int>(config.seeds.size());
    const int n = config.max_atlases;

    // per-seed PSNR with mean fusion, indexed [seed][k-1], for the summary
    std::vector<std::vector<double>> psnr_mean_fusion;
    std::vector<std::vector<double>> ssim_mean_fusion;
    std::vector<double> psnr_mean_at_max, psnr_median_at_max;

    for(const std::uint64_t seed : config.seeds){
        PhantomSpec spec = config.phantom;
        spec.seed = seed;
        const auto cohort = generate_cohort(spec, n + 1);

        const AtlasSubject fixed = to_atlas_subject(cohort[0], "fixed");
        std::vector<AtlasSubject> atlases;
        atlases.reserve(static_cast<std::size_t>(n));
        for(int i = 1; i <= n; ++i){
            char id[16];
            std::snprintf(id, sizeof(id), "a%02d", i);
            atlases.push_back(to_atlas_subject(cohort[static_cast<std::size_t>(i)], id));
        }

        // one registration per atlas, reused across every k and both methods
        const SynthesisPlan plan = plan_synthesis(fixed, atlases, config.registration, config.workers);
        std::vector<Volume> warped;
        warped.reserve(plan.order.size());
        for(std::size_t k = 0; k < plan.order.size(); ++k){
            warped.push_back(transfer(plan.registrations[k], atlases[plan.order[k]],
                                      config.target_contrast));
        }

        const Volume& truth = cohort[0].contrasts.at(config.target_contrast);
        const std::vector<std::uint8_t>& mask = cohort[0].mask;

        std::vector<double> seed_psnr(static_cast<std::size_t>(n));
        std::vector<double> seed_ssim(static_cast<std::size_t>(n));
        for(int k = 1; k <= n; ++k){
            for(const FusionMethod method : {FusionMethod::mean, FusionMethod::median}){
                const std::span<const Volume> prefix(warped.data(), static_cast<std::size_t>(k));
                const FusionResult fused = fuse(prefix, method);
                SweepCell cell;
                cell.seed = seed;
                cell.atlas_count = k;
                cell.method = to_string(method);
                cell.psnr = psnr(truth, fused.synthetic, mask);
                cell.ssim = ssim(truth, fused.synthetic, mask);
                summary.cells.push_back(cell);
                if(csv.is_open()){
                    csv << cell.seed << ',' << cell.atlas_count << ',' << cell.method << ','
                        << format_double(cell.psnr) << ',' << format_double(cell.ssim) << '\n';
                    csv.flush();
                }
                if(method == FusionMethod::mean){
                    seed_psnr[static_cast<std::size_t>(k - 1)] = cell.psnr;
                    seed_ssim[static_cast<std::size_t>(k - 1)] = cell.ssim;
                    if(k == n){
                        psnr_mean_at_max.push_back(cell.psnr);
                    }
                }else if(k == n){
                    psnr_median_at_max.push_back(cell.psnr);
                }
            }
        }
        psnr_mean_fusion.push_back(std::move(seed_psnr));
        ssim_mean_fusion.push_back(std::move(seed_ssim));
    }

    std::vector<double> k_values, mean_psnr_seq;
    for(int k = 1; k <= n; ++k){
        double psnr_sum = 0.0, ssim_sum = 0.0;
        for(std::size_t s = 0; s < psnr_mean_fusion.size(); ++s){
            psnr_sum += psnr_mean_fusion[s][static_cast<std::size_t>(k - 1)];
            ssim_sum += ssim_mean_fusion[s][static_cast<std::size_t>(k - 1)];
        }
        summary.mean_psnr_by_k[k] = psnr_sum / static_cast<double>(psnr_mean_fusion.size());
        summary.mean_ssim_by_k[k] = ssim_sum / static_cast<double>(ssim_mean_fusion.size());
        k_values.push_back(static_cast<double>(k));
        mean_psnr_seq.push_back(summary.mean_psnr_by_k[k]);
    }
    summary.spearman_psnr_vs_k = spearman_correlation(mean_psnr_seq, k_values);
    summary.trend_positive = summary.spearman_psnr_vs_k > 0.0;
    for(std::size_t s = 0; s < psnr_mean_at_max.size(); ++s){
        if(psnr_mean_at_max[s] >= psnr_median_at_max[s]){
            ++summary.mean_beats_median_seeds;
        }
    }

    if(csv.is_open()){
        csv.close();
        std::error_code ec;
        fs::rename(csv_partial, csv_final, ec);
        if(ec){
            throw std::runtime_error("rename failed for " + csv_final + ": " + ec.message());
        }

        json doc;
        doc["max_atlases"] = n;
        doc["seed_count"] = summary.seed_count;
        doc["target_contrast"] = config.target_contrast;
        json by_k = json::object();
        for(const auto& [k, v] : summary.mean_psnr_by_k){
            by_k[std::to_string(k)] = {{"psnr", v}, {"ssim", summary.mean_ssim_by_k.at(k)}};
        }
        doc["mean_fusion_by_atlas_count"] = by_k;
        doc["spearman_psnr_vs_k"] = summary.spearman_psnr_vs_k;
        doc["trend_positive"] = summary.trend_positive;
        doc["mean_beats_median_seeds"] = summary.mean_beats_median_seeds;
        write_text_file((fs::path(config.out_dir) / "sweep_summary.json").string(), doc.dump(2) + "\n");
    }
    return summary;
}

} // namespace dirsynth
