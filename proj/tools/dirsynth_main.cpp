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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dirsynth/errors.hpp"
#include "dirsynth/io.hpp"
#include "dirsynth/metrics.hpp"
#include "dirsynth/phantom.hpp"
#include "dirsynth/registration.hpp"
#include "dirsynth/sampler.hpp"
#include "dirsynth/synthesis.hpp"
#include "dirsynth/transform.hpp"
#include "dirsynth/volume.hpp"
#include "dirsynth/workflows.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dirsynth;

namespace {

// ---------------------------------------------------------------- options

struct RegOptions {
    std::vector<int> pyramid{4, 2, 1};
    std::vector<int> iterations{200, 150, 80};
    double step_size = 0.5;
    double step_decay = 1.0;
    double tol = 1e-4;
    double grad_sigma = 8.0;
    int exp_steps = 6;
    std::uint64_t seed = 0;
    double mse_weight = 1.0;
    double ncc_weight = 0.0;
    double dice_weight = 1.0;
    double reg_weight = 1.0;
    double secondary_weight = 1.0;
    bool supervised = false;
};

void add_reg_options(CLI::App* cmd, RegOptions& o){
    cmd->add_option("--pyramid", o.pyramid, "Pyramid downsampling factors, coarse to fine")
        ->delimiter(',');
    cmd->add_option("--iterations", o.iterations, "Gradient-descent iterations per level")
        ->delimiter(',');
    cmd->add_option("--step-size", o.step_size, "Velocity update step in voxels");
    cmd->add_option("--step-decay", o.step_decay, "Geometric step decay per level");
    cmd->add_option("--tol", o.tol, "Relative loss-change convergence tolerance");
    cmd->add_option("--grad-sigma", o.grad_sigma, "Gradient smoothing sigma in voxels (0 disables)");
    cmd->add_option("--exp-steps", o.exp_steps, "Scaling-and-squaring steps");
    cmd->add_option("--seed", o.seed, "Seed recorded in the run configuration");
    cmd->add_option("--mse-weight", o.mse_weight, "Primary-contrast MSE weight");
    cmd->add_option("--ncc-weight", o.ncc_weight, "Primary-contrast NCC weight");
    cmd->add_option("--dice-weight", o.dice_weight, "Label Dice weight (needs label maps)");
    cmd->add_option("--reg-weight", o.reg_weight, "Velocity smoothness weight");
    cmd->add_option("--secondary-weight", o.secondary_weight, "Secondary-contrast MSE weight (supervised)");
    cmd->add_flag("--supervised", o.supervised, "Add the secondary-contrast MSE term");
}

RegistrationConfig make_config(const RegOptions& o, bool have_labels){
    RegistrationConfig c;
    c.pyramid_schedule = o.pyramid;
    c.iterations_per_level = o.iterations;
    c.step_size = o.step_size;
    c.step_decay = o.step_decay;
    c.convergence_tol = o.tol;
    c.gradient_smoothing_sigma = o.grad_sigma;
    c.exp_steps = o.exp_steps;
    c.seed = o.seed;
    c.mode = o.supervised ? RegistrationMode::supervised : RegistrationMode::unsupervised;
    c.loss.terms.clear();
    if(o.mse_weight > 0.0){
        c.loss.terms.push_back({LossKind::mse, o.mse_weight, LossTarget::primary_contrast});
    }
    if(o.ncc_weight > 0.0){
        c.loss.terms.push_back({LossKind::ncc, o.ncc_weight, LossTarget::primary_contrast});
    }
    if(have_labels && o.dice_weight > 0.0){
        c.loss.terms.push_back({LossKind::dice, o.dice_weight, LossTarget::labels});
    }
    if(o.reg_weight > 0.0){
        c.loss.terms.push_back({LossKind::regularizer, o.reg_weight, LossTarget::velocity});
    }
    if(o.supervised){
        c.loss.terms.push_back({LossKind::mse, o.secondary_weight, LossTarget::secondary_contrast});
    }
    return c;
}

struct PhantomOptions {
    int dims = 64;
    std::uint64_t seed = 0;
    int structures = 8;
    double min_radius = 5.0;
    double max_radius = 9.0;
    double smoothness = 8.0;
    double max_magnitude = 5.0;
    double noise_sigma = 0.02;
    std::vector<double> tis{400.0, 1400.0};
};

void add_phantom_options(CLI::App* cmd, PhantomOptions& o){
    cmd->add_option("--dims", o.dims, "Cubic grid size in voxels (>= 32)");
    cmd->add_option("--phantom-seed", o.seed, "Phantom generation seed");
    cmd->add_option("--structures", o.structures, "Extra seeded structures inside the brain");
    cmd->add_option("--min-radius", o.min_radius, "Smallest structure radius in voxels");
    cmd->add_option("--max-radius", o.max_radius, "Largest structure radius in voxels");
    cmd->add_option("--smoothness", o.smoothness, "Deformation smoothness sigma in voxels");
    cmd->add_option("--max-magnitude", o.max_magnitude, "Peak deformation magnitude in voxels");
    cmd->add_option("--noise-sigma", o.noise_sigma, "Noise as a fraction of the intensity range");
    cmd->add_option("--tis", o.tis, "Inversion times in ms, one contrast each")->delimiter(',');
}

PhantomSpec make_phantom_spec(const PhantomOptions& o){
    PhantomSpec spec;
    spec.dims = Index3{o.dims, o.dims, o.dims};
    spec.seed = o.seed;
    spec.structures.count = o.structures;
    spec.structures.min_radius_vox = o.min_radius;
    spec.structures.max_radius_vox = o.max_radius;
    spec.deformation.smoothness_vox = o.smoothness;
    spec.deformation.max_magnitude_vox = o.max_magnitude;
    spec.noise_sigma = o.noise_sigma;
    spec.inversion_times_ms = o.tis;
    return spec;
}

std::string loss_term_name(const LossTerm& term){
    switch(term.target){
        case LossTarget::primary_contrast: return to_string(term.kind) + "_primary";
        case LossTarget::secondary_contrast: return to_string(term.kind) + "_secondary";
        case LossTarget::labels: return to_string(term.kind) + "_labels";
        case LossTarget::velocity: return to_string(term.kind);
    }
    return to_string(term.kind);
}

void write_loss_trace_csv(const RegistrationResult& result, const LossConfig& loss,
                          const std::string& path){
    std::ostringstream out;
    out << "level,iteration,total";
    for(const LossTerm& term : loss.terms){
        out << ',' << loss_term_name(term);
    }
    out << '\n';
    for(std::size_t level = 0; level < result.loss_trace.size(); ++level){
        for(std::size_t i = 0; i < result.loss_trace[level].size(); ++i){
            const LossTraceEntry& entry = result.loss_trace[level][i];
            out << level << ',' << i << ',' << format_double(entry.total);
            for(const double v : entry.term_values){
                out << ',' << format_double(v);
            }
            out << '\n';
        }
    }
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------- register

struct RegisterArgs {
    std::string fixed_path, moving_path;
    std::string fixed_labels_path, moving_labels_path;
    std::string fixed_secondary_path, moving_secondary_path;
    std::string truth_path, mask_path;
    std::string out_dir;
    RegOptions reg;
};

void run_register(const RegisterArgs& args){
    const Volume fixed = read_as_volume(args.fixed_path);
    const Volume moving = read_as_volume(args.moving_path);
    std::optional<LabelMap> fixed_labels, moving_labels;
    if(!args.fixed_labels_path.empty()){
        fixed_labels = read_as_labels(args.fixed_labels_path);
    }
    if(!args.moving_labels_path.empty()){
        moving_labels = read_as_labels(args.moving_labels_path);
    }
    if(fixed_labels.has_value() != moving_labels.has_value()){
        throw std::invalid_argument("provide label maps for both sides or neither");
    }
    std::optional<Volume> fixed_secondary, moving_secondary;
    if(args.reg.supervised){
        if(args.fixed_secondary_path.empty() || args.moving_secondary_path.empty()){
            throw std::invalid_argument("--supervised needs --fixed-secondary and --moving-secondary");
        }
        fixed_secondary = read_as_volume(args.fixed_secondary_path);
        moving_secondary = read_as_volume(args.moving_secondary_path);
    }

    const RegistrationConfig config = make_config(args.reg, fixed_labels.has_value());
    RegistrationSubject fixed_subject{&fixed, fixed_labels ? &*fixed_labels : nullptr,
                                      fixed_secondary ? &*fixed_secondary : nullptr};
    RegistrationSubject moving_subject{&moving, moving_labels ? &*moving_labels : nullptr,
                                       moving_secondary ? &*moving_secondary : nullptr};

    const RegistrationResult result = register_pair(fixed_subject, moving_subject, config);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    write_displacement(result.displacement, (out / "displacement.nii").string());
    const Volume warped = warp(moving, result.displacement);
    write_volume(warped, (out / "warped.nii").string());
    if(moving_labels){
        write_labels(warp_labels(*moving_labels, result.displacement),
                     (out / "warped_labels.nii").string());
    }
    write_loss_trace_csv(result, config.loss, (out / "loss_trace.csv").string());

    json summary;
    summary["converged"] = result.converged;
    summary["final_total"] = result.loss_trace.back().back().total;
    summary["levels"] = config.pyramid_schedule.size();
    const Volume det = jacobian_determinant(result.displacement);
    summary["min_interior_jacobian"] = min_interior_value(det);

    if(!args.truth_path.empty()){
        const DisplacementField truth = read_as_displacement(args.truth_path);
        if(!(truth.dims == result.displacement.dims)){
            throw std::invalid_argument("truth displacement dims do not match the registration grid");
        }
        const std::vector<std::uint8_t> mask = args.mask_path.empty()
                                                   ? default_foreground_mask(fixed)
                                                   : read_as_mask(args.mask_path);
        double epe = 0.0;
        std::size_t count = 0;
        for(std::size_t i = 0; i < truth.vectors.size(); ++i){
            if(mask[i] != 0){
                epe += (result.displacement.vectors[i] - truth.vectors[i]).norm();
                ++count;
            }
        }
        if(count == 0){
            throw std::invalid_argument("endpoint-error mask is empty");
        }
        summary["endpoint_error_mean_foreground"] = epe / static_cast<double>(count);
    }
    write_text_file((out / "summary.json").string(), summary.dump(2) + "\n");

    std::cout << "registration finished in " << result.wall_time_seconds << " s, final total "
              << result.loss_trace.back().back().total;
    if(summary.contains("endpoint_error_mean_foreground")){
        std::cout << ", endpoint error "
                  << summary["endpoint_error_mean_foreground"].get<double>() << " voxels";
    }
    std::cout << "\n";
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string fixed_path, fixed_labels_path, fixed_secondary_path;
    std::string manifest_path;
    std::vector<std::string> contrasts{"wmn"};
    std::string fusion = "mean";
    std::string supervised_contrast;
    bool save_warped_labels = false;
    std::string out_dir;
    int workers = 1;
    RegOptions reg;
};

void run_synth(const SynthArgs& args){
    AtlasSubject fixed;
    fixed.id = "fixed";
    fixed.primary_contrast = read_as_volume(args.fixed_path);
    if(!args.fixed_labels_path.empty()){
        fixed.labels = read_as_labels(args.fixed_labels_path);
    }
    if(args.reg.supervised){
        if(args.supervised_contrast.empty() || args.fixed_secondary_path.empty()){
            throw std::invalid_argument(
                "--supervised needs --supervised-contrast and --fixed-secondary");
        }
        fixed.secondary_contrasts[args.supervised_contrast] =
            read_as_volume(args.fixed_secondary_path);
    }

    const auto entries = read_atlas_manifest(args.manifest_path);
    if(entries.empty()){
        throw std::invalid_argument("atlas manifest is empty");
    }
    const std::string base_dir = fs::path(args.manifest_path).parent_path().string();
    std::vector<AtlasSubject> atlases;
    atlases.reserve(entries.size());
    for(const AtlasManifestEntry& entry : entries){
        atlases.push_back(load_atlas_subject(entry, base_dir));
    }

    const FusionMethod method = fusion_method_from_string(args.fusion);
    const bool have_labels = fixed.labels.has_value();
    const RegistrationConfig config = make_config(args.reg, have_labels);

    // one registration per atlas regardless of how many contrasts are asked for
    const SynthesisPlan plan =
        plan_synthesis(fixed, atlases, config, args.workers, args.supervised_contrast);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);

    if(args.save_warped_labels){
        for(std::size_t k = 0; k < plan.order.size(); ++k){
            const AtlasSubject& atlas = atlases[plan.order[k]];
            if(!atlas.labels){
                throw std::invalid_argument("--save-warped-labels needs labels on atlas '" +
                                            atlas.id + "'");
            }
            write_labels(warp_labels(*atlas.labels, plan.registrations[k].displacement),
                         (out / ("warped_labels_" + atlas.id + ".nii")).string());
        }
    }

    for(const std::string& contrast : args.contrasts){
        const FusionResult fused = synthesize_contrast(plan, fixed, atlases, contrast, method);
        write_volume(fused.synthetic, (out / ("synthetic_" + contrast + ".nii")).string());

        json meta;
        meta["contrast"] = contrast;
        meta["method"] = to_string(fused.method);
        meta["atlas_ids"] = fused.atlas_ids;
        meta["weights"] = fused.weights;
        json reg_ids = json::array();
        for(const std::string& id : fused.atlas_ids){
            reg_ids.push_back("reg_" + id);
        }
        meta["registration_ids"] = reg_ids;
        meta["registrations_performed"] = plan.registrations.size();
        write_text_file((out / ("fusion_" + contrast + ".json")).string(), meta.dump(2) + "\n");
    }
    std::cout << "synthesized " << args.contrasts.size() << " contrast(s) from "
              << atlases.size() << " atlas(es) with " << plan.registrations.size()
              << " registrations\n";
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string reference_path, test_path, mask_path;
    std::string reference_labels_path, test_labels_path;
    std::string out_dir;
};

void run_eval(const EvalArgs& args){
    const Volume reference = read_as_volume(args.reference_path);
    const Volume test = read_as_volume(args.test_path);
    const std::vector<std::uint8_t> mask = args.mask_path.empty()
                                               ? default_foreground_mask(reference)
                                               : read_as_mask(args.mask_path);
    std::optional<LabelMap> ref_labels, test_labels;
    if(!args.reference_labels_path.empty()){
        ref_labels = read_as_labels(args.reference_labels_path);
    }
    if(!args.test_labels_path.empty()){
        test_labels = read_as_labels(args.test_labels_path);
    }
    if(ref_labels.has_value() != test_labels.has_value()){
        throw std::invalid_argument("provide label maps for both sides or neither");
    }

    const MetricReport report = evaluate_metrics(reference, test, mask,
                                                 ref_labels ? &*ref_labels : nullptr,
                                                 test_labels ? &*test_labels : nullptr);

    std::ostringstream csv;
    csv << "psnr,ssim,mask_voxels\n";
    csv << format_double(report.psnr) << ',' << format_double(report.ssim) << ','
        << report.mask_voxels << '\n';
    if(!report.dice_per_label.empty()){
        csv << "label,dice\n";
        for(const auto& [label, value] : report.dice_per_label){
            csv << label << ',' << format_double(value) << '\n';
        }
    }
    if(!args.out_dir.empty()){
        fs::create_directories(args.out_dir);
        write_text_file((fs::path(args.out_dir) / "metrics.csv").string(), csv.str());
    }
    std::cout << csv.str();
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    PhantomOptions phantom;
    int max_atlases = 9;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string target_contrast = "wmn";
    std::string out_dir;
    int workers = 1;
    RegOptions reg;
};

void run_sweep_cmd(const SweepArgs& args){
    SweepConfig config;
    config.phantom = make_phantom_spec(args.phantom);
    config.max_atlases = args.max_atlases;
    config.seeds = args.seeds;
    config.target_contrast = args.target_contrast;
    config.registration = make_config(args.reg, true);
    config.workers = args.workers;
    config.out_dir = args.out_dir;

    const SweepSummary summary = run_sweep(config);
    std::cout << "sweep of k=1.." << args.max_atlases << " over " << summary.seed_count
              << " seeds: mean PSNR " << summary.mean_psnr_by_k.at(1) << " dB at k=1, "
              << summary.mean_psnr_by_k.at(args.max_atlases) << " dB at k=" << args.max_atlases
              << "; Spearman(PSNR, k) = " << summary.spearman_psnr_vs_k
              << (summary.trend_positive ? " (positive trend)" : " (no positive trend)") << "\n";
    std::cout << "mean fusion beat median at k=" << args.max_atlases << " in "
              << summary.mean_beats_median_seeds << "/" << summary.seed_count << " seeds\n";
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
    PhantomOptions phantom;
    int count = 1;
    std::string out_dir;
};

void run_phantom(const PhantomArgs& args){
    if(args.count < 1){
        throw std::invalid_argument("--n must be at least 1");
    }
    const PhantomSpec spec = make_phantom_spec(args.phantom);
    const auto cohort = generate_cohort(spec, args.count);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    std::vector<AtlasManifestEntry> manifest;
    for(std::size_t i = 0; i < cohort.size(); ++i){
        char name[32];
        std::snprintf(name, sizeof(name), "subject_%03zu", i);
        const fs::path dir = out / name;
        fs::create_directories(dir);

        AtlasManifestEntry entry;
        entry.id = name;
        for(const auto& [contrast, volume] : cohort[i].contrasts){
            const std::string file = contrast + ".nii";
            write_volume(volume, (dir / file).string());
            entry.contrast_paths[contrast] = (fs::path(name) / file).string();
            if(contrast == "csfn"){
                entry.primary_path = entry.contrast_paths[contrast];
            }
        }
        if(entry.primary_path.empty()){
            entry.primary_path = entry.contrast_paths.begin()->second;
        }
        write_labels(cohort[i].tissue_map, (dir / "labels.nii").string());
        entry.labels_path = (fs::path(name) / "labels.nii").string();
        write_mask(cohort[i].tissue_map.dims, cohort[i].tissue_map.spacing,
                   cohort[i].tissue_map.origin, cohort[i].mask, (dir / "mask.nii").string());
        if(cohort[i].true_displacement){
            write_displacement(*cohort[i].true_displacement,
                               (dir / "truth_displacement.nii").string());
        }
        manifest.push_back(std::move(entry));
    }
    write_atlas_manifest(manifest, (out / "manifest.json").string());
    std::cout << "wrote " << cohort.size() << " phantom subject(s) to " << args.out_dir << "\n";
}

} // namespace

int main(int argc, char** argv){
    CLI::App app{"dirsynth: deformable-registration-based multi-contrast image synthesis"};
    app.set_config("--config", "", "Read options from an INI/TOML config file");
    app.require_subcommand(1);

    int workers = 1;
    app.add_option("--workers", workers, "Parallel jobs across atlases/seeds")
        ->envname("DIRSYNTH_WORKERS");

    RegisterArgs reg_args;
    CLI::App* reg = app.add_subcommand("register", "Estimate a deformation between two volumes");
    reg->add_option("--fixed", reg_args.fixed_path, "Fixed (target) volume")
        ->required()->check(CLI::ExistingFile);
    reg->add_option("--moving", reg_args.moving_path, "Moving volume")
        ->required()->check(CLI::ExistingFile);
    reg->add_option("--fixed-labels", reg_args.fixed_labels_path, "Fixed segmentation labels")
        ->check(CLI::ExistingFile);
    reg->add_option("--moving-labels", reg_args.moving_labels_path, "Moving segmentation labels")
        ->check(CLI::ExistingFile);
    reg->add_option("--fixed-secondary", reg_args.fixed_secondary_path,
                    "Fixed secondary contrast (supervised mode)")->check(CLI::ExistingFile);
    reg->add_option("--moving-secondary", reg_args.moving_secondary_path,
                    "Moving secondary contrast (supervised mode)")->check(CLI::ExistingFile);
    reg->add_option("--truth", reg_args.truth_path,
                    "Ground-truth displacement for the endpoint-error summary")
        ->check(CLI::ExistingFile);
    reg->add_option("--mask", reg_args.mask_path, "Foreground mask for the endpoint error")
        ->check(CLI::ExistingFile);
    reg->add_option("--out", reg_args.out_dir, "Output directory")->required();
    add_reg_options(reg, reg_args.reg);
    reg->callback([&](){ run_register(reg_args); });

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Synthesize contrasts by transform transfer and fusion");
    synth->add_option("--fixed", synth_args.fixed_path, "Fixed primary-contrast volume")
        ->required()->check(CLI::ExistingFile);
    synth->add_option("--fixed-labels", synth_args.fixed_labels_path, "Fixed labels")
        ->check(CLI::ExistingFile);
    synth->add_option("--fixed-secondary", synth_args.fixed_secondary_path,
                      "Fixed volume of the supervised contrast")->check(CLI::ExistingFile);
    synth->add_option("--atlases", synth_args.manifest_path, "Atlas manifest JSON")
        ->required()->check(CLI::ExistingFile);
    synth->add_option("--contrasts", synth_args.contrasts, "Contrast names to synthesize")
        ->delimiter(',');
    synth->add_option("--fusion", synth_args.fusion, "Fusion method: mean, median, weighted_mean");
    synth->add_option("--supervised-contrast", synth_args.supervised_contrast,
                      "Contrast name feeding the supervised loss");
    synth->add_flag("--save-warped-labels", synth_args.save_warped_labels,
                    "Write each atlas's warped label map");
    synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
    add_reg_options(synth, synth_args.reg);
    synth->callback([&](){
        synth_args.workers = workers;
        run_synth(synth_args);
    });

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Masked PSNR/SSIM (and Dice) between two volumes");
    eval->add_option("--reference", eval_args.reference_path, "Reference volume")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--test", eval_args.test_path, "Test volume")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--mask", eval_args.mask_path, "Foreground mask (default: derived from reference)")
        ->check(CLI::ExistingFile);
    eval->add_option("--reference-labels", eval_args.reference_labels_path, "Reference labels")
        ->check(CLI::ExistingFile);
    eval->add_option("--test-labels", eval_args.test_labels_path, "Test labels")
        ->check(CLI::ExistingFile);
    eval->add_option("--out", eval_args.out_dir, "Output directory for metrics.csv");
    eval->callback([&](){ run_eval(eval_args); });

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "Moving-image-count sweep on seeded phantoms");
    sweep->add_option("--max-atlases", sweep_args.max_atlases, "Largest atlas count (>= 2)");
    sweep->add_option("--seeds", sweep_args.seeds, "Sweep seeds (>= 3)")->delimiter(',');
    sweep->add_option("--target-contrast", sweep_args.target_contrast, "Contrast to synthesize");
    sweep->add_option("--out", sweep_args.out_dir, "Output directory")->required();
    add_phantom_options(sweep, sweep_args.phantom);
    add_reg_options(sweep, sweep_args.reg);
    sweep->callback([&](){
        sweep_args.workers = workers;
        run_sweep_cmd(sweep_args);
    });

    PhantomArgs phantom_args;
    CLI::App* phantom = app.add_subcommand("phantom", "Generate a deterministic phantom cohort");
    phantom->add_option("--n", phantom_args.count, "Number of subjects");
    phantom->add_option("--out", phantom_args.out_dir, "Output directory")->required();
    add_phantom_options(phantom, phantom_args.phantom);
    phantom->callback([&](){ run_phantom(phantom_args); });

    try{
        app.parse(argc, argv);
    }catch(const CLI::ParseError& e){
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }catch(const NumericalError& e){
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }catch(const FormatError& e){
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    }catch(const DegenerateInputError& e){
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 2;
    }catch(const FitError& e){
        std::cerr << "fit failure: " << e.what() << "\n";
        return 2;
    }catch(const GenerationError& e){
        std::cerr << "generation failure: " << e.what() << "\n";
        return 2;
    }catch(const std::invalid_argument& e){
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }catch(const std::exception& e){
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
