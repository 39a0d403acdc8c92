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

#include "dirsynth/registration.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "dirsynth/errors.hpp"
#include "gaussian_detail.hpp"
#include "interp_detail.hpp"

namespace dirsynth {

void validate(const RegistrationConfig& config){
    validate(config.loss);
    if(config.pyramid_schedule.empty() ||
       config.pyramid_schedule.size() != config.iterations_per_level.size()){
        throw std::invalid_argument("pyramid schedule and iteration list must be non-empty and equal length");
    }
    for(const int it : config.iterations_per_level){
        if(it < 1){
            throw std::invalid_argument("iterations_per_level entries must be positive");
        }
    }
    if(!(config.step_size > 0.0)){
        throw std::invalid_argument("step_size must be positive");
    }
    if(!(config.step_decay > 0.0) || config.step_decay > 1.0){
        throw std::invalid_argument("step_decay must lie in (0, 1]");
    }
    if(!(config.convergence_tol > 0.0)){
        throw std::invalid_argument("convergence_tol must be positive");
    }
    if(config.exp_steps < 1){
        throw std::invalid_argument("exp_steps must be positive");
    }
    if(config.gradient_smoothing_sigma < 0.0){
        throw std::invalid_argument("gradient_smoothing_sigma must be non-negative");
    }
    if(config.mode == RegistrationMode::supervised){
        bool has_secondary = false;
        for(const LossTerm& term : config.loss.terms){
            if(term.target == LossTarget::secondary_contrast){
                has_secondary = true;
            }
        }
        if(!has_secondary){
            throw std::invalid_argument("supervised mode requires a secondary_contrast loss term");
        }
    }
}

namespace {

bool spacing_close(const Vec3& a, const Vec3& b){
    auto close = [](double x, double y){
        return std::fabs(x - y) <= 1e-6 * std::max({1.0, std::fabs(x), std::fabs(y)});
    };
    return close(a.x, b.x) && close(a.y, b.y) && close(a.z, b.z);
}

bool term_active(const LossConfig& loss, LossTarget target){
    for(const LossTerm& term : loss.terms){
        if(term.target == target && term.weight > 0.0){
            return true;
        }
    }
    return false;
}

// Move the velocity from a coarse pyramid grid to a finer one. Sample
// positions align by physical location; vectors are rescaled so the
// displacement is preserved in the finer grid's voxel units.
VelocityField upsample_velocity(const VelocityField& coarse, int coarse_factor,
                                int fine_factor, const Index3& fine_dims, const Vec3& fine_spacing){
    const double coord_scale = static_cast<double>(fine_factor) / static_cast<double>(coarse_factor);
    const double vector_scale = static_cast<double>(coarse_factor) / static_cast<double>(fine_factor);

    VelocityField fine;
    fine.dims = fine_dims;
    fine.spacing = fine_spacing;
    fine.vectors.resize(voxel_count(fine_dims));

    detail::TrilinearTaps taps;
    std::size_t idx = 0;
    for(int z = 0; z < fine_dims.z; ++z){
        for(int y = 0; y < fine_dims.y; ++y){
            for(int x = 0; x < fine_dims.x; ++x, ++idx){
                const Vec3 coord{(static_cast<double>(x) + 0.5) * coord_scale - 0.5,
                                 (static_cast<double>(y) + 0.5) * coord_scale - 0.5,
                                 (static_cast<double>(z) + 0.5) * coord_scale - 0.5};
                detail::make_taps(coarse.dims, coord, taps);
                fine.vectors[idx] = detail::sample_vec(coarse.vectors.data(), coarse.dims, taps) * vector_scale;
            }
        }
    }
    return fine;
}

struct LevelData {
    Volume fixed;
    Volume moving;
    std::optional<LabelMap> fixed_labels;
    std::optional<LabelMap> moving_labels;
    std::optional<Volume> fixed_secondary;
    std::optional<Volume> moving_secondary;
    int factor = 1;
};

void smooth_gradient(std::vector<Vec3>& gradient, const Index3& dims, double sigma){
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> component(gradient.size());
    for(int c = 0; c < 3; ++c){
        for(std::size_t i = 0; i < gradient.size(); ++i){
            component[i] = (c == 0) ? gradient[i].x : (c == 1 ? gradient[i].y : gradient[i].z);
        }
        detail::gaussian_blur_inplace(component, dims, sigma, radius);
        for(std::size_t i = 0; i < gradient.size(); ++i){
            if(c == 0){ gradient[i].x = component[i]; }
            else if(c == 1){ gradient[i].y = component[i]; }
            else { gradient[i].z = component[i]; }
        }
    }
}

} // namespace

RegistrationResult register_pair(const RegistrationSubject& fixed,
                                 const RegistrationSubject& moving,
                                 const RegistrationConfig& config){
    const auto t_start = std::chrono::steady_clock::now();
    validate(config);

    if(!fixed.image || !moving.image){
        throw std::invalid_argument("register_pair: fixed and moving images are required");
    }
    if(!(fixed.image->dims == moving.image->dims)){
        throw std::invalid_argument("register_pair: fixed and moving dims differ");
    }
    if(!spacing_close(fixed.image->spacing, moving.image->spacing)){
        throw std::invalid_argument("register_pair: fixed and moving spacing differ");
    }

    const bool need_labels = term_active(config.loss, LossTarget::labels);
    const bool need_secondary = term_active(config.loss, LossTarget::secondary_contrast);
    if(need_labels && (!fixed.labels || !moving.labels)){
        throw std::invalid_argument("register_pair: loss references labels but label maps are missing");
    }
    if(need_secondary && (!fixed.secondary || !moving.secondary)){
        throw std::invalid_argument("register_pair: loss references the secondary contrast but volumes are missing");
    }
    if(need_labels && (!(fixed.labels->dims == fixed.image->dims) || !(moving.labels->dims == moving.image->dims))){
        throw std::invalid_argument("register_pair: label map dims differ from image dims");
    }
    if(need_secondary && (!(fixed.secondary->dims == fixed.image->dims) || !(moving.secondary->dims == moving.image->dims))){
        throw std::invalid_argument("register_pair: secondary volume dims differ from image dims");
    }

    // per-level inputs, coarse to fine, each downsampled from the originals
    std::vector<LevelData> levels;
    levels.reserve(config.pyramid_schedule.size());
    {
        const Pyramid fixed_pyr = build_pyramid(*fixed.image, need_labels ? fixed.labels : nullptr,
                                                config.pyramid_schedule);
        const Pyramid moving_pyr = build_pyramid(*moving.image, need_labels ? moving.labels : nullptr,
                                                 config.pyramid_schedule);
        for(std::size_t i = 0; i < config.pyramid_schedule.size(); ++i){
            LevelData level;
            level.factor = config.pyramid_schedule[i];
            level.fixed = fixed_pyr.levels[i].volume;
            level.moving = moving_pyr.levels[i].volume;
            level.fixed_labels = fixed_pyr.levels[i].labels;
            level.moving_labels = moving_pyr.levels[i].labels;
            if(need_secondary){
                level.fixed_secondary = downsample(*fixed.secondary, level.factor);
                level.moving_secondary = downsample(*moving.secondary, level.factor);
            }
            levels.push_back(std::move(level));
        }
    }

    RegistrationResult result;
    result.loss_trace.resize(levels.size());

    VelocityField velocity = VelocityField::zeros(levels.front().fixed.dims, levels.front().fixed.spacing);
    long global_iteration = 0;

    for(std::size_t li = 0; li < levels.size(); ++li){
        const LevelData& level = levels[li];
        if(li > 0){
            velocity = upsample_velocity(velocity, levels[li - 1].factor, level.factor,
                                         level.fixed.dims, level.fixed.spacing);
        }

        const double step = config.step_size * std::pow(config.step_decay, static_cast<double>(li));
        const int budget = config.iterations_per_level[li];
        const bool finest = (li + 1 == levels.size());
        auto& trace = result.loss_trace[li];

        EvalState state;
        state.fixed_primary = &level.fixed;
        state.moving_primary = &level.moving;
        if(need_labels){
            state.fixed_labels = &*level.fixed_labels;
            state.moving_labels = &*level.moving_labels;
        }
        if(need_secondary){
            state.fixed_secondary = &*level.fixed_secondary;
            state.moving_secondary = &*level.moving_secondary;
        }

        auto evaluate_velocity = [&](const VelocityField& v, LossReport& report) -> double {
            const int steps = std::max(config.exp_steps, required_exp_steps(v));
            const DisplacementField u = exponentiate(v, steps);
            state.velocity = &v;
            state.displacement = &u;
            report = evaluate(config.loss, state);
            if(!std::isfinite(report.total)){
                throw NumericalError("non-finite total loss during optimization", global_iteration);
            }
            return report.total;
        };

        VelocityField best_velocity = velocity;
        double best_total = std::numeric_limits<double>::infinity();
        std::vector<double> best_terms;

        // the finest level's result must never lose to doing nothing
        if(finest && li > 0){
            LossReport zero_report;
            const VelocityField zero = VelocityField::zeros(level.fixed.dims, level.fixed.spacing);
            const double zero_total = evaluate_velocity(zero, zero_report);
            best_total = zero_total;
            best_velocity = zero;
            best_terms = zero_report.term_values;
        }

        bool level_converged = false;
        LossReport report;
        for(int i = 0; i <= budget; ++i){
            const double total = evaluate_velocity(velocity, report);
            trace.push_back(LossTraceEntry{total, report.term_values});
            if(total < best_total){
                best_total = total;
                best_velocity = velocity;
                best_terms = report.term_values;
            }
            if(static_cast<std::size_t>(i) >= 5){
                const double prev = trace[trace.size() - 6].total;
                const double rel = std::fabs(total - prev) / std::max(std::fabs(prev), 1e-30);
                if(rel < config.convergence_tol){
                    level_converged = true;
                    break;
                }
            }
            if(i == budget){
                break; // last evaluation only assesses the final update
            }

            if(config.gradient_smoothing_sigma > 0.0){
                smooth_gradient(report.gradient, level.fixed.dims, config.gradient_smoothing_sigma);
            }
            double gmax = 0.0;
            for(const Vec3& g : report.gradient){
                gmax = std::max(gmax, g.norm());
            }
            if(gmax == 0.0){
                level_converged = true;
                break;
            }
            const double scale = step / gmax;
            for(std::size_t vi = 0; vi < velocity.vectors.size(); ++vi){
                velocity.vectors[vi] -= scale * report.gradient[vi];
            }
            ++global_iteration;
        }

        velocity = std::move(best_velocity);
        // the trace ends at the state the level actually adopts
        if(best_total < trace.back().total){
            trace.push_back(LossTraceEntry{best_total, best_terms});
        }
        if(finest){
            result.converged = level_converged;
        }
    }

    const int final_steps = std::max(config.exp_steps, required_exp_steps(velocity));
    result.displacement = exponentiate(velocity, final_steps);
    result.velocity = std::move(velocity);
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

std::vector<RegistrationResult> register_batch(const RegistrationSubject& fixed,
                                               std::span<const RegistrationSubject> movers,
                                               const RegistrationConfig& config,
                                               int workers){
    validate(config);
    if(movers.empty()){
        throw std::invalid_argument("register_batch: no movers given");
    }
    for(std::size_t i = 0; i < movers.size(); ++i){
        if(!movers[i].image){
            throw std::invalid_argument("register_batch: mover " + std::to_string(i) + " has no image");
        }
        if(!(movers[i].image->dims == fixed.image->dims)){
            throw std::invalid_argument("register_batch: mover " + std::to_string(i) +
                                        " does not share the fixed geometry");
        }
    }

    std::vector<RegistrationResult> results(movers.size());
    if(workers < 1){ workers = 1; }
    const int n_threads = std::min<int>(workers, static_cast<int>(movers.size()));

    if(n_threads <= 1){
        for(std::size_t i = 0; i < movers.size(); ++i){
            try{
                results[i] = register_pair(fixed, movers[i], config);
            }catch(const NumericalError& e){
                throw NumericalError("mover " + std::to_string(i) + ": " + e.what(), e.iteration());
            }catch(const std::exception& e){
                throw std::invalid_argument("mover " + std::to_string(i) + ": " + e.what());
            }
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(movers.size());
    auto worker = [&](){
        while(true){
            const std::size_t i = next.fetch_add(1);
            if(i >= movers.size()){ return; }
            try{
                results[i] = register_pair(fixed, movers[i], config);
            }catch(...){
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for(int t = 0; t < n_threads; ++t){
        pool.emplace_back(worker);
    }
    for(std::thread& t : pool){
        t.join();
    }
    for(std::size_t i = 0; i < errors.size(); ++i){
        if(errors[i]){
            try{
                std::rethrow_exception(errors[i]);
            }catch(const NumericalError& e){
                throw NumericalError("mover " + std::to_string(i) + ": " + e.what(), e.iteration());
            }catch(const std::exception& e){
                throw std::invalid_argument("mover " + std::to_string(i) + ": " + e.what());
            }
        }
    }
    return results;
}

} // namespace dirsynth
