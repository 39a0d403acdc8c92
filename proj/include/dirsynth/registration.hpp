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

#ifndef DIRSYNTH_REGISTRATION_HPP
#define DIRSYNTH_REGISTRATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dirsynth/objective.hpp"
#include "dirsynth/transform.hpp"
#include "dirsynth/volume.hpp"

namespace dirsynth {

enum class RegistrationMode { unsupervised, supervised };

struct RegistrationConfig {
    LossConfig loss = default_unsupervised_loss();
    std::vector<int> pyramid_schedule{4, 2, 1};
    std::vector<int> iterations_per_level{200, 150, 80};
    double step_size = 0.5;        // max voxel change of the velocity per update
    double step_decay = 1.0;       // geometric decay applied per level restart
    double convergence_tol = 1e-4; // relative total-loss change over 5 iterations
    int exp_steps = 6;             // raised automatically when the stability guard demands it
    // Sobolev preconditioning: the energy gradient is Gaussian-smoothed by
    // this sigma (voxels of the current level) before each step. Plain
    // pointwise descent stalls on piecewise-constant anatomy because forces
    // live only on structure boundaries; smoothing carries them into region
    // interiors.
    double gradient_smoothing_sigma = 8.0;
    RegistrationMode mode = RegistrationMode::unsupervised;
    std::uint64_t seed = 0;        // reserved; the optimizer is deterministic
};

// Structural checks: schedule/iteration lengths match, positive parameters,
// loss config valid, supervised mode carries a secondary_contrast term.
void validate(const RegistrationConfig& config);

struct LossTraceEntry {
    double total = 0.0;
    std::vector<double> term_values;
};

struct RegistrationResult {
    DisplacementField displacement; // finest grid, exponential provenance
    VelocityField velocity;
    std::vector<std::vector<LossTraceEntry>> loss_trace; // per level, per evaluation
    bool converged = false;         // finest level stopped on tolerance
    double wall_time_seconds = 0.0;
};

// Non-owning view of one subject's inputs. labels and secondary may be null
// when no loss term references them.
struct RegistrationSubject {
    const Volume* image = nullptr;
    const LabelMap* labels = nullptr;
    const Volume* secondary = nullptr;
};

// Multi-resolution gradient descent on a stationary velocity field
// minimizing the configured energy, coarse to fine. The velocity starts at
// zero on the coarsest level and is trilinearly upsampled between levels
// with vectors rescaled to the finer grid's voxel units. Each level keeps
// the best-loss velocity seen, so the final total loss never exceeds the
// level's initial loss (and, at the finest level, never exceeds the
// zero-velocity loss).
RegistrationResult register_pair(const RegistrationSubject& fixed,
                                 const RegistrationSubject& moving,
                                 const RegistrationConfig& config);

// register_pair per mover, in input order, bit-identical to the individual
// calls. workers > 1 runs movers concurrently; results do not depend on the
// worker count.
std::vector<RegistrationResult> register_batch(const RegistrationSubject& fixed,
                                               std::span<const RegistrationSubject> movers,
                                               const RegistrationConfig& config,
                                               int workers = 1);

} // namespace dirsynth

#endif
