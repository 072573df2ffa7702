// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Quantum jumps (photon-counting unravelling):
//
//   |dpsi> = -i H |psi> dt - 1/2 sum_j [ L_j^dag L_j - <L_j^dag L_j> ] |psi> dt
//          + sum_j [ L_j / sqrt(<L_j^dag L_j>) - 1 ] |psi> dN_j
//
// with E[dN_j] = <L_j^dag L_j> dt and dN_j dN_k = delta_jk dN_j.

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qsd.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

enum class JumpScheme {
    per_step_bernoulli,  ///< one categorical draw {none, channel 1, channel 2, ...} per step
    waiting_time,        ///< unnormalized no-jump evolution until the norm falls below a uniform draw
};

struct JumpStepperConfig : StepperConfig {
    JumpScheme jump_scheme = JumpScheme::per_step_bernoulli;
};

class JumpStepper {
public:
    JumpStepper(const SystemModel& model, const JumpStepperConfig& cfg, Frame frame = {})
        : cfg_(cfg),
          ws_(model, frame.empty() ? Frame(model.space().subsystems(), Complex(0.0)) : std::move(frame)),
          rng_(make_rng(cfg.rng_seed)),
          per_period_(steps_per_period(cfg.dt)) {
        cfg_.validate();
        rates_.resize(ws_.channels());
        if (cfg_.jump_scheme == JumpScheme::waiting_time) threshold_ = uniform_(rng_);
    }

    GeneratorWorkspace& workspace() noexcept { return ws_; }
    const JumpStepperConfig& config() const noexcept { return cfg_; }

    /// One step. Returns the channel that jumped, or -1.
    int advance(Vector& psi, long step_index, double t) {
        const double dt = cfg_.dt;
        const double norm2 = psi.squaredNorm();
        const std::vector<Vector>& images = ws_.lindblad_images(psi);
        double total_rate = 0.0;
        for (std::size_t j = 0; j < images.size(); ++j) {
            rates_[j] = images[j].squaredNorm() / norm2;
            total_rate += rates_[j];
        }
        if (total_rate * dt > cfg_.rate_limit) {
            throw StepSizeError("jump_step: rate monitor breached (sum_j <L_j^dag L_j> dt = " +
                                std::to_string(total_rate * dt) + ")");
        }
        const double t_drive = cfg_.scheme == DriftScheme::euler ? t : t + 0.5 * dt;
        const double drive = ws_.model().drive_amplitude(t_drive);
        if (cfg_.jump_scheme == JumpScheme::per_step_bernoulli) {
            return bernoulli_step(psi, step_index, norm2, images, dt, drive);
        }
        return waiting_time_step(psi, dt, drive);
    }

    /// Sampling-loop hook: logs jumps into the record.
    void step(Vector& psi, long step_index, double t, TrajectoryRecord& rec) {
        const int channel = advance(psi, step_index, t);
        if (channel >= 0) {
            rec.jumps.push_back(JumpEvent{static_cast<double>(step_index + 1) / static_cast<double>(per_period_), channel});
        }
    }

private:
    void collapse(Vector& psi, std::size_t channel, const Vector& image, double rate) {
        if (!(rate > 0.0)) {
            throw NumericalFault("jump_step: jump drawn for channel " + std::to_string(channel) +
                                 " with zero rate");
        }
        psi = image / image.norm();
    }

    int bernoulli_step(Vector& psi, long step_index, double norm2, const std::vector<Vector>& images, double dt,
                       double drive) {
        const double u = uniform_(rng_);
        double cumulative = 0.0;
        int channel = -1;
        for (std::size_t j = 0; j < images.size(); ++j) {
            cumulative += rates_[j] * dt;
            if (u < cumulative) {
                channel = static_cast<int>(j);
                break;
            }
        }
        // A jump step still carries the drift over dt; it acts on the collapsed state,
        // with the rates re-evaluated there.
        double reference = norm2;
        if (channel >= 0) {
            collapse(psi, static_cast<std::size_t>(channel), images[channel], rates_[channel]);
            reference = 1.0;
            const std::vector<Vector>& after = ws_.lindblad_images(psi);
            for (std::size_t j = 0; j < after.size(); ++j) rates_[j] = after[j].squaredNorm();
        }
        double half_total = 0.0;
        for (double r : rates_) half_total += 0.5 * r;
        ws_.propagate(psi, dt, cfg_.scheme, drive, {}, Complex(half_total));
        const double norm_after = psi.norm();
        if (!std::isfinite(norm_after) || std::abs(norm_after / std::sqrt(reference) - 1.0) > cfg_.norm_drift_limit) {
            throw StepSizeError("jump_step: one-step norm drift exceeds limit; reduce dt");
        }
        if (channel >= 0 || (step_index + 1) % cfg_.renormalize_every == 0) psi /= norm_after;
        return channel;
    }

    // The generator already carries -1/2 sum L^dag L, so the squared norm decays as the
    // survival probability of the no-jump record.
    int waiting_time_step(Vector& psi, double dt, double drive) {
        ws_.propagate(psi, dt, cfg_.scheme, drive, {}, Complex(0.0));
        const double norm2 = psi.squaredNorm();
        if (!std::isfinite(norm2)) throw StepSizeError("jump_step: non-finite norm; reduce dt");
        if (norm2 > threshold_) return -1;

        const std::vector<Vector>& images = ws_.lindblad_images(psi);
        double total = 0.0;
        for (std::size_t j = 0; j < images.size(); ++j) {
            rates_[j] = images[j].squaredNorm() / norm2;
            total += rates_[j];
        }
        const double u = uniform_(rng_) * total;
        double cumulative = 0.0;
        std::size_t channel = images.size() - 1;
        for (std::size_t j = 0; j < images.size(); ++j) {
            cumulative += rates_[j];
            if (u < cumulative) {
                channel = j;
                break;
            }
        }
        collapse(psi, channel, images[channel], rates_[channel]);
        threshold_ = uniform_(rng_);
        return static_cast<int>(channel);
    }

    JumpStepperConfig cfg_;
    GeneratorWorkspace ws_;
    Rng rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    long per_period_;
    double threshold_ = 0.0;
    std::vector<double> rates_;
};

/// Single per-step-Bernoulli step from the laboratory frame using `rng` for the draw.
inline StateVector jump_step(const StateVector& psi, const SystemModel& model, double t, const JumpStepperConfig& cfg,
                             Rng& rng) {
    JumpStepperConfig local = cfg;
    local.jump_scheme = JumpScheme::per_step_bernoulli;
    local.rng_seed = rng();
    JumpStepper stepper(model, local);
    Vector v = psi.amplitudes();
    stepper.advance(v, 0, t);
    return StateVector(psi.space(), std::move(v));
}

inline TrajectoryRecord integrate_jumps(InitialState init, const SystemModel& model, double t_span_periods,
                                        const JumpStepperConfig& cfg, long sample_every,
                                        const SampleObserver& observer = {}) {
    JumpStepper stepper(model, cfg, init.frame);
    TrajectoryRecord rec;
    rec.unravelling = "jumps";
    rec.beta = model.params().beta;
    rec.seed = cfg.rng_seed;
    rec.metadata = detail::describe(model, cfg, "jumps");
    rec.metadata.emplace_back("jump_scheme",
                              cfg.jump_scheme == JumpScheme::waiting_time ? "waiting_time" : "per_step_bernoulli");
    return detail::run_trajectory(stepper, std::move(init), t_span_periods, sample_every, cfg, std::move(rec),
                                  observer);
}

inline TrajectoryRecord integrate_jumps(const StateVector& psi0, const SystemModel& model, double t_span_periods,
                                        const JumpStepperConfig& cfg, long sample_every,
                                        const SampleObserver& observer = {}) {
    return integrate_jumps(InitialState::lab(psi0), model, t_span_periods, cfg, sample_every, observer);
}

}  // namespace qtraj
