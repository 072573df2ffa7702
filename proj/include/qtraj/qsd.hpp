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

// Quantum state diffusion (heterodyne unravelling), Ito form:
//
//   |dpsi> = -i H |psi> dt
//          + sum_j [ <L_j^dag> L_j - 1/2 L_j^dag L_j - 1/2 <L_j^dag><L_j> ] |psi> dt
//          + sum_j [ L_j - <L_j> ] |psi> dxi_j
//
// with complex Wiener increments E[dxi] = E[dxi^2] = 0, E[dxi dxi*] = dt.
// Expectation values are taken at the start of the step and held fixed.

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

struct QsdStepperConfig : StepperConfig {};

class QsdStepper {
public:
    QsdStepper(const SystemModel& model, const QsdStepperConfig& cfg, Frame frame = {})
        : cfg_(cfg),
          ws_(model, frame.empty() ? Frame(model.space().subsystems(), Complex(0.0)) : std::move(frame)),
          rng_(make_rng(cfg.rng_seed)),
          normal_(0.0, std::sqrt(cfg.dt / 2.0)) {
        cfg_.validate();
        const auto dim = model.space().dimension();
        noise_.resize(dim);
        expect_.resize(ws_.channels());
        coeffs_.resize(ws_.channels());
        dxi_.resize(ws_.channels());
    }

    GeneratorWorkspace& workspace() noexcept { return ws_; }
    const QsdStepperConfig& config() const noexcept { return cfg_; }

    /// Draws one complex Wiener increment per channel: (x + i y) with x, y ~ N(0, dt/2).
    std::span<const Complex> draw_increments() {
        for (auto& d : dxi_) {
            const double x = normal_(rng_);
            const double y = normal_(rng_);
            d = Complex(x, y);
        }
        return dxi_;
    }

    /// One step driven by caller-supplied increments.
    void advance(Vector& psi, double t, std::span<const Complex> dxi, long step_index = 0) {
        if (dxi.size() != ws_.channels()) throw DimensionError("qsd_step: one increment per Lindblad channel");
        const double dt = cfg_.dt;
        const double norm2 = psi.squaredNorm();
        const std::vector<Vector>& images = ws_.lindblad_images(psi);

        double variance_rate = 0.0;
        Complex scalar(0.0);
        for (std::size_t j = 0; j < images.size(); ++j) {
            expect_[j] = psi.dot(images[j]) / norm2;
            coeffs_[j] = std::conj(expect_[j]);
            scalar -= 0.5 * std::norm(expect_[j]);
            variance_rate += images[j].squaredNorm() / norm2 - std::norm(expect_[j]);
        }
        if (variance_rate * dt > cfg_.rate_limit) {
            throw StepSizeError("qsd_step: rate monitor breached (dt * sum Var(L_j) = " +
                                std::to_string(variance_rate * dt) + ")");
        }

        noise_.setZero();
        for (std::size_t j = 0; j < images.size(); ++j) {
            noise_ += dxi[j] * (images[j] - expect_[j] * psi);
        }
        const double t_drive = cfg_.scheme == DriftScheme::euler ? t : t + 0.5 * dt;
        const double drive = ws_.model().drive_amplitude(t_drive);
        ws_.propagate(psi, dt, cfg_.scheme, drive, coeffs_, scalar);
        psi += noise_;

        const double norm_after = psi.norm();
        if (!std::isfinite(norm_after) || std::abs(norm_after / std::sqrt(norm2) - 1.0) > cfg_.norm_drift_limit) {
            throw StepSizeError("qsd_step: one-step norm drift exceeds limit; reduce dt");
        }
        if ((step_index + 1) % cfg_.renormalize_every == 0) psi /= norm_after;
    }

    /// Sampling-loop hook: draws increments from the owned stream and advances.
    void step(Vector& psi, long step_index, double t, TrajectoryRecord&) {
        draw_increments();
        advance(psi, t, dxi_, step_index);
    }

private:
    QsdStepperConfig cfg_;
    GeneratorWorkspace ws_;
    Rng rng_;
    std::normal_distribution<double> normal_;
    Vector noise_;
    std::vector<Complex> expect_, coeffs_, dxi_;
};

/// Single step from the laboratory frame, drawing the increments from `rng`.
inline StateVector qsd_step(const StateVector& psi, const SystemModel& model, double t, const QsdStepperConfig& cfg,
                            Rng& rng) {
    QsdStepper stepper(model, cfg);
    std::normal_distribution<double> normal(0.0, std::sqrt(cfg.dt / 2.0));
    std::vector<Complex> dxi(model.lindblads().size());
    for (auto& d : dxi) {
        const double x = normal(rng);
        const double y = normal(rng);
        d = Complex(x, y);
    }
    Vector v = psi.amplitudes();
    stepper.advance(v, t, dxi);
    return StateVector(psi.space(), std::move(v));
}

namespace detail {

inline std::string to_text(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::vector<std::pair<std::string, std::string>> describe(const SystemModel& model, const StepperConfig& cfg,
                                                                 const std::string& unravelling) {
    const DuffingParams& p = model.params();
    return {
        {"unravelling", unravelling},
        {"beta", to_text(p.beta)},
        {"g", to_text(p.g)},
        {"gamma", to_text(p.gamma)},
        {"mu", to_text(p.mu)},
        {"levels", std::to_string(model.space().levels())},
        {"dt_periods", to_text(cfg.dt / kTwoPi)},
        {"scheme", cfg.scheme == DriftScheme::euler ? "euler" : "taylor4"},
        {"recenter", cfg.recenter ? "on" : "off"},
        {"recenter_every", std::to_string(cfg.recenter_every)},
        {"renormalize_every", std::to_string(cfg.renormalize_every)},
        {"leakage_threshold", to_text(cfg.leakage_threshold)},
        {"leakage_abort", to_text(cfg.leakage_abort)},
        {"seed", std::to_string(cfg.rng_seed)},
        {"noise_mapping", "recentering consumes no random draws; increments identical with recenter on or off"},
    };
}

}  // namespace detail

/// Integrates one QSD trajectory over `t_span_periods` drive periods, sampling every
/// `sample_every` steps. Errors inside the loop abort the trajectory; the record keeps
/// the samples taken so far with the abort time and cause.
inline TrajectoryRecord integrate_qsd(InitialState init, const SystemModel& model, double t_span_periods,
                                      const QsdStepperConfig& cfg, long sample_every,
                                      const SampleObserver& observer = {}) {
    QsdStepper stepper(model, cfg, init.frame);
    TrajectoryRecord rec;
    rec.unravelling = "qsd";
    rec.beta = model.params().beta;
    rec.seed = cfg.rng_seed;
    rec.metadata = detail::describe(model, cfg, "qsd");
    return detail::run_trajectory(stepper, std::move(init), t_span_periods, sample_every, cfg, std::move(rec),
                                  observer);
}

inline TrajectoryRecord integrate_qsd(const StateVector& psi0, const SystemModel& model, double t_span_periods,
                                      const QsdStepperConfig& cfg, long sample_every,
                                      const SampleObserver& observer = {}) {
    return integrate_qsd(InitialState::lab(psi0), model, t_span_periods, cfg, sample_every, observer);
}

}  // namespace qtraj
