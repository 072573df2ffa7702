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

// Pieces shared by both unravellings: stepper configuration, the frame-aware
// generator workspace, the trajectory record and the sampling loop.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

/// How the deterministic part of a step is advanced. The stochastic terms are
/// always explicit Euler-Maruyama increments evaluated at the step start.
enum class DriftScheme {
    euler,    ///< psi + G psi dt, the literal Ito increment
    taylor4,  ///< fourth-order Taylor expansion of exp(G dt) psi with G frozen over the step
};

struct StepperConfig {
    double dt = kTwoPi * 1e-3;  ///< natural time units (drive phase); must divide 2*pi
    int renormalize_every = 1;
    std::uint64_t rng_seed = 0;
    bool recenter = false;
    int recenter_every = 10;
    /// Leakage above this is flagged in the record.
    double leakage_threshold = kDefaultLeakageThreshold;
    /// Leakage above this aborts the trajectory.
    double leakage_abort = kDefaultLeakageAbort;
    double rate_limit = 0.1;
    double norm_drift_limit = 0.1;
    DriftScheme scheme = DriftScheme::taylor4;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("stepper: dt must be positive");
        if (renormalize_every < 1) throw ConfigError("stepper: renormalize_every must be >= 1");
        if (recenter_every < 1) throw ConfigError("stepper: recenter_every must be >= 1");
        if (!(leakage_threshold > 0.0)) throw ConfigError("stepper: leakage_threshold must be positive");
        if (!(leakage_abort >= leakage_threshold)) {
            throw ConfigError("stepper: leakage_abort must not be below leakage_threshold");
        }
    }
};

/// Step size in natural units for a given number of steps per drive period.
inline double dt_for_steps_per_period(int steps) { return kTwoPi / steps; }

/// Steps per drive period implied by dt; throws when dt does not divide the period.
inline long steps_per_period(double dt) {
    const double ratio = kTwoPi / dt;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
        throw ConfigError("stepper: dt must divide the drive period 2*pi into an integer number of steps");
    }
    return steps;
}

/// Spectral norm of the frame generator with the drive at full amplitude, estimated by
/// power iteration on G^dagger G from a fixed start vector. Bounds the spectral radius
/// of the deterministic generator from above.
inline double generator_norm_bound(const SystemModel& model, const Frame& frame, int iterations = 60) {
    SparseMatrix G = model.make_generator();
    model.update_generator(frame, G);
    const double g_over_beta = model.params().g / model.params().beta;
    G += SparseMatrix((-kI * g_over_beta) * model.drive_H().matrix);
    const SparseMatrix Gh = G.adjoint();
    Vector v = Vector::Ones(G.rows()) / std::sqrt(static_cast<double>(G.rows()));
    double estimate = 0.0;
    for (int i = 0; i < iterations; ++i) {
        const Vector w = Gh * (G * v);
        const double n = w.norm();
        if (!(n > 0.0)) return 0.0;
        estimate = std::sqrt(n);
        v = w / n;
    }
    return estimate;
}

/// Default step count per drive period: 1000 at beta >= 0.25, doubled for each decade of
/// beta below 0.25, and raised when needed so that |lambda| dt <= `stability_target` for the
/// frame generator (fourth-order Taylor is stable up to about 2.8). With a moving frame the
/// bound is also taken at a centroid on the edge of the classical attractor. Rounded up to
/// a multiple of 100.
inline int default_steps_per_period(const SystemModel& model, bool moving_frame, double stability_target = 2.0) {
    const double beta = model.params().beta;
    int base = 1000;
    for (double edge = 0.25; beta < edge * (1.0 - 1e-12); edge /= 10.0) base *= 2;
    double bound = generator_norm_bound(model, Frame(model.space().subsystems(), Complex(0.0)));
    if (moving_frame && model.supports_frames()) {
        const Complex far(1.6 / beta / std::sqrt(2.0), 1.0 / beta / std::sqrt(2.0));
        bound = std::max(bound, generator_norm_bound(model, Frame(model.space().subsystems(), far)));
    }
    const double needed = kTwoPi * bound / stability_target;
    const int stable = static_cast<int>(std::ceil(needed / 100.0)) * 100;
    return std::max(base, stable);
}

struct JumpEvent {
    double time;  ///< drive periods
    int channel;
};

struct TrajectoryRecord {
    std::string unravelling;
    double beta = 1.0;
    std::uint64_t seed = 0;
    /// Ordered key/value provenance: parameters, stepper settings, seed lineage.
    std::vector<std::pair<std::string, std::string>> metadata;

    std::vector<double> times;  ///< drive periods
    std::array<std::vector<double>, 2> q;
    std::array<std::vector<double>, 2> p;
    std::vector<double> entropy;  ///< nats
    std::vector<double> leakage;
    std::vector<JumpEvent> jumps;

    /// Steps whose leakage exceeded the flag threshold, and the largest leakage seen.
    long leakage_flagged_steps = 0;
    double leakage_max = 0.0;

    bool aborted = false;
    double abort_time = 0.0;
    std::string abort_cause;

    std::size_t size() const noexcept { return times.size(); }

    std::optional<std::string> meta(const std::string& key) const {
        for (const auto& [k, v] : metadata) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
};

/// View handed to sampling observers. `psi` is normalized and expressed in `frame`.
struct SampleView {
    std::size_t index;
    double time;  ///< drive periods
    const FockSpace& space;
    const Vector& psi;
    const Frame& frame;
};

using SampleObserver = std::function<void(const SampleView&)>;

/// Starting point of a trajectory: a state expressed relative to a displaced frame.
struct InitialState {
    Frame frame;
    Vector psi;

    static InitialState lab(const StateVector& psi) {
        return InitialState{Frame(psi.space().subsystems(), Complex(0.0)), psi.amplitudes()};
    }

    /// Product coherent state centred at `alphas`; in the moving frame this is the vacuum.
    static InitialState coherent(const FockSpace& space, std::span<const Complex> alphas, bool moving_frame,
                                 double tail_threshold = kDefaultLeakageThreshold) {
        if (moving_frame) {
            const std::vector<Complex> zeros(alphas.size(), Complex(0.0));
            return InitialState{Frame(alphas.begin(), alphas.end()),
                                coherent_state(space, std::span<const Complex>(zeros), tail_threshold).amplitudes()};
        }
        return InitialState{Frame(space.subsystems(), Complex(0.0)),
                            coherent_state(space, alphas, tail_threshold).amplitudes()};
    }
};

/// Frame-aware evaluation of the non-Hermitian generator
///   G psi = K psi - i f(t) D psi + sum_j c_j (L_j + s_j) psi + scalar psi
/// where K, the shifts s_j and D come from the model in the current frame.
class GeneratorWorkspace {
public:
    GeneratorWorkspace(const SystemModel& model, Frame frame) : model_(&model), frame_(std::move(frame)) {
        if (static_cast<int>(frame_.size()) != model.space().subsystems()) {
            throw DimensionError("stepper: one frame offset per subsystem required");
        }
        K_ = model.make_generator();
        rebuild();
        const auto dim = model.space().dimension();
        scratch_.resize(dim);
        term_.resize(dim);
        acc_.resize(dim);
        scratch2_.resize(dim);
        lpsi_.assign(model.lindblads().size(), Vector(dim));
    }

    const SystemModel& model() const noexcept { return *model_; }
    const Frame& frame() const noexcept { return frame_; }
    std::size_t channels() const noexcept { return shifts_.size(); }

    void set_frame(const Frame& frame) {
        frame_ = frame;
        rebuild();
    }

    /// Moves the frame to the state's centroid, displacing psi accordingly.
    void recenter(Vector& psi, double leakage_threshold) {
        recenter_in_place(model_->space(), psi, frame_, leakage_threshold);
        rebuild();
    }

    /// out = (L_j + s_j) in
    void apply_lindblad(std::size_t j, const Vector& in, Vector& out) const {
        out.noalias() = model_->lindblads()[j].matrix * in;
        if (shifts_[j] != Complex(0.0)) out += shifts_[j] * in;
    }

    /// Caches (L_j + s_j) psi for every channel; returned views stay valid until the next call.
    const std::vector<Vector>& lindblad_images(const Vector& psi) {
        for (std::size_t j = 0; j < channels(); ++j) apply_lindblad(j, psi, lpsi_[j]);
        return lpsi_;
    }

    void apply(const Vector& in, Vector& out, double drive, std::span<const Complex> coeffs, Complex scalar) {
        out.noalias() = K_ * in;
        if (drive != 0.0) {
            out.noalias() += (-kI * drive) * (model_->drive_H().matrix * in);
            if (drive_offset_ != 0.0) out += (-kI * drive * drive_offset_) * in;
        }
        for (std::size_t j = 0; j < coeffs.size(); ++j) {
            if (coeffs[j] == Complex(0.0)) continue;
            apply_lindblad(j, in, scratch_);
            out += coeffs[j] * scratch_;
        }
        if (scalar != Complex(0.0)) out += scalar * in;
    }

    /// psi <- exp-like propagation over dt with the generator frozen, per `scheme`.
    void propagate(Vector& psi, double dt, DriftScheme scheme, double drive, std::span<const Complex> coeffs,
                   Complex scalar) {
        if (scheme == DriftScheme::euler) {
            apply(psi, term_, drive, coeffs, scalar);
            psi += dt * term_;
            return;
        }
        acc_ = psi;
        term_ = psi;
        for (int k = 1; k <= 4; ++k) {
            apply(term_, scratch2_, drive, coeffs, scalar);
            term_ = (dt / k) * scratch2_;
            acc_ += term_;
        }
        psi.swap(acc_);
    }

private:
    void rebuild() {
        model_->update_generator(frame_, K_);
        shifts_ = model_->lindblad_shifts(frame_);
        drive_offset_ = model_->drive_offset(frame_);
    }

    const SystemModel* model_;
    Frame frame_;
    SparseMatrix K_;
    std::vector<Complex> shifts_;
    double drive_offset_ = 0.0;
    Vector scratch_, scratch2_, term_, acc_;
    std::vector<Vector> lpsi_;
};

namespace detail {

inline std::string abort_cause(const Error& e) {
    if (dynamic_cast<const TruncationError*>(&e)) return "truncation";
    if (dynamic_cast<const StepSizeError*>(&e)) return "step_size";
    if (dynamic_cast<const NumericalFault*>(&e)) return "numerical";
    return "error";
}

inline void append_sample(TrajectoryRecord& rec, const FockSpace& space, const Vector& psi, const Frame& frame,
                          double time) {
    const std::vector<Complex> local = annihilation_means(space, psi);
    rec.times.push_back(time);
    for (int s = 0; s < 2; ++s) {
        const Complex a = s < space.subsystems() ? frame[s] + local[s] : Complex(0.0);
        rec.q[s].push_back(std::sqrt(2.0) * a.real());
        rec.p[s].push_back(std::sqrt(2.0) * a.imag());
    }
    rec.entropy.push_back(space.subsystems() == 2 ? entanglement_entropy(space, psi) : 0.0);
    rec.leakage.push_back(leakage(space, psi) / psi.squaredNorm());
}

/// Shared sampling loop. `Stepper` provides
///   GeneratorWorkspace& workspace(); void step(Vector&, long step_index, double t, TrajectoryRecord&);
/// and owns its random stream.
template <typename Stepper>
TrajectoryRecord run_trajectory(Stepper& stepper, InitialState init, double t_span_periods, long sample_every,
                                const StepperConfig& cfg, TrajectoryRecord rec, const SampleObserver& observer) {
    cfg.validate();
    if (t_span_periods < 0.0) throw ConfigError("integrate: t_span must be non-negative");
    const long per_period = steps_per_period(cfg.dt);
    if (sample_every < 1 || per_period % sample_every != 0) {
        throw ConfigError("integrate: sample cadence must divide the number of steps per drive period");
    }
    const double exact_steps = t_span_periods * static_cast<double>(per_period);
    const long total_steps = std::lround(exact_steps);
    if (std::abs(exact_steps - static_cast<double>(total_steps)) > 1e-6) {
        throw ConfigError("integrate: t_span must be a whole number of steps");
    }

    GeneratorWorkspace& ws = stepper.workspace();
    const FockSpace& space = ws.model().space();
    Vector psi = std::move(init.psi);
    if (psi.size() != space.dimension()) throw DimensionError("integrate: initial state does not match the model");
    psi /= psi.norm();

    auto sample = [&](long k) {
        const double time = static_cast<double>(k) / static_cast<double>(per_period);
        const Vector unit = psi / psi.norm();
        append_sample(rec, space, unit, ws.frame(), time);
        if (observer) observer(SampleView{rec.times.size() - 1, time, space, unit, ws.frame()});
    };

    long k = 0;
    try {
        ws.set_frame(init.frame);
        if (cfg.recenter) ws.recenter(psi, cfg.leakage_abort);
        sample(0);
        for (k = 0; k < total_steps; ++k) {
            if (cfg.recenter && k > 0 && k % cfg.recenter_every == 0) ws.recenter(psi, cfg.leakage_abort);
            const double t = static_cast<double>(k) * cfg.dt;
            stepper.step(psi, k, t, rec);
            const double leak = leakage(space, psi) / psi.squaredNorm();
            rec.leakage_max = std::max(rec.leakage_max, leak);
            if (leak > cfg.leakage_threshold) ++rec.leakage_flagged_steps;
            if (leak > cfg.leakage_abort) {
                throw TruncationError("integrate: leakage " + std::to_string(leak) + " above abort level", -1);
            }
            if ((k + 1) % sample_every == 0) sample(k + 1);
        }
    } catch (const Error& e) {
        rec.aborted = true;
        rec.abort_time = static_cast<double>(k) / static_cast<double>(per_period);
        rec.abort_cause = abort_cause(e) + ": " + e.what();
    }
    return rec;
}

}  // namespace detail

}  // namespace qtraj
