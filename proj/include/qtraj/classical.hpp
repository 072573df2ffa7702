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

// Classical limit of the Duffing pair in scaled coordinates x = beta q, y = beta p.
// Ehrenfest equations for the Hamiltonian plus the Lindblad drift of sqrt(2 Gamma) a
// give, with the (Gamma/2)(qp + pq) term and the dissipator each contributing -Gamma y,
//
//   dx/dt = y,   dy/dt = x - x^3 - 2 Gamma y - g cos t - mu x_other
//
// beta drops out; the coupling keeps its coefficient mu under the scaling.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

struct ClassicalState {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

struct PhasePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Uncoupled scaled Duffing vector field. beta never enters.
inline PhasePoint classical_rhs(const ClassicalState& s, const DuffingParams& params) {
    return PhasePoint{s.y, s.x - s.x * s.x * s.x - 2.0 * params.gamma * s.y - params.g * drive_cosine(s.t)};
}

/// Coupled pair state (x1, y1, x2, y2).
using CoupledPhase = std::array<double, 4>;

inline CoupledPhase coupled_rhs(const CoupledPhase& s, double t, const DuffingParams& params) {
    const double drive = params.g * drive_cosine(t);
    const double damp = 2.0 * params.gamma;
    return CoupledPhase{
        s[1],
        s[0] - s[0] * s[0] * s[0] - damp * s[1] - drive - params.mu * s[2],
        s[3],
        s[2] - s[2] * s[2] * s[2] - damp * s[3] - drive - params.mu * s[0],
    };
}

/// Fixed-step RK4 for a state array with rhs(state, t). Stores t0 and every
/// `store_every`-th step; the final step is always stored.
template <std::size_t N, typename Rhs>
std::vector<std::pair<double, std::array<double, N>>> rk4_integrate(std::array<double, N> s, double t0, Rhs&& rhs,
                                                                    double t_span, double dt, long store_every = 1) {
    if (!(dt > 0.0)) throw ConfigError("rk4: dt must be positive");
    if (t_span < 0.0) throw ConfigError("rk4: t_span must be non-negative");
    const long steps = std::lround(t_span / dt);
    std::vector<std::pair<double, std::array<double, N>>> out;
    out.reserve(static_cast<std::size_t>(steps / std::max(store_every, 1L) + 2));
    out.emplace_back(t0, s);
    auto axpy = [](const std::array<double, N>& a, double h, const std::array<double, N>& b) {
        std::array<double, N> r{};
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + h * b[i];
        return r;
    };
    for (long k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        const auto k1 = rhs(s, t);
        const auto k2 = rhs(axpy(s, 0.5 * dt, k1), t + 0.5 * dt);
        const auto k3 = rhs(axpy(s, 0.5 * dt, k2), t + 0.5 * dt);
        const auto k4 = rhs(axpy(s, dt, k3), t + dt);
        for (std::size_t i = 0; i < N; ++i) s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if ((k + 1) % store_every == 0 || k + 1 == steps) {
            out.emplace_back(t0 + static_cast<double>(k + 1) * dt, s);
        }
    }
    return out;
}

/// RK4 orbit of the uncoupled oscillator, one entry per step.
inline std::vector<ClassicalState> rk4_orbit(const ClassicalState& s0, const DuffingParams& params, double t_span,
                                             double dt) {
    auto rhs = [&](const std::array<double, 2>& s, double t) {
        const PhasePoint v = classical_rhs(ClassicalState{s[0], s[1], t}, params);
        return std::array<double, 2>{v.x, v.y};
    };
    const auto raw = rk4_integrate<2>({s0.x, s0.y}, s0.t, rhs, t_span, dt);
    std::vector<ClassicalState> orbit;
    orbit.reserve(raw.size());
    for (const auto& [t, s] : raw) orbit.push_back(ClassicalState{s[0], s[1], t});
    return orbit;
}

/// Strobe indices: orbit samples at t = period * k for k past the transient.
/// Throws when the sampling grid is not commensurate with the period.
template <typename Times>
std::vector<std::size_t> strobe_indices(const Times& times, double period, double transient_periods) {
    std::vector<std::size_t> idx;
    if (times.size() < 2) {
        if (!times.empty() && transient_periods <= 0.0 && std::abs(std::remainder(times[0], period)) < 1e-9) idx.push_back(0);
        return idx;
    }
    const double h = times[1] - times[0];
    const double per = period / h;
    if (std::abs(per - std::round(per)) > 1e-6 * per) {
        throw ConfigError("poincare_points: sampling grid is not commensurate with the drive period");
    }
    const double tol = 1e-6 * h;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double k = std::round(times[i] / period);
        if (std::abs(times[i] - k * period) < tol && k >= transient_periods - 1e-9) idx.push_back(i);
    }
    return idx;
}

inline std::vector<PhasePoint> poincare_points(const std::vector<ClassicalState>& orbit, double period = kTwoPi,
                                               double transient_periods = 50.0) {
    std::vector<double> times;
    times.reserve(orbit.size());
    for (const auto& s : orbit) times.push_back(s.t);
    std::vector<PhasePoint> pts;
    for (std::size_t i : strobe_indices(times, period, transient_periods)) pts.push_back({orbit[i].x, orbit[i].y});
    return pts;
}

struct AttractorSettings {
    double transient_periods = 50.0;
    int periods = 1000;
    int steps_per_period = 200;
    ClassicalState start{0.5, 0.0, 0.0};
};

/// Strobed attractor of the uncoupled oscillator.
inline std::vector<PhasePoint> uncoupled_attractor(const DuffingParams& params, const AttractorSettings& s = {}) {
    const double dt = kTwoPi / s.steps_per_period;
    const double span = (s.transient_periods + s.periods) * kTwoPi;
    auto rhs = [&](const std::array<double, 2>& v, double t) {
        const PhasePoint d = classical_rhs(ClassicalState{v[0], v[1], t}, params);
        return std::array<double, 2>{d.x, d.y};
    };
    const auto raw = rk4_integrate<2>({s.start.x, s.start.y}, s.start.t, rhs, span, dt, s.steps_per_period);
    std::vector<double> times;
    for (const auto& e : raw) times.push_back(e.first);
    std::vector<PhasePoint> pts;
    for (std::size_t i : strobe_indices(times, kTwoPi, s.transient_periods)) pts.push_back({raw[i].second[0], raw[i].second[1]});
    return pts;
}

/// Strobed orbit of the coupled pair from `start`, one entry per period (including t = 0).
inline std::vector<CoupledPhase> coupled_strobes(const CoupledPhase& start, const DuffingParams& params, int periods,
                                                 int steps_per_period = 200) {
    const double dt = kTwoPi / steps_per_period;
    auto rhs = [&](const CoupledPhase& v, double t) { return coupled_rhs(v, t, params); };
    const auto raw = rk4_integrate<4>(start, 0.0, rhs, periods * kTwoPi, dt, steps_per_period);
    std::vector<CoupledPhase> out;
    out.reserve(raw.size());
    for (const auto& e : raw) out.push_back(e.second);
    return out;
}

/// Maximum pairwise distance within a point set.
inline double diameter(std::span<const PhasePoint> pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            best = std::max(best, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
        }
    }
    return best;
}

/// Fraction of `probe` points lying within `radius` of some point of `reference`.
inline double attractor_overlap(std::span<const PhasePoint> probe, std::span<const PhasePoint> reference,
                                double radius) {
    if (probe.empty()) return 0.0;
    const double r2 = radius * radius;
    std::size_t hits = 0;
    for (const PhasePoint& p : probe) {
        for (const PhasePoint& r : reference) {
            const double dx = p.x - r.x;
            const double dy = p.y - r.y;
            if (dx * dx + dy * dy <= r2) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(probe.size());
}

struct InitialCondition {
    std::array<double, 2> q0{};  ///< unscaled positions x / beta
    std::array<double, 2> p0{};  ///< unscaled momenta y / beta
    std::array<Complex, 2> alpha{};

    std::vector<Complex> alphas() const { return {alpha[0], alpha[1]}; }
};

struct InitialConditionDraw {
    std::vector<InitialCondition> conditions;
    std::optional<std::string> warning;
};

/// Draws `n` pairs of Poincare points from `attractor` (one per oscillator) and maps them
/// to unscaled centres q0 = x/beta, p0 = y/beta with alpha = (q0 + i p0)/sqrt(2).
/// When the state must be represented without a moving frame, warns if the largest
/// coherent amplitude would breach the truncation tail for `levels`.
inline InitialConditionDraw sample_initial_conditions(int n, std::span<const PhasePoint> attractor, double beta,
                                                      Rng& rng, int levels = 0, bool moving_frame = true) {
    if (attractor.empty()) throw ConfigError("sample_initial_conditions: attractor point set is empty");
    if (!(beta > 0.0)) throw ConfigError("sample_initial_conditions: beta must be positive");
    std::uniform_int_distribution<std::size_t> pick(0, attractor.size() - 1);
    InitialConditionDraw draw;
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        InitialCondition ic;
        for (int i = 0; i < 2; ++i) {
            const PhasePoint& pt = attractor[pick(rng)];
            ic.q0[i] = pt.x / beta;
            ic.p0[i] = pt.y / beta;
            ic.alpha[i] = Complex(ic.q0[i], ic.p0[i]) / std::sqrt(2.0);
            worst = std::max(worst, std::abs(ic.alpha[i]));
        }
        draw.conditions.push_back(ic);
    }
    if (!moving_frame && levels > 0 && detail::poisson_tail(worst * worst, levels - 2) > kDefaultLeakageThreshold) {
        draw.warning = "beta=" + std::to_string(beta) + " needs |alpha| up to " + std::to_string(worst) +
                       ", beyond what " + std::to_string(levels) +
                       " levels hold under the leakage threshold; enable recentering or raise levels";
    }
    return draw;
}

inline InitialConditionDraw sample_initial_conditions(int n, const DuffingParams& params, Rng& rng, int levels = 0,
                                                      bool moving_frame = true) {
    const std::vector<PhasePoint> attractor = uncoupled_attractor(params);
    return sample_initial_conditions(n, attractor, params.beta, rng, levels, moving_frame);
}

}  // namespace qtraj
