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

// Entrainment detection and phase-resolved entanglement statistics.
//
// The detector works on the beta-scaled centroid z(t) = beta (q1, p1, q2, p2).
// For every sample it forms the one-period displacement z(t + T) - z(t); the
// residual r(t) is the RMS of that displacement over a forward window
// [t, t + window). Once the pair has locked onto a periodic orbit both
// per-oscillator strobes and their relative phase repeat, so r drops to the
// noise floor. The entrainment time is the earliest window start from which r
// stays below threshold for every later window.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qtraj/classical.hpp"
#include "qtraj/error.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

struct PhaseLabeling {
    /// False when the record was not eligible for labeling (beta = 1).
    bool labeled = false;
    std::optional<double> entrainment_time;  ///< drive periods
    double start = 0.0;
    double end = 0.0;
};

struct EntrainmentSettings {
    double window = 8.0;       ///< drive periods
    double threshold = 0.0;    ///< scaled units; <= 0 means "derive from the classical attractor"
    double guard = 2.0;        ///< drive periods excluded on each side of tau_e
    double threshold_fraction = 0.125;
    /// Records with beta at or above this are never labeled.
    double unlabeled_beta = 1.0;
};

namespace detail {

/// Samples per drive period of a uniformly sampled record.
inline long samples_per_period(const TrajectoryRecord& rec) {
    if (rec.size() < 2) throw ConfigError("analysis: record needs at least two samples");
    const double h = rec.times[1] - rec.times[0];
    if (!(h > 0.0)) throw ConfigError("analysis: times must be strictly increasing");
    const double per = 1.0 / h;
    const long m = std::lround(per);
    if (m < 1 || std::abs(per - static_cast<double>(m)) > 1e-6 * per) {
        throw ConfigError("analysis: sample spacing must divide the drive period");
    }
    return m;
}

}  // namespace detail

/// Residual series r_k for windows starting at sample k (k = 0 .. last valid start).
inline std::vector<double> entrainment_residual(const TrajectoryRecord& rec, double window) {
    const long m = detail::samples_per_period(rec);
    const long n = static_cast<long>(rec.size());
    const long w = std::lround(window * static_cast<double>(m));
    if (w < 1) throw ConfigError("detect_entrainment: window must cover at least one sample");
    const long displacements = n - m;
    if (displacements < w) throw ConfigError("detect_entrainment: window larger than record");

    const double b = rec.beta;
    std::vector<double> d2(static_cast<std::size_t>(displacements));
    for (long k = 0; k < displacements; ++k) {
        double s = 0.0;
        for (int osc = 0; osc < 2; ++osc) {
            const double dq = b * (rec.q[osc][k + m] - rec.q[osc][k]);
            const double dp = b * (rec.p[osc][k + m] - rec.p[osc][k]);
            s += dq * dq + dp * dp;
        }
        d2[k] = s;
    }
    // Direct sums per window: a running sum would leave cancellation noise near zero.
    std::vector<double> r(static_cast<std::size_t>(displacements - w + 1));
    for (long k = 0; k + w <= displacements; ++k) {
        double acc = 0.0;
        for (long i = k; i < k + w; ++i) acc += d2[i];
        r[k] = std::sqrt(acc / static_cast<double>(w));
    }
    return r;
}

/// Labels the chaotic and entrained windows of a record. Requires the record to span
/// at least two windows.
inline PhaseLabeling detect_entrainment(const TrajectoryRecord& rec, double window, double threshold) {
    if (!(window > 0.0)) throw ConfigError("detect_entrainment: window must be positive");
    if (rec.size() < 2) throw ConfigError("detect_entrainment: record too short");
    const double span = rec.times.back() - rec.times.front();
    if (span + 1e-9 < 2.0 * window) throw ConfigError("detect_entrainment: window larger than record");

    const std::vector<double> r = entrainment_residual(rec, window);
    PhaseLabeling out;
    out.labeled = true;
    out.start = rec.times.front();
    out.end = rec.times.back();
    long first = static_cast<long>(r.size());
    for (long k = static_cast<long>(r.size()) - 1; k >= 0; --k) {
        if (!(r[k] < threshold)) break;
        first = k;
    }
    if (first < static_cast<long>(r.size())) out.entrainment_time = rec.times[first];
    return out;
}

/// Entrainment threshold in scaled units: a fraction of the diameter of the classical
/// strobed attractor.
inline double calibrated_threshold(std::span<const PhasePoint> attractor, double fraction = 0.125) {
    return fraction * diameter(attractor);
}

/// Applies the labeling policy: records at beta >= settings.unlabeled_beta are left
/// unlabeled, everything else goes through the detector.
inline PhaseLabeling label_phases(const TrajectoryRecord& rec, const EntrainmentSettings& settings) {
    if (rec.beta >= settings.unlabeled_beta) {
        PhaseLabeling out;
        out.start = rec.times.empty() ? 0.0 : rec.times.front();
        out.end = rec.times.empty() ? 0.0 : rec.times.back();
        return out;
    }
    if (!(settings.threshold > 0.0)) throw ConfigError("label_phases: threshold not calibrated");
    return detect_entrainment(rec, settings.window, settings.threshold);
}

struct PhaseMeans {
    std::optional<double> chaotic;
    std::optional<double> entrained;
};

namespace detail {

/// Trapezoidal time average of E over samples with times in [lo, hi].
inline std::optional<double> window_mean(const TrajectoryRecord& rec, double lo, double hi) {
    const double eps = 1e-9;
    double area = 0.0;
    double first = 0.0, last = 0.0;
    std::optional<double> single;
    bool any = false;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double t = rec.times[i];
        if (t < lo - eps || t > hi + eps) continue;
        if (!any) {
            first = t;
            single = rec.entropy[i];
            any = true;
        } else {
            area += 0.5 * (rec.entropy[i] + rec.entropy[i - 1]) * (t - rec.times[i - 1]);
        }
        last = t;
    }
    if (!any) return std::nullopt;
    if (last - first <= 0.0) return single;
    return area / (last - first);
}

}  // namespace detail

/// Time averages of E over the chaotic window [start, tau_e - guard] and the entrained
/// window [tau_e + guard, end]. Without an entrainment time the whole record counts
/// as chaotic-like. Throws when no window retains any samples.
inline PhaseMeans phase_means(const TrajectoryRecord& rec, const PhaseLabeling& labeling, double guard = 2.0) {
    if (rec.size() == 0) throw ConfigError("phase_means: empty record");
    PhaseMeans out;
    if (!labeling.entrainment_time) {
        out.chaotic = detail::window_mean(rec, rec.times.front(), rec.times.back());
    } else {
        const double tau = *labeling.entrainment_time;
        if (tau < rec.times.front() - 1e-9 || tau > rec.times.back() + 1e-9) {
            throw ConfigError("phase_means: labeling does not match the record span");
        }
        out.chaotic = detail::window_mean(rec, rec.times.front(), tau - guard);
        out.entrained = detail::window_mean(rec, tau + guard, rec.times.back());
    }
    if (!out.chaotic && !out.entrained) throw ConfigError("phase_means: empty window after guard bands");
    return out;
}

}  // namespace qtraj
