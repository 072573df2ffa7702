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

// Seeded ensembles over a list of beta values. Each trajectory is a pure function
// of (plan, beta index, trajectory index); workers only decide when it runs, so the
// summary does not depend on the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qtraj/analysis.hpp"
#include "qtraj/classical.hpp"
#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/jumps.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qsd.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

enum class Unravelling { qsd, jumps };

inline const char* to_string(Unravelling u) { return u == Unravelling::qsd ? "qsd" : "jumps"; }

inline Unravelling parse_unravelling(const std::string& s) {
    if (s == "qsd") return Unravelling::qsd;
    if (s == "jumps") return Unravelling::jumps;
    throw ConfigError("unravelling must be qsd or jumps, got '" + s + "'");
}

/// Per-beta numerical settings. Zero steps_per_period selects default_steps_per_period.
struct BetaPlan {
    double beta = 1.0;
    int levels = 25;
    int steps_per_period = 0;
    bool recenter = false;
};

struct SweepPlan {
    std::vector<BetaPlan> betas;
    Unravelling unravelling = Unravelling::qsd;
    int trajectories = 1;
    double t_span = 60.0;  ///< drive periods
    int samples_per_period = 20;
    std::uint64_t master_seed = 0;
    DuffingParams base;    ///< beta is taken from each BetaPlan
    StepperConfig stepper; ///< dt, seed and recenter are overridden per trajectory
    JumpScheme jump_scheme = JumpScheme::per_step_bernoulli;
    EntrainmentSettings entrainment;
    AttractorSettings attractor;
    int workers = 1;
    /// Upper bound on sum over betas of dimension * trajectories * total steps.
    double max_work = 5e13;

    void validate() const {
        if (betas.empty()) throw ConfigError("sweep: beta list is empty");
        if (trajectories < 1) throw ConfigError("sweep: trajectories must be >= 1");
        if (t_span < 0.0) throw ConfigError("sweep: t_span must be non-negative");
        if (samples_per_period < 1) throw ConfigError("sweep: samples_per_period must be >= 1");
        if (workers < 1) throw ConfigError("sweep: workers must be >= 1");
        for (const BetaPlan& b : betas) {
            if (!(b.beta > 0.0) || b.beta > 1.0) throw ConfigError("sweep: beta must lie in (0, 1]");
            if (b.levels < 2) throw ConfigError("sweep: levels must be >= 2");
            if (b.steps_per_period < 0) throw ConfigError("sweep: steps_per_period must be >= 0");
        }
    }
};

/// Seed purposes within one trajectory's coordinate tuple.
enum SeedPurpose : std::uint64_t { kNoiseStream = 0, kInitialCondition = 1 };

inline std::uint64_t trajectory_seed(std::uint64_t master, std::size_t beta_index, std::size_t trajectory,
                                     Unravelling u, SeedPurpose purpose) {
    return derive_seed(master, {static_cast<std::uint64_t>(beta_index), static_cast<std::uint64_t>(trajectory),
                                static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(purpose)});
}

struct BetaSummary {
    double beta = 0.0;
    Unravelling unravelling = Unravelling::qsd;
    std::optional<double> chaotic_mean, chaotic_se;
    std::optional<double> entrained_mean, entrained_se;
    int n_labeled = 0;    ///< completed records that went through the detector
    int n_unlabeled = 0;  ///< completed records never labeled (beta at the quantum limit)
    int n_entrained = 0;  ///< labeled records with a detected entrainment time
    int n_aborted = 0;
    int n_total = 0;
    double leakage_max = 0.0;
};

struct EnsembleSummary {
    std::vector<BetaSummary> rows;
    double threshold = 0.0;  ///< entrainment threshold actually applied
};

/// Everything a sweep produces for one trajectory.
struct TrajectoryResult {
    std::size_t beta_index = 0;
    std::size_t trajectory = 0;
    TrajectoryRecord record;
    PhaseLabeling labeling;
    PhaseMeans means;
};

struct SweepResult {
    EnsembleSummary summary;
    std::vector<TrajectoryResult> trajectories;  ///< ordered by (beta index, trajectory index)
};

namespace detail {

struct MeanAccumulator {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }

    std::optional<double> mean() const {
        if (values.empty()) return std::nullopt;
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }

    /// Standard error of the mean; absent below two values.
    std::optional<double> se() const {
        if (values.size() < 2) return std::nullopt;
        const double m = *mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    }
};

inline StepperConfig stepper_for(const SweepPlan& plan, const BetaPlan& bp, const SystemModel& model,
                                 std::uint64_t noise_seed) {
    StepperConfig cfg = plan.stepper;
    const int spp = bp.steps_per_period > 0 ? bp.steps_per_period : default_steps_per_period(model, bp.recenter);
    cfg.dt = dt_for_steps_per_period(spp);
    cfg.recenter = bp.recenter;
    cfg.rng_seed = noise_seed;
    return cfg;
}

inline long sample_cadence(const StepperConfig& cfg, int samples_per_period) {
    const long spp = steps_per_period(cfg.dt);
    if (spp % samples_per_period != 0) {
        throw ConfigError("sweep: samples_per_period must divide the steps per period (" + std::to_string(spp) + ")");
    }
    return spp / samples_per_period;
}

}  // namespace detail

/// Runs trajectory `trajectory` of beta entry `beta_index` with its derived seeds. The
/// initial condition is a product coherent state centred on two points drawn from the
/// uncoupled classical attractor.
inline TrajectoryRecord run_plan_trajectory(const SweepPlan& plan, std::size_t beta_index, std::size_t trajectory,
                                            const SystemModel& model, std::span<const PhasePoint> attractor) {
    const BetaPlan& bp = plan.betas.at(beta_index);
    const std::uint64_t noise_seed =
        trajectory_seed(plan.master_seed, beta_index, trajectory, plan.unravelling, kNoiseStream);
    Rng ic_rng = make_rng(trajectory_seed(plan.master_seed, beta_index, trajectory, plan.unravelling, kInitialCondition));
    const InitialConditionDraw draw = sample_initial_conditions(1, attractor, bp.beta, ic_rng);
    const InitialCondition& ic = draw.conditions.front();
    const StepperConfig cfg = detail::stepper_for(plan, bp, model, noise_seed);
    const long cadence = detail::sample_cadence(cfg, plan.samples_per_period);

    auto tag = [&](TrajectoryRecord rec) {
        rec.metadata.emplace_back("beta_index", std::to_string(beta_index));
        rec.metadata.emplace_back("trajectory_index", std::to_string(trajectory));
        rec.metadata.emplace_back("master_seed", std::to_string(plan.master_seed));
        for (int i = 0; i < 2; ++i) {
            rec.metadata.emplace_back("alpha" + std::to_string(i + 1),
                                      detail::to_text(ic.alpha[i].real()) + "," + detail::to_text(ic.alpha[i].imag()));
        }
        return rec;
    };

    InitialState init;
    try {
        init = InitialState::coherent(model.space(), ic.alphas(), bp.recenter, cfg.leakage_threshold);
    } catch (const TruncationError& e) {
        TrajectoryRecord rec;
        rec.unravelling = to_string(plan.unravelling);
        rec.beta = bp.beta;
        rec.seed = noise_seed;
        rec.metadata = detail::describe(model, cfg, rec.unravelling);
        rec.aborted = true;
        rec.abort_cause = std::string("truncation: ") + e.what();
        return tag(std::move(rec));
    }

    if (plan.unravelling == Unravelling::qsd) {
        QsdStepperConfig qc;
        static_cast<StepperConfig&>(qc) = cfg;
        return tag(integrate_qsd(std::move(init), model, plan.t_span, qc, cadence));
    }
    JumpStepperConfig jc;
    static_cast<StepperConfig&>(jc) = cfg;
    jc.jump_scheme = plan.jump_scheme;
    return tag(integrate_jumps(std::move(init), model, plan.t_span, jc, cadence));
}

/// Total work estimate used by the resource guard.
inline double plan_work(const SweepPlan& plan, const std::vector<SystemModel>& models) {
    double work = 0.0;
    for (std::size_t b = 0; b < plan.betas.size(); ++b) {
        const BetaPlan& bp = plan.betas[b];
        const int spp = bp.steps_per_period > 0 ? bp.steps_per_period : default_steps_per_period(models[b], bp.recenter);
        work += static_cast<double>(models[b].space().dimension()) * plan.trajectories * spp * plan.t_span;
    }
    return work;
}

/// Entrainment threshold used by a plan: the configured value, or the configured
/// fraction of the classical attractor diameter.
inline double plan_threshold(const SweepPlan& plan, std::span<const PhasePoint> attractor) {
    if (plan.entrainment.threshold > 0.0) return plan.entrainment.threshold;
    return calibrated_threshold(attractor, plan.entrainment.threshold_fraction);
}

/// Labels one record and computes its phase means. Aborted and empty records yield
/// empty means.
inline void analyse(TrajectoryResult& r, const EntrainmentSettings& settings) {
    const TrajectoryRecord& rec = r.record;
    if (rec.aborted || rec.size() == 0) return;
    const double span = rec.times.back() - rec.times.front();
    if (rec.beta >= settings.unlabeled_beta || span + 1e-9 < 2.0 * settings.window) {
        r.labeling = PhaseLabeling{};
        r.labeling.start = rec.times.front();
        r.labeling.end = rec.times.back();
        r.labeling.labeled = rec.beta < settings.unlabeled_beta;
    } else {
        r.labeling = label_phases(rec, settings);
    }
    r.means = phase_means(rec, r.labeling, settings.guard);
}

/// Aggregates per-trajectory phase means. Unlabeled (quantum-limit) records contribute
/// their full-record mean to both series so the entrained branch can include beta = 1.
inline EnsembleSummary summarize(const SweepPlan& plan, const std::vector<TrajectoryResult>& results, double threshold) {
    EnsembleSummary summary;
    summary.threshold = threshold;
    for (std::size_t b = 0; b < plan.betas.size(); ++b) {
        BetaSummary row;
        row.beta = plan.betas[b].beta;
        row.unravelling = plan.unravelling;
        detail::MeanAccumulator chaotic, entrained;
        for (const TrajectoryResult& r : results) {
            if (r.beta_index != b) continue;
            ++row.n_total;
            row.leakage_max = std::max(row.leakage_max, r.record.leakage_max);
            if (r.record.aborted) {
                ++row.n_aborted;
                continue;
            }
            if (r.record.size() == 0) continue;
            if (!r.labeling.labeled) {
                ++row.n_unlabeled;
                if (r.means.chaotic) {
                    chaotic.add(*r.means.chaotic);
                    entrained.add(*r.means.chaotic);
                }
                continue;
            }
            ++row.n_labeled;
            if (r.labeling.entrainment_time) ++row.n_entrained;
            if (r.means.chaotic) chaotic.add(*r.means.chaotic);
            if (r.means.entrained) entrained.add(*r.means.entrained);
        }
        row.chaotic_mean = chaotic.mean();
        row.chaotic_se = chaotic.se();
        row.entrained_mean = entrained.mean();
        row.entrained_se = entrained.se();
        summary.rows.push_back(row);
    }
    return summary;
}

/// Runs every (beta, trajectory) job of the plan. Throws ResourceGuardError before any
/// work when the plan exceeds `max_work`; individual trajectory failures are recorded as
/// aborts. `on_done` (optional) is called under a lock as jobs finish.
inline SweepResult run_sweep(const SweepPlan& plan,
                             const std::function<void(const TrajectoryResult&)>& on_done = {}) {
    plan.validate();
    std::vector<SystemModel> models;
    models.reserve(plan.betas.size());
    for (const BetaPlan& bp : plan.betas) {
        DuffingParams p = plan.base;
        p.beta = bp.beta;
        models.push_back(build_model(p, FockSpace(bp.levels)));
    }
    const double work = plan_work(plan, models);
    if (work > plan.max_work) {
        throw ResourceGuardError("sweep: estimated work " + detail::to_text(work) + " exceeds the guard " +
                                 detail::to_text(plan.max_work));
    }
    const std::vector<PhasePoint> attractor = uncoupled_attractor(plan.base, plan.attractor);
    EntrainmentSettings settings = plan.entrainment;
    settings.threshold = plan_threshold(plan, attractor);

    const std::size_t per_beta = static_cast<std::size_t>(plan.trajectories);
    const std::size_t jobs = plan.betas.size() * per_beta;
    std::vector<TrajectoryResult> results(jobs);
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs) return;
            TrajectoryResult& r = results[j];
            r.beta_index = j / per_beta;
            r.trajectory = j % per_beta;
            try {
                r.record = run_plan_trajectory(plan, r.beta_index, r.trajectory, models[r.beta_index], attractor);
                analyse(r, settings);
            } catch (const Error& e) {
                r.record.aborted = true;
                r.record.abort_cause = detail::abort_cause(e) + ": " + e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(done_mutex);
                if (!failure) failure = std::current_exception();
                next.store(jobs);
                return;
            }
            if (on_done) {
                std::lock_guard<std::mutex> lock(done_mutex);
                on_done(r);
            }
        }
    };

    const int n_workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(plan.workers), jobs));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult out;
    out.summary = summarize(plan, results, settings.threshold);
    out.trajectories = std::move(results);
    return out;
}

struct ExponentialFit {
    double amplitude = 0.0;
    double rate = 0.0;
    double residual = 0.0;  ///< RMS of E - A exp(c beta) over the fitted points
};

/// Least-squares fit of E(beta) = A exp(c beta) to (beta, E) pairs: log-linear start,
/// then Gauss-Newton on the untransformed residuals.
inline ExponentialFit fit_exponential(std::span<const double> beta, std::span<const double> value) {
    if (beta.size() != value.size()) throw DimensionError("fit_exponential: size mismatch");
    if (beta.size() < 3) throw ConfigError("fit_exponential: at least three points are required");
    const std::size_t n = beta.size();

    double A = 0.0, c = 0.0;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(value[i] > 0.0)) continue;
            const double y = std::log(value[i]);
            sx += beta[i];
            sy += y;
            sxx += beta[i] * beta[i];
            sxy += beta[i] * y;
            ++m;
        }
        const double det = static_cast<double>(m) * sxx - sx * sx;
        if (m >= 2 && std::abs(det) > 1e-300) {
            c = (static_cast<double>(m) * sxy - sx * sy) / det;
            A = std::exp((sy - c * sx) / static_cast<double>(m));
        } else {
            double s = 0.0;
            for (double v : value) s += v;
            A = s / static_cast<double>(n);
        }
    }

    auto sse = [&](double a, double r) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = value[i] - a * std::exp(r * beta[i]);
            s += e * e;
        }
        return s;
    };
    double current = sse(A, c);
    for (int it = 0; it < 200; ++it) {
        // Normal equations of the 2-parameter linearization.
        double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ex = std::exp(c * beta[i]);
            const double da = ex;
            const double dc = A * beta[i] * ex;
            const double r = value[i] - A * ex;
            j11 += da * da;
            j12 += da * dc;
            j22 += dc * dc;
            g1 += da * r;
            g2 += dc * r;
        }
        const double det = j11 * j22 - j12 * j12;
        if (!(std::abs(det) > 1e-300)) break;
        double stepA = (j22 * g1 - j12 * g2) / det;
        double stepC = (j11 * g2 - j12 * g1) / det;
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            const double trial = sse(A + lambda * stepA, c + lambda * stepC);
            if (trial <= current) {
                A += lambda * stepA;
                c += lambda * stepC;
                improved = current - trial > 1e-30 * std::max(1.0, current);
                current = trial;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    return ExponentialFit{A, c, std::sqrt(current / static_cast<double>(n))};
}

/// Exponential fit of the entrained branch across the summary rows that have an entrained mean.
inline ExponentialFit fit_entrained_exponential(const EnsembleSummary& summary) {
    std::vector<double> beta, value;
    for (const BetaSummary& row : summary.rows) {
        if (!row.entrained_mean) continue;
        beta.push_back(row.beta);
        value.push_back(*row.entrained_mean);
    }
    if (beta.size() < 3) {
        throw ConfigError("fit_entrained_exponential: need at least three beta values with an entrained mean, have " +
                          std::to_string(beta.size()));
    }
    return fit_exponential(beta, value);
}

}  // namespace qtraj
