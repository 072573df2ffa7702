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

// End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Arguments select criteria by number; none runs all nine.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtraj/analysis.hpp"
#include "qtraj/classical.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/io.hpp"
#include "qtraj/jumps.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qsd.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace qtraj;
using qtraj::testing::damped_mode;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

/// Sample mean and standard error of the mean.
struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return m;
}

/// Asymptotic Kolmogorov tail probability P(K > lambda) with the small-sample
/// correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
double kolmogorov_p_value(double d, std::size_t n) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    if (lambda < 0.2) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Two-sided KS distance between a sample and the exponential law with `rate`.
double ks_exponential(std::vector<double> sample, double rate) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = 1.0 - std::exp(-rate * sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    return d;
}

// ---------------------------------------------------------------------------------

Outcome kernel_correctness() {
    const FockSpace space(8);
    std::mt19937_64 rng(20260101);
    double worst_symmetry = 0.0;
    for (int k = 0; k < 100; ++k) {
        const StateVector psi = qtraj::testing::random_state(space, rng);
        const double s1 = von_neumann_entropy(partial_trace(psi, 0));
        const double s2 = von_neumann_entropy(partial_trace(psi, 1));
        worst_symmetry = std::max(worst_symmetry, std::abs(s1 - s2));
    }

    const FockSpace wide(30);
    double worst_product = 0.0;
    const std::vector<std::pair<Complex, Complex>> centres = {
        {Complex(0.0), Complex(0.0)}, {Complex(1.0, 0.5), Complex(-0.7, 0.2)}, {Complex(2.0, -1.0), Complex(0.3, 1.8)}};
    for (const auto& [a, b] : centres) {
        worst_product = std::max(worst_product, std::abs(entanglement_entropy(coherent_state(wide, {a, b}))));
    }

    Vector bell = Vector::Zero(space.dimension());
    bell(0) = bell(space.levels() + 1) = std::sqrt(0.5);
    const double bell_error = std::abs(entanglement_entropy(StateVector(space, bell)) - 2.0 * std::log(2.0));

    const bool pass = worst_symmetry < 1e-8 && worst_product < 1e-8 && bell_error < 1e-8;
    return {pass, "max |S1-S2| " + fmt(worst_symmetry) + ", max product E " + fmt(worst_product) +
                      ", Bell error " + fmt(bell_error)};
}

Outcome damped_mode_mean() {
    // A two-component cat keeps the noise term alive; the ensemble mean of a still
    // decays as a(0) exp(-(i + gamma) t) for any initial state.
    const int levels = 16;
    const double gamma = 0.125;
    const FockSpace space(levels, 1);
    const SystemModel model = damped_mode(levels, 1.0, gamma);
    const Vector cat = coherent_state(space, {Complex(1.3, 0.0)}).amplitudes() +
                       coherent_state(space, {Complex(-0.4, 0.9)}).amplitudes();
    const StateVector psi0(space, cat / cat.norm());
    const LadderOperators ops = ladder_operators(space, 0);
    const Complex a0 = psi0.expectation(ops.a);

    const int trajectories = 500;
    const int checkpoints = 20;
    const int spp = 2000;
    const double span = 2.0;  // drive periods
    QsdStepperConfig cfg;
    cfg.dt = dt_for_steps_per_period(spp);
    const long cadence = static_cast<long>(spp * span / checkpoints);

    std::vector<std::vector<double>> re(checkpoints + 1), im(checkpoints + 1);
    for (int k = 0; k < trajectories; ++k) {
        cfg.rng_seed = derive_seed(2, {static_cast<std::uint64_t>(k)});
        const TrajectoryRecord rec = integrate_qsd(psi0, model, span, cfg, cadence);
        if (rec.aborted) return {false, "trajectory " + std::to_string(k) + " aborted: " + rec.abort_cause};
        for (int c = 0; c <= checkpoints; ++c) {
            re[c].push_back(rec.q[0][c] / std::sqrt(2.0));
            im[c].push_back(rec.p[0][c] / std::sqrt(2.0));
        }
    }
    double worst = 0.0;
    for (int c = 1; c <= checkpoints; ++c) {
        const double t = kTwoPi * span * c / checkpoints;
        const Complex expected = a0 * std::exp(-Complex(gamma, 1.0) * t);
        const Moments mr = moments(re[c]), mi = moments(im[c]);
        worst = std::max({worst, std::abs(mr.mean - expected.real()) / mr.se, std::abs(mi.mean - expected.imag()) / mi.se});
    }
    return {worst < 3.0, std::to_string(trajectories) + " trajectories, " + std::to_string(checkpoints) +
                             " checkpoints, worst deviation " + fmt(worst) + " SE (limit 3)"};
}

Outcome coupled_master_equivalence() {
    DuffingParams params;
    params.beta = 1.0;
    const FockSpace space(10);
    const SystemModel model = build_model(params, space);
    const StateVector psi0 = coherent_state(space, {Complex(0.5, 0.2), Complex(-0.3, -0.4)});
    const double periods = 2.0;

    const std::vector<MasterSample> master =
        integrate_master(MixedState::pure(psi0.amplitudes()), model, periods * kTwoPi, kTwoPi / 2000.0, 4000);
    const DenseMatrix& reference = master.back().rho.matrix;

    const int trajectories = 1000;
    const int spp = default_steps_per_period(model, false);
    auto ensemble = [&](Unravelling u) {
        DenseMatrix rho = DenseMatrix::Zero(space.dimension(), space.dimension());
        int used = 0;
        for (int k = 0; k < trajectories; ++k) {
            StepperConfig base;
            base.dt = dt_for_steps_per_period(spp);
            base.rng_seed = derive_seed(3, {static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(k)});
            // The oracle shares the truncated basis, so the truncation guard is moot here.
            base.leakage_threshold = 1.0;
            base.leakage_abort = 1.0;
            auto accumulate = [&](const SampleView& v) {
                if (v.index == static_cast<std::size_t>(periods)) rho += v.psi * v.psi.adjoint();
            };
            TrajectoryRecord rec;
            if (u == Unravelling::qsd) {
                QsdStepperConfig qc;
                static_cast<StepperConfig&>(qc) = base;
                rec = integrate_qsd(psi0, model, periods, qc, spp, accumulate);
            } else {
                JumpStepperConfig jc;
                static_cast<StepperConfig&>(jc) = base;
                rec = integrate_jumps(psi0, model, periods, jc, spp, accumulate);
            }
            if (!rec.aborted) ++used;
        }
        return std::pair{DenseMatrix(rho / static_cast<double>(used)), used};
    };
    const auto [qsd_rho, qsd_used] = ensemble(Unravelling::qsd);
    const auto [jump_rho, jump_used] = ensemble(Unravelling::jumps);
    const double d_qsd = trace_distance(qsd_rho, reference);
    const double d_jump = trace_distance(jump_rho, reference);
    const bool pass = qsd_used == trajectories && jump_used == trajectories && d_qsd < 0.05 && d_jump < 0.05;
    return {pass, "trace distance at t = 2 periods: qsd " + fmt(d_qsd) + " (" + std::to_string(qsd_used) +
                      " trajectories), jumps " + fmt(d_jump) + " (" + std::to_string(jump_used) +
                      " trajectories), limit 0.05"};
}

Outcome fock_decay_statistics() {
    const double gamma = 0.125;
    const FockSpace space(4, 1);
    const SystemModel model = damped_mode(4, 1.0, gamma);
    const std::size_t samples = 10000;
    std::string detail;
    bool pass = true;
    for (JumpScheme scheme : {JumpScheme::per_step_bernoulli, JumpScheme::waiting_time}) {
        JumpStepperConfig cfg;
        cfg.dt = dt_for_steps_per_period(1000);
        cfg.jump_scheme = scheme;
        std::vector<double> times;
        times.reserve(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            cfg.rng_seed = derive_seed(4, {static_cast<std::uint64_t>(scheme), s});
            JumpStepper stepper(model, cfg);
            Vector psi = StateVector::basis(space, {1}).amplitudes();
            for (long k = 0;; ++k) {
                if (stepper.advance(psi, k, k * cfg.dt) >= 0) {
                    times.push_back((k + 1) * cfg.dt);
                    break;
                }
            }
        }
        const double d = ks_exponential(times, 2.0 * gamma);
        const double p = kolmogorov_p_value(d, samples);
        pass = pass && p > 0.01;
        detail += std::string(detail.empty() ? "" : "; ") +
                  (scheme == JumpScheme::waiting_time ? "waiting_time" : "per_step_bernoulli") + " D " + fmt(d) +
                  " p " + fmt(p);
    }
    return {pass, detail + " (" + std::to_string(samples) + " samples, level 0.01)"};
}

Outcome step_halving() {
    DuffingParams params;
    params.beta = 1.0;
    const int levels = 18;
    const FockSpace space(levels);
    const SystemModel model = build_model(params, space);
    Rng ic_rng = make_rng(55);
    const InitialCondition ic =
        sample_initial_conditions(1, uncoupled_attractor(params), params.beta, ic_rng).conditions.front();
    const Vector psi0 = coherent_state(space, ic.alphas()).amplitudes();

    const int spp = default_steps_per_period(model, false);
    const int periods = 5;
    const int trajectories = 200;
    QsdStepperConfig coarse_cfg, fine_cfg;
    coarse_cfg.dt = dt_for_steps_per_period(spp);
    fine_cfg.dt = dt_for_steps_per_period(2 * spp);
    const LadderOperators ops = ladder_operators(space, 0);
    const Operator q1 = std::sqrt(0.5) * (ops.a + ops.a_dag);

    std::vector<std::vector<double>> coarse(periods), fine(periods);
    for (int k = 0; k < trajectories; ++k) {
        // Each coarse increment is the sum of the two fine increments it spans.
        Rng rng = make_rng(derive_seed(5, {static_cast<std::uint64_t>(k)}));
        std::normal_distribution<double> half(0.0, std::sqrt(fine_cfg.dt / 2.0));
        QsdStepper coarse_stepper(model, coarse_cfg), fine_stepper(model, fine_cfg);
        Vector a = psi0, b = psi0;
        std::vector<Complex> d1(2), d2(2), sum(2);
        for (long step = 0; step < static_cast<long>(spp) * periods; ++step) {
            for (int j = 0; j < 2; ++j) {
                d1[j] = Complex(half(rng), half(rng));
                d2[j] = Complex(half(rng), half(rng));
                sum[j] = d1[j] + d2[j];
            }
            coarse_stepper.advance(a, step * coarse_cfg.dt, sum, step);
            fine_stepper.advance(b, (2 * step) * fine_cfg.dt, d1, 2 * step);
            fine_stepper.advance(b, (2 * step + 1) * fine_cfg.dt, d2, 2 * step + 1);
            if ((step + 1) % spp == 0) {
                const int period = static_cast<int>((step + 1) / spp) - 1;
                coarse[period].push_back(StateVector(space, a).expectation(q1).real());
                fine[period].push_back(StateVector(space, b).expectation(q1).real());
            }
        }
        if (leakage(space, a) > kDefaultLeakageAbort || leakage(space, b) > kDefaultLeakageAbort) {
            return {false, "trajectory " + std::to_string(k) + " leaked out of " + std::to_string(levels) + " levels"};
        }
    }
    double worst = 0.0;
    std::string worst_detail;
    for (int p = 0; p < periods; ++p) {
        const Moments mc = moments(coarse[p]), mf = moments(fine[p]);
        const double ratio = std::abs(mc.mean - mf.mean) / mc.se;
        std::vector<double> paired(coarse[p].size());
        for (std::size_t i = 0; i < paired.size(); ++i) paired[i] = coarse[p][i] - fine[p][i];
        std::cerr << "  period " << p + 1 << " delta " << mc.mean - mf.mean << " SE " << mc.se << " paired SE "
                  << moments(paired).se << '\n';
        if (ratio >= worst) {
            worst = ratio;
            worst_detail = "period " + std::to_string(p + 1) + ": |delta| " + fmt(std::abs(mc.mean - mf.mean)) +
                           ", SE " + fmt(mc.se);
        }
    }
    return {worst < 1.0, std::to_string(spp) + " vs " + std::to_string(2 * spp) + " steps/period, worst " +
                             worst_detail + " (ratio " + fmt(worst) + ", limit 1)"};
}

Outcome classical_correspondence() {
    DuffingParams params;
    params.beta = 0.1;
    const int levels = 32;
    const FockSpace space(levels);
    const SystemModel model = build_model(params, space);
    const std::vector<PhasePoint> attractor = uncoupled_attractor(params);

    const int transient = 50;
    const int periods = 260;
    const int trajectories = 2;
    StepperConfig base;
    base.dt = dt_for_steps_per_period(default_steps_per_period(model, true));
    base.recenter = true;
    const long per_period = steps_per_period(base.dt);

    std::vector<PhasePoint> strobes;
    for (int k = 0; k < trajectories; ++k) {
        Rng ic_rng = make_rng(derive_seed(6, {static_cast<std::uint64_t>(k), 1}));
        const InitialCondition ic = sample_initial_conditions(1, attractor, params.beta, ic_rng).conditions.front();
        QsdStepperConfig cfg;
        static_cast<StepperConfig&>(cfg) = base;
        cfg.rng_seed = derive_seed(6, {static_cast<std::uint64_t>(k), 0});
        const TrajectoryRecord rec =
            integrate_qsd(InitialState::coherent(space, ic.alphas(), true), model, periods, cfg, per_period);
        if (rec.aborted) return {false, "trajectory " + std::to_string(k) + " aborted: " + rec.abort_cause};
        for (std::size_t i = transient; i < rec.size(); ++i) {
            for (int s = 0; s < 2; ++s) strobes.push_back({params.beta * rec.q[s][i], params.beta * rec.p[s][i]});
        }
    }
    const double overlap = attractor_overlap(strobes, attractor, 0.2);
    return {overlap >= 0.8 && strobes.size() >= 200,
            std::to_string(strobes.size()) + " strobed centroids after " + std::to_string(transient) +
                " periods, fraction within 0.2 of the classical Poincare set " + fmt(overlap) + ", limit 0.8"};
}

SweepPlan shape_plan(Unravelling u, std::vector<BetaPlan> betas, int trajectories, double t_span) {
    SweepPlan plan;
    plan.betas = std::move(betas);
    plan.unravelling = u;
    plan.trajectories = trajectories;
    plan.t_span = t_span;
    plan.samples_per_period = 20;
    plan.master_seed = 2005;
    return plan;
}

Outcome entanglement_drop() {
    const SweepPlan plan = shape_plan(Unravelling::qsd, {BetaPlan{0.25, 36, 0, true}}, 20, 60.0);
    DuffingParams p = plan.base;
    p.beta = 0.25;
    const SystemModel model = build_model(p, FockSpace(36));
    const std::vector<PhasePoint> attractor = uncoupled_attractor(plan.base, plan.attractor);
    EntrainmentSettings settings = plan.entrainment;
    settings.threshold = plan_threshold(plan, attractor);
    for (int k = 0; k < plan.trajectories; ++k) {
        TrajectoryResult r;
        r.trajectory = static_cast<std::size_t>(k);
        r.record = run_plan_trajectory(plan, 0, r.trajectory, model, attractor);
        if (r.record.aborted) {
            std::cerr << "  trajectory " << k << " aborted: " << r.record.abort_cause << '\n';
            continue;
        }
        analyse(r, settings);
        if (!r.labeling.entrainment_time) continue;
        if (!r.means.chaotic || !r.means.entrained) {
            std::cerr << "  trajectory " << k << " entrained at " << *r.labeling.entrainment_time
                      << " periods without both phase windows\n";
            continue;
        }
        const double c = *r.means.chaotic, e = *r.means.entrained;
        return {c > 2.0 * e, "trajectory " + std::to_string(k) + " entrains at " + fmt(*r.labeling.entrainment_time) +
                                 " periods: E_chaotic " + fmt(c) + ", E_entrained " + fmt(e) + ", ratio " +
                                 fmt(c / e) + " (limit 2)"};
    }
    return {false, "no trajectory with detected entrainment and both phase windows among " +
                       std::to_string(plan.trajectories)};
}

Outcome beta_dependence() {
    bool pass = true;
    std::string detail;
    for (Unravelling u : {Unravelling::qsd, Unravelling::jumps}) {
        // Jump-unravelled states at beta = 0.25 spread across both wells and need a much
        // larger basis than the localized QSD states.
        const int small_beta_levels = u == Unravelling::qsd ? 40 : 64;
        const SweepPlan plan = shape_plan(
            u, {BetaPlan{1.0, 30, 0, false}, BetaPlan{0.5, 32, 0, true}, BetaPlan{0.25, small_beta_levels, 0, true}}, 8,
            60.0);
        const SweepResult result = run_sweep(plan);
        const auto& rows = result.summary.rows;
        std::ostringstream os;
        os << to_string(u) << ":";
        for (const BetaSummary& row : rows) {
            os << " beta " << row.beta << " [E_chaotic "
               << (row.chaotic_mean ? fmt(*row.chaotic_mean) : std::string("NA")) << " E_entrained "
               << (row.entrained_mean ? fmt(*row.entrained_mean) : std::string("NA")) << " entrained "
               << row.n_entrained << "/" << row.n_total << " aborted " << row.n_aborted << "]";
        }
        bool ok = true;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            // rows run from large to small beta
            ok = ok && rows[i].entrained_mean && rows[i + 1].entrained_mean &&
                 *rows[i].entrained_mean > *rows[i + 1].entrained_mean;
        }
        ok = ok && rows.back().entrained_mean;
        if (ok) {
            const ExponentialFit fit = fit_entrained_exponential(result.summary);
            os << " fit " << fmt(fit.amplitude) << "*exp(" << fmt(fit.rate) << " beta) residual "
               << fmt(fit.residual);
        } else {
            os << " E_entrained not strictly increasing in beta";
        }
        const bool chaotic_ok = rows.front().chaotic_mean && rows.back().chaotic_mean &&
                                *rows.back().chaotic_mean > 0.5 * *rows.front().chaotic_mean;
        if (rows.front().chaotic_mean && rows.back().chaotic_mean) {
            os << " E_chaotic ratio " << fmt(*rows.back().chaotic_mean / *rows.front().chaotic_mean) << " (limit 0.5)";
        }
        pass = pass && ok && chaotic_ok;
        detail += (detail.empty() ? "" : "; ") + os.str();
    }
    return {pass, detail};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = os.str();
    }
    return files;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "qtraj_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "sweep.cfg";
    {
        std::ofstream os(config);
        os << "betas = 1, 0.5\nsweep_levels = 14, 16\nrecenter = on\nt_max = 2\ntrajectories = 3\n"
              "unravelling = jumps\nseed = 9\nclassical_periods = 100\n";
    }
    std::map<std::string, std::string> first;
    std::string detail;
    bool pass = true;
    int run = 0;
    for (int workers : {1, 1, 2, 4}) {
        const fs::path out = root / ("run" + std::to_string(run++));
        const fs::path cfg_copy = out.string() + ".cfg";
        fs::copy_file(config, cfg_copy);
        {
            std::ofstream os(cfg_copy, std::ios::app);
            os << "workers = " << workers << '\n';
        }
        const std::string cmd = std::string(QTRAJ_CLI_PATH) + " sweep --config " + cfg_copy.string() + " --out " +
                                out.string() + " > " + out.string() + ".log 2>&1";
        if (std::system(cmd.c_str()) != 0) return {false, "CLI sweep failed with " + std::to_string(workers) + " workers"};
        const auto files = read_tree(out);
        if (first.empty()) {
            first = files;
            continue;
        }
        if (files != first) {
            pass = false;
            detail += " mismatch at " + std::to_string(workers) + " workers;";
        }
    }
    fs::remove_all(root);
    return {pass && first.size() > 2, std::to_string(first.size()) +
                                          " output files compared across runs at 1, 1, 2 and 4 workers" + detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"kernel correctness", kernel_correctness},
        {"QSD oracle, single damped mode", damped_mode_mean},
        {"ensemble vs master equation, coupled system", coupled_master_equivalence},
        {"Fock decay jump statistics", fock_decay_statistics},
        {"step halving below statistical error", step_halving},
        {"classical correspondence at beta 0.1", classical_correspondence},
        {"entanglement drop on entrainment at beta 0.25", entanglement_drop},
        {"entanglement versus beta, both unravellings", beta_dependence},
        {"determinism across worker counts", determinism},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty()) {
        for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(static_cast<int>(i));
    }

    int failures = 0;
    for (int id : selected) {
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::cerr << "unknown criterion " << id << '\n';
            return 2;
        }
        const auto& [name, run] = criteria[static_cast<std::size_t>(id - 1)];
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!outcome.pass) ++failures;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << outcome.detail
                  << "  [" << fmt(seconds, 3) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
