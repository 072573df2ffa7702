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

// qtraj command-line front end.
//
//   qtraj trajectory --config run.cfg [overrides]
//   qtraj sweep      --config sweep.cfg [overrides]
//   qtraj classical  --config classical.cfg [overrides]
//
// Exit codes: 0 ok, 2 configuration error, 3 truncation abort, 4 resource guard.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtraj.hpp"

namespace fs = std::filesystem;
using namespace qtraj;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kTruncationAbort = 3, kResourceGuard = 4 };

struct Overrides {
    std::map<std::string, std::string> values;
    std::string config_path;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "flat key = value configuration file");
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"--beta", "beta"},       {"--g", "g"},
        {"--gamma", "gamma"},     {"--mu", "mu"},
        {"--levels", "levels"},   {"--dt", "dt"},
        {"--t-max", "t_max"},     {"--trajectories", "trajectories"},
        {"--unravelling", "unravelling"}, {"--seed", "seed"},
        {"--recenter", "recenter"}, {"--out", "out"},
    };
    for (const auto& [flag, key] : flags) {
        const std::string k = key;
        cmd->add_option_function<std::string>(
            flag, [&o, k](const std::string& v) { o.values[k] = v; }, "override config key '" + key + "'");
    }
}

RunConfig load_config(const Overrides& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
    for (const auto& [k, v] : o.values) cfg.set(k, v);
    return cfg;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << text;
}

std::string opt_text(const std::optional<double>& v) { return v ? format_real(*v) : std::string("NA"); }

int cmd_trajectory(const RunConfig& cfg) {
    cfg.require("beta");
    SweepPlan plan = cfg.plan({cfg.beta});
    plan.trajectories = 1;
    plan.workers = 1;
    const SweepResult result = run_sweep(plan);
    const TrajectoryResult& r = result.trajectories.front();

    ensure_dir(cfg.out);
    save_record((fs::path(cfg.out) / "trajectory.txt").string(), r.record);
    write_text(fs::path(cfg.out) / "config.txt", cfg.serialize());

    const TrajectoryRecord& rec = r.record;
    std::cout << "unravelling " << rec.unravelling << "  beta " << format_real(rec.beta) << "  seed " << rec.seed << '\n'
              << "samples " << rec.size() << "  jumps " << rec.jumps.size() << "  max leakage "
              << format_real(rec.leakage_max) << "  flagged steps " << rec.leakage_flagged_steps << '\n';
    if (!rec.aborted) {
        std::cout << "entrainment time "
                  << (r.labeling.entrainment_time ? format_real(*r.labeling.entrainment_time) : std::string("none"))
                  << (r.labeling.labeled ? "" : " (unlabeled)") << '\n'
                  << "E_chaotic " << opt_text(r.means.chaotic) << "  E_entrained " << opt_text(r.means.entrained)
                  << '\n';
    }
    if (rec.aborted) {
        std::cerr << "trajectory aborted at t = " << format_real(rec.abort_time) << " periods: " << rec.abort_cause
                  << '\n';
        return rec.abort_cause.rfind("truncation", 0) == 0 ? kTruncationAbort : kConfigError;
    }
    return kOk;
}

int cmd_sweep(const RunConfig& cfg) {
    cfg.require("betas");
    const SweepPlan plan = cfg.plan(cfg.betas);
    const SweepResult result = run_sweep(plan);

    const fs::path out(cfg.out);
    ensure_dir((out / "records").string());
    write_text(out / "config.txt", cfg.serialize());
    for (const TrajectoryResult& r : result.trajectories) {
        const std::string name = "beta" + std::to_string(r.beta_index) + "_traj" + std::to_string(r.trajectory) + ".txt";
        save_record((out / "records" / name).string(), r.record);
    }
    std::ostringstream table;
    write_summary(table, result.summary);
    write_text(out / "summary.tsv", table.str());

    std::ostringstream meta;
    meta << "entrainment_threshold " << format_real(result.summary.threshold) << '\n';
    for (const BetaSummary& row : result.summary.rows) {
        meta << "beta " << format_real(row.beta) << " n_entrained " << row.n_entrained << " n_total " << row.n_total
             << " leakage_max " << format_real(row.leakage_max) << '\n';
    }
    try {
        const ExponentialFit fit = fit_entrained_exponential(result.summary);
        meta << "entrained_fit amplitude " << format_real(fit.amplitude) << " rate " << format_real(fit.rate)
             << " residual " << format_real(fit.residual) << '\n';
    } catch (const ConfigError& e) {
        meta << "entrained_fit unavailable: " << e.what() << '\n';
    }
    write_text(out / "summary_meta.txt", meta.str());
    std::cout << table.str() << meta.str();
    return kOk;
}

int cmd_classical(const RunConfig& cfg) {
    const DuffingParams params = cfg.params(cfg.beta);
    AttractorSettings as;
    as.periods = cfg.classical_periods;
    as.transient_periods = cfg.classical_transient;
    as.steps_per_period = cfg.classical_steps_per_period;
    if (as.periods < 1 || as.steps_per_period < 1) throw ConfigError("classical: periods and steps must be positive");

    const fs::path out(cfg.out);
    ensure_dir(out.string());

    // Full orbit at 20 samples per period over the sampled span (after the transient).
    const double dt = kTwoPi / as.steps_per_period;
    const long store = std::max(1, as.steps_per_period / 20);
    auto rhs = [&](const std::array<double, 2>& v, double t) {
        const PhasePoint d = classical_rhs(ClassicalState{v[0], v[1], t}, params);
        return std::array<double, 2>{d.x, d.y};
    };
    const auto orbit = rk4_integrate<2>({as.start.x, as.start.y}, as.start.t, rhs,
                                        (as.transient_periods + as.periods) * kTwoPi, dt, store);
    {
        std::ofstream os(out / "attractor.csv");
        os << "t_periods,x,y\n";
        for (const auto& [t, s] : orbit) {
            if (t / kTwoPi + 1e-9 < as.transient_periods) continue;
            os << format_real(t / kTwoPi) << ',' << format_real(s[0]) << ',' << format_real(s[1]) << '\n';
        }
    }
    const std::vector<PhasePoint> section = uncoupled_attractor(params, as);
    {
        std::ofstream os(out / "poincare.csv");
        os << "x,y\n";
        for (const PhasePoint& p : section) os << format_real(p.x) << ',' << format_real(p.y) << '\n';
    }
    Rng rng = make_rng(trajectory_seed(cfg.seed, 0, 0, cfg.unravelling, kInitialCondition));
    const bool moving = recenter_for(cfg.recenter, cfg.beta);
    const InitialConditionDraw draw =
        sample_initial_conditions(cfg.initial_conditions, section, cfg.beta, rng, cfg.levels, moving);
    {
        std::ofstream os(out / "initial_conditions.csv");
        os << "index,q0_1,p0_1,q0_2,p0_2,alpha1_re,alpha1_im,alpha2_re,alpha2_im\n";
        for (std::size_t i = 0; i < draw.conditions.size(); ++i) {
            const InitialCondition& c = draw.conditions[i];
            os << i << ',' << format_real(c.q0[0]) << ',' << format_real(c.p0[0]) << ',' << format_real(c.q0[1]) << ','
               << format_real(c.p0[1]) << ',' << format_real(c.alpha[0].real()) << ','
               << format_real(c.alpha[0].imag()) << ',' << format_real(c.alpha[1].real()) << ','
               << format_real(c.alpha[1].imag()) << '\n';
        }
    }
    write_text(out / "config.txt", cfg.serialize());
    std::cout << "poincare points " << section.size() << "  diameter " << format_real(diameter(section)) << '\n';
    if (draw.warning) std::cerr << "warning: " << *draw.warning << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum trajectories of two coupled damped driven Duffing oscillators"};
    app.require_subcommand(1);
    Overrides traj_o, sweep_o, classical_o;
    CLI::App* traj = app.add_subcommand("trajectory", "integrate one trajectory and write its record");
    CLI::App* sweep = app.add_subcommand("sweep", "run a seeded ensemble over a list of beta values");
    CLI::App* classical = app.add_subcommand("classical", "classical attractor, Poincare section and initial conditions");
    add_overrides(traj, traj_o);
    add_overrides(sweep, sweep_o);
    add_overrides(classical, classical_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*traj) return cmd_trajectory(load_config(traj_o));
        if (*sweep) return cmd_sweep(load_config(sweep_o));
        if (*classical) return cmd_classical(load_config(classical_o));
    } catch (const ResourceGuardError& e) {
        std::cerr << "resource guard: " << e.what() << '\n';
        return kResourceGuard;
    } catch (const TruncationError& e) {
        std::cerr << "truncation: " << e.what() << '\n';
        return kTruncationAbort;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
