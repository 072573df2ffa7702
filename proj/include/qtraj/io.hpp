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

// Text formats: the flat key = value run configuration, versioned trajectory
// records and the ensemble summary table. Reals are written with 17 significant
// digits so every file parses back to the exact doubles.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qtraj/ensemble.hpp"
#include "qtraj/error.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError("key '" + key + "': expected a real number, got '" + text + "'");
    }
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + text + "'");
    }
    return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

/// Recentering choice: explicit, or on for every beta below 1.
enum class RecenterMode { automatic, on, off };

inline bool recenter_for(RecenterMode mode, double beta) {
    if (mode == RecenterMode::on) return true;
    if (mode == RecenterMode::off) return false;
    return beta < 1.0;
}

/// Flat configuration shared by all subcommands. Times are in drive periods.
struct RunConfig {
    double beta = 1.0;
    std::vector<double> betas;
    double g = 0.3;
    double gamma = 0.125;
    double mu = 0.2;
    int levels = 25;
    std::vector<int> sweep_levels;  ///< per-beta levels; empty means `levels` everywhere
    double dt = 0.0;                ///< drive periods; 0 selects the default rule
    double t_max = 60.0;
    int samples_per_period = 20;
    int trajectories = 1;
    Unravelling unravelling = Unravelling::qsd;
    JumpScheme jump_scheme = JumpScheme::per_step_bernoulli;
    DriftScheme scheme = DriftScheme::taylor4;
    std::uint64_t seed = 0;
    RecenterMode recenter = RecenterMode::automatic;
    int recenter_every = 10;
    int renormalize_every = 1;
    double leakage_threshold = kDefaultLeakageThreshold;
    double leakage_abort = kDefaultLeakageAbort;
    int workers = 1;
    double window = 8.0;
    double guard = 2.0;
    double threshold = 0.0;  ///< 0 means calibrate from the classical attractor
    double threshold_fraction = 0.125;
    double max_work = 5e13;
    int classical_periods = 1000;
    double classical_transient = 50.0;
    int classical_steps_per_period = 200;
    int initial_conditions = 10;
    std::string out = "out";

    /// Keys that were explicitly provided (file or command line).
    std::set<std::string> provided;

    void set(const std::string& key, const std::string& value);
    std::string serialize() const;
    static RunConfig parse(std::istream& in);
    static RunConfig parse_text(const std::string& text) {
        std::istringstream is(text);
        return parse(is);
    }
    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse(in);
    }

    void require(const std::string& key) const {
        if (!provided.count(key)) throw ConfigError("missing required key: " + key);
    }

    DuffingParams params(double b) const {
        DuffingParams p;
        p.beta = b;
        p.g = g;
        p.gamma = gamma;
        p.mu = mu;
        p.validate();
        return p;
    }

    SweepPlan plan(const std::vector<double>& beta_list) const;
};

inline void RunConfig::set(const std::string& key, const std::string& raw) {
    using detail::parse_integer;
    using detail::parse_real;
    const std::string value = detail::trim(raw);
    auto as_int = [&](int& field) { field = static_cast<int>(parse_integer(key, value)); };
    if (key == "beta") beta = parse_real(key, value);
    else if (key == "betas") {
        betas.clear();
        for (const std::string& s : detail::split_list(value)) betas.push_back(parse_real(key, s));
    } else if (key == "g") g = parse_real(key, value);
    else if (key == "gamma") gamma = parse_real(key, value);
    else if (key == "mu") mu = parse_real(key, value);
    else if (key == "levels") as_int(levels);
    else if (key == "sweep_levels") {
        sweep_levels.clear();
        for (const std::string& s : detail::split_list(value)) sweep_levels.push_back(static_cast<int>(parse_integer(key, s)));
    } else if (key == "dt") dt = value == "auto" ? 0.0 : parse_real(key, value);
    else if (key == "t_max") t_max = parse_real(key, value);
    else if (key == "samples_per_period") as_int(samples_per_period);
    else if (key == "trajectories") as_int(trajectories);
    else if (key == "unravelling") unravelling = parse_unravelling(value);
    else if (key == "jump_scheme") {
        if (value == "per_step_bernoulli") jump_scheme = JumpScheme::per_step_bernoulli;
        else if (value == "waiting_time") jump_scheme = JumpScheme::waiting_time;
        else throw ConfigError("key 'jump_scheme': expected per_step_bernoulli or waiting_time, got '" + value + "'");
    } else if (key == "scheme") {
        if (value == "taylor4") scheme = DriftScheme::taylor4;
        else if (value == "euler") scheme = DriftScheme::euler;
        else throw ConfigError("key 'scheme': expected taylor4 or euler, got '" + value + "'");
    } else if (key == "seed") seed = detail::parse_unsigned(key, value);
    else if (key == "recenter") {
        if (value == "on") recenter = RecenterMode::on;
        else if (value == "off") recenter = RecenterMode::off;
        else if (value == "auto") recenter = RecenterMode::automatic;
        else throw ConfigError("key 'recenter': expected on, off or auto, got '" + value + "'");
    } else if (key == "recenter_every") as_int(recenter_every);
    else if (key == "renormalize_every") as_int(renormalize_every);
    else if (key == "leakage_threshold") leakage_threshold = parse_real(key, value);
    else if (key == "leakage_abort") leakage_abort = parse_real(key, value);
    else if (key == "workers") as_int(workers);
    else if (key == "window") window = parse_real(key, value);
    else if (key == "guard") guard = parse_real(key, value);
    else if (key == "threshold") threshold = parse_real(key, value);
    else if (key == "threshold_fraction") threshold_fraction = parse_real(key, value);
    else if (key == "max_work") max_work = parse_real(key, value);
    else if (key == "classical_periods") as_int(classical_periods);
    else if (key == "classical_transient") classical_transient = parse_real(key, value);
    else if (key == "classical_steps_per_period") as_int(classical_steps_per_period);
    else if (key == "initial_conditions") as_int(initial_conditions);
    else if (key == "out") out = value;
    else throw ConfigError("unknown config key '" + key + "'");
    provided.insert(key);
}

// Execution-only keys (workers, out) are not echoed: they never change results, and
// leaving them out keeps output files byte-identical across worker counts.
inline std::string RunConfig::serialize() const {
    auto list_real = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
        return s;
    };
    auto list_int = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    const char* rc = recenter == RecenterMode::on ? "on" : recenter == RecenterMode::off ? "off" : "auto";
    std::ostringstream os;
    os << "beta = " << format_real(beta) << '\n'
       << "betas = " << list_real(betas) << '\n'
       << "g = " << format_real(g) << '\n'
       << "gamma = " << format_real(gamma) << '\n'
       << "mu = " << format_real(mu) << '\n'
       << "levels = " << levels << '\n'
       << "sweep_levels = " << list_int(sweep_levels) << '\n'
       << "dt = " << format_real(dt) << '\n'
       << "t_max = " << format_real(t_max) << '\n'
       << "samples_per_period = " << samples_per_period << '\n'
       << "trajectories = " << trajectories << '\n'
       << "unravelling = " << to_string(unravelling) << '\n'
       << "jump_scheme = " << (jump_scheme == JumpScheme::waiting_time ? "waiting_time" : "per_step_bernoulli") << '\n'
       << "scheme = " << (scheme == DriftScheme::euler ? "euler" : "taylor4") << '\n'
       << "seed = " << seed << '\n'
       << "recenter = " << rc << '\n'
       << "recenter_every = " << recenter_every << '\n'
       << "renormalize_every = " << renormalize_every << '\n'
       << "leakage_threshold = " << format_real(leakage_threshold) << '\n'
       << "leakage_abort = " << format_real(leakage_abort) << '\n'
       << "window = " << format_real(window) << '\n'
       << "guard = " << format_real(guard) << '\n'
       << "threshold = " << format_real(threshold) << '\n'
       << "threshold_fraction = " << format_real(threshold_fraction) << '\n'
       << "max_work = " << format_real(max_work) << '\n'
       << "classical_periods = " << classical_periods << '\n'
       << "classical_transient = " << format_real(classical_transient) << '\n'
       << "classical_steps_per_period = " << classical_steps_per_period << '\n'
       << "initial_conditions = " << initial_conditions << '\n';
    return os.str();
}

inline RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        cfg.set(detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    }
    return cfg;
}

inline SweepPlan RunConfig::plan(const std::vector<double>& beta_list) const {
    if (beta_list.empty()) throw ConfigError("sweep: beta list is empty");
    if (!sweep_levels.empty() && sweep_levels.size() != beta_list.size()) {
        throw ConfigError("sweep_levels must have one entry per beta");
    }
    SweepPlan plan;
    for (std::size_t i = 0; i < beta_list.size(); ++i) {
        BetaPlan bp;
        bp.beta = beta_list[i];
        bp.levels = sweep_levels.empty() ? levels : sweep_levels[i];
        bp.recenter = recenter_for(recenter, bp.beta);
        if (dt > 0.0) {
            const double per = 1.0 / dt;
            const long spp = std::lround(per);
            if (spp < 1 || std::abs(per - static_cast<double>(spp)) > 1e-9 * per) {
                throw ConfigError("dt must divide the drive period into a whole number of steps");
            }
            bp.steps_per_period = static_cast<int>(spp);
        }
        plan.betas.push_back(bp);
    }
    plan.unravelling = unravelling;
    plan.trajectories = trajectories;
    plan.t_span = t_max;
    plan.samples_per_period = samples_per_period;
    plan.master_seed = seed;
    plan.base = params(beta_list.front());
    plan.stepper.renormalize_every = renormalize_every;
    plan.stepper.recenter_every = recenter_every;
    plan.stepper.leakage_threshold = leakage_threshold;
    plan.stepper.leakage_abort = leakage_abort;
    plan.stepper.scheme = scheme;
    plan.stepper.validate();
    plan.jump_scheme = jump_scheme;
    plan.entrainment.window = window;
    plan.entrainment.guard = guard;
    plan.entrainment.threshold = threshold;
    plan.entrainment.threshold_fraction = threshold_fraction;
    plan.workers = workers;
    plan.max_work = max_work;
    plan.validate();
    return plan;
}

inline constexpr int kRecordFormatVersion = 1;

/// Record layout: header lines `key value`, metadata as `meta key value...`, jump events,
/// then a fixed-column body announced by `columns` and `samples`.
inline void write_record(std::ostream& os, const TrajectoryRecord& rec) {
    auto single_line = [](const std::string& s) {
        if (s.find('\n') != std::string::npos) throw ConfigError("record: text fields must be single-line");
        return s;
    };
    os << "# qtraj trajectory record\n";
    os << "format_version " << kRecordFormatVersion << '\n';
    os << "unravelling " << single_line(rec.unravelling) << '\n';
    os << "beta " << format_real(rec.beta) << '\n';
    os << "seed " << rec.seed << '\n';
    for (const auto& [k, v] : rec.metadata) {
        if (k.find_first_of(" \t") != std::string::npos) throw ConfigError("record: metadata keys must not contain spaces");
        os << "meta " << single_line(k) << ' ' << single_line(v) << '\n';
    }
    os << "aborted " << (rec.aborted ? 1 : 0) << '\n';
    os << "abort_time " << format_real(rec.abort_time) << '\n';
    os << "abort_cause " << single_line(rec.abort_cause) << '\n';
    os << "leakage_flagged_steps " << rec.leakage_flagged_steps << '\n';
    os << "leakage_max " << format_real(rec.leakage_max) << '\n';
    os << "jumps " << rec.jumps.size() << '\n';
    for (const JumpEvent& j : rec.jumps) os << "jump " << format_real(j.time) << ' ' << j.channel << '\n';
    os << "columns t q1 p1 q2 p2 entropy leakage\n";
    os << "samples " << rec.size() << '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        os << format_real(rec.times[i]) << ' ' << format_real(rec.q[0][i]) << ' ' << format_real(rec.p[0][i]) << ' '
           << format_real(rec.q[1][i]) << ' ' << format_real(rec.p[1][i]) << ' ' << format_real(rec.entropy[i]) << ' '
           << format_real(rec.leakage[i]) << '\n';
    }
}

inline TrajectoryRecord read_record(std::istream& is) {
    TrajectoryRecord rec;
    std::string line;
    bool versioned = false;
    long samples = -1;
    auto rest = [](const std::string& l, std::size_t from) {
        return from >= l.size() ? std::string() : l.substr(from);
    };
    while (samples < 0 && std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string value = sp == std::string::npos ? std::string() : rest(line, sp + 1);
        if (key == "format_version") {
            const long long v = detail::parse_integer(key, value);
            if (v != kRecordFormatVersion) throw ConfigError("record: unsupported format_version " + value);
            versioned = true;
        } else if (key == "unravelling") rec.unravelling = value;
        else if (key == "beta") rec.beta = detail::parse_real(key, value);
        else if (key == "seed") rec.seed = detail::parse_unsigned(key, value);
        else if (key == "meta") {
            const auto s2 = value.find(' ');
            rec.metadata.emplace_back(value.substr(0, s2), s2 == std::string::npos ? std::string() : rest(value, s2 + 1));
        } else if (key == "aborted") rec.aborted = detail::parse_integer(key, value) != 0;
        else if (key == "abort_time") rec.abort_time = detail::parse_real(key, value);
        else if (key == "abort_cause") rec.abort_cause = value;
        else if (key == "leakage_flagged_steps") rec.leakage_flagged_steps = detail::parse_integer(key, value);
        else if (key == "leakage_max") rec.leakage_max = detail::parse_real(key, value);
        else if (key == "jumps") rec.jumps.reserve(static_cast<std::size_t>(detail::parse_integer(key, value)));
        else if (key == "jump") {
            std::istringstream js(value);
            std::string t, c;
            js >> t >> c;
            rec.jumps.push_back(JumpEvent{detail::parse_real(key, t), static_cast<int>(detail::parse_integer(key, c))});
        } else if (key == "columns") {
            if (value != "t q1 p1 q2 p2 entropy leakage") throw ConfigError("record: unexpected column layout");
        } else if (key == "samples") samples = detail::parse_integer(key, value);
        else throw ConfigError("record: unknown header key '" + key + "'");
    }
    if (!versioned) throw ConfigError("record: missing format_version");
    if (samples < 0) throw ConfigError("record: missing samples line");
    for (long i = 0; i < samples; ++i) {
        if (!std::getline(is, line)) throw ConfigError("record: truncated body");
        std::istringstream row(line);
        std::string f[7];
        for (auto& s : f) {
            if (!(row >> s)) throw ConfigError("record: short row " + std::to_string(i));
        }
        rec.times.push_back(detail::parse_real("t", f[0]));
        rec.q[0].push_back(detail::parse_real("q1", f[1]));
        rec.p[0].push_back(detail::parse_real("p1", f[2]));
        rec.q[1].push_back(detail::parse_real("q2", f[3]));
        rec.p[1].push_back(detail::parse_real("p2", f[4]));
        rec.entropy.push_back(detail::parse_real("entropy", f[5]));
        rec.leakage.push_back(detail::parse_real("leakage", f[6]));
    }
    return rec;
}

inline void save_record(const std::string& path, const TrajectoryRecord& rec) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    write_record(os, rec);
    if (!os) throw ConfigError("write failed for '" + path + "'");
}

inline TrajectoryRecord load_record(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open record '" + path + "'");
    return read_record(is);
}

/// Tab-separated summary; absent values are written as NA.
inline void write_summary(std::ostream& os, const EnsembleSummary& summary) {
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("NA"); };
    os << "beta\tunravelling\tE_chaotic_mean\tE_chaotic_se\tE_entrained_mean\tE_entrained_se\tn_labeled\tn_unlabeled"
          "\tn_aborted\n";
    for (const BetaSummary& r : summary.rows) {
        os << format_real(r.beta) << '\t' << to_string(r.unravelling) << '\t' << opt(r.chaotic_mean) << '\t'
           << opt(r.chaotic_se) << '\t' << opt(r.entrained_mean) << '\t' << opt(r.entrained_se) << '\t'
           << r.n_labeled << '\t' << r.n_unlabeled << '\t' << r.n_aborted << '\n';
    }
}

}  // namespace qtraj
