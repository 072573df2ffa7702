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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "qtraj/io.hpp"

using namespace qtraj;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("qtraj_test_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QTRAJ_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

const char* kSmallRun =
    "# quantum-limit smoke run\n"
    "beta = 1\n"
    "betas = 1\n"
    "levels = 14\n"
    "dt = 0.001\n"
    "t_max = 0.5\n"
    "trajectories = 1\n"
    "seed = 5\n";

}  // namespace

TEST(Config, SerializeParseRoundTrip) {
    RunConfig cfg;
    cfg.set("betas", "1, 0.5,0.25");
    cfg.set("sweep_levels", "25,28,34");
    cfg.set("unravelling", "jumps");
    cfg.set("jump_scheme", "waiting_time");
    cfg.set("recenter", "on");
    cfg.set("g", "0.31");
    cfg.set("seed", "18446744073709551615");
    cfg.set("dt", "0.0005");
    const RunConfig back = RunConfig::parse_text(cfg.serialize());
    EXPECT_EQ(back.serialize(), cfg.serialize());
    EXPECT_EQ(back.betas, (std::vector<double>{1.0, 0.5, 0.25}));
    EXPECT_EQ(back.seed, std::numeric_limits<std::uint64_t>::max());
    EXPECT_EQ(back.unravelling, Unravelling::jumps);
}

TEST(Config, CommentsAndWhitespaceAreIgnored) {
    const RunConfig cfg = RunConfig::parse_text("  # comment\n\n  beta   =  0.25  \nlevels=30\n");
    EXPECT_EQ(cfg.beta, 0.25);
    EXPECT_EQ(cfg.levels, 30);
    EXPECT_TRUE(cfg.provided.count("beta"));
    EXPECT_FALSE(cfg.provided.count("mu"));
}

TEST(Config, UnknownKeyIsRejected) {
    EXPECT_THROW(RunConfig::parse_text("beta = 0.5\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse_text("beta 0.5\n"), ConfigError);
}

TEST(Config, MissingRequiredKeyNamesIt) {
    const RunConfig cfg = RunConfig::parse_text("levels = 10\n");
    try {
        cfg.require("beta");
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
    }
}

TEST(Config, BadValuesAreRejected) {
    EXPECT_THROW(RunConfig::parse_text("beta = abc\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse_text("levels = 2.5\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse_text("recenter = maybe\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse_text("unravelling = homodyne\n"), ConfigError);
    RunConfig cfg = RunConfig::parse_text("dt = 0.0003\nbetas = 1\n");
    EXPECT_THROW(cfg.plan(cfg.betas), ConfigError);
    cfg = RunConfig::parse_text("betas = 1,0.5\nsweep_levels = 10\n");
    EXPECT_THROW(cfg.plan(cfg.betas), ConfigError);
}

TEST(Config, RecenterDefaultsOnBelowTheQuantumLimit) {
    EXPECT_FALSE(recenter_for(RecenterMode::automatic, 1.0));
    EXPECT_TRUE(recenter_for(RecenterMode::automatic, 0.5));
    EXPECT_FALSE(recenter_for(RecenterMode::off, 0.1));
    EXPECT_TRUE(recenter_for(RecenterMode::on, 1.0));
}

TEST(Record, RoundTripIsLossless) {
    TrajectoryRecord rec;
    rec.unravelling = "jumps";
    rec.beta = 0.25;
    rec.seed = 1234567890123ULL;
    rec.metadata = {{"levels", "32"}, {"note", "two words"}};
    rec.jumps = {{0.125, 0}, {1.0 / 3.0, 1}};
    rec.leakage_flagged_steps = 12;
    rec.leakage_max = 3.3e-5;
    rec.aborted = true;
    rec.abort_time = 1.5;
    rec.abort_cause = "truncation: leakage above abort level";
    for (int k = 0; k < 5; ++k) {
        rec.times.push_back(0.05 * k);
        rec.q[0].push_back(std::sin(k + 0.1));
        rec.p[0].push_back(-1.0 / (k + 3.0));
        rec.q[1].push_back(std::exp(k) * 1e-7);
        rec.p[1].push_back(k == 2 ? -0.0 : 1e300);
        rec.entropy.push_back(std::sqrt(2.0) * k);
        rec.leakage.push_back(1e-17 * k);
    }
    std::stringstream ss;
    write_record(ss, rec);
    const TrajectoryRecord back = read_record(ss);
    EXPECT_EQ(back.unravelling, rec.unravelling);
    EXPECT_EQ(back.beta, rec.beta);
    EXPECT_EQ(back.seed, rec.seed);
    EXPECT_EQ(back.metadata, rec.metadata);
    ASSERT_EQ(back.jumps.size(), 2u);
    EXPECT_EQ(back.jumps[1].time, rec.jumps[1].time);
    EXPECT_EQ(back.jumps[1].channel, 1);
    EXPECT_EQ(back.leakage_flagged_steps, 12);
    EXPECT_EQ(back.leakage_max, rec.leakage_max);
    EXPECT_TRUE(back.aborted);
    EXPECT_EQ(back.abort_cause, rec.abort_cause);
    EXPECT_EQ(back.times, rec.times);
    EXPECT_EQ(back.q, rec.q);
    EXPECT_EQ(back.p, rec.p);
    EXPECT_EQ(back.entropy, rec.entropy);
    EXPECT_EQ(back.leakage, rec.leakage);
    std::stringstream again;
    write_record(again, back);
    EXPECT_EQ(again.str(), ss.str());
}

TEST(Record, RejectsUnknownVersionAndTruncatedBody) {
    std::stringstream bad_version("format_version 99\nsamples 0\n");
    EXPECT_THROW(read_record(bad_version), ConfigError);
    std::stringstream truncated("format_version 1\ncolumns t q1 p1 q2 p2 entropy leakage\nsamples 2\n0 0 0 0 0 0 0\n");
    EXPECT_THROW(read_record(truncated), ConfigError);
}

TEST(Summary, HeaderAndMissingValues) {
    EnsembleSummary s;
    BetaSummary row;
    row.beta = 0.5;
    row.chaotic_mean = 0.25;
    row.n_labeled = 3;
    row.n_aborted = 1;
    s.rows.push_back(row);
    std::ostringstream os;
    write_summary(os, s);
    EXPECT_EQ(os.str(),
              "beta\tunravelling\tE_chaotic_mean\tE_chaotic_se\tE_entrained_mean\tE_entrained_se\tn_labeled\t"
              "n_unlabeled\tn_aborted\n"
              "0.5\tqsd\t0.25\tNA\tNA\tNA\t3\t0\t1\n");
}

TEST(Cli, TrajectoryIsDeterministicAndMatchesSweep) {
    ScratchDir dir("cli");
    const fs::path cfg = dir.path() / "run.cfg";
    write_file(cfg, kSmallRun);
    const std::string base = "--config " + cfg.string() + " --out ";
    ASSERT_EQ(run_cli("trajectory " + base + (dir.path() / "a").string()), 0);
    ASSERT_EQ(run_cli("trajectory " + base + (dir.path() / "b").string()), 0);
    const std::string a = slurp(dir.path() / "a" / "trajectory.txt");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir.path() / "b" / "trajectory.txt"));

    ASSERT_EQ(run_cli("sweep " + base + (dir.path() / "s").string()), 0);
    EXPECT_EQ(a, slurp(dir.path() / "s" / "records" / "beta0_traj0.txt"));
    EXPECT_TRUE(fs::exists(dir.path() / "s" / "summary.tsv"));

    // The saved config reproduces the run.
    ASSERT_EQ(run_cli("trajectory --config " + (dir.path() / "a" / "config.txt").string() + " --out " +
                      (dir.path() / "c").string()),
              0);
    EXPECT_EQ(a, slurp(dir.path() / "c" / "trajectory.txt"));
}

TEST(Cli, ExitCodes) {
    ScratchDir dir("codes");
    const fs::path cfg = dir.path() / "run.cfg";
    write_file(cfg, kSmallRun);
    const std::string out = " --out " + (dir.path() / "o").string();
    EXPECT_EQ(run_cli("trajectory --config " + cfg.string() + " --beta 0.5 --levels 4 --recenter off" + out), 3);
    write_file(dir.path() / "bad.cfg", "bogus = 1\n");
    EXPECT_EQ(run_cli("trajectory --config " + (dir.path() / "bad.cfg").string() + out), 2);
    write_file(dir.path() / "guard.cfg", std::string(kSmallRun) + "max_work = 10\n");
    EXPECT_EQ(run_cli("sweep --config " + (dir.path() / "guard.cfg").string() + out), 4);
    write_file(dir.path() / "nobeta.cfg", "levels = 10\n");
    EXPECT_EQ(run_cli("trajectory --config " + (dir.path() / "nobeta.cfg").string() + out), 2);
    EXPECT_EQ(run_cli("nonsense"), 2);
}

TEST(Cli, ClassicalWritesSectionAndInitialConditions) {
    ScratchDir dir("classical");
    write_file(dir.path() / "c.cfg", "beta = 0.25\nclassical_periods = 50\ninitial_conditions = 4\n");
    ASSERT_EQ(run_cli("classical --config " + (dir.path() / "c.cfg").string() + " --out " + (dir.path() / "o").string()), 0);
    const std::string section = slurp(dir.path() / "o" / "poincare.csv");
    EXPECT_EQ(std::count(section.begin(), section.end(), '\n'), 52);  // header + 51 strobes
    const std::string ics = slurp(dir.path() / "o" / "initial_conditions.csv");
    EXPECT_EQ(std::count(ics.begin(), ics.end(), '\n'), 5);
}
