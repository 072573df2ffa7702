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

#include "qtraj/lindblad.hpp"
#include "test_support.hpp"

using namespace qtraj;
using qtraj::testing::damped_mode;
using qtraj::testing::random_state;

TEST(Lindblad, MaximallyMixedStateIsStationaryWithoutDamping) {
    const SystemModel model = damped_mode(6, 1.3, 0.0);
    const DenseMatrix rhs = lindblad_rhs(MixedState::maximally_mixed(6), model, 0.4);
    EXPECT_LT(rhs.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lindblad, MeanPhotonNumberDecaysAtTwiceGamma) {
    // d<n>/dt = -2 gamma <n> for L = sqrt(2 gamma) a, on any state away from the basis edge.
    const double gamma = 0.3;
    const int n = 8;
    const SystemModel model = damped_mode(n, 1.0, gamma);
    const FockSpace space(n, 1);
    const LadderOperators ops = ladder_operators(space, 0);
    const DenseMatrix number = DenseMatrix(SparseMatrix(ops.a_dag.matrix * ops.a.matrix));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        Vector v = random_state(FockSpace(n, 1), rng).amplitudes();
        v.tail(2).setZero();
        const MixedState rho = MixedState::pure(v);
        const DenseMatrix drho = lindblad_rhs(rho, model, 0.0);
        const Complex mean_n = (number * rho.matrix).trace();
        const Complex rate = (number * drho).trace();
        EXPECT_NEAR(std::abs(rate + 2.0 * gamma * mean_n), 0.0, 1e-12);
    }
}

TEST(Lindblad, RightHandSideIsTraceFreeAndHermitian) {
    DuffingParams params;
    const FockSpace space(4);
    const SystemModel model = build_model(params, space);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const MixedState rho = MixedState::pure(random_state(space, rng).amplitudes());
        const DenseMatrix d = lindblad_rhs(rho, model, 0.3 * trial);
        EXPECT_LT(std::abs(d.trace()), 1e-13);
        EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Lindblad, EigenstateOfClosedSystemIsStationary) {
    const SystemModel model = damped_mode(5, 0.8, 0.0);
    const MixedState rho = MixedState::pure(StateVector::basis(FockSpace(5, 1), {3}).amplitudes());
    EXPECT_LT(lindblad_rhs(rho, model, 1.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lindblad, DampedModeMatchesClosedForm) {
    // rho_11(t) = e^{-2 gamma t} and the coherence decays as e^{-(i omega + gamma) t}.
    const double gamma = 0.2, omega = 1.0;
    const SystemModel model = damped_mode(4, omega, gamma);
    Vector v = Vector::Zero(4);
    v(0) = v(1) = std::sqrt(0.5);
    const double dt = 1e-4, span = 2.0;
    const auto samples = integrate_master(MixedState::pure(v), model, span, dt, 5000);
    ASSERT_EQ(samples.size(), 5u);
    for (const MasterSample& s : samples) {
        const double t = s.time;
        EXPECT_NEAR(s.rho.matrix(1, 1).real(), 0.5 * std::exp(-2.0 * gamma * t), 1e-6);
        const Complex coherence = 0.5 * std::exp(Complex(-gamma * t, -omega * t));
        EXPECT_LT(std::abs(s.rho.matrix(1, 0) - coherence), 1e-6);
        EXPECT_NEAR(s.rho.matrix.trace().real(), 1.0, 1e-10);
    }
}

TEST(Lindblad, DimensionGuard) {
    const SystemModel model = build_model(DuffingParams{}, FockSpace(21));
    EXPECT_THROW(LindbladRhs{model}, ResourceGuardError);
}

TEST(Lindblad, TraceDistanceExamples) {
    const DenseMatrix zero = MixedState::pure(StateVector::basis(FockSpace(2, 1), {0}).amplitudes()).matrix;
    const DenseMatrix one = MixedState::pure(StateVector::basis(FockSpace(2, 1), {1}).amplitudes()).matrix;
    EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-15);
    EXPECT_NEAR(trace_distance(zero, MixedState::maximally_mixed(2).matrix), 0.5, 1e-15);
    EXPECT_NEAR(trace_distance(zero, zero), 0.0, 1e-15);
}
