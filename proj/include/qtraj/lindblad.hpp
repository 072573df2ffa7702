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

// Dense master-equation reference used to validate both unravellings:
//   drho/dt = -i[H(t), rho] + sum_j (L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho})
// integrated with fixed-step RK4. Desk-scale dimensions only.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

inline constexpr Eigen::Index kMasterDimensionGuard = 400;

struct MixedState {
    DenseMatrix matrix;

    static MixedState pure(const Vector& psi) {
        const Vector unit = psi / psi.norm();
        return MixedState{unit * unit.adjoint()};
    }

    static MixedState maximally_mixed(Eigen::Index dim) {
        return MixedState{DenseMatrix::Identity(dim, dim) / static_cast<double>(dim)};
    }

    Eigen::Index dimension() const { return matrix.rows(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

/// 1/2 ||a - b||_1 for Hermitian a, b.
inline double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
    const DenseMatrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Precomputed pieces of the Lindblad right-hand side for one model.
class LindbladRhs {
public:
    explicit LindbladRhs(const SystemModel& model) : model_(&model) {
        const Eigen::Index dim = model.space().dimension();
        if (dim > kMasterDimensionGuard) {
            throw ResourceGuardError("lindblad: dimension " + std::to_string(dim) + " exceeds the dense guard of " +
                                     std::to_string(kMasterDimensionGuard));
        }
        SparseMatrix decay(dim, dim);
        for (const Operator& l : model.lindblads()) decay += SparseMatrix(l.matrix.adjoint() * l.matrix);
        static_generator_ = SparseMatrix(-kI * model.static_H().matrix) - 0.5 * decay;
    }

    DenseMatrix operator()(const DenseMatrix& rho, double t) const {
        // A = -iH - 1/2 sum L^dag L; rhs = A rho + (A rho)^dag + sum L rho L^dag.
        DenseMatrix a_rho = static_generator_ * rho;
        const double f = model_->drive_amplitude(t);
        if (f != 0.0) a_rho += (-kI * f) * (model_->drive_H().matrix * rho);
        DenseMatrix out = a_rho + a_rho.adjoint();
        for (const Operator& l : model_->lindblads()) {
            const DenseMatrix l_rho = l.matrix * rho;
            const DenseMatrix l_rho_ld = l.matrix * l_rho.adjoint();
            out += l_rho_ld.adjoint();
        }
        return out;
    }

private:
    const SystemModel* model_;
    SparseMatrix static_generator_;
};

inline DenseMatrix lindblad_rhs(const MixedState& rho, const SystemModel& model, double t) {
    if (rho.dimension() != model.space().dimension()) throw DimensionError("lindblad_rhs: dimension mismatch");
    return LindbladRhs(model)(rho.matrix, t);
}

struct MasterSample {
    double time;  ///< natural units
    MixedState rho;
};

/// RK4 integration of the master equation from t = 0 over `t_span` (natural units).
/// Returns the state every `sample_every` steps, including t = 0 and the end point.
/// Throws StepSizeError when positivity is violated by more than 1e-6.
inline std::vector<MasterSample> integrate_master(const MixedState& rho0, const SystemModel& model, double t_span,
                                                  double dt, long sample_every = 1) {
    if (!(dt > 0.0)) throw ConfigError("integrate_master: dt must be positive");
    if (t_span < 0.0) throw ConfigError("integrate_master: t_span must be non-negative");
    if (sample_every < 1) throw ConfigError("integrate_master: sample_every must be >= 1");
    const LindbladRhs rhs(model);
    const long steps = std::lround(t_span / dt);
    if (std::abs(static_cast<double>(steps) * dt - t_span) > 1e-9 * std::max(1.0, t_span)) {
        throw ConfigError("integrate_master: t_span must be a whole number of steps");
    }

    std::vector<MasterSample> out;
    DenseMatrix rho = rho0.matrix;
    auto record = [&](long k) {
        MixedState state{0.5 * (rho + rho.adjoint())};
        const double lowest = state.min_eigenvalue();
        if (lowest < -1e-6) {
            throw StepSizeError("integrate_master: positivity violated (eigenvalue " + std::to_string(lowest) +
                                "); reduce dt");
        }
        out.push_back(MasterSample{static_cast<double>(k) * dt, std::move(state)});
    };
    record(0);
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const DenseMatrix k1 = rhs(rho, t);
        const DenseMatrix k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt);
        const DenseMatrix k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt);
        const DenseMatrix k4 = rhs(rho + dt * k3, t + dt);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((k + 1) % sample_every == 0 || k + 1 == steps) record(k + 1);
    }
    return out;
}

}  // namespace qtraj
