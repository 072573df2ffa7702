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

// Coupled damped driven Duffing pair on a truncated Fock basis.
//
//   H_i = p_i^2/2 + (beta^2/4) q_i^4 - q_i^2/2 + (g/beta) cos(t) q_i + (Gamma/2)(q_i p_i + p_i q_i)
//   H   = H_1 + H_2 + mu q_1 q_2,      L_i = sqrt(2 Gamma) a_i
//
// The steppers never touch H directly. They consume the non-Hermitian generator
// K = -i H_static - 1/2 sum_j L_j^dagger L_j expressed in a displaced frame, which is
// rebuilt from a fixed table of operator monomials by a weighted sum over one
// shared sparsity pattern.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"

namespace qtraj {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct DuffingParams {
    double beta = 1.0;
    double g = 0.3;
    double gamma = 0.125;
    double mu = 0.2;
    double drive_omega = 1.0;

    void validate() const {
        if (!(beta > 0.0) || beta > 1.0) throw ConfigError("DuffingParams: beta must lie in (0, 1]");
        if (!(g >= 0.0)) throw ConfigError("DuffingParams: drive amplitude g must be >= 0");
        if (!(gamma >= 0.0)) throw ConfigError("DuffingParams: damping gamma must be >= 0");
        if (!std::isfinite(mu)) throw ConfigError("DuffingParams: coupling mu must be finite");
        if (drive_omega != 1.0) throw ConfigError("DuffingParams: drive frequency is fixed at 1");
    }
};

/// cos(t) with the argument reduced to one period, exact zero at quarter periods.
inline double drive_cosine(double t) {
    const double r = std::remainder(t, kTwoPi);
    if (std::abs(r) == 0.5 * std::numbers::pi) return 0.0;
    return std::cos(r);
}

class SystemModel;
SystemModel build_model(const DuffingParams& params, const FockSpace& space);

class SystemModel {
public:
    /// Arbitrary open system H(t) = static_H + drive_coefficient cos(t) drive_H with
    /// the given Lindblad operators. Frames other than the origin are not supported.
    static SystemModel custom(const FockSpace& space, Operator static_H, std::vector<Operator> lindblads,
                              Operator drive_H = Operator{}, double drive_coefficient = 0.0) {
        SystemModel m(space);
        m.params_.beta = 1.0;
        m.params_.g = drive_coefficient;
        m.params_.gamma = 0.0;
        m.params_.mu = 0.0;
        m.static_H_ = std::move(static_H);
        m.drive_H_ = drive_H.matrix.rows() == 0 ? Operator::zero(space.dimension()) : std::move(drive_H);
        m.lindblads_ = std::move(lindblads);
        m.check_dimensions();
        m.custom_K_ = SparseMatrix(-kI * m.static_H_.matrix);
        for (const Operator& l : m.lindblads_) {
            m.custom_K_ -= 0.5 * SparseMatrix(l.matrix.adjoint() * l.matrix);
        }
        m.custom_K_.makeCompressed();
        return m;
    }

    const DuffingParams& params() const noexcept { return params_; }
    const FockSpace& space() const noexcept { return space_; }
    const Operator& static_H() const noexcept { return static_H_; }
    const Operator& drive_H() const noexcept { return drive_H_; }
    const std::vector<Operator>& lindblads() const noexcept { return lindblads_; }
    bool supports_frames() const noexcept { return !monomials_.empty(); }

    /// Scalar multiplying drive_H at time t: (g/beta) cos t.
    double drive_amplitude(double t) const { return params_.g / params_.beta * drive_cosine(t); }

    /// Lindblad operators in a frame are L_j + shift_j * identity.
    std::vector<Complex> lindblad_shifts(const Frame& frame) const {
        std::vector<Complex> shifts(lindblads_.size(), Complex(0.0));
        if (!supports_frames()) {
            require_origin(frame);
            return shifts;
        }
        const double amp = std::sqrt(2.0 * params_.gamma);
        for (std::size_t j = 0; j < shifts.size(); ++j) shifts[j] = amp * frame.at(j);
        return shifts;
    }

    /// c-number added to drive_H in a frame: D^dagger (q_1 + q_2) D = q_1 + q_2 + offset.
    double drive_offset(const Frame& frame) const {
        if (!supports_frames()) {
            require_origin(frame);
            return 0.0;
        }
        return std::sqrt(2.0) * (frame.at(0).real() + frame.at(1).real());
    }

    /// Allocates a generator with the right sparsity pattern for `update_generator`.
    SparseMatrix make_generator() const { return supports_frames() ? pattern_ : custom_K_; }

    /// K = -i H'_static - 1/2 sum_j L'_j^dagger L'_j with H' and L' the operators seen
    /// from a frame displaced by `frame` (D^dagger O D with D = D(frame)).
    void update_generator(const Frame& frame, SparseMatrix& K) const {
        if (!supports_frames()) {
            require_origin(frame);
            K = custom_K_;
            return;
        }
        if (frame.size() != 2) throw DimensionError("update_generator: frame needs two offsets");
        const double b2 = params_.beta * params_.beta;
        const double gm = params_.gamma;
        const double mu = params_.mu;
        std::array<double, 2> Q{}, P{};
        for (int i = 0; i < 2; ++i) {
            Q[i] = std::sqrt(2.0) * frame[i].real();
            P[i] = std::sqrt(2.0) * frame[i].imag();
        }
        std::array<Complex, kMonomialCount> coefficients{};
        for (int i = 0; i < 2; ++i) {
            const int o = i * kPerOscillator;
            const int j = 1 - i;
            coefficients[o + kP2] = -kI * 0.5;
            coefficients[o + kP1] = -kI * (P[i] + gm * Q[i]);
            coefficients[o + kQ4] = -kI * (0.25 * b2);
            coefficients[o + kQ3] = -kI * (b2 * Q[i]);
            coefficients[o + kQ2] = -kI * (1.5 * b2 * Q[i] * Q[i] - 0.5);
            coefficients[o + kQ1] = -kI * (b2 * Q[i] * Q[i] * Q[i] - Q[i] + gm * P[i] + mu * Q[j]);
            coefficients[o + kQP] = -kI * (0.5 * gm);
            coefficients[o + kN] = -gm;
            coefficients[o + kA] = -gm * std::conj(frame[i]);
            coefficients[o + kAD] = -gm * frame[i];
        }
        coefficients[kCoupling] = -kI * mu;
        // The c-number part of D^dagger H D is kept: it is a pure phase for the drift
        // alone, but the stochastic increment is added after the drift, so dropping it
        // would rotate drift against noise by an O(dt) frame-dependent angle per step.
        double energy = mu * Q[0] * Q[1];
        for (int i = 0; i < 2; ++i) {
            energy += 0.5 * P[i] * P[i] + 0.25 * b2 * Q[i] * Q[i] * Q[i] * Q[i] - 0.5 * Q[i] * Q[i] + gm * Q[i] * P[i];
        }
        coefficients[kIdentity] = -gm * (std::norm(frame[0]) + std::norm(frame[1])) - kI * energy;

        if (K.nonZeros() != pattern_.nonZeros()) K = pattern_;
        Eigen::Map<Eigen::ArrayXcd> values(K.valuePtr(), K.nonZeros());
        values.setZero();
        for (std::size_t m = 0; m < monomials_.size(); ++m) {
            if (coefficients[m] != Complex(0.0)) values += coefficients[m] * monomials_[m];
        }
    }

private:
    friend SystemModel build_model(const DuffingParams& params, const FockSpace& space);

    explicit SystemModel(const FockSpace& space) : space_(space) {}

    void check_dimensions() const {
        const auto dim = space_.dimension();
        if (static_H_.dimension() != dim || drive_H_.dimension() != dim) {
            throw DimensionError("SystemModel: operator dimension does not match the space");
        }
        for (const Operator& l : lindblads_) {
            if (l.dimension() != dim) throw DimensionError("SystemModel: Lindblad dimension mismatch");
        }
    }

    static void require_origin(const Frame& frame) {
        for (Complex c : frame) {
            if (c != Complex(0.0)) throw ConfigError("SystemModel: this model does not support displaced frames");
        }
    }

    enum : int { kQ1, kQ2, kQ3, kQ4, kP1, kP2, kQP, kN, kA, kAD, kPerOscillator };
    static constexpr int kCoupling = 2 * kPerOscillator;
    static constexpr int kIdentity = kCoupling + 1;
    static constexpr int kMonomialCount = kIdentity + 1;

    DuffingParams params_{};
    FockSpace space_;
    Operator static_H_;
    Operator drive_H_;
    std::vector<Operator> lindblads_;
    SparseMatrix custom_K_;
    SparseMatrix pattern_;
    std::vector<Eigen::ArrayXcd> monomials_;
};

namespace detail {

/// Values of `m` laid out on the (superset) sparsity pattern of `pattern`.
inline Eigen::ArrayXcd align_to_pattern(const SparseMatrix& m, const SparseMatrix& pattern) {
    Eigen::ArrayXcd values = Eigen::ArrayXcd::Zero(pattern.nonZeros());
    const auto* outer = pattern.outerIndexPtr();
    const auto* inner = pattern.innerIndexPtr();
    for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
        auto pos = outer[row];
        const auto end = outer[row + 1];
        for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
            while (pos < end && inner[pos] < it.col()) ++pos;
            if (pos == end || inner[pos] != it.col()) {
                throw NumericalFault("align_to_pattern: entry outside the union pattern");
            }
            values(pos) = it.value();
        }
    }
    return values;
}

}  // namespace detail

inline SystemModel build_model(const DuffingParams& params, const FockSpace& space) {
    params.validate();
    if (space.subsystems() != 2) throw DimensionError("build_model: the Duffing pair needs two subsystems");

    SystemModel model(space);
    model.params_ = params;

    const int n = space.levels();
    const DenseMatrix a = detail::annihilation(n);
    const DenseMatrix ad = a.adjoint();
    const DenseMatrix q = std::sqrt(0.5) * (a + ad);
    const DenseMatrix p = -kI * std::sqrt(0.5) * (a - ad);
    const DenseMatrix q2 = q * q;
    // Truncated products, so the top of the basis couples spuriously; the leakage
    // monitor keeps trajectories away from it.
    const std::array<DenseMatrix, SystemModel::kPerOscillator> local{
        q, q2, q2 * q, q2 * q2, p, p * p, q * p + p * q, ad * a, a, ad,
    };

    std::vector<SparseMatrix> mats;
    for (int i = 0; i < 2; ++i) {
        for (const DenseMatrix& m : local) mats.push_back(detail::embed(m, space, i));
    }
    const SparseMatrix q_1 = mats[SystemModel::kQ1];
    const SparseMatrix q_2 = mats[SystemModel::kPerOscillator + SystemModel::kQ1];
    mats.push_back(SparseMatrix(q_1 * q_2));
    SparseMatrix ident(space.dimension(), space.dimension());
    ident.setIdentity();
    mats.push_back(ident);

    std::vector<Triplet> union_triplets;
    for (const SparseMatrix& m : mats) {
        for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
            for (SparseMatrix::InnerIterator it(m, row); it; ++it) union_triplets.emplace_back(it.row(), it.col(), 1.0);
        }
    }
    model.pattern_ = SparseMatrix(space.dimension(), space.dimension());
    model.pattern_.setFromTriplets(union_triplets.begin(), union_triplets.end());
    model.pattern_.makeCompressed();
    for (const SparseMatrix& m : mats) model.monomials_.push_back(detail::align_to_pattern(m, model.pattern_));

    const double b2 = params.beta * params.beta;
    SparseMatrix h(space.dimension(), space.dimension());
    for (int i = 0; i < 2; ++i) {
        const int o = i * SystemModel::kPerOscillator;
        h += 0.5 * mats[o + SystemModel::kP2] + 0.25 * b2 * mats[o + SystemModel::kQ4] -
             0.5 * mats[o + SystemModel::kQ2] + 0.5 * params.gamma * mats[o + SystemModel::kQP];
    }
    h += params.mu * mats[SystemModel::kCoupling];
    h.prune(Complex(0.0));
    model.static_H_ = Operator{std::move(h), true};
    model.drive_H_ = Operator{SparseMatrix(q_1 + q_2), true};

    const double amp = std::sqrt(2.0 * params.gamma);
    for (int i = 0; i < 2; ++i) {
        model.lindblads_.push_back(Operator{SparseMatrix(amp * mats[i * SystemModel::kPerOscillator + SystemModel::kA]), false});
    }

    const double defect_static = hermiticity_defect(model.static_H_.matrix);
    const double defect_drive = hermiticity_defect(model.drive_H_.matrix);
    if (defect_static >= 1e-12 || defect_drive >= 1e-12) {
        throw NumericalFault("build_model: assembled Hamiltonian part is not Hermitian");
    }
    return model;
}

/// H(t) = static_H + (g/beta) cos(t) drive_H in the laboratory frame.
inline Operator hamiltonian_at(const SystemModel& model, double t) {
    const double f = model.drive_amplitude(t);
    if (f == 0.0) return model.static_H();
    return Operator{SparseMatrix(model.static_H().matrix + f * model.drive_H().matrix), true};
}

}  // namespace qtraj
