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

// Truncated Fock-space kernel: tensor-product basis, ladder operators,
// coherent states, partial traces, entropies and displaced-frame moves.
//
// Basis ordering: subsystem 0 is the most significant index, so for two
// oscillators |i1, i2> lives at i1 * n_levels + i2.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qtraj/error.hpp"

namespace qtraj {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Probability mass in the top two levels of any subsystem: flagged above the
/// threshold, fatal above the abort level.
inline constexpr double kDefaultLeakageThreshold = 1e-6;
inline constexpr double kDefaultLeakageAbort = 1e-2;

class FockSpace {
public:
    FockSpace(int n_levels, int n_subsystems = 2) : n_levels_(n_levels), n_subsystems_(n_subsystems) {
        if (n_levels < 2) {
            throw ConfigError("FockSpace: truncation dimension must be >= 2, got " + std::to_string(n_levels));
        }
        if (n_subsystems < 1) {
            throw ConfigError("FockSpace: need at least one subsystem");
        }
        dimension_ = 1;
        for (int i = 0; i < n_subsystems; ++i) {
            dimension_ *= static_cast<Eigen::Index>(n_levels);
        }
    }

    int levels() const noexcept { return n_levels_; }
    int subsystems() const noexcept { return n_subsystems_; }
    Eigen::Index dimension() const noexcept { return dimension_; }

    /// Product of the dimensions of the subsystems after `subsystem`.
    Eigen::Index stride(int subsystem) const noexcept {
        Eigen::Index s = 1;
        for (int i = subsystem + 1; i < n_subsystems_; ++i) {
            s *= n_levels_;
        }
        return s;
    }

    bool operator==(const FockSpace&) const = default;

private:
    int n_levels_;
    int n_subsystems_;
    Eigen::Index dimension_;
};

/// Largest entry of |A - A^dagger|.
inline double hermiticity_defect(const SparseMatrix& a) {
    SparseMatrix diff = a - SparseMatrix(a.adjoint());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
            worst = std::max(worst, std::abs(it.value()));
        }
    }
    return worst;
}

struct Operator {
    SparseMatrix matrix;
    bool hermitian = false;

    Eigen::Index dimension() const { return matrix.rows(); }

    Vector apply(const Vector& v) const {
        Vector out = matrix * v;
        return out;
    }

    Operator adjoint() const { return Operator{SparseMatrix(matrix.adjoint()), hermitian}; }

    /// True when the hermitian flag is set and the matrix honours it to `tol`.
    bool check_hermitian(double tol = 1e-12) const { return hermitian && hermiticity_defect(matrix) < tol; }

    static Operator identity(Eigen::Index dim) {
        SparseMatrix m(dim, dim);
        m.setIdentity();
        return Operator{std::move(m), true};
    }

    static Operator zero(Eigen::Index dim) { return Operator{SparseMatrix(dim, dim), true}; }
};

inline Operator operator+(const Operator& a, const Operator& b) {
    return Operator{a.matrix + b.matrix, a.hermitian && b.hermitian};
}

inline Operator operator*(const Operator& a, const Operator& b) {
    return Operator{SparseMatrix(a.matrix * b.matrix), false};
}

inline Operator operator*(double s, const Operator& a) {
    return Operator{SparseMatrix(s * a.matrix), a.hermitian};
}

inline Operator operator*(Complex s, const Operator& a) {
    return Operator{SparseMatrix(s * a.matrix), a.hermitian && s.imag() == 0.0};
}

/// Normalized pure state on a FockSpace.
class StateVector {
public:
    StateVector(FockSpace space, Vector amplitudes) : space_(space), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != space_.dimension()) {
            throw DimensionError("StateVector: amplitude count does not match the space dimension");
        }
        const double n = amplitudes_.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw NumericalFault("StateVector: cannot normalize a zero or non-finite vector");
        }
        amplitudes_ /= n;
    }

    /// Fock basis state with the given occupation per subsystem.
    static StateVector basis(const FockSpace& space, std::span<const int> occupation) {
        if (static_cast<int>(occupation.size()) != space.subsystems()) {
            throw DimensionError("StateVector::basis: one occupation per subsystem required");
        }
        Eigen::Index index = 0;
        for (int s = 0; s < space.subsystems(); ++s) {
            if (occupation[s] < 0 || occupation[s] >= space.levels()) {
                throw DimensionError("StateVector::basis: occupation outside the truncated basis");
            }
            index += occupation[s] * space.stride(s);
        }
        Vector v = Vector::Zero(space.dimension());
        v(index) = 1.0;
        return StateVector(space, std::move(v));
    }

    static StateVector basis(const FockSpace& space, std::initializer_list<int> occupation) {
        std::vector<int> occ(occupation);
        return basis(space, std::span<const int>(occ));
    }

    const FockSpace& space() const noexcept { return space_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }

    Complex expectation(const Operator& op) const { return amplitudes_.dot(op.matrix * amplitudes_); }

private:
    FockSpace space_;
    Vector amplitudes_;
};

struct DensityMatrix {
    DenseMatrix matrix;

    Eigen::Index dimension() const { return matrix.rows(); }
    Complex trace() const { return matrix.trace(); }

    /// Throws NumericalFault when the Hermiticity or trace invariants are broken.
    void validate(double hermitian_tol = 1e-12, double trace_tol = 1e-8) const {
        const double defect = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        if (defect > hermitian_tol) {
            throw NumericalFault("DensityMatrix: not Hermitian (defect " + std::to_string(defect) + ")");
        }
        if (std::abs(matrix.trace() - Complex(1.0)) > trace_tol) {
            throw NumericalFault("DensityMatrix: trace differs from one");
        }
    }
};

namespace detail {

inline DenseMatrix annihilation(int n) {
    DenseMatrix a = DenseMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    return a;
}

/// Kronecker embedding I (x) ... (x) local (x) ... (x) I, dropping exact zeros.
inline SparseMatrix embed(const DenseMatrix& local, const FockSpace& space, int subsystem) {
    const Eigen::Index n = space.levels();
    const Eigen::Index right = space.stride(subsystem);
    const Eigen::Index left = space.dimension() / (n * right);
    std::vector<Triplet> triplets;
    std::vector<std::pair<std::pair<int, int>, Complex>> entries;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (local(i, j) != Complex(0.0)) {
                entries.push_back({{static_cast<int>(i), static_cast<int>(j)}, local(i, j)});
            }
        }
    }
    triplets.reserve(entries.size() * left * right);
    for (Eigen::Index l = 0; l < left; ++l) {
        for (const auto& [ij, value] : entries) {
            const Eigen::Index row0 = (l * n + ij.first) * right;
            const Eigen::Index col0 = (l * n + ij.second) * right;
            for (Eigen::Index r = 0; r < right; ++r) {
                triplets.emplace_back(row0 + r, col0 + r, value);
            }
        }
    }
    SparseMatrix m(space.dimension(), space.dimension());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

/// exp(beta a^dagger - conj(beta) a) on an n-level truncated mode.
inline DenseMatrix displacement(int n, Complex beta) {
    const DenseMatrix a = annihilation(n);
    const DenseMatrix anti = beta * a.adjoint() - std::conj(beta) * a;
    const DenseMatrix herm = -kI * anti;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm);
    const Eigen::VectorXcd phases = (kI * es.eigenvalues().cast<Complex>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Applies a local n x n matrix to one subsystem of a state vector in place.
inline void apply_local(const DenseMatrix& local, const FockSpace& space, int subsystem, Vector& psi) {
    const Eigen::Index n = space.levels();
    const Eigen::Index right = space.stride(subsystem);
    const Eigen::Index left = space.dimension() / (n * right);
    Vector column(n);
    for (Eigen::Index l = 0; l < left; ++l) {
        for (Eigen::Index r = 0; r < right; ++r) {
            const Eigen::Index base = l * n * right + r;
            for (Eigen::Index k = 0; k < n; ++k) column(k) = psi(base + k * right);
            column = local * column;
            for (Eigen::Index k = 0; k < n; ++k) psi(base + k * right) = column(k);
        }
    }
}

/// Probability of Poisson(mean) at or above `from`.
inline double poisson_tail(double mean, int from) {
    if (mean == 0.0) return from <= 0 ? 1.0 : 0.0;
    double total = 0.0;
    for (int k = std::max(from, 0);; ++k) {
        const double term = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
        total += term;
        if (k > mean && term < 1e-30) break;
    }
    return std::min(total, 1.0);
}

}  // namespace detail

struct LadderOperators {
    Operator a;
    Operator a_dag;
    Operator q;
    Operator p;
};

/// a, a^dagger, q = (a + a^dagger)/sqrt(2), p = -i(a - a^dagger)/sqrt(2) for one subsystem,
/// embedded as identity on the others.
inline LadderOperators ladder_operators(const FockSpace& space, int subsystem) {
    if (subsystem < 0 || subsystem >= space.subsystems()) {
        throw DimensionError("ladder_operators: subsystem index out of range");
    }
    const DenseMatrix a = detail::annihilation(space.levels());
    const DenseMatrix ad = a.adjoint();
    const double r2 = std::sqrt(0.5);
    const DenseMatrix q = r2 * (a + ad);
    const DenseMatrix p = -kI * r2 * (a - ad);
    return LadderOperators{
        Operator{detail::embed(a, space, subsystem), false},
        Operator{detail::embed(ad, space, subsystem), false},
        Operator{detail::embed(q, space, subsystem), true},
        Operator{detail::embed(p, space, subsystem), true},
    };
}

/// Probability mass on basis states where any subsystem sits in its top two levels.
inline double leakage(const FockSpace& space, const Vector& psi) {
    const int n = space.levels();
    const int edge = n - 2;
    double mass = 0.0;
    if (space.subsystems() == 2) {
        for (int i = 0; i < n; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
            if (i >= edge) {
                mass += psi.segment(row, n).squaredNorm();
            } else {
                mass += psi.segment(row + edge, n - edge).squaredNorm();
            }
        }
        return mass;
    }
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        Eigen::Index rest = k;
        bool edge_state = false;
        for (int s = 0; s < space.subsystems(); ++s) {
            if (rest % n >= edge) edge_state = true;
            rest /= n;
        }
        if (edge_state) mass += std::norm(psi(k));
    }
    return mass;
}

inline double leakage(const StateVector& psi) { return leakage(psi.space(), psi.amplitudes()); }

/// Tensor product of coherent states |alpha_0> (x) |alpha_1> (x) ...
///
/// Throws TruncationError naming the first subsystem whose Poisson tail in the
/// top two levels exceeds `tail_threshold`.
inline StateVector coherent_state(const FockSpace& space, std::span<const Complex> alphas,
                                  double tail_threshold = kDefaultLeakageThreshold) {
    if (static_cast<int>(alphas.size()) != space.subsystems()) {
        throw DimensionError("coherent_state: one amplitude per subsystem required");
    }
    const int n = space.levels();
    Vector psi = Vector::Ones(1);
    for (int s = 0; s < space.subsystems(); ++s) {
        const Complex alpha = alphas[s];
        const double tail = detail::poisson_tail(std::norm(alpha), n - 2);
        if (tail > tail_threshold) {
            throw TruncationError("coherent_state: truncation tail " + std::to_string(tail) +
                                      " above threshold for subsystem " + std::to_string(s),
                                  s);
        }
        Vector local(n);
        local(0) = std::exp(-0.5 * std::norm(alpha));
        for (int k = 1; k < n; ++k) {
            local(k) = local(k - 1) * alpha / std::sqrt(static_cast<double>(k));
        }
        Vector next(psi.size() * n);
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            next.segment(i * n, n) = psi(i) * local;
        }
        psi = std::move(next);
    }
    return StateVector(space, std::move(psi));
}

inline StateVector coherent_state(const FockSpace& space, std::initializer_list<Complex> alphas,
                                  double tail_threshold = kDefaultLeakageThreshold) {
    std::vector<Complex> v(alphas);
    return coherent_state(space, std::span<const Complex>(v), tail_threshold);
}

/// Reduced density matrix of subsystem `keep` for a pure state of one or two subsystems.
inline DensityMatrix partial_trace(const FockSpace& space, const Vector& psi, int keep) {
    if (psi.size() != space.dimension()) {
        throw DimensionError("partial_trace: state does not match the space");
    }
    if (keep < 0 || keep >= space.subsystems()) {
        throw DimensionError("partial_trace: subsystem index out of range");
    }
    if (space.subsystems() == 1) {
        return DensityMatrix{psi * psi.adjoint()};
    }
    if (space.subsystems() != 2) {
        throw DimensionError("partial_trace: only one- and two-subsystem spaces are supported");
    }
    const Eigen::Index n = space.levels();
    using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajorMatrix> m(psi.data(), n, n);
    DenseMatrix rho = keep == 0 ? DenseMatrix(m * m.adjoint()) : DenseMatrix(m.transpose() * m.conjugate());
    // Enforce exact Hermiticity; the products above only guarantee it to rounding.
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix{std::move(rho)};
}

inline DensityMatrix partial_trace(const StateVector& psi, int keep) {
    return partial_trace(psi.space(), psi.amplitudes(), keep);
}

/// S = -Tr[rho ln rho] in nats.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho.matrix, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double lambda = es.eigenvalues()(k);
        if (lambda < -1e-8) {
            throw NumericalFault("von_neumann_entropy: eigenvalue " + std::to_string(lambda) +
                                 " below -1e-8; upstream state is not a valid density matrix");
        }
        if (lambda > 0.0) s -= lambda * std::log(lambda);
    }
    return std::max(s, 0.0);
}

/// E = S(rho_1) + S(rho_2) for a pure two-subsystem state (S(rho) = 0).
inline double entanglement_entropy(const FockSpace& space, const Vector& psi) {
    if (space.subsystems() != 2) {
        throw DimensionError("entanglement_entropy: requires a two-subsystem space");
    }
    const Vector unit = psi / psi.norm();
    return von_neumann_entropy(partial_trace(space, unit, 0)) + von_neumann_entropy(partial_trace(space, unit, 1));
}

inline double entanglement_entropy(const StateVector& psi) {
    return entanglement_entropy(psi.space(), psi.amplitudes());
}

/// Displacement of the phase-space origin per subsystem, in units of the coherent amplitude.
using Frame = std::vector<Complex>;

/// <a_s> for every subsystem, normalized by <psi|psi>.
inline std::vector<Complex> annihilation_means(const FockSpace& space, const Vector& psi) {
    const int n = space.levels();
    const double norm2 = psi.squaredNorm();
    std::vector<Complex> means(space.subsystems(), Complex(0.0));
    for (int s = 0; s < space.subsystems(); ++s) {
        const Eigen::Index right = space.stride(s);
        const Eigen::Index left = space.dimension() / (n * right);
        Complex acc(0.0);
        for (Eigen::Index l = 0; l < left; ++l) {
            for (int k = 1; k < n; ++k) {
                const double amp = std::sqrt(static_cast<double>(k));
                const Eigen::Index lo = (l * n + (k - 1)) * right;
                const Eigen::Index hi = (l * n + k) * right;
                acc += amp * psi.segment(lo, right).dot(psi.segment(hi, right));
            }
        }
        means[s] = acc / norm2;
    }
    return means;
}

/// Shifts each subsystem by -<a_s> so the returned state has zero mean amplitude;
/// the shift is accumulated into the frame. `psi` may be unnormalized; its norm is kept.
inline void recenter_in_place(const FockSpace& space, Vector& psi, Frame& frame,
                              double leakage_threshold = kDefaultLeakageThreshold) {
    if (static_cast<int>(frame.size()) != space.subsystems()) {
        throw DimensionError("recenter_frame: one frame offset per subsystem required");
    }
    const std::vector<Complex> shift = annihilation_means(space, psi);
    for (int s = 0; s < space.subsystems(); ++s) {
        if (std::abs(shift[s]) < 1e-15) continue;
        detail::apply_local(detail::displacement(space.levels(), -shift[s]), space, s, psi);
        frame[s] += shift[s];
    }
    const double leak = leakage(space, psi) / psi.squaredNorm();
    if (leak > leakage_threshold) {
        throw TruncationError("recenter_frame: displacement pushed leakage to " + std::to_string(leak), -1);
    }
}

inline std::pair<StateVector, Frame> recenter_frame(const StateVector& psi, const Frame& current_frame,
                                                    double leakage_threshold = kDefaultLeakageThreshold) {
    Vector v = psi.amplitudes();
    Frame frame = current_frame;
    recenter_in_place(psi.space(), v, frame, leakage_threshold);
    return {StateVector(psi.space(), std::move(v)), std::move(frame)};
}

}  // namespace qtraj
