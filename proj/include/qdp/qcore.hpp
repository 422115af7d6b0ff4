#pragma once

// Dense complex linear algebra and quantum-state primitives for small
// registers (D <= 64). Qubit 0 is the most significant bit of a
// computational-basis index.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qdp/error.hpp"
#include "qdp/tolerances.hpp"

namespace qdp {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVectorT = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;
using RealVector = Eigen::VectorXd;

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(Eigen::Index n) {
  if (!is_power_of_two(n)) {
    throw DimensionError("dimension " + std::to_string(n) + " is not a power of two");
  }
  int k = 0;
  while ((Eigen::Index{1} << k) < n) ++k;
  return k;
}

/// Kronecker product; (A (x) B)[i*rB + k, j*cB + l] = A[i,j] * B[k,l].
template <typename Real>
ComplexMatrixT<Real> tensor_product(const ComplexMatrixT<Real>& a, const ComplexMatrixT<Real>& b) {
  ComplexMatrixT<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename Real>
Real hermitian_defect(const ComplexMatrixT<Real>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<Real>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Real>
Real unitarity_defect(const ComplexMatrixT<Real>& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<Real>::infinity();
  const auto identity = ComplexMatrixT<Real>::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - identity).cwiseAbs().maxCoeff();
}

/// Ascending eigenvalues of a Hermitian matrix.
template <typename Real>
RealVectorT<Real> hermitian_eigenvalues(const ComplexMatrixT<Real>& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrixT<Real>> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Normalised state vector on a register of dim = 2^n amplitudes.
template <typename Real = double>
class PureStateT {
 public:
  explicit PureStateT(ComplexVectorT<Real> amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (!is_power_of_two(amplitudes_.size())) {
      throw DimensionError("pure state length must be a power of two");
    }
    const Real norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - Real(1)) > Real(tol::kConstruction)) {
      throw DomainError("pure state is not normalised: sum |a|^2 = " + std::to_string(norm2));
    }
  }

  static PureStateT basis(Eigen::Index dim, Eigen::Index index) {
    ComplexVectorT<Real> v = ComplexVectorT<Real>::Zero(dim);
    v(index) = Real(1);
    return PureStateT(std::move(v));
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVectorT<Real>& amplitudes() const { return amplitudes_; }

  Complex<Real> inner(const PureStateT& other) const { return amplitudes_.dot(other.amplitudes_); }

  ComplexMatrixT<Real> projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  ComplexVectorT<Real> amplitudes_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
template <typename Real = double>
class DensityMatrixT {
 public:
  /// Validates every invariant; throws DomainError / DimensionError.
  explicit DensityMatrixT(ComplexMatrixT<Real> m) : m_(std::move(m)) { validate(); }

  static DensityMatrixT from_pure(const PureStateT<Real>& psi) { return trusted(psi.projector()); }

  static DensityMatrixT maximally_mixed(Eigen::Index dim) {
    return trusted(ComplexMatrixT<Real>::Identity(dim, dim) / Real(dim));
  }

  static DensityMatrixT basis(Eigen::Index dim, Eigen::Index index) {
    ComplexMatrixT<Real> m = ComplexMatrixT<Real>::Zero(dim, dim);
    m(index, index) = Real(1);
    return trusted(std::move(m));
  }

  /// For results of invariant-preserving maps (unitary conjugation, convex mixtures).
  static DensityMatrixT trusted(ComplexMatrixT<Real> m) {
    DensityMatrixT out;
    out.m_ = std::move(m);
    return out;
  }

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrixT<Real>& matrix() const { return m_; }
  Complex<Real> operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  Real trace() const { return m_.trace().real(); }

  RealVectorT<Real> eigenvalues() const { return hermitian_eigenvalues<Real>(m_); }

  void validate() const {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
      throw DimensionError("density matrix must be square and non-empty");
    }
    if (hermitian_defect<Real>(m_) > Real(tol::kConstruction)) {
      throw DomainError("density matrix is not Hermitian");
    }
    if (std::abs(trace() - Real(1)) > Real(tol::kConstruction)) {
      throw DomainError("density matrix trace is " + std::to_string(trace()));
    }
    if (eigenvalues().minCoeff() < Real(tol::kPsd)) {
      throw DomainError("density matrix has a negative eigenvalue");
    }
  }

 private:
  DensityMatrixT() = default;
  ComplexMatrixT<Real> m_;
};

/// POVM on a contiguous block of qubits starting at `position`.
template <typename Real = double>
struct PovmT {
  std::vector<ComplexMatrixT<Real>> elements;
  Eigen::Index subsystem_dim = 0;
  int position = 0;

  /// Checks Hermiticity, PSD, completeness and K <= subsystem_dim.
  void validate() const {
    if (elements.empty()) throw DomainError("POVM has no elements");
    if (static_cast<Eigen::Index>(elements.size()) > subsystem_dim) {
      throw DomainError("POVM has more outcomes than the measured dimension");
    }
    ComplexMatrixT<Real> sum = ComplexMatrixT<Real>::Zero(subsystem_dim, subsystem_dim);
    for (const auto& e : elements) {
      if (e.rows() != subsystem_dim || e.cols() != subsystem_dim) {
        throw DimensionError("POVM element does not match subsystem dimension");
      }
      if (hermitian_defect<Real>(e) > Real(tol::kConstruction)) {
        throw DomainError("POVM element is not Hermitian");
      }
      if (hermitian_eigenvalues<Real>(e).minCoeff() < Real(tol::kPsd)) {
        throw DomainError("POVM element is not positive semidefinite");
      }
      sum += e;
    }
    const auto identity = ComplexMatrixT<Real>::Identity(subsystem_dim, subsystem_dim);
    if ((sum - identity).cwiseAbs().maxCoeff() > Real(tol::kConstruction)) {
      throw DomainError("POVM elements do not sum to the identity");
    }
  }

  std::size_t outcomes() const { return elements.size(); }

  /// Projective measurement in the computational basis of `num_qubits`
  /// qubits starting at `position`.
  static PovmT computational(int num_qubits, int position = 0) {
    PovmT povm;
    povm.subsystem_dim = Eigen::Index{1} << num_qubits;
    povm.position = position;
    for (Eigen::Index k = 0; k < povm.subsystem_dim; ++k) {
      ComplexMatrixT<Real> e = ComplexMatrixT<Real>::Zero(povm.subsystem_dim, povm.subsystem_dim);
      e(k, k) = Real(1);
      povm.elements.push_back(std::move(e));
    }
    return povm;
  }
};

using PureState = PureStateT<double>;
using DensityMatrix = DensityMatrixT<double>;
using Povm = PovmT<double>;

/// U rho U^dagger. Throws DimensionError on size mismatch and DomainError
/// when max|U^dagger U - I| exceeds the unitarity tolerance.
template <typename Real>
DensityMatrixT<Real> apply_unitary(const ComplexMatrixT<Real>& u, const DensityMatrixT<Real>& rho) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
    throw DimensionError("unitary is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                         " but state has dimension " + std::to_string(rho.dim()));
  }
  if (unitarity_defect<Real>(u) > Real(tol::kUnitarity)) {
    throw DomainError("matrix is not unitary");
  }
  return DensityMatrixT<Real>::trusted(u * rho.matrix() * u.adjoint());
}

/// Half the trace norm of rho - sigma, clamped to [0, 1].
template <typename Real>
Real trace_distance(const DensityMatrixT<Real>& rho, const DensityMatrixT<Real>& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("trace_distance: dimension mismatch");
  const ComplexMatrixT<Real> diff = rho.matrix() - sigma.matrix();
  const Real half_norm = hermitian_eigenvalues<Real>(diff).cwiseAbs().sum() / Real(2);
  return std::clamp(half_norm, Real(0), Real(1));
}

/// Tr(element * rho). Values within the construction tolerance outside
/// [0, 1] are clipped; larger violations throw DomainError.
template <typename Real>
Real measure_probability(const ComplexMatrixT<Real>& element, const DensityMatrixT<Real>& rho) {
  if (element.rows() != rho.dim() || element.cols() != rho.dim()) {
    throw DimensionError("measurement element does not match state dimension");
  }
  // Tr(A B) = sum_ij A_ij B_ji without forming the product.
  const Real p = (element.transpose().cwiseProduct(rho.matrix())).sum().real();
  const Real slack = Real(tol::kConstruction);
  if (p < -slack || p > Real(1) + slack) {
    throw DomainError("measurement probability " + std::to_string(p) + " outside [0, 1]");
  }
  return std::clamp(p, Real(0), Real(1));
}

/// Lifts each POVM element to I_{2^position} (x) Pi_k (x) I_rest on a
/// register of total_dim.
template <typename Real>
std::vector<ComplexMatrixT<Real>> embed_povm(const PovmT<Real>& povm, Eigen::Index total_dim) {
  if (povm.subsystem_dim <= 0 || total_dim % povm.subsystem_dim != 0) {
    throw DimensionError("total dimension " + std::to_string(total_dim) +
                         " is not divisible by the measured dimension " +
                         std::to_string(povm.subsystem_dim));
  }
  const int total_qubits = log2_exact(total_dim);
  const int measured_qubits = log2_exact(povm.subsystem_dim);
  if (povm.position < 0 || povm.position + measured_qubits > total_qubits) {
    throw DimensionError("POVM position " + std::to_string(povm.position) + " out of range");
  }
  const Eigen::Index before = Eigen::Index{1} << povm.position;
  const Eigen::Index after = total_dim / (before * povm.subsystem_dim);
  const auto left = ComplexMatrixT<Real>::Identity(before, before).eval();
  const auto right = ComplexMatrixT<Real>::Identity(after, after).eval();

  std::vector<ComplexMatrixT<Real>> out;
  out.reserve(povm.elements.size());
  for (const auto& e : povm.elements) {
    out.push_back(tensor_product<Real>(tensor_product<Real>(left, e), right));
  }
  return out;
}

}  // namespace qdp
