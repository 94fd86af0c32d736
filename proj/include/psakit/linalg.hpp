#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include "config.hpp"
#include "errors.hpp"

namespace psakit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Which tensor factor survives a partial trace.
enum class Side { A, B };

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

/// ||M - M^dagger||_F, the distance from the Hermitian cone.
inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).norm();
}

inline ComplexMatrix identity(int dim) {
  return ComplexMatrix::Identity(dim, dim);
}

/**
 * A square matrix validated to be Hermitian within tol_herm at construction.
 * The stored matrix is the raw input (not symmetrized); `defect` records how
 * far it was from Hermitian so callers can report it.
 */
class HermitianOperator {
public:
  HermitianOperator() = default;

  explicit HermitianOperator(ComplexMatrix m, const Config& cfg = {})
      : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
      throw DimensionError("operator must be square, got " +
                           std::to_string(mat_.rows()) + "x" +
                           std::to_string(mat_.cols()));
    if (mat_.rows() < 1 || mat_.rows() > cfg.max_dim)
      throw DimensionError("operator dimension " + std::to_string(mat_.rows()) +
                           " outside [1, " + std::to_string(cfg.max_dim) + "]");
    if (!all_finite(mat_))
      throw NumericalError("operator has non-finite entries");
    defect_ = hermiticity_defect(mat_);
    if (defect_ > cfg.tol_herm)
      throw NumericalError("operator is not Hermitian, defect " +
                           std::to_string(defect_));
  }

  const ComplexMatrix& matrix() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }
  double defect() const { return defect_; }

private:
  ComplexMatrix mat_;
  double defect_ = 0.0;
};

/**
 * A density matrix: Hermitian, trace 1 within tol_trace, eigenvalues
 * >= -tol_psd. Construction runs a full eigensolve; the smallest eigenvalue
 * and the trace defect are kept for reporting.
 */
class DensityMatrix {
public:
  DensityMatrix() = default;

  explicit DensityMatrix(ComplexMatrix m, const Config& cfg = {})
      : op_(std::move(m), cfg) {
    trace_defect_ = std::abs(op_.matrix().trace() - Complex(1.0, 0.0));
    if (trace_defect_ > cfg.tol_trace)
      throw InvalidStateError("density matrix trace_defect=" +
                              format_defect(trace_defect_));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
        (op_.matrix() + op_.matrix().adjoint()) / 2.0);
    if (solver.info() != Eigen::Success)
      throw NumericalError("eigensolver failed on density matrix");
    min_eigenvalue_ = solver.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -cfg.tol_psd)
      throw InvalidStateError("density matrix is not PSD, min eigenvalue " +
                              std::to_string(min_eigenvalue_));
  }

  const ComplexMatrix& matrix() const { return op_.matrix(); }
  int dim() const { return op_.dim(); }
  double trace_defect() const { return trace_defect_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// Tr(rho^2); 1 exactly for pure states.
  double purity() const {
    return (op_.matrix() * op_.matrix()).trace().real();
  }

  static std::string format_defect(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", d);
    return buf;
  }

private:
  HermitianOperator op_;
  double trace_defect_ = 0.0;
  double min_eigenvalue_ = 0.0;
};

/// Kronecker product with the row-major composite index convention:
/// (a (x) b)[(i*rb + k), (j*cb + l)] = a(i,j) * b(k,l).
inline ComplexMatrix tensor_product(const ComplexMatrix& a,
                                    const ComplexMatrix& b,
                                    const Config& cfg = {}) {
  if (a.size() == 0 || b.size() == 0)
    throw DimensionError("tensor_product of an empty operand");
  if (!all_finite(a) || !all_finite(b))
    throw NumericalError("tensor_product operand has non-finite entries");
  const auto rows = a.rows() * b.rows();
  const auto cols = a.cols() * b.cols();
  if (std::max(rows, cols) > cfg.max_dim)
    throw DimensionError("tensor_product result " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " exceeds max_dim " +
                         std::to_string(cfg.max_dim));
  return Eigen::kroneckerProduct(a, b);
}

/// Trace out one factor of a bipartite state on C^dA (x) C^dB.
inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::pair<int, int> dims, Side keep,
                                   const Config& cfg = {}) {
  const int da = dims.first, db = dims.second;
  if (da < 1 || db < 1 || da * db != rho.dim())
    throw DimensionError("partial_trace dims (" + std::to_string(da) + "," +
                         std::to_string(db) + ") do not factor dimension " +
                         std::to_string(rho.dim()));
  const ComplexMatrix& m = rho.matrix();
  if (keep == Side::A) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b = 0; b < db; ++b)
          out(a, a2) += m(a * db + b, a2 * db + b);
    return DensityMatrix(std::move(out), cfg);
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (int b = 0; b < db; ++b)
    for (int b2 = 0; b2 < db; ++b2)
      for (int a = 0; a < da; ++a)
        out(b, b2) += m(a * db + b, a * db + b2);
  return DensityMatrix(std::move(out), cfg);
}

/// ||PQ - QP||_F. Zero exactly when the operators commute.
inline double commutator_norm(const ComplexMatrix& p, const ComplexMatrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw DimensionError("commutator_norm on mismatched dimensions " +
                         std::to_string(p.rows()) + " vs " +
                         std::to_string(q.rows()));
  return (p * q - q * p).norm();
}

inline double commutator_norm(const HermitianOperator& p,
                              const HermitianOperator& q) {
  return commutator_norm(p.matrix(), q.matrix());
}

/// Spectral decomposition of a Hermitian operator.
struct EigenSystem {
  RealVector eigenvalues;      // descending
  ComplexMatrix eigenvectors;  // column k pairs with eigenvalues[k]
};

inline EigenSystem eigen_hermitian(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
      (a.matrix() + a.matrix().adjoint()) / 2.0);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge");
  EigenSystem sys;
  sys.eigenvalues = solver.eigenvalues().reverse();
  sys.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return sys;
}

/// Rank-1 projector |v><v| onto a unit vector.
inline ComplexMatrix projector_onto(const ComplexVector& v) {
  return v * v.adjoint();
}

}
