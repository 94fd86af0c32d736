#pragma once

// Shared fixtures: oracle conversions, a deterministic test RNG built on the
// library's own counter-based generator, mutually unbiased basis graphs for
// the reconstruction tests, and Bell states.

#include <psakit/psakit.hpp>

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "oracle.hpp"

namespace support {

using psakit::Basis;
using psakit::Complex;
using psakit::ComplexMatrix;
using psakit::ComplexVector;
using psakit::Config;
using psakit::DensityMatrix;
using psakit::GraphBundle;
using psakit::HermitianOperator;
using psakit::PowerGraph;

inline oracle::Mat to_oracle(const ComplexMatrix& m) {
  oracle::Mat out = oracle::zeros(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline ComplexMatrix from_oracle(const oracle::Mat& m) {
  ComplexMatrix out(m.size(), m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  return out;
}

/// Deterministic stream of uniforms/normals; identical on every platform,
/// so frozen expectations stay valid.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint32_t substream = 0)
      : stream_(seed, substream) {}

  double uniform() { return stream_.uniform_at(index_++); }

  double normal() {
    const auto [u1, u2] = stream_.uniform_pair_at(index_++);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * std::acos(-1.0) * u2);
  }

  Complex cnormal() {
    const auto [u1, u2] = stream_.uniform_pair_at(index_++);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double phi = 2.0 * std::acos(-1.0) * u2;
    return Complex(r * std::cos(phi), r * std::sin(phi));
  }

private:
  psakit::PhiloxStream stream_;
  std::uint64_t index_ = 0;
};

inline ComplexMatrix ginibre(int rows, int cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.cnormal();
  return g;
}

/// Random density matrix G G^dagger / Tr(G G^dagger).
inline ComplexMatrix random_density(int d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

/// Haar-ish unitary: QR of a Ginibre matrix with the phase convention fixed.
inline ComplexMatrix random_unitary(int d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const Complex diag = r(k, k);
    if (std::abs(diag) > 0.0) q.col(k) *= diag / std::abs(diag);
  }
  return q;
}

inline ComplexVector random_pure(int d, Rng& rng) {
  ComplexVector v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.cnormal();
  v.normalize();
  return v;
}

inline ComplexVector bell_vector(int which) {
  ComplexVector psi = ComplexVector::Zero(4);
  const double s = 1.0 / std::sqrt(2.0);
  switch (which) {
    case 0: psi(0) = s; psi(3) = s; break;   // (|00> + |11>)/sqrt2
    case 1: psi(0) = s; psi(3) = -s; break;  // (|00> - |11>)/sqrt2
    case 2: psi(1) = s; psi(2) = s; break;   // (|01> + |10>)/sqrt2
    default: psi(1) = s; psi(2) = -s; break; // (|01> - |10>)/sqrt2
  }
  return psi;
}

inline Basis named_basis(const std::string& name, int d) {
  std::vector<Basis> out;
  psakit::detail::append_basis(out, psakit::json(name), d, "test");
  return out.front();
}

/// d = 2: computational, Fourier and circular bases. Spans the operator
/// space (rank 4), so reconstruction is exact.
inline GraphBundle mub_bundle_d2(const Config& cfg = {}) {
  return psakit::generate_graph_with_contexts(
      {named_basis("z", 2), named_basis("x", 2), named_basis("y", 2)}, cfg);
}

/// d = 3: computational plus the three phase bases with columns
/// v[j] = w^(r j^2 + k j)/sqrt3, w = exp(2 pi i/3); a full set of four
/// mutually unbiased bases (rank 9).
inline GraphBundle mub_bundle_d3(const Config& cfg = {}) {
  std::vector<Basis> bases;
  bases.push_back(named_basis("z", 3));
  const double twopi = 2.0 * std::acos(-1.0);
  for (int r = 0; r < 3; ++r) {
    Basis b;
    b.name = "m" + std::to_string(r);
    b.vectors.resize(3, 3);
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) {
        const double phase = twopi * ((r * j * j + k * j) % 3) / 3.0;
        b.vectors(j, k) =
            Complex(std::cos(phase), std::sin(phase)) / std::sqrt(3.0);
      }
    bases.push_back(std::move(b));
  }
  return psakit::generate_graph_with_contexts(bases, cfg);
}

/// d = 2 computational + Fourier only: rank 3 < 4, deliberately incomplete.
inline GraphBundle zx_bundle(const Config& cfg = {}) {
  return psakit::generate_graph_with_contexts(
      {named_basis("z", 2), named_basis("x", 2)}, cfg);
}

inline std::shared_ptr<const PowerGraph> graph_of(const GraphBundle& b) {
  return b.graph;
}

}  // namespace support
