#pragma once

#include <cstddef>
#include <cstdint>

namespace psakit {

/**
 * Numerical tolerances and resource caps, passed explicitly to every
 * operation that needs one. Defaults are the library contract; callers
 * override individual fields (the CLI exposes them as --tol-<name> flags
 * and the scenario schema as a "tolerances" object).
 *
 * Absolute Frobenius/entrywise tolerances throughout; inputs are expected
 * at unit scale (projectors, trace-1 operators).
 */
struct Config {
  double tol_herm = 1e-9;        // ||A - A^dagger||_F for Hermitian inputs
  double tol_trace = 1e-9;       // |Tr(rho) - 1|
  double tol_psd = 1e-9;         // eigenvalues >= -tol_psd
  double tol_num = 1e-8;         // generic entrywise / residual tolerance
  double tol_comm = 1e-9;        // ||PQ - QP||_F edge threshold
  double tol_proj = 1e-9;        // ||P^2 - P||_F projector threshold
  double tol_recon = 1e-7;       // least-squares residual for reconstruction
  double tol_intensive = 1e-9;   // |psi2(tau(P)) - psi1(P)| per node
  double tol_effective = 1e-9;   // allowed leak 1 - captured mass per pair
  double tol_schmidt = 1e-8;     // singular values above this count as rank
  double tol_pure = 1e-9;        // 1 - Tr(rho^2) purity threshold
  double stat_threshold = 0.01;  // empirical TV / captured-mass slack

  int max_dim = 64;                         // largest operator dimension
  std::size_t max_cliques = 100000;         // clique enumeration cap
  std::uint64_t search_budget = 100000000;  // valuation search expansions
};

}
