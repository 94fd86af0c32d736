#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "powers.hpp"

namespace psakit {

/**
 * A potential state of affairs: one number in [0,1] per node of a power
 * graph. Born valuations of a density matrix are the physical instances;
 * explicit valuations (hand-written or reconstructed-from) are also allowed
 * and carry a source tag so reports can say where the numbers came from.
 */
struct PSA {
  enum class Source { FromDensity, Explicit };

  std::shared_ptr<const PowerGraph> graph;
  std::vector<double> potentia;  // indexed by node id
  Source source = Source::Explicit;

  double operator()(int node) const { return potentia[node]; }
};

/// Tr(rho P), clamped to [0,1]; the imaginary part must vanish numerically.
inline double born_potentia(const DensityMatrix& rho, const Power& p,
                            const Config& cfg = {}) {
  if (rho.dim() != p.projector.dim())
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match power dimension " +
                         std::to_string(p.projector.dim()));
  const Complex t = (rho.matrix() * p.projector.matrix()).trace();
  if (std::abs(t.imag()) > cfg.tol_num)
    throw NumericalError("potentia has imaginary part " +
                         std::to_string(t.imag()));
  const double v = t.real();
  if (v < -cfg.tol_num || v > 1.0 + cfg.tol_num)
    throw NumericalError("potentia " + std::to_string(v) + " outside [0,1]");
  return std::clamp(v, 0.0, 1.0);
}

inline PSA psa_from_density(const DensityMatrix& rho,
                            std::shared_ptr<const PowerGraph> graph,
                            const Config& cfg = {}) {
  if (!graph) throw ValidationError("psa_from_density needs a graph");
  if (rho.dim() != graph->dim)
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match graph dimension " +
                         std::to_string(graph->dim));
  PSA psa;
  psa.graph = std::move(graph);
  psa.source = PSA::Source::FromDensity;
  psa.potentia.reserve(psa.graph->size());
  for (const auto& p : psa.graph->powers)
    psa.potentia.push_back(born_potentia(rho, p, cfg));
  return psa;
}

/// Wrap explicit values as a PSA after range validation.
inline PSA make_psa(std::shared_ptr<const PowerGraph> graph,
                    std::vector<double> values, const Config& cfg = {}) {
  if (!graph) throw ValidationError("make_psa needs a graph");
  if (values.size() != graph->size())
    throw ValidationError("valuation has " + std::to_string(values.size()) +
                          " entries for " + std::to_string(graph->size()) +
                          " nodes");
  for (double& v : values) {
    if (!(v >= -cfg.tol_num && v <= 1.0 + cfg.tol_num))
      throw ValidationError("potentia " + std::to_string(v) + " outside [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
  PSA psa;
  psa.graph = std::move(graph);
  psa.potentia = std::move(values);
  psa.source = PSA::Source::Explicit;
  return psa;
}

namespace detail {

/// Orthonormal Hermitian basis of d x d operators under <A,B> = Tr(AB):
/// the diagonal units, then (E_ij + E_ji)/sqrt2, then i(E_ij - E_ji)/sqrt2
/// for i < j, in row-major pair order.
inline std::vector<ComplexMatrix> hermitian_basis(int d) {
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(d, d);
      re(i, j) = s;
      re(j, i) = s;
      basis.push_back(std::move(re));
      ComplexMatrix im = ComplexMatrix::Zero(d, d);
      im(i, j) = Complex(0.0, s);
      im(j, i) = Complex(0.0, -s);
      basis.push_back(std::move(im));
    }
  return basis;
}

}  // namespace detail

/**
 * Invert the Born map: find the density matrix whose valuation over the
 * graph equals the given PSA. The graph must span the operator space
 * (NotTomographicallyCompleteError otherwise); the valuation must be
 * consistent (InconsistentPSAError on large residual, trace defect, or
 * negative eigenvalue beyond tol_psd). Eigenvalues inside the tolerance
 * band are clipped to zero and the spectrum renormalized.
 */
inline DensityMatrix density_from_psa(const PSA& psa, const Config& cfg = {}) {
  if (!psa.graph) throw ValidationError("density_from_psa needs a graph");
  const PowerGraph& g = *psa.graph;
  const int d = g.dim;
  const int n = static_cast<int>(g.size());
  if (static_cast<int>(psa.potentia.size()) != n)
    throw ValidationError("valuation size does not match graph");

  const auto basis = detail::hermitian_basis(d);
  const int dd = d * d;
  Eigen::MatrixXd m(n, dd);
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < dd; ++k)
      m(p, k) = (g.powers[p].projector.matrix() * basis[k]).trace().real();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);  // relative cutoff; projector entries are unit scale
  const int rank = static_cast<int>(svd.rank());
  if (rank < dd)
    throw NotTomographicallyCompleteError(
        rank, dd,
        "graph spans rank " + std::to_string(rank) + " of " +
            std::to_string(dd) + " operator dimensions");

  Eigen::VectorXd target(n);
  for (int p = 0; p < n; ++p) target(p) = psa.potentia[p];
  const Eigen::VectorXd x = svd.solve(target);
  const double residual = (m * x - target).norm();
  if (residual > cfg.tol_recon)
    throw InconsistentPSAError("no density matrix reproduces the valuation, "
                               "least-squares residual " +
                               DensityMatrix::format_defect(residual));

  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < dd; ++k) rho += x(k) * basis[k];

  const double trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_defect > cfg.tol_trace)
    throw InconsistentPSAError("reconstruction has trace defect " +
                               DensityMatrix::format_defect(trace_defect));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver((rho + rho.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on reconstruction");
  RealVector evs = solver.eigenvalues();
  if (evs.minCoeff() < -cfg.tol_psd)
    throw InconsistentPSAError("reconstruction has negative eigenvalue " +
                               DensityMatrix::format_defect(evs.minCoeff()));
  for (int i = 0; i < d; ++i) evs(i) = std::max(evs(i), 0.0);
  evs /= evs.sum();
  const ComplexMatrix projected = solver.eigenvectors() *
                                  evs.asDiagonal().toDenseMatrix().cast<Complex>() *
                                  solver.eigenvectors().adjoint();
  return DensityMatrix(projected, cfg);
}

/// A noncontextual {0,1} assignment: exactly one node true per
/// identity-resolving maximal context.
struct BinaryValuation {
  std::vector<int> assignment;    // node id -> 0 or 1
  std::vector<Context> contexts;  // the constraints it satisfies
};

struct KsSearchResult {
  bool exists = false;
  std::optional<BinaryValuation> valuation;  // set when exists
  std::uint64_t branches_explored = 0;       // nonexistence certificate size
};

/**
 * Backtracking search for a binary valuation. Constraints range over the
 * identity-resolving maximal contexts (a graph with none raises
 * NonExhaustiveContextError). Deterministic: contexts in lexicographic
 * order, candidate nodes ascending, so the first solution is the least in
 * that order. Budget counts candidate expansions.
 */
inline KsSearchResult search_binary_valuation(const PowerGraph& g,
                                              const Config& cfg = {}) {
  std::vector<Context> contexts;
  for (auto& c : maximal_contexts(g, cfg))
    if (c.resolves_identity) contexts.push_back(std::move(c));
  if (contexts.empty())
    throw NonExhaustiveContextError(
        "no maximal context resolves the identity; the search constraints "
        "would be vacuous");

  const int n = static_cast<int>(g.size());
  std::vector<signed char> assign(n, -1);
  std::uint64_t branches = 0;

  // Set every unknown node of the context except `one` to 0, recording the
  // touched ids so the caller can undo.
  const auto& ctxs = contexts;
  auto zero_rest = [&](const Context& c, int one, std::vector<int>& touched) {
    for (int id : c.node_ids)
      if (id != one && assign[id] == -1) {
        assign[id] = 0;
        touched.push_back(id);
      }
  };

  std::function<bool(std::size_t)> solve = [&](std::size_t k) -> bool {
    if (k == ctxs.size()) return true;
    const Context& c = ctxs[k];
    int one = -1;
    int ones = 0;
    for (int id : c.node_ids)
      if (assign[id] == 1) {
        ++ones;
        one = id;
      }
    if (ones > 1) return false;
    if (ones == 1) {
      std::vector<int> touched;
      zero_rest(c, one, touched);
      if (solve(k + 1)) return true;
      for (int id : touched) assign[id] = -1;
      return false;
    }
    for (int id : c.node_ids) {
      if (assign[id] != -1) continue;
      if (++branches > cfg.search_budget)
        throw SearchBudgetError(cfg.search_budget,
                                "valuation search exceeded budget of " +
                                    std::to_string(cfg.search_budget) +
                                    " expansions");
      assign[id] = 1;
      std::vector<int> touched;
      zero_rest(c, id, touched);
      if (solve(k + 1)) return true;
      for (int t : touched) assign[t] = -1;
      assign[id] = -1;
    }
    return false;
  };

  KsSearchResult result;
  result.exists = solve(0);
  result.branches_explored = branches;
  if (result.exists) {
    BinaryValuation val;
    val.assignment.resize(n);
    // Nodes outside every identity-resolving context are unconstrained;
    // they read as 0.
    for (int i = 0; i < n; ++i) val.assignment[i] = assign[i] == 1 ? 1 : 0;
    val.contexts = contexts;
    result.valuation = std::move(val);
  }
  return result;
}

/// The outcome distribution a PSA induces on one exhaustive context.
struct EffectiveDistribution {
  Context context;
  std::vector<double> probabilities;  // aligned with context.node_ids
};

inline EffectiveDistribution effective_distribution(const PSA& psa,
                                                    const Context& context,
                                                    const Config& cfg = {}) {
  if (!psa.graph) throw ValidationError("effective_distribution needs a graph");
  if (!context.resolves_identity)
    throw NonExhaustiveContextError(
        "context does not resolve the identity; its potentia are not a "
        "probability distribution");
  EffectiveDistribution dist;
  dist.context = context;
  double sum = 0.0;
  for (int id : context.node_ids) {
    if (id < 0 || id >= static_cast<int>(psa.potentia.size()))
      throw ValidationError("context references unknown node " +
                            std::to_string(id));
    dist.probabilities.push_back(psa.potentia[id]);
    sum += psa.potentia[id];
  }
  if (std::abs(sum - 1.0) > psa.graph->dim * cfg.tol_num)
    throw NumericalError("context potentia sum to " + std::to_string(sum) +
                         ", expected 1");
  return dist;
}

}
