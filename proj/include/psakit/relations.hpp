#pragma once

#include <algorithm>
#include <cmath>
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
#include "psa.hpp"

namespace psakit {

/// Why two PSAs failed to be intensively related, cheapest test first.
enum class IntensiveObstruction {
  None,
  SizeMismatch,
  PotentiaMultisetMismatch,
  DegreeSequenceMismatch,
  NoIsomorphism,
};

inline const char* to_string(IntensiveObstruction o) {
  switch (o) {
    case IntensiveObstruction::None: return "none";
    case IntensiveObstruction::SizeMismatch: return "size_mismatch";
    case IntensiveObstruction::PotentiaMultisetMismatch:
      return "potentia_multiset_mismatch";
    case IntensiveObstruction::DegreeSequenceMismatch:
      return "degree_sequence_mismatch";
    case IntensiveObstruction::NoIsomorphism: return "no_isomorphism";
  }
  return "unknown";
}

struct IntensiveWitness {
  std::vector<int> mapping;  // node v of the first graph -> mapping[v] of the second
  double max_potentia_gap = 0.0;
};

struct IntensiveResult {
  bool related = false;
  std::optional<IntensiveWitness> witness;
  IntensiveObstruction obstruction = IntensiveObstruction::None;
};

/**
 * Decide whether a graph isomorphism carries the first valuation to the
 * second within tol_intensive. Backtracking over nodes in ascending order
 * with ascending candidates, so the witness is the lexicographically least
 * mapping. Pruning: size, then sorted potentia lists (sorted matching
 * minimizes the worst gap, so a mismatch there is conclusive), then sorted
 * degree sequences.
 */
inline IntensiveResult intensive_related(const PSA& first, const PSA& second,
                                         const Config& cfg = {}) {
  if (!first.graph || !second.graph)
    throw ValidationError("intensive_related needs two graphs");
  const PowerGraph& g1 = *first.graph;
  const PowerGraph& g2 = *second.graph;
  if (first.potentia.size() != g1.size() || second.potentia.size() != g2.size())
    throw ValidationError("valuation does not cover its graph");

  IntensiveResult result;
  const int n = static_cast<int>(g1.size());
  if (g2.size() != g1.size()) {
    result.obstruction = IntensiveObstruction::SizeMismatch;
    return result;
  }

  std::vector<double> s1 = first.potentia, s2 = second.potentia;
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  for (int i = 0; i < n; ++i)
    if (std::abs(s1[i] - s2[i]) > cfg.tol_intensive) {
      result.obstruction = IntensiveObstruction::PotentiaMultisetMismatch;
      return result;
    }

  std::vector<int> deg1(n), deg2(n);
  for (int i = 0; i < n; ++i) deg1[i] = g1.degree(i), deg2[i] = g2.degree(i);
  std::vector<int> d1 = deg1, d2 = deg2;
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) {
    result.obstruction = IntensiveObstruction::DegreeSequenceMismatch;
    return result;
  }

  std::vector<int> mapping(n, -1);
  std::vector<bool> used(n, false);
  std::function<bool(int)> place = [&](int v) -> bool {
    if (v == n) return true;
    for (int u = 0; u < n; ++u) {
      if (used[u]) continue;
      if (std::abs(first.potentia[v] - second.potentia[u]) > cfg.tol_intensive)
        continue;
      if (deg1[v] != deg2[u]) continue;
      bool consistent = true;
      for (int w = 0; w < v; ++w)
        if (g1.adjacent(v, w) != g2.adjacent(u, mapping[w])) {
          consistent = false;
          break;
        }
      if (!consistent) continue;
      mapping[v] = u;
      used[u] = true;
      if (place(v + 1)) return true;
      mapping[v] = -1;
      used[u] = false;
    }
    return false;
  };

  if (!place(0)) {
    result.obstruction = IntensiveObstruction::NoIsomorphism;
    return result;
  }
  IntensiveWitness witness;
  witness.mapping = std::move(mapping);
  for (int v = 0; v < n; ++v)
    witness.max_potentia_gap =
        std::max(witness.max_potentia_gap,
                 std::abs(first.potentia[v] - second.potentia[witness.mapping[v]]));
  result.related = true;
  result.witness = std::move(witness);
  result.obstruction = IntensiveObstruction::None;
  return result;
}

/// A designated pair of exhaustive contexts, one per side, with the
/// outcome matching m: position i of `a` corresponds to position m[i] of `b`.
struct ContextPair {
  Context a;
  Context b;
  std::vector<int> matching;
  std::string label;
};

enum class PairingMode { DesignatedPairs, AllMatchedContexts };

inline const char* to_string(PairingMode m) {
  return m == PairingMode::DesignatedPairs ? "designated" : "all-matched";
}

/// A bipartite state plus the side graphs and context pairs to probe it with.
struct JointScenario {
  DensityMatrix state;  // on C^dA (x) C^dB
  std::pair<int, int> dims{0, 0};
  std::shared_ptr<const PowerGraph> graph_a;
  std::shared_ptr<const PowerGraph> graph_b;
  std::vector<ContextPair> pairs;  // used in DesignatedPairs mode
  PairingMode mode = PairingMode::DesignatedPairs;
};

/**
 * Joint outcome distribution p(i,j) = Tr(rho (P_i (x) Q_j)) over one pair of
 * exhaustive contexts; rows follow c1.node_ids, columns c2.node_ids.
 */
inline Eigen::MatrixXd joint_outcome_distribution(const JointScenario& s,
                                                  const Context& c1,
                                                  const Context& c2,
                                                  const Config& cfg = {}) {
  if (!s.graph_a || !s.graph_b)
    throw ValidationError("joint_outcome_distribution needs both graphs");
  if (s.dims.first * s.dims.second != s.state.dim())
    throw DimensionError("scenario dims do not factor the joint state");
  if (!c1.resolves_identity || !c2.resolves_identity)
    throw NonExhaustiveContextError(
        "joint distributions need identity-resolving contexts on both sides");
  const int n1 = static_cast<int>(c1.size());
  const int n2 = static_cast<int>(c2.size());
  Eigen::MatrixXd p(n1, n2);
  double total = 0.0;
  for (int i = 0; i < n1; ++i) {
    const ComplexMatrix& pa = s.graph_a->powers[c1.node_ids[i]].projector.matrix();
    for (int j = 0; j < n2; ++j) {
      const ComplexMatrix& qb = s.graph_b->powers[c2.node_ids[j]].projector.matrix();
      const Complex t = (s.state.matrix() * tensor_product(pa, qb, cfg)).trace();
      if (std::abs(t.imag()) > cfg.tol_num)
        throw NumericalError("joint probability has imaginary part " +
                             std::to_string(t.imag()));
      if (t.real() < -cfg.tol_num || t.real() > 1.0 + cfg.tol_num)
        throw NumericalError("joint probability " + std::to_string(t.real()) +
                             " outside [0,1]");
      p(i, j) = std::clamp(t.real(), 0.0, 1.0);
      total += p(i, j);
    }
  }
  if (std::abs(total - 1.0) > s.state.dim() * cfg.tol_num)
    throw NumericalError("joint probabilities sum to " + std::to_string(total));
  return p;
}

/// The tested context pairs under the scenario's pairing mode.
inline std::vector<ContextPair> resolve_tested_pairs(const JointScenario& s,
                                                     const Config& cfg = {}) {
  if (s.mode == PairingMode::DesignatedPairs) {
    if (s.pairs.empty())
      throw ValidationError("scenario designates no context pairs");
    return s.pairs;
  }
  std::vector<ContextPair> out;
  std::vector<Context> ca, cb;
  for (auto& c : maximal_contexts(*s.graph_a, cfg))
    if (c.resolves_identity) ca.push_back(std::move(c));
  for (auto& c : maximal_contexts(*s.graph_b, cfg))
    if (c.resolves_identity) cb.push_back(std::move(c));
  for (std::size_t i = 0; i < ca.size(); ++i)
    for (std::size_t j = 0; j < cb.size(); ++j) {
      if (ca[i].size() != cb[j].size()) continue;
      ContextPair pair;
      pair.a = ca[i];
      pair.b = cb[j];
      pair.matching.resize(ca[i].size());
      for (std::size_t k = 0; k < pair.matching.size(); ++k)
        pair.matching[k] = static_cast<int>(k);
      pair.label = "A" + std::to_string(i) + "xB" + std::to_string(j);
      out.push_back(std::move(pair));
    }
  if (out.empty())
    throw ValidationError(
        "no equal-size identity-resolving context pairs to test");
  return out;
}

enum class CorrelationSign { Correlated, AntiCorrelated, Mixed };

inline const char* to_string(CorrelationSign s) {
  switch (s) {
    case CorrelationSign::Correlated: return "correlated";
    case CorrelationSign::AntiCorrelated: return "anti_correlated";
    case CorrelationSign::Mixed: return "mixed";
  }
  return "unknown";
}

/// Argmax transport for one tested pair: row i of the joint distribution is
/// carried to column tau[i].
struct PairTransport {
  std::string label;
  std::vector<int> tau;
  double captured_mass = 0.0;
};

struct EffectiveResult {
  bool related = false;
  CorrelationSign sign = CorrelationSign::Mixed;  // meaningful when related
  std::vector<PairTransport> transports;          // one per tested pair
  double worst_leak = 0.0;
  int worst_pair = -1;  // index into transports of the largest leak
};

/**
 * Effectively related: in every tested context pair, the per-row argmax
 * transport captures all but tol_effective of the joint mass. Argmax ties
 * break to the smallest column. The correlation sign compares the transport
 * with the designated matching m (Correlated) and with its complement
 * anti(i) = m[n-1-i] (AntiCorrelated) on rows whose marginal mass exceeds
 * tol_effective; zero-mass rows carry no physical transport, only the
 * tie-break artifact.
 */
inline EffectiveResult effective_related(const JointScenario& s,
                                         const Config& cfg = {}) {
  const auto pairs = resolve_tested_pairs(s, cfg);
  EffectiveResult result;
  bool all_corr = true, all_anti = true;
  for (const auto& pair : pairs) {
    const Eigen::MatrixXd p = joint_outcome_distribution(s, pair.a, pair.b, cfg);
    const int n1 = static_cast<int>(p.rows());
    const int n2 = static_cast<int>(p.cols());
    PairTransport t;
    t.label = pair.label;
    t.tau.resize(n1);
    for (int i = 0; i < n1; ++i) {
      int best = 0;
      for (int j = 1; j < n2; ++j)
        if (p(i, j) > p(i, best)) best = j;
      t.tau[i] = best;
      t.captured_mass += p(i, best);
    }
    const double leak = 1.0 - t.captured_mass;
    if (result.worst_pair < 0 || leak > result.worst_leak) {
      result.worst_leak = leak;
      result.worst_pair = static_cast<int>(result.transports.size());
    }
    const bool square = n1 == n2 &&
                        static_cast<int>(pair.matching.size()) == n1;
    for (int i = 0; i < n1; ++i) {
      if (p.row(i).sum() <= cfg.tol_effective) continue;
      if (i >= static_cast<int>(pair.matching.size()) ||
          t.tau[i] != pair.matching[i])
        all_corr = false;
      if (!square || t.tau[i] != pair.matching[n1 - 1 - i]) all_anti = false;
    }
    result.transports.push_back(std::move(t));
  }
  result.related = result.worst_leak <= cfg.tol_effective;
  if (result.related)
    result.sign = all_corr    ? CorrelationSign::Correlated
                  : all_anti  ? CorrelationSign::AntiCorrelated
                              : CorrelationSign::Mixed;
  return result;
}

/// Schmidt rank of a pure bipartite state vector: the number of singular
/// values of its dA x dB coefficient matrix above tol_schmidt.
inline int schmidt_rank(const ComplexVector& psi, std::pair<int, int> dims,
                        const Config& cfg = {}) {
  const int da = dims.first, db = dims.second;
  if (da < 1 || db < 1 || static_cast<int>(psi.size()) != da * db)
    throw DimensionError("state vector of size " + std::to_string(psi.size()) +
                         " does not factor as " + std::to_string(da) + "x" +
                         std::to_string(db));
  const double norm_defect = std::abs(psi.norm() - 1.0);
  if (norm_defect > cfg.tol_num)
    throw InvalidStateError("state vector norm defect " +
                            DensityMatrix::format_defect(norm_defect));
  ComplexMatrix coeff(da, db);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b) coeff(a, b) = psi(a * db + b);
  Eigen::JacobiSVD<ComplexMatrix> svd(coeff);
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > cfg.tol_schmidt) ++rank;
  return rank;
}

/// Transpose the second tensor factor.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m,
                                       std::pair<int, int> dims) {
  const int da = dims.first, db = dims.second;
  if (da < 1 || db < 1 || m.rows() != da * db || m.cols() != da * db)
    throw DimensionError("partial_transpose dims do not factor the operator");
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b2 = 0; b2 < db; ++b2)
          out(a * db + b, a2 * db + b2) = m(a * db + b2, a2 * db + b);
  return out;
}

struct PptResult {
  bool separable = false;   // no negative eigenvalue beyond tol_psd
  bool conclusive = false;  // dA*dB <= 6, where PPT decides separability
  double min_eigenvalue = 0.0;
};

inline PptResult ppt_separable(const DensityMatrix& rho,
                               std::pair<int, int> dims,
                               const Config& cfg = {}) {
  const int da = dims.first, db = dims.second;
  if (da * db != rho.dim())
    throw DimensionError("ppt dims do not factor the state");
  if (da * db > 36)
    throw DimensionError("ppt check limited to joint dimension 36, got " +
                         std::to_string(da * db));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
      partial_transpose(rho.matrix(), dims));
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on partial transpose");
  PptResult r;
  r.min_eigenvalue = solver.eigenvalues().minCoeff();
  r.separable = r.min_eigenvalue >= -cfg.tol_psd;
  r.conclusive = da * db <= 6;
  return r;
}

enum class Classification {
  Entangled,            // intensive and effective
  IntensiveOnly,        // intensive, not effective
  Separable,            // neither
  EffectiveOnlyAnomaly  // effective without intensive: diagnostic, never asserted away
};

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Entangled: return "entangled";
    case Classification::IntensiveOnly: return "intensive_only";
    case Classification::Separable: return "separable";
    case Classification::EffectiveOnlyAnomaly: return "effective_only_anomaly";
  }
  return "unknown";
}

/// Orthodox cross-checks, reported alongside the relational verdict.
struct Baselines {
  double purity = 0.0;
  std::optional<int> schmidt_rank;     // pure joint states only
  std::optional<PptResult> ppt;        // joint dimension <= 36 only
};

struct RelationVerdict {
  IntensiveResult intensive;
  EffectiveResult effective;
  Classification classification = Classification::Separable;
  Baselines baselines;
};

inline Classification classification_from(bool intensive, bool effective) {
  if (intensive && effective) return Classification::Entangled;
  if (intensive) return Classification::IntensiveOnly;
  if (effective) return Classification::EffectiveOnlyAnomaly;
  return Classification::Separable;
}

/**
 * Full verdict for a bipartite scenario: reduced states, their PSAs over
 * the side graphs, the intensive and effective relations, the four-way
 * classification, and the orthodox baselines.
 */
inline RelationVerdict classify(const JointScenario& s, const Config& cfg = {}) {
  if (!s.graph_a || !s.graph_b) throw ValidationError("classify needs both graphs");
  const DensityMatrix rho_a = partial_trace(s.state, s.dims, Side::A, cfg);
  const DensityMatrix rho_b = partial_trace(s.state, s.dims, Side::B, cfg);
  const PSA psa_a = psa_from_density(rho_a, s.graph_a, cfg);
  const PSA psa_b = psa_from_density(rho_b, s.graph_b, cfg);

  RelationVerdict verdict;
  verdict.intensive = intensive_related(psa_a, psa_b, cfg);
  verdict.effective = effective_related(s, cfg);
  verdict.classification =
      classification_from(verdict.intensive.related, verdict.effective.related);

  verdict.baselines.purity = s.state.purity();
  if (1.0 - verdict.baselines.purity <= cfg.tol_pure) {
    const EigenSystem sys = eigen_hermitian(HermitianOperator(
        (s.state.matrix() + s.state.matrix().adjoint()) / 2.0, cfg));
    ComplexVector psi = sys.eigenvectors.col(0);
    psi.normalize();
    verdict.baselines.schmidt_rank = schmidt_rank(psi, s.dims, cfg);
  }
  if (s.dims.first * s.dims.second <= 36)
    verdict.baselines.ppt = ppt_separable(s.state, s.dims, cfg);
  return verdict;
}

}
