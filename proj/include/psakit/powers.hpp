#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace psakit {

/// A node of the power graph: a validated projector with a stable id.
struct Power {
  int id = -1;
  HermitianOperator projector;
  int rank = 0;
  std::string label;  // empty means unnamed; reports fall back to "P<id>"
};

/// A complete subgraph, stored as sorted node ids.
struct Context {
  std::vector<int> node_ids;
  bool is_maximal = false;
  bool resolves_identity = false;

  std::size_t size() const { return node_ids.size(); }
};

/**
 * Projectors with an edge exactly where the commutator vanishes within
 * tol_comm. The adjacency is symmetric and reflexive by construction;
 * cliques of the graph are the sets of jointly measurable powers.
 */
struct PowerGraph {
  std::vector<Power> powers;
  std::vector<std::vector<bool>> adjacency;
  int dim = 0;

  std::size_t size() const { return powers.size(); }

  bool adjacent(int i, int j) const { return adjacency[i][j]; }

  /// Loop-free degree: number of distinct commuting partners.
  int degree(int i) const {
    int d = 0;
    for (std::size_t j = 0; j < powers.size(); ++j)
      if (static_cast<int>(j) != i && adjacency[i][j]) ++d;
    return d;
  }
};

/// ||P^2 - P||_F, the distance from idempotence.
inline double projector_defect(const HermitianOperator& p) {
  return (p.matrix() * p.matrix() - p.matrix()).norm();
}

/// True when the nodes' projectors sum to the identity within d * tol_num.
inline bool resolves_identity_check(const PowerGraph& g,
                                    const std::vector<int>& nodes,
                                    const Config& cfg = {}) {
  ComplexMatrix sum = ComplexMatrix::Zero(g.dim, g.dim);
  for (int id : nodes) sum += g.powers[id].projector.matrix();
  return (sum - identity(g.dim)).norm() <= g.dim * cfg.tol_num;
}

/**
 * Build the graph from a list of projectors. Near-duplicates (Frobenius
 * distance <= tol_num) merge into a single node keeping the first label;
 * node ids follow first-occurrence order.
 */
inline PowerGraph build_power_graph(const std::vector<HermitianOperator>& projectors,
                                    const Config& cfg = {},
                                    const std::vector<std::string>& labels = {}) {
  if (projectors.empty())
    throw ValidationError("power graph needs at least one projector");
  PowerGraph g;
  g.dim = projectors[0].dim();
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto& p = projectors[i];
    if (p.dim() != g.dim)
      throw DimensionError("projector " + std::to_string(i) + " has dimension " +
                           std::to_string(p.dim()) + ", expected " +
                           std::to_string(g.dim));
    const double defect = projector_defect(p);
    if (defect > cfg.tol_proj)
      throw InvalidPowerError(i, defect,
                              "operator " + std::to_string(i) +
                                  " is not a projector, defect " +
                                  DensityMatrix::format_defect(defect));
    bool duplicate = false;
    for (const auto& q : g.powers)
      if ((p.matrix() - q.projector.matrix()).norm() <= cfg.tol_num) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;
    Power node;
    node.id = static_cast<int>(g.powers.size());
    node.projector = p;
    node.rank = static_cast<int>(std::lround(p.matrix().trace().real()));
    if (i < labels.size()) node.label = labels[i];
    g.powers.push_back(std::move(node));
  }
  const std::size_t n = g.powers.size();
  g.adjacency.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    g.adjacency[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool edge = commutator_norm(g.powers[i].projector,
                                        g.powers[j].projector) <= cfg.tol_comm;
      g.adjacency[i][j] = edge;
      g.adjacency[j][i] = edge;
    }
  }
  return g;
}

namespace detail {

/// Bron-Kerbosch with pivoting over the loop-free graph. All candidate sets
/// are kept sorted ascending, and ties in pivot selection break to the
/// smallest id, so the enumeration order is deterministic.
class CliqueEnumerator {
public:
  CliqueEnumerator(const PowerGraph& g, const Config& cfg) : g_(g), cfg_(cfg) {}

  std::vector<std::vector<int>> run() {
    std::vector<int> all(g_.size());
    for (std::size_t i = 0; i < g_.size(); ++i) all[i] = static_cast<int>(i);
    std::vector<int> r;
    expand(r, all, {});
    for (auto& c : found_) std::sort(c.begin(), c.end());
    std::sort(found_.begin(), found_.end());
    return std::move(found_);
  }

private:
  bool adj(int i, int j) const { return i != j && g_.adjacent(i, j); }

  void expand(std::vector<int>& r, std::vector<int> p, std::vector<int> x) {
    if (p.empty() && x.empty()) {
      if (found_.size() >= cfg_.max_cliques)
        throw CombinatorialBlowupError(
            cfg_.max_cliques, "maximal context enumeration exceeded cap " +
                                  std::to_string(cfg_.max_cliques));
      found_.push_back(r);
      return;
    }
    std::vector<int> pool;
    std::merge(p.begin(), p.end(), x.begin(), x.end(), std::back_inserter(pool));
    int pivot = -1, best = -1;
    for (int u : pool) {
      int cover = 0;
      for (int v : p) cover += adj(u, v);
      if (cover > best) best = cover, pivot = u;
    }
    std::vector<int> candidates;
    for (int v : p)
      if (!adj(pivot, v)) candidates.push_back(v);
    for (int v : candidates) {
      std::vector<int> p2, x2;
      for (int w : p)
        if (adj(v, w)) p2.push_back(w);
      for (int w : x)
        if (adj(v, w)) x2.push_back(w);
      r.push_back(v);
      expand(r, std::move(p2), std::move(x2));
      r.pop_back();
      p.erase(std::find(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  const PowerGraph& g_;
  const Config& cfg_;
  std::vector<std::vector<int>> found_;
};

}  // namespace detail

/**
 * All maximal contexts (maximal cliques), sorted lexicographically by node
 * ids. Raises CombinatorialBlowupError past cfg.max_cliques results.
 */
inline std::vector<Context> maximal_contexts(const PowerGraph& g,
                                             const Config& cfg = {}) {
  detail::CliqueEnumerator enumerator(g, cfg);
  std::vector<Context> out;
  for (auto& nodes : enumerator.run()) {
    Context c;
    c.node_ids = std::move(nodes);
    c.is_maximal = true;
    c.resolves_identity = resolves_identity_check(g, c.node_ids, cfg);
    out.push_back(std::move(c));
  }
  return out;
}

/// Validate an explicit node set as a context of g and compute its flags.
inline Context context_from_nodes(const PowerGraph& g, std::vector<int> nodes,
                                  const Config& cfg = {}) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) throw ValidationError("context must be nonempty");
  for (int id : nodes)
    if (id < 0 || id >= static_cast<int>(g.size()))
      throw ValidationError("context references unknown node " +
                            std::to_string(id));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (!g.adjacent(nodes[i], nodes[j]))
        throw ValidationError("context nodes " + std::to_string(nodes[i]) +
                              " and " + std::to_string(nodes[j]) +
                              " do not commute");
  Context c;
  c.node_ids = std::move(nodes);
  c.resolves_identity = resolves_identity_check(g, c.node_ids, cfg);
  c.is_maximal = true;
  for (std::size_t w = 0; w < g.size(); ++w) {
    if (std::binary_search(c.node_ids.begin(), c.node_ids.end(),
                           static_cast<int>(w)))
      continue;
    bool joins = true;
    for (int v : c.node_ids)
      if (!g.adjacent(static_cast<int>(w), v)) {
        joins = false;
        break;
      }
    if (joins) {
      c.is_maximal = false;
      break;
    }
  }
  return c;
}

/// An orthonormal basis of the full space, vectors as matrix columns.
struct Basis {
  std::string name;
  ComplexMatrix vectors;
};

/// A generated graph together with the context each named basis induced.
struct GraphBundle {
  std::shared_ptr<const PowerGraph> graph;
  std::map<std::string, Context> basis_contexts;
};

/**
 * Build the graph whose nodes are the rank-1 projectors of the given bases.
 * Each basis must be a square orthonormal matrix; shared eigenvectors across
 * bases merge into shared nodes, which is what makes contexts overlap.
 */
inline GraphBundle generate_graph_with_contexts(const std::vector<Basis>& bases,
                                                const Config& cfg = {}) {
  if (bases.empty()) throw InvalidBasisError("at least one basis is required");
  const int d = static_cast<int>(bases[0].vectors.rows());
  std::vector<HermitianOperator> projectors;
  std::vector<std::string> labels;
  for (const auto& basis : bases) {
    if (basis.vectors.rows() != d || basis.vectors.cols() != d)
      throw InvalidBasisError("basis '" + basis.name + "' is " +
                              std::to_string(basis.vectors.rows()) + "x" +
                              std::to_string(basis.vectors.cols()) +
                              ", expected " + std::to_string(d) + "x" +
                              std::to_string(d));
    const double ortho_defect =
        (basis.vectors.adjoint() * basis.vectors - identity(d)).norm();
    if (ortho_defect > cfg.tol_num)
      throw InvalidBasisError("basis '" + basis.name +
                              "' is not orthonormal, defect " +
                              DensityMatrix::format_defect(ortho_defect));
    for (int k = 0; k < d; ++k) {
      projectors.emplace_back(projector_onto(basis.vectors.col(k)), cfg);
      labels.push_back(basis.name + ":" + std::to_string(k));
    }
  }
  auto graph = std::make_shared<PowerGraph>(build_power_graph(projectors, cfg, labels));
  GraphBundle bundle;
  // Recover which node each basis vector became after deduplication.
  for (const auto& basis : bases) {
    if (bundle.basis_contexts.count(basis.name))
      throw ValidationError("duplicate basis name '" + basis.name + "'");
    std::vector<int> nodes;
    for (int k = 0; k < d; ++k) {
      const ComplexMatrix p = projector_onto(basis.vectors.col(k));
      int found = -1;
      for (const auto& node : graph->powers)
        if ((p - node.projector.matrix()).norm() <= cfg.tol_num) {
          found = node.id;
          break;
        }
      nodes.push_back(found);  // always found: the projector was inserted above
    }
    bundle.basis_contexts.emplace(basis.name,
                                  context_from_nodes(*graph, nodes, cfg));
  }
  bundle.graph = std::move(graph);
  return bundle;
}

inline PowerGraph generate_graph_from_bases(const std::vector<Basis>& bases,
                                            const Config& cfg = {}) {
  auto bundle = generate_graph_with_contexts(bases, cfg);
  return *bundle.graph;
}

/**
 * Consistency audit: recompute every pairwise commutator and compare with
 * the stored adjacency, check reflexivity and symmetry, and confirm each
 * given context is a clique. Returns false on the first discrepancy.
 */
inline bool contexts_contained_check(const PowerGraph& g,
                                     const std::vector<Context>& contexts,
                                     const Config& cfg = {}) {
  const std::size_t n = g.size();
  if (g.adjacency.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.adjacency[i].size() != n || !g.adjacency[i][i]) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool edge = commutator_norm(g.powers[i].projector,
                                        g.powers[j].projector) <= cfg.tol_comm;
      if (g.adjacency[i][j] != edge || g.adjacency[j][i] != edge) return false;
    }
  }
  for (const auto& c : contexts)
    for (std::size_t i = 0; i < c.node_ids.size(); ++i)
      for (std::size_t j = i + 1; j < c.node_ids.size(); ++j)
        if (!g.adjacent(c.node_ids[i], c.node_ids[j])) return false;
  return true;
}

inline bool contexts_contained_check(const PowerGraph& g, const Config& cfg = {}) {
  return contexts_contained_check(g, maximal_contexts(g, cfg), cfg);
}

}
