#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "psa.hpp"
#include "relations.hpp"
#include "sampler.hpp"
#include "scenario.hpp"
#include "version.hpp"

namespace psakit {

/// Round to 12 significant decimal digits so report bytes are stable across
/// runs and platforms. Negative zero normalizes to zero.
inline double sig12(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x == 0.0 ? 0.0 : x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return std::strtod(buf, nullptr);
}

inline json real_json(double x) { return json(sig12(x)); }

inline json real_matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(real_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json tally_json(const TallyMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string node_label(const Power& p) {
  return p.label.empty() ? "P" + std::to_string(p.id) : p.label;
}

inline json config_json(const Config& cfg) {
  json t;
  t["tol_herm"] = real_json(cfg.tol_herm);
  t["tol_trace"] = real_json(cfg.tol_trace);
  t["tol_psd"] = real_json(cfg.tol_psd);
  t["tol_num"] = real_json(cfg.tol_num);
  t["tol_comm"] = real_json(cfg.tol_comm);
  t["tol_proj"] = real_json(cfg.tol_proj);
  t["tol_recon"] = real_json(cfg.tol_recon);
  t["tol_intensive"] = real_json(cfg.tol_intensive);
  t["tol_effective"] = real_json(cfg.tol_effective);
  t["tol_schmidt"] = real_json(cfg.tol_schmidt);
  t["tol_pure"] = real_json(cfg.tol_pure);
  t["stat_threshold"] = real_json(cfg.stat_threshold);
  t["max_dim"] = cfg.max_dim;
  t["max_cliques"] = cfg.max_cliques;
  t["search_budget"] = cfg.search_budget;
  return t;
}

inline json graph_json(const PowerGraph& g, const std::vector<Context>& contexts) {
  json nodes = json::array();
  for (const auto& p : g.powers)
    nodes.push_back(json{{"id", p.id}, {"label", node_label(p)}, {"rank", p.rank}});
  json edges = json::array();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.adjacency[i][j])
        edges.push_back(json::array({static_cast<int>(i), static_cast<int>(j)}));
  json ctxs = json::array();
  for (const auto& c : contexts)
    ctxs.push_back(json{{"nodes", c.node_ids},
                        {"resolves_identity", c.resolves_identity}});
  return json{{"dim", g.dim},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"maximal_contexts", std::move(ctxs)}};
}

inline json psa_json(const PSA& psa) {
  json out = json::array();
  for (std::size_t i = 0; i < psa.potentia.size(); ++i)
    out.push_back(json{{"node", static_cast<int>(i)},
                       {"label", node_label(psa.graph->powers[i])},
                       {"potentia", real_json(psa.potentia[i])}});
  return out;
}

inline json verdict_json(const RelationVerdict& v) {
  json intensive;
  intensive["related"] = v.intensive.related;
  intensive["obstruction"] = to_string(v.intensive.obstruction);
  if (v.intensive.witness) {
    intensive["witness"] =
        json{{"mapping", v.intensive.witness->mapping},
             {"max_potentia_gap", real_json(v.intensive.witness->max_potentia_gap)}};
  }
  json pairs = json::array();
  for (const auto& t : v.effective.transports)
    pairs.push_back(json{{"label", t.label},
                         {"tau", t.tau},
                         {"captured_mass", real_json(t.captured_mass)}});
  json effective;
  effective["related"] = v.effective.related;
  effective["worst_leak"] = real_json(v.effective.worst_leak);
  effective["pairs"] = std::move(pairs);
  if (v.effective.related) effective["sign"] = to_string(v.effective.sign);

  json baselines;
  baselines["purity"] = real_json(v.baselines.purity);
  if (v.baselines.schmidt_rank) baselines["schmidt_rank"] = *v.baselines.schmidt_rank;
  if (v.baselines.ppt)
    baselines["ppt"] = json{
        {"separable", v.baselines.ppt->separable},
        {"conclusive", v.baselines.ppt->conclusive},
        {"min_eigenvalue", real_json(v.baselines.ppt->min_eigenvalue)}};

  return json{{"classification", to_string(v.classification)},
              {"intensive", std::move(intensive)},
              {"effective", std::move(effective)},
              {"baselines", std::move(baselines)}};
}

/// Full classify/sample report. Reduced PSAs and joint distributions are
/// recomputed here; both are deterministic, so the report is reproducible
/// byte for byte.
inline json classify_report(const ScenarioSpec& spec, const AssembledScenario& as,
                            const RelationVerdict& verdict) {
  const Config& cfg = spec.config;
  json r;
  r["schema_version"] = "1";
  r["scenario"] = spec.normalized;

  r["graph_a"] = graph_json(*as.side_a.graph,
                            maximal_contexts(*as.side_a.graph, cfg));
  r["graph_b"] = graph_json(*as.side_b.graph,
                            maximal_contexts(*as.side_b.graph, cfg));

  const DensityMatrix rho_a = partial_trace(as.joint.state, as.joint.dims, Side::A, cfg);
  const DensityMatrix rho_b = partial_trace(as.joint.state, as.joint.dims, Side::B, cfg);
  r["psa_a"] = psa_json(psa_from_density(rho_a, as.side_a.graph, cfg));
  r["psa_b"] = psa_json(psa_from_density(rho_b, as.side_b.graph, cfg));

  json joints = json::array();
  for (const auto& pair : resolve_tested_pairs(as.joint, cfg))
    joints.push_back(json{
        {"label", pair.label},
        {"matching", pair.matching},
        {"p", real_matrix_json(joint_outcome_distribution(as.joint, pair.a,
                                                          pair.b, cfg))}});
  r["joint_distributions"] = std::move(joints);

  r["verdict"] = verdict_json(verdict);
  r["metadata"] = json{{"tool_version", PSAKIT_VERSION},
                       {"mode", to_string(as.joint.mode)},
                       {"tolerances", config_json(cfg)}};
  return r;
}

inline json sampling_json(const ExperimentRun& run, const ConvergenceReport& conv) {
  json pairs = json::array();
  for (std::size_t k = 0; k < conv.pairs.size(); ++k) {
    const PairStat& s = conv.pairs[k];
    pairs.push_back(json{{"label", s.label},
                         {"tally", tally_json(run.tallies[k])},
                         {"tv", real_json(s.tv)},
                         {"captured_mass", real_json(s.captured_mass)},
                         {"z_worst", real_json(s.z_worst)},
                         {"support_violations", s.support_violations}});
  }
  return json{{"shots", run.shots},
              {"seed", run.seed},
              {"pairs", std::move(pairs)},
              {"empirical_effective", conv.empirical_effective},
              {"max_tv", real_json(conv.max_tv)}};
}

inline json ks_report(const ScenarioSpec& spec, const GraphBundle& bundle,
                      const KsSearchResult& result) {
  json r;
  r["schema_version"] = "1";
  r["scenario"] = spec.normalized;
  r["graph"] = graph_json(*bundle.graph,
                          maximal_contexts(*bundle.graph, spec.config));
  json search;
  search["exists"] = result.exists;
  search["branches_explored"] = result.branches_explored;
  search["budget"] = spec.config.search_budget;
  if (result.valuation) search["assignment"] = result.valuation->assignment;
  r["search"] = std::move(search);
  r["metadata"] = json{{"tool_version", PSAKIT_VERSION},
                       {"tolerances", config_json(spec.config)}};
  return r;
}

inline json graph_report(const ScenarioSpec& spec,
                         const std::vector<GraphBundle>& bundles) {
  json r;
  r["schema_version"] = "1";
  r["scenario"] = spec.normalized;
  if (bundles.size() == 1) {
    r["graph"] = graph_json(*bundles[0].graph,
                            maximal_contexts(*bundles[0].graph, spec.config));
  } else {
    r["graph_a"] = graph_json(*bundles[0].graph,
                              maximal_contexts(*bundles[0].graph, spec.config));
    r["graph_b"] = graph_json(*bundles[1].graph,
                              maximal_contexts(*bundles[1].graph, spec.config));
  }
  r["metadata"] = json{{"tool_version", PSAKIT_VERSION},
                       {"tolerances", config_json(spec.config)}};
  return r;
}

/// Canonical serialization: two-space indent, keys sorted (nlohmann objects
/// are ordered maps), trailing newline.
inline std::string render_json(const json& report) {
  return report.dump(2) + "\n";
}

/// Human-oriented rendering of a classify/sample report.
inline std::string render_table(const json& r) {
  std::ostringstream out;
  const auto line = [&](const std::string& s) { out << s << "\n"; };
  if (r.contains("scenario") && r["scenario"].contains("description"))
    line("scenario: " + r["scenario"]["description"].get<std::string>());
  if (r.contains("verdict")) {
    const json& v = r["verdict"];
    line("classification: " + v["classification"].get<std::string>());
    const json& in = v["intensive"];
    std::string msg = "intensive:  ";
    msg += in["related"].get<bool>() ? "related" : "not related";
    if (!in["related"].get<bool>())
      msg += " (" + in["obstruction"].get<std::string>() + ")";
    line(msg);
    const json& ef = v["effective"];
    msg = "effective:  ";
    msg += ef["related"].get<bool>() ? "related" : "not related";
    if (ef.contains("sign")) msg += ", sign " + ef["sign"].get<std::string>();
    {
      std::ostringstream leak;
      leak << ef["worst_leak"].get<double>();
      msg += ", worst leak " + leak.str();
    }
    line(msg);
    for (const auto& p : ef["pairs"]) {
      std::ostringstream mass;
      mass << p["captured_mass"].get<double>();
      line("  pair " + p["label"].get<std::string>() + ": captured mass " +
           mass.str());
    }
    const json& b = v["baselines"];
    std::ostringstream base;
    base << "baselines:  purity " << b["purity"].get<double>();
    if (b.contains("schmidt_rank"))
      base << ", schmidt rank " << b["schmidt_rank"].get<int>();
    if (b.contains("ppt"))
      base << ", ppt " << (b["ppt"]["separable"].get<bool>() ? "separable" : "not separable")
           << (b["ppt"]["conclusive"].get<bool>() ? " (conclusive)" : " (inconclusive)");
    line(base.str());
  }
  if (r.contains("search")) {
    const json& s = r["search"];
    if (s["exists"].get<bool>()) {
      std::string assignment;
      for (const auto& v : s["assignment"])
        assignment += std::to_string(v.get<int>());
      line("binary valuation exists: " + assignment);
    } else {
      line("no binary valuation exists; branches explored: " +
           std::to_string(s["branches_explored"].get<std::uint64_t>()));
    }
  }
  if (r.contains("graph") || r.contains("graph_a")) {
    for (const std::string key : {"graph", "graph_a", "graph_b"}) {
      if (!r.contains(key)) continue;
      const json& g = r[key];
      std::size_t resolving = 0;
      for (const auto& c : g["maximal_contexts"])
        if (c["resolves_identity"].get<bool>()) ++resolving;
      line(key + ": dim " + std::to_string(g["dim"].get<int>()) + ", " +
           std::to_string(g["nodes"].size()) + " nodes, " +
           std::to_string(g["edges"].size()) + " edges, " +
           std::to_string(g["maximal_contexts"].size()) +
           " maximal contexts (" + std::to_string(resolving) +
           " resolve identity)");
    }
  }
  if (r.contains("sampling")) {
    const json& s = r["sampling"];
    line("sampling: shots " + std::to_string(s["shots"].get<std::uint64_t>()) +
         ", seed " + std::to_string(s["seed"].get<std::uint64_t>()) +
         ", empirical effective " +
         (s["empirical_effective"].get<bool>() ? "yes" : "no"));
    for (const auto& p : s["pairs"]) {
      std::ostringstream tv;
      tv << p["tv"].get<double>();
      line("  pair " + p["label"].get<std::string>() + ": tv " + tv.str() +
           ", support violations " +
           std::to_string(p["support_violations"].get<std::uint64_t>()));
    }
  }
  return out.str();
}

}
