#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "powers.hpp"
#include "relations.hpp"

namespace psakit {

using nlohmann::json;

namespace detail {

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& path) {
  if (!j.is_object())
    throw SchemaError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key, "missing field");
  return *it;
}

inline std::string require_string(const json& j, const std::string& key,
                                  const std::string& path) {
  const json& v = require_field(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline const json& require_array(const json& j, const std::string& key,
                                 const std::string& path) {
  const json& v = require_field(j, key, path);
  if (!v.is_array()) throw SchemaError(path + "." + key, "expected an array");
  return v;
}

inline Complex parse_complex(const json& v, const std::string& path) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw SchemaError(path, "expected a number or a [re, im] pair");
}

inline ComplexVector parse_complex_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw SchemaError(path, "expected a nonempty array");
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) =
        parse_complex(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline ComplexMatrix parse_complex_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw SchemaError(path, "expected a nonempty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  ComplexMatrix out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].empty())
      throw SchemaError(row_path, "expected a nonempty row");
    if (i == 0) {
      cols = v[i].size();
      out.resize(rows, cols);
    } else if (v[i].size() != cols) {
      throw SchemaError(row_path, "ragged matrix row");
    }
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_complex(v[i][j], row_path + "[" + std::to_string(j) + "]");
  }
  return out;
}

inline json emit_complex(Complex c) { return json::array({c.real(), c.imag()}); }

inline json emit_complex_matrix(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(emit_complex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// The 18-vector four-dimensional configuration whose orthogonality graph
/// admits no binary valuation. Nine four-element contexts; every vector
/// appears in exactly two of them, which forces the parity contradiction.
/// Entries are the unnormalized signs, frozen as data.
inline const int (&cabello_contexts())[9][4][4] {
  static const int table[9][4][4] = {
      {{0, 0, 0, 1}, {0, 0, 1, 0}, {1, 1, 0, 0}, {1, -1, 0, 0}},
      {{0, 0, 0, 1}, {0, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, -1, 0}},
      {{1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}},
      {{1, -1, 1, -1}, {1, 1, 1, 1}, {1, 0, -1, 0}, {0, 1, 0, -1}},
      {{0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 1}, {1, 0, 0, -1}},
      {{1, -1, -1, 1}, {1, 1, 1, 1}, {1, 0, 0, -1}, {0, 1, -1, 0}},
      {{1, 1, -1, 1}, {1, 1, 1, -1}, {1, -1, 0, 0}, {0, 0, 1, 1}},
      {{1, 1, -1, 1}, {-1, 1, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, -1}},
      {{1, 1, 1, -1}, {-1, 1, 1, 1}, {1, 0, 0, 1}, {0, 1, -1, 0}},
  };
  return table;
}

inline std::vector<Basis> cabello_bases() {
  std::vector<Basis> out;
  const auto& table = cabello_contexts();
  for (int c = 0; c < 9; ++c) {
    Basis basis;
    basis.name = "c" + std::to_string(c + 1);
    basis.vectors.resize(4, 4);
    for (int k = 0; k < 4; ++k) {
      ComplexVector v(4);
      for (int j = 0; j < 4; ++j) v(j) = static_cast<double>(table[c][k][j]);
      basis.vectors.col(k) = v / v.norm();
    }
    out.push_back(std::move(basis));
  }
  return out;
}

/// Fourier basis: column k has entries exp(2 pi i j k / d) / sqrt(d).
/// For d = 2 this is the |+>, |-> basis.
inline ComplexMatrix fourier_basis(int d) {
  ComplexMatrix f(d, d);
  const double w = 2.0 * std::acos(-1.0) / d;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      f(j, k) = Complex(std::cos(w * j * k), std::sin(w * j * k)) / std::sqrt(double(d));
  return f;
}

/// Resolve one entry of a bases list. Named bases: "z" (computational, any
/// dimension), "face" (alias of "z" for die faces), "x" (Fourier), "y"
/// (qubits only), "cabello18" (expands to nine 4-dimensional bases).
inline void append_basis(std::vector<Basis>& out, const json& entry, int d,
                         const std::string& path) {
  if (entry.is_string()) {
    const std::string name = entry.get<std::string>();
    if (name == "z" || name == "face") {
      out.push_back({name, identity(d)});
      return;
    }
    if (name == "x") {
      out.push_back({name, fourier_basis(d)});
      return;
    }
    if (name == "y") {
      if (d != 2) throw ValidationError("basis 'y' needs dimension 2, got " +
                                        std::to_string(d));
      ComplexMatrix m(2, 2);
      m << Complex(1, 0), Complex(1, 0), Complex(0, 1), Complex(0, -1);
      out.push_back({name, m / std::sqrt(2.0)});
      return;
    }
    if (name == "cabello18") {
      if (d != 4)
        throw ValidationError("basis set 'cabello18' needs dimension 4, got " +
                              std::to_string(d));
      for (auto& b : cabello_bases()) out.push_back(std::move(b));
      return;
    }
    throw SchemaError(path, "unknown basis name '" + name + "'");
  }
  if (entry.is_object()) {
    Basis basis;
    basis.name = require_string(entry, "name", path);
    const json& vecs = require_field(entry, "vectors", path);
    if (!vecs.is_array() || static_cast<int>(vecs.size()) != d)
      throw SchemaError(path + ".vectors",
                        "expected " + std::to_string(d) + " basis vectors");
    basis.vectors.resize(d, d);
    for (int k = 0; k < d; ++k) {
      const ComplexVector v = parse_complex_vector(
          vecs[k], path + ".vectors[" + std::to_string(k) + "]");
      if (static_cast<int>(v.size()) != d)
        throw SchemaError(path + ".vectors[" + std::to_string(k) + "]",
                          "expected " + std::to_string(d) + " components");
      basis.vectors.col(k) = v;
    }
    out.push_back(std::move(basis));
    return;
  }
  throw SchemaError(path, "expected a basis name or an object");
}

}  // namespace detail

/**
 * A parsed scenario file: dimensions, the state (if any), basis lists per
 * side, designated context pairs, pairing mode, sampling parameters and the
 * effective tolerance configuration. `normalized` is the canonical echo
 * embedded in reports; re-parsing it yields an equivalent scenario.
 */
struct ScenarioSpec {
  struct PairSpec {
    std::string a;
    std::string b;
    std::vector<int> matching;  // resolved to an explicit map at parse time
  };

  std::string schema_version = "1";
  std::string description;
  bool bipartite = false;
  std::pair<int, int> dims{0, 0};  // single-sided scenarios use {d, 0}
  bool has_state = false;
  ComplexMatrix state;             // density matrix when has_state
  std::vector<json> bases_a;       // raw entries, resolved at assembly
  std::vector<json> bases_b;
  std::vector<PairSpec> pairs;
  PairingMode mode = PairingMode::DesignatedPairs;
  std::uint64_t shots = 10000;
  std::uint64_t seed = 42;
  Config config;
  json normalized;
};

namespace detail {

inline ComplexMatrix local_density(const json& v, const std::string& path,
                                   const Config& cfg) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    ComplexMatrix m;
    if (name == "zero" || name == "one") {
      m = ComplexMatrix::Zero(2, 2);
      m(name == "zero" ? 0 : 1, name == "zero" ? 0 : 1) = 1.0;
    } else if (name == "plus" || name == "minus") {
      const double s = name == "plus" ? 1.0 : -1.0;
      m.resize(2, 2);
      m << 0.5, 0.5 * s, 0.5 * s, 0.5;
    } else if (name == "maximally_mixed") {
      m = identity(2) / 2.0;
    } else if (name == "fair_die") {
      m = identity(6) / 6.0;
    } else {
      throw SchemaError(path, "unknown local state '" + name + "'");
    }
    return m;
  }
  if (v.is_object())
    return parse_complex_matrix(require_field(v, "matrix", path), path + ".matrix");
  throw SchemaError(path, "expected a local state name or {matrix: ...}");
}

inline ComplexMatrix bell_density(const std::string& which) {
  ComplexVector psi = ComplexVector::Zero(4);
  const double s = 1.0 / std::sqrt(2.0);
  if (which == "bell_phi_plus") psi(0) = s, psi(3) = s;
  if (which == "bell_phi_minus") psi(0) = s, psi(3) = -s;
  if (which == "bell_psi_plus") psi(1) = s, psi(2) = s;
  if (which == "bell_psi_minus") psi(1) = s, psi(2) = -s;
  return psi * psi.adjoint();
}

inline void default_qubit_probe(ScenarioSpec& spec) {
  spec.bases_a = {json("z"), json("x")};
  spec.bases_b = {json("z"), json("x")};
  spec.pairs = {{"z", "z", {0, 1}}, {"x", "x", {0, 1}}};
}

/// Expand a top-level preset into dims, state, bases and pairs.
inline void apply_preset(ScenarioSpec& spec, const json& preset,
                         const Config& cfg) {
  std::string name;
  json params = json::object();
  if (preset.is_string()) {
    name = preset.get<std::string>();
  } else if (preset.is_object()) {
    name = require_string(preset, "name", "preset");
    params = preset;
  } else {
    throw SchemaError("preset", "expected a name or an object");
  }

  if (name.rfind("bell_", 0) == 0) {
    const ComplexMatrix rho = bell_density(name);
    if (rho.size() == 0 || rho.trace().real() < 0.5)
      throw SchemaError("preset", "unknown preset '" + name + "'");
    spec.bipartite = true;
    spec.dims = {2, 2};
    spec.state = rho;
    spec.has_state = true;
    default_qubit_probe(spec);
    return;
  }
  if (name == "werner") {
    const json& vis = require_field(params, "visibility", "preset");
    if (!vis.is_number()) throw SchemaError("preset.visibility", "expected a number");
    const double v = vis.get<double>();
    if (v < 0.0 || v > 1.0)
      throw ValidationError("werner visibility " + std::to_string(v) +
                            " outside [0,1]");
    spec.bipartite = true;
    spec.dims = {2, 2};
    spec.state = v * bell_density("bell_psi_minus") + (1.0 - v) * identity(4) / 4.0;
    spec.has_state = true;
    default_qubit_probe(spec);
    return;
  }
  if (name == "fair_dice" || name == "glued_dice") {
    spec.bipartite = true;
    spec.dims = {6, 6};
    if (name == "fair_dice") {
      spec.state = identity(36) / 36.0;
    } else {
      spec.state = ComplexMatrix::Zero(36, 36);
      for (int k = 0; k < 6; ++k) spec.state(k * 6 + k, k * 6 + k) = 1.0 / 6.0;
    }
    spec.has_state = true;
    spec.bases_a = {json("face")};
    spec.bases_b = {json("face")};
    spec.pairs = {{"face", "face", {0, 1, 2, 3, 4, 5}}};
    return;
  }
  if (name == "product") {
    const ComplexMatrix a = local_density(require_field(params, "a", "preset"),
                                          "preset.a", cfg);
    const ComplexMatrix b = local_density(require_field(params, "b", "preset"),
                                          "preset.b", cfg);
    spec.bipartite = true;
    spec.dims = {static_cast<int>(a.rows()), static_cast<int>(b.rows())};
    spec.state = tensor_product(a, b, cfg);
    spec.has_state = true;
    auto default_bases = [](int d) {
      return d == 2 ? std::vector<json>{json("z"), json("x")}
             : d == 6 ? std::vector<json>{json("face")}
                      : std::vector<json>{json("z")};
    };
    spec.bases_a = default_bases(spec.dims.first);
    spec.bases_b = default_bases(spec.dims.second);
    if (spec.dims.first == spec.dims.second) {
      std::vector<int> id_map(spec.dims.first);
      for (int i = 0; i < spec.dims.first; ++i) id_map[i] = i;
      if (spec.dims.first == 2)
        spec.pairs = {{"z", "z", id_map}, {"x", "x", id_map}};
      else if (spec.dims.first == 6)
        spec.pairs = {{"face", "face", id_map}};
      else
        spec.pairs = {{"z", "z", id_map}};
    }
    return;
  }
  if (name == "cabello18") {
    spec.bipartite = false;
    spec.dims = {4, 0};
    spec.bases_a = {json("cabello18")};
    return;
  }
  throw SchemaError("preset", "unknown preset '" + name + "'");
}

inline std::vector<int> resolve_matching(const json& m, int na, int nb,
                                         const std::string& path) {
  std::vector<int> out;
  if (m.is_null() || (m.is_string() && m.get<std::string>() == "identity")) {
    if (na > nb)
      throw ValidationError("identity matching needs at most " +
                            std::to_string(nb) + " outcomes, got " +
                            std::to_string(na));
    for (int i = 0; i < na; ++i) out.push_back(i);
    return out;
  }
  if (m.is_string() && m.get<std::string>() == "reversed") {
    if (na > nb)
      throw ValidationError("reversed matching needs at most " +
                            std::to_string(nb) + " outcomes, got " +
                            std::to_string(na));
    for (int i = 0; i < na; ++i) out.push_back(nb - 1 - i);
    return out;
  }
  if (m.is_array()) {
    std::set<int> seen;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_number_integer())
        throw SchemaError(path + "[" + std::to_string(i) + "]",
                          "expected an outcome index");
      const int v = m[i].get<int>();
      if (v < 0 || v >= nb)
        throw ValidationError("matching index " + std::to_string(v) +
                              " outside [0," + std::to_string(nb) + ")");
      if (!seen.insert(v).second)
        throw ValidationError("matching repeats index " + std::to_string(v));
      out.push_back(v);
    }
    if (static_cast<int>(out.size()) != na)
      throw ValidationError("matching has " + std::to_string(out.size()) +
                            " entries for " + std::to_string(na) + " outcomes");
    return out;
  }
  throw SchemaError(path, "expected \"identity\", \"reversed\" or an index array");
}

inline void apply_tolerance_overrides(Config& cfg, const json& t,
                                      const std::set<std::string>& locked) {
  if (!t.is_object()) throw SchemaError("tolerances", "expected an object");
  for (const auto& [key, value] : t.items()) {
    if (locked.count(key)) continue;
    auto number = [&]() -> double {
      if (!value.is_number())
        throw SchemaError("tolerances." + key, "expected a number");
      return value.get<double>();
    };
    if (key == "tol_herm") cfg.tol_herm = number();
    else if (key == "tol_trace") cfg.tol_trace = number();
    else if (key == "tol_psd") cfg.tol_psd = number();
    else if (key == "tol_num") cfg.tol_num = number();
    else if (key == "tol_comm") cfg.tol_comm = number();
    else if (key == "tol_proj") cfg.tol_proj = number();
    else if (key == "tol_recon") cfg.tol_recon = number();
    else if (key == "tol_intensive") cfg.tol_intensive = number();
    else if (key == "tol_effective") cfg.tol_effective = number();
    else if (key == "tol_schmidt") cfg.tol_schmidt = number();
    else if (key == "tol_pure") cfg.tol_pure = number();
    else if (key == "stat_threshold") cfg.stat_threshold = number();
    else if (key == "max_dim") cfg.max_dim = static_cast<int>(number());
    else if (key == "max_cliques") cfg.max_cliques = static_cast<std::size_t>(number());
    else if (key == "search_budget") cfg.search_budget = static_cast<std::uint64_t>(number());
    else throw SchemaError("tolerances." + key, "unknown tolerance");
  }
}

}  // namespace detail

/**
 * Parse a scenario document. `base` carries defaults plus any caller-side
 * overrides; keys named in `locked` are protected from the file's
 * "tolerances" section (command-line flags beat the file).
 */
inline ScenarioSpec parse_scenario_json(const json& doc, const Config& base = {},
                                        const std::set<std::string>& locked = {}) {
  if (!doc.is_object()) throw SchemaError("$", "scenario must be a JSON object");
  ScenarioSpec spec;
  spec.config = base;

  const json& version = detail::require_field(doc, "schema_version", "$");
  if (!version.is_string() || version.get<std::string>() != "1")
    throw SchemaError("schema_version", "unsupported version, expected \"1\"");

  if (doc.contains("tolerances"))
    detail::apply_tolerance_overrides(spec.config, doc["tolerances"], locked);
  const Config& cfg = spec.config;

  if (doc.contains("description")) {
    if (!doc["description"].is_string())
      throw SchemaError("description", "expected a string");
    spec.description = doc["description"].get<std::string>();
  }

  const bool has_preset = doc.contains("preset");
  if (has_preset) {
    for (const std::string key :
         {"dims", "state", "bases", "bases_a", "bases_b", "context_pairs"})
      if (doc.contains(key))
        throw SchemaError(key, "a preset scenario fixes this field");
    detail::apply_preset(spec, doc["preset"], cfg);
  } else {
    const json& dims = detail::require_field(doc, "dims", "$");
    if (dims.is_number_integer()) {
      spec.bipartite = false;
      spec.dims = {dims.get<int>(), 0};
      if (spec.dims.first < 2)
        throw ValidationError("dimension must be at least 2");
    } else if (dims.is_array() && dims.size() == 2 &&
               dims[0].is_number_integer() && dims[1].is_number_integer()) {
      spec.bipartite = true;
      spec.dims = {dims[0].get<int>(), dims[1].get<int>()};
      if (spec.dims.first < 2 || spec.dims.second < 2)
        throw ValidationError("both side dimensions must be at least 2");
    } else {
      throw SchemaError("dims", "expected an integer or a [dA, dB] pair");
    }

    if (spec.bipartite) {
      if (doc.contains("bases"))
        throw SchemaError("bases", "bipartite scenarios use bases_a and bases_b");
      for (const json& e : detail::require_array(doc, "bases_a", "$"))
        spec.bases_a.push_back(e);
      for (const json& e : detail::require_array(doc, "bases_b", "$"))
        spec.bases_b.push_back(e);
    } else {
      for (const std::string key : {"bases_a", "bases_b", "context_pairs"})
        if (doc.contains(key))
          throw SchemaError(key, "single-sided scenarios use \"bases\"");
      for (const json& e : detail::require_array(doc, "bases", "$"))
        spec.bases_a.push_back(e);
    }
    if (spec.bases_a.empty() || (spec.bipartite && spec.bases_b.empty()))
      throw ValidationError("each side needs at least one basis");

    if (doc.contains("state")) {
      const json& st = doc["state"];
      const int d = spec.bipartite ? spec.dims.first * spec.dims.second
                                   : spec.dims.first;
      ComplexMatrix rho;
      if (st.is_object() && st.contains("matrix")) {
        rho = detail::parse_complex_matrix(st["matrix"], "state.matrix");
      } else if (st.is_object() && st.contains("vector")) {
        ComplexVector psi = detail::parse_complex_vector(st["vector"], "state.vector");
        const double norm_defect = std::abs(psi.norm() - 1.0);
        if (norm_defect > cfg.tol_num)
          throw ValidationError("state vector norm defect " +
                                DensityMatrix::format_defect(norm_defect));
        psi /= psi.norm();
        rho = psi * psi.adjoint();
      } else {
        throw SchemaError("state", "expected {matrix: ...} or {vector: ...}");
      }
      if (rho.rows() != d || rho.cols() != d)
        throw ValidationError("state is " + std::to_string(rho.rows()) + "x" +
                              std::to_string(rho.cols()) + ", expected " +
                              std::to_string(d) + "x" + std::to_string(d));
      spec.state = std::move(rho);
      spec.has_state = true;
    }

    if (doc.contains("context_pairs")) {
      const json& pairs = doc["context_pairs"];
      if (!pairs.is_array()) throw SchemaError("context_pairs", "expected an array");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string path = "context_pairs[" + std::to_string(i) + "]";
        ScenarioSpec::PairSpec p;
        p.a = detail::require_string(pairs[i], "a", path);
        p.b = detail::require_string(pairs[i], "b", path);
        p.matching = detail::resolve_matching(
            pairs[i].contains("matching") ? pairs[i]["matching"] : json(),
            spec.dims.first, spec.dims.second, path + ".matching");
        spec.pairs.push_back(std::move(p));
      }
    }
  }

  if (spec.has_state) {
    // Validate the state now so file errors surface as validation_error
    // with the defect in the message.
    try {
      DensityMatrix probe(spec.state, cfg);
      (void)probe;
    } catch (const Error& e) {
      throw ValidationError(std::string("state: ") + e.what());
    }
  }

  if (doc.contains("mode")) {
    const json& m = doc["mode"];
    if (m.is_string() && m.get<std::string>() == "designated")
      spec.mode = PairingMode::DesignatedPairs;
    else if (m.is_string() && m.get<std::string>() == "all-matched")
      spec.mode = PairingMode::AllMatchedContexts;
    else
      throw SchemaError("mode", "expected \"designated\" or \"all-matched\"");
  }

  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    if (!s.is_object()) throw SchemaError("sampling", "expected an object");
    if (s.contains("shots")) {
      if (!s["shots"].is_number_integer() || s["shots"].get<std::int64_t>() < 1)
        throw SchemaError("sampling.shots", "expected a positive integer");
      spec.shots = s["shots"].get<std::uint64_t>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer() || s["seed"].get<std::int64_t>() < 0)
        throw SchemaError("sampling.seed", "expected a nonnegative integer");
      spec.seed = s["seed"].get<std::uint64_t>();
    }
  }

  // Canonical echo: original semantic fields with defaults materialized.
  json norm;
  norm["schema_version"] = "1";
  if (!spec.description.empty()) norm["description"] = spec.description;
  if (has_preset) {
    norm["preset"] = doc["preset"];
  } else {
    if (spec.bipartite)
      norm["dims"] = json::array({spec.dims.first, spec.dims.second});
    else
      norm["dims"] = spec.dims.first;
    if (spec.has_state) norm["state"] = doc["state"];
    if (spec.bipartite) {
      norm["bases_a"] = json(spec.bases_a);
      norm["bases_b"] = json(spec.bases_b);
      json pairs = json::array();
      for (const auto& p : spec.pairs)
        pairs.push_back(json{{"a", p.a}, {"b", p.b}, {"matching", p.matching}});
      norm["context_pairs"] = std::move(pairs);
    } else {
      norm["bases"] = json(spec.bases_a);
    }
  }
  norm["mode"] = to_string(spec.mode);
  norm["sampling"] = json{{"shots", spec.shots}, {"seed", spec.seed}};
  if (doc.contains("tolerances")) norm["tolerances"] = doc["tolerances"];
  spec.normalized = std::move(norm);
  return spec;
}

inline ScenarioSpec parse_scenario(const std::string& path, const Config& base = {},
                                   const std::set<std::string>& locked = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("not valid JSON: ") + e.what());
  }
  return parse_scenario_json(doc, base, locked);
}

/// A bipartite scenario assembled into graphs, contexts and a joint state.
struct AssembledScenario {
  JointScenario joint;
  GraphBundle side_a;
  GraphBundle side_b;
};

namespace detail {

inline std::vector<Basis> resolve_bases(const std::vector<json>& entries, int d,
                                        const std::string& path) {
  std::vector<Basis> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    append_basis(out, entries[i], d, path + "[" + std::to_string(i) + "]");
  return out;
}

}  // namespace detail

inline AssembledScenario assemble_bipartite(const ScenarioSpec& spec) {
  if (!spec.bipartite)
    throw ValidationError("this command needs a bipartite scenario "
                          "(dims must be a [dA, dB] pair)");
  if (!spec.has_state)
    throw ValidationError("this command needs a state in the scenario");
  const Config& cfg = spec.config;
  AssembledScenario out;
  out.side_a = generate_graph_with_contexts(
      detail::resolve_bases(spec.bases_a, spec.dims.first, "bases_a"), cfg);
  out.side_b = generate_graph_with_contexts(
      detail::resolve_bases(spec.bases_b, spec.dims.second, "bases_b"), cfg);
  out.joint.state = DensityMatrix(spec.state, cfg);
  out.joint.dims = spec.dims;
  out.joint.graph_a = out.side_a.graph;
  out.joint.graph_b = out.side_b.graph;
  out.joint.mode = spec.mode;
  for (const auto& p : spec.pairs) {
    const auto ia = out.side_a.basis_contexts.find(p.a);
    if (ia == out.side_a.basis_contexts.end())
      throw ValidationError("context pair references unknown basis '" + p.a +
                            "' on side a");
    const auto ib = out.side_b.basis_contexts.find(p.b);
    if (ib == out.side_b.basis_contexts.end())
      throw ValidationError("context pair references unknown basis '" + p.b +
                            "' on side b");
    ContextPair pair;
    pair.a = ia->second;
    pair.b = ib->second;
    pair.matching = p.matching;
    pair.label = "(" + p.a + "," + p.b + ")";
    if (pair.matching.size() != pair.a.size())
      throw ValidationError("matching size " + std::to_string(pair.matching.size()) +
                            " does not fit context of size " +
                            std::to_string(pair.a.size()));
    for (int v : pair.matching)
      if (v < 0 || v >= static_cast<int>(pair.b.size()))
        throw ValidationError("matching index " + std::to_string(v) +
                              " outside the paired context");
    out.joint.pairs.push_back(std::move(pair));
  }
  if (spec.mode == PairingMode::DesignatedPairs && out.joint.pairs.empty())
    throw ValidationError("designated mode needs context_pairs in the scenario");
  return out;
}

/// Assemble the graph of a single-sided scenario (graph and ks commands).
inline GraphBundle assemble_single(const ScenarioSpec& spec) {
  if (spec.bipartite)
    throw ValidationError("this command needs a single-sided scenario "
                          "(dims must be a single integer)");
  return generate_graph_with_contexts(
      detail::resolve_bases(spec.bases_a, spec.dims.first, "bases"),
      spec.config);
}

/// Graphs only, no state required: one bundle for single-sided scenarios,
/// two (side a, side b) for bipartite ones.
inline std::vector<GraphBundle> assemble_graphs(const ScenarioSpec& spec) {
  if (!spec.bipartite) return {assemble_single(spec)};
  std::vector<GraphBundle> out;
  out.push_back(generate_graph_with_contexts(
      detail::resolve_bases(spec.bases_a, spec.dims.first, "bases_a"),
      spec.config));
  out.push_back(generate_graph_with_contexts(
      detail::resolve_bases(spec.bases_b, spec.dims.second, "bases_b"),
      spec.config));
  return out;
}

}
