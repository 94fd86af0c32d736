// Command-line front end: classify bipartite scenarios, inspect power
// graphs, run seeded sampling experiments, and search for binary valuations.
// Exit codes: 0 success, 1 any error, 2 successful classification whose
// verdict is the effective-only diagnostic.

#include <CLI11.hpp>
#include <psakit/psakit.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace {

using psakit::Config;
using psakit::json;

struct CommonArgs {
  std::string file;
  std::string out;
  std::string format = "json";
};

struct Overrides {
  Config base;                  // defaults + env, then mutated by flags
  std::set<std::string> given;  // config keys pinned on the command line
};

void add_tolerance_options(CLI::App& app, Overrides& ov) {
  const auto add_double = [&app, &ov](const std::string& flag,
                                      const std::string& key, double& slot) {
    app.add_option_function<double>(
           flag,
           [&ov, key, &slot](double v) {
             slot = v;
             ov.given.insert(key);
           },
           "override " + key)
        ->group("Tolerances");
  };
  add_double("--tol-herm", "tol_herm", ov.base.tol_herm);
  add_double("--tol-trace", "tol_trace", ov.base.tol_trace);
  add_double("--tol-psd", "tol_psd", ov.base.tol_psd);
  add_double("--tol-num", "tol_num", ov.base.tol_num);
  add_double("--tol-comm", "tol_comm", ov.base.tol_comm);
  add_double("--tol-proj", "tol_proj", ov.base.tol_proj);
  add_double("--tol-recon", "tol_recon", ov.base.tol_recon);
  add_double("--tol-intensive", "tol_intensive", ov.base.tol_intensive);
  add_double("--tol-effective", "tol_effective", ov.base.tol_effective);
  add_double("--tol-schmidt", "tol_schmidt", ov.base.tol_schmidt);
  add_double("--tol-pure", "tol_pure", ov.base.tol_pure);
  add_double("--stat-threshold", "stat_threshold", ov.base.stat_threshold);
  app.add_option_function<int>(
         "--max-dim",
         [&ov](int v) {
           ov.base.max_dim = v;
           ov.given.insert("max_dim");
         },
         "override max_dim (also settable via PSAKIT_MAX_DIM)")
      ->group("Tolerances");
  app.add_option_function<std::size_t>(
         "--max-cliques",
         [&ov](std::size_t v) {
           ov.base.max_cliques = v;
           ov.given.insert("max_cliques");
         },
         "override max_cliques")
      ->group("Tolerances");
}

void apply_env(Overrides& ov) {
  if (ov.given.count("max_dim")) return;  // the explicit flag beats the env
  const char* env = std::getenv("PSAKIT_MAX_DIM");
  if (!env || !*env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw psakit::ValidationError(
        std::string("PSAKIT_MAX_DIM must be a positive integer, got '") + env +
        "'");
  ov.base.max_dim = static_cast<int>(v);
}

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("file", args.file, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args.out, "write the report here instead of stdout");
  sub->add_option("--format", args.format, "output format")
      ->check(CLI::IsMember({"json", "table"}));
}

/// Reports land on disk atomically: full write to a sibling temp file, then
/// rename over the target.
void emit(const json& report, const CommonArgs& args) {
  const std::string text = args.format == "table" ? psakit::render_table(report)
                                                  : psakit::render_json(report);
  if (args.out.empty()) {
    std::cout << text;
    return;
  }
  const std::string tmp = args.out + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw psakit::ValidationError("cannot write to '" + tmp + "'");
    f << text;
    if (!f.good()) throw psakit::ValidationError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, args.out);
}

int run_classify(const CommonArgs& args, const Overrides& ov,
                 const std::string& mode, bool sampling, std::uint64_t shots,
                 std::uint64_t seed, bool shots_given, bool seed_given) {
  psakit::ScenarioSpec spec = psakit::parse_scenario(args.file, ov.base, ov.given);
  if (mode == "designated") spec.mode = psakit::PairingMode::DesignatedPairs;
  if (mode == "all-matched") spec.mode = psakit::PairingMode::AllMatchedContexts;
  if (!mode.empty()) spec.normalized["mode"] = psakit::to_string(spec.mode);
  if (shots_given) spec.shots = shots;
  if (seed_given) spec.seed = seed;
  spec.normalized["sampling"] = json{{"shots", spec.shots}, {"seed", spec.seed}};

  const psakit::AssembledScenario as = psakit::assemble_bipartite(spec);
  const psakit::RelationVerdict verdict = psakit::classify(as.joint, spec.config);
  json report = psakit::classify_report(spec, as, verdict);
  if (sampling) {
    const psakit::ExperimentRun run =
        psakit::run_experiment(as.joint, spec.shots, spec.seed, spec.config);
    const psakit::ConvergenceReport conv =
        psakit::empirical_verdict(as.joint, run, spec.config);
    report["sampling"] = psakit::sampling_json(run, conv);
  }
  emit(report, args);
  return verdict.classification == psakit::Classification::EffectiveOnlyAnomaly
             ? 2
             : 0;
}

int run_graph(const CommonArgs& args, const Overrides& ov) {
  const psakit::ScenarioSpec spec =
      psakit::parse_scenario(args.file, ov.base, ov.given);
  emit(psakit::graph_report(spec, psakit::assemble_graphs(spec)), args);
  return 0;
}

int run_ks(const CommonArgs& args, const Overrides& ov) {
  psakit::ScenarioSpec spec = psakit::parse_scenario(args.file, ov.base, ov.given);
  const psakit::GraphBundle bundle = psakit::assemble_single(spec);
  const psakit::KsSearchResult result =
      psakit::search_binary_valuation(*bundle.graph, spec.config);
  emit(psakit::ks_report(spec, bundle, result), args);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power graphs, Born valuations and entanglement relations"};
  app.set_version_flag("--version", PSAKIT_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  add_tolerance_options(app, ov);

  CommonArgs classify_args, graph_args, sample_args, ks_args;
  std::string mode;
  std::uint64_t shots = 0, seed = 0, budget = 0;

  CLI::App* classify = app.add_subcommand(
      "classify", "classify a bipartite scenario");
  add_common(classify, classify_args);
  classify->add_option("--mode", mode, "context pairing mode")
      ->check(CLI::IsMember({"designated", "all-matched"}));

  CLI::App* graph = app.add_subcommand(
      "graph", "build and report the scenario's power graph(s)");
  add_common(graph, graph_args);

  CLI::App* sample = app.add_subcommand(
      "sample", "classify, then run a seeded sampling experiment");
  add_common(sample, sample_args);
  CLI::Option* shots_opt = sample->add_option("--shots", shots, "number of draws per tested pair");
  CLI::Option* seed_opt = sample->add_option("--seed", seed, "generator seed");
  sample->add_option("--mode", mode, "context pairing mode")
      ->check(CLI::IsMember({"designated", "all-matched"}));

  CLI::App* ks = app.add_subcommand(
      "ks", "search for a binary valuation on a single-sided scenario");
  add_common(ks, ks_args);
  CLI::Option* budget_opt = ks->add_option("--budget", budget, "search expansion budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    apply_env(ov);
    if (classify->parsed())
      return run_classify(classify_args, ov, mode, false, 0, 0, false, false);
    if (graph->parsed()) return run_graph(graph_args, ov);
    if (sample->parsed())
      return run_classify(sample_args, ov, mode, true, shots, seed,
                          shots_opt->count() > 0, seed_opt->count() > 0);
    if (ks->parsed()) {
      if (budget_opt->count() > 0) {
        ov.base.search_budget = budget;
        ov.given.insert("search_budget");
      }
      return run_ks(ks_args, ov);
    }
    return 1;
  } catch (const psakit::Error& e) {
    const json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    const json err{{"error", {{"code", "internal_error"}, {"message", e.what()}}}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
}
