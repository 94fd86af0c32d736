#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "philox.hpp"
#include "relations.hpp"

namespace psakit {

using TallyMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Draw `shots` outcomes from the joint distribution of one context pair by
 * inverting the cumulative distribution with Philox uniforms. Cells with
 * exactly zero probability can never be drawn, so support violations in the
 * tallies always indicate a bug, not sampling noise. Deterministic in
 * (seed, stream, shots) across platforms.
 */
inline TallyMatrix sample_joint(const JointScenario& s, const Context& c1,
                                const Context& c2, std::uint64_t shots,
                                std::uint64_t seed, std::uint32_t stream = 0,
                                const Config& cfg = {}) {
  if (shots < 100)
    throw ValidationError("at least 100 shots are required, got " +
                          std::to_string(shots));
  const Eigen::MatrixXd p = joint_outcome_distribution(s, c1, c2, cfg);
  const int n1 = static_cast<int>(p.rows());
  const int n2 = static_cast<int>(p.cols());
  std::vector<double> cum(static_cast<std::size_t>(n1) * n2);
  double total = 0.0;
  int last_positive = 0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const int k = i * n2 + j;
      total += p(i, j);
      cum[k] = total;
      if (p(i, j) > 0.0) last_positive = k;
    }
  TallyMatrix tally = TallyMatrix::Zero(n1, n2);
  const PhiloxStream rng(seed, stream);
  for (std::uint64_t t = 0; t < shots; ++t) {
    // Scale into [0, total) so rounding in the cumulative sum cannot push a
    // draw past the final cell.
    const double u = rng.uniform_at(t) * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const int k = it == cum.end() ? last_positive
                                  : static_cast<int>(it - cum.begin());
    tally(k / n2, k % n2) += 1;
  }
  return tally;
}

/// Seeded tallies for every tested context pair, one Philox stream per pair.
struct ExperimentRun {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::vector<TallyMatrix> tallies;  // aligned with resolve_tested_pairs
};

inline ExperimentRun run_experiment(const JointScenario& s, std::uint64_t shots,
                                    std::uint64_t seed, const Config& cfg = {}) {
  ExperimentRun run;
  run.shots = shots;
  run.seed = seed;
  const auto pairs = resolve_tested_pairs(s, cfg);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    run.tallies.push_back(sample_joint(s, pairs[k].a, pairs[k].b, shots, seed,
                                       static_cast<std::uint32_t>(k), cfg));
  return run;
}

/// Agreement statistics between one pair's tallies and its exact joint law.
struct PairStat {
  std::string label;
  double tv = 0.0;             // total variation distance to the exact law
  double captured_mass = 0.0;  // empirical per-row argmax transport mass
  double z_worst = 0.0;        // worst binomial z-score over cells with 0<p<1
  std::uint64_t support_violations = 0;  // draws landing on p == 0 cells
};

struct ConvergenceReport {
  std::vector<PairStat> pairs;
  bool empirical_effective = false;  // argmax mass >= 1 - stat_threshold everywhere
  double max_tv = 0.0;
};

/**
 * Empirical analog of the effective check: rebuild the argmax transport from
 * the tallies (same tie-breaks as the exact path) and demand captured mass
 * >= 1 - stat_threshold on every tested pair. Also reports total variation
 * distances and the worst cellwise binomial z-score as convergence
 * diagnostics.
 */
inline ConvergenceReport empirical_verdict(const JointScenario& s,
                                           const ExperimentRun& run,
                                           const Config& cfg = {}) {
  const auto pairs = resolve_tested_pairs(s, cfg);
  if (run.tallies.size() != pairs.size())
    throw ValidationError("experiment has " + std::to_string(run.tallies.size()) +
                          " tallies for " + std::to_string(pairs.size()) +
                          " tested pairs");
  if (run.shots == 0) throw ValidationError("experiment has no shots");
  ConvergenceReport report;
  report.empirical_effective = true;
  const double shots = static_cast<double>(run.shots);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Eigen::MatrixXd p =
        joint_outcome_distribution(s, pairs[k].a, pairs[k].b, cfg);
    const TallyMatrix& tally = run.tallies[k];
    if (tally.rows() != p.rows() || tally.cols() != p.cols())
      throw ValidationError("tally shape does not match pair " + pairs[k].label);
    PairStat stat;
    stat.label = pairs[k].label;
    for (int i = 0; i < p.rows(); ++i) {
      int best = 0;
      for (int j = 0; j < p.cols(); ++j) {
        const double q = static_cast<double>(tally(i, j)) / shots;
        stat.tv += 0.5 * std::abs(p(i, j) - q);
        if (p(i, j) == 0.0)
          stat.support_violations += tally(i, j);
        else if (p(i, j) < 1.0)
          stat.z_worst = std::max(
              stat.z_worst,
              std::abs(static_cast<double>(tally(i, j)) - shots * p(i, j)) /
                  std::sqrt(shots * p(i, j) * (1.0 - p(i, j))));
        if (tally(i, j) > tally(i, best)) best = j;
      }
      stat.captured_mass += static_cast<double>(tally(i, best)) / shots;
    }
    if (stat.captured_mass < 1.0 - cfg.stat_threshold)
      report.empirical_effective = false;
    report.max_tv = std::max(report.max_tv, stat.tv);
    report.pairs.push_back(std::move(stat));
  }
  return report;
}

}
