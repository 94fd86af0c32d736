#include <catch2/catch_amalgamated.hpp>
#include <psakit/psakit.hpp>

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "support.hpp"

using namespace psakit;

namespace {

std::shared_ptr<const PowerGraph> synthetic_shared(
    int n, const std::vector<std::pair<int, int>>& edges) {
  auto g = std::make_shared<PowerGraph>();
  g->dim = 2;
  for (int i = 0; i < n; ++i) {
    Power p;
    p.id = i;
    p.projector = HermitianOperator(ComplexMatrix::Zero(2, 2));
    g->powers.push_back(std::move(p));
  }
  g->adjacency.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) g->adjacency[i][i] = true;
  for (const auto& [i, j] : edges) {
    g->adjacency[i][j] = true;
    g->adjacency[j][i] = true;
  }
  return g;
}

PSA local_psa(const ComplexMatrix& rho, const GraphBundle& bundle) {
  return psa_from_density(DensityMatrix(rho), bundle.graph);
}

JointScenario two_qubit_scenario(const ComplexMatrix& joint) {
  const GraphBundle a = support::zx_bundle();
  const GraphBundle b = support::zx_bundle();
  JointScenario s;
  s.state = DensityMatrix(joint);
  s.dims = {2, 2};
  s.graph_a = a.graph;
  s.graph_b = b.graph;
  for (const std::string basis : {"z", "x"}) {
    ContextPair pair;
    pair.a = a.basis_contexts.at(basis);
    pair.b = b.basis_contexts.at(basis);
    pair.matching = {0, 1};
    pair.label = "(" + basis + "," + basis + ")";
    s.pairs.push_back(std::move(pair));
  }
  return s;
}

ComplexMatrix bell_rho(int which) {
  const ComplexVector psi = support::bell_vector(which);
  return psi * psi.adjoint();
}

}  // namespace

TEST_CASE("intensive relation on identical valuations", "[relations]") {
  const GraphBundle zx = support::zx_bundle();
  const PSA psa = local_psa(identity(2) / 2.0, zx);
  const IntensiveResult r = intensive_related(psa, psa);
  REQUIRE(r.related);
  CHECK(r.obstruction == IntensiveObstruction::None);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->mapping == std::vector<int>{0, 1, 2, 3});
  CHECK(r.witness->max_potentia_gap == 0.0);
}

TEST_CASE("intensive relation finds the basis-swapping isomorphism", "[relations]") {
  // |0> against |+>: the map z<->x carries one valuation to the other.
  const GraphBundle ga = support::zx_bundle();
  const GraphBundle gb = support::zx_bundle();
  ComplexVector zero(2), plus(2);
  zero << 1, 0;
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const PSA pa = local_psa(projector_onto(zero), ga);
  const PSA pb = local_psa(projector_onto(plus), gb);

  const IntensiveResult r = intensive_related(pa, pb);
  REQUIRE(r.related);
  // Lexicographically least witness: z:0 -> x:0, z:1 -> x:1, x:* -> z:*.
  CHECK(r.witness->mapping == std::vector<int>{2, 3, 0, 1});
  CHECK(r.witness->max_potentia_gap <= 1e-12);
}

TEST_CASE("intensive obstructions are reported cheapest-first", "[relations]") {
  const GraphBundle zx = support::zx_bundle();

  SECTION("size mismatch") {
    const GraphBundle z3 =
        generate_graph_with_contexts({support::named_basis("z", 3)});
    const PSA pa = local_psa(identity(2) / 2.0, zx);
    const PSA pb = local_psa(identity(3) / 3.0, z3);
    const IntensiveResult r = intensive_related(pa, pb);
    CHECK_FALSE(r.related);
    CHECK(r.obstruction == IntensiveObstruction::SizeMismatch);
    CHECK(to_string(r.obstruction) == std::string("size_mismatch"));
  }
  SECTION("potentia multiset mismatch") {
    ComplexVector zero(2);
    zero << 1, 0;
    const PSA pa = local_psa(projector_onto(zero), zx);
    const PSA pb = local_psa(identity(2) / 2.0, zx);
    const IntensiveResult r = intensive_related(pa, pb);
    CHECK(r.obstruction == IntensiveObstruction::PotentiaMultisetMismatch);
  }
  SECTION("degree sequence mismatch") {
    const auto g1 = synthetic_shared(3, {{0, 1}});
    const auto g2 = synthetic_shared(3, {{0, 1}, {1, 2}});
    const IntensiveResult r = intensive_related(make_psa(g1, {0.5, 0.5, 0.5}),
                                                make_psa(g2, {0.5, 0.5, 0.5}));
    CHECK(r.obstruction == IntensiveObstruction::DegreeSequenceMismatch);
  }
  SECTION("no isomorphism despite matching invariants") {
    // A six-cycle against two triangles: same degrees, same potentia.
    const auto cycle =
        synthetic_shared(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    const auto triangles =
        synthetic_shared(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
    const std::vector<double> half(6, 0.5);
    const IntensiveResult r =
        intensive_related(make_psa(cycle, half), make_psa(triangles, half));
    CHECK_FALSE(r.related);
    CHECK(r.obstruction == IntensiveObstruction::NoIsomorphism);
  }
  SECTION("potentia gap beyond tolerance blocks the only candidate") {
    const auto g1 = synthetic_shared(2, {{0, 1}});
    const auto g2 = synthetic_shared(2, {{0, 1}});
    const IntensiveResult tight = intensive_related(
        make_psa(g1, {0.5, 0.5}), make_psa(g2, {0.5 + 1e-7, 0.5}));
    CHECK_FALSE(tight.related);
    Config loose;
    loose.tol_intensive = 1e-6;
    const IntensiveResult ok = intensive_related(
        make_psa(g1, {0.5, 0.5}), make_psa(g2, {0.5 + 1e-7, 0.5}), loose);
    CHECK(ok.related);
    CHECK(ok.witness->max_potentia_gap == Catch::Approx(1e-7));
  }
}

TEST_CASE("joint outcome distribution matches the direct trace oracle",
          "[relations]") {
  const JointScenario s = two_qubit_scenario(bell_rho(0));
  const Eigen::MatrixXd p =
      joint_outcome_distribution(s, s.pairs[0].a, s.pairs[0].b);
  CHECK(p(0, 0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(p(1, 1) == Catch::Approx(0.5).margin(1e-12));
  CHECK(p(0, 1) == 0.0);
  CHECK(p(1, 0) == 0.0);

  support::Rng rng(31, 0);
  const JointScenario r = two_qubit_scenario(support::random_density(4, rng));
  const Eigen::MatrixXd q =
      joint_outcome_distribution(r, r.pairs[0].a, r.pairs[1].b);
  const oracle::Mat rho = support::to_oracle(r.state.matrix());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const oracle::Mat pij = oracle::kron(
          support::to_oracle(
              r.graph_a->powers[r.pairs[0].a.node_ids[i]].projector.matrix()),
          support::to_oracle(
              r.graph_b->powers[r.pairs[1].b.node_ids[j]].projector.matrix()));
      CHECK(q(i, j) == Catch::Approx(oracle::born(rho, pij)).margin(1e-12));
    }

  SECTION("non-exhaustive context is rejected") {
    Context partial = s.pairs[0].a;
    partial.node_ids = {partial.node_ids[0]};
    partial.resolves_identity = false;
    CHECK_THROWS_AS(joint_outcome_distribution(s, partial, s.pairs[0].b),
                    NonExhaustiveContextError);
  }
}

TEST_CASE("effective relation and correlation signs on the bell family",
          "[relations]") {
  struct Case {
    int which;
    CorrelationSign sign;
  };
  for (const Case c : {Case{0, CorrelationSign::Correlated},
                       Case{1, CorrelationSign::Mixed},
                       Case{2, CorrelationSign::Mixed},
                       Case{3, CorrelationSign::AntiCorrelated}}) {
    const JointScenario s = two_qubit_scenario(bell_rho(c.which));
    const EffectiveResult r = effective_related(s);
    INFO("bell state " << c.which);
    CHECK(r.related);
    CHECK(r.worst_leak <= 1e-12);
    CHECK(r.sign == c.sign);
    REQUIRE(r.transports.size() == 2);
  }
}

TEST_CASE("effective relation fails on separable and noisy states", "[relations]") {
  SECTION("werner noise leaks through the argmax transport") {
    for (const double v : {0.2, 0.5, 0.9}) {
      const ComplexMatrix rho =
          v * bell_rho(3) + (1.0 - v) * identity(4) / 4.0;
      const EffectiveResult r = effective_related(two_qubit_scenario(rho));
      CHECK_FALSE(r.related);
      // Anti-diagonal mass (1+v)/2 in both bases, so the leak is (1-v)/2.
      CHECK(r.worst_leak == Catch::Approx((1.0 - v) / 2.0).margin(1e-12));
      CHECK(r.worst_pair >= 0);
    }
  }
  SECTION("product state leaks half of each unbiased pair") {
    ComplexVector zero(2);
    zero << 1, 0;
    const ComplexMatrix rho =
        tensor_product(projector_onto(zero), projector_onto(zero));
    const EffectiveResult r = effective_related(two_qubit_scenario(rho));
    CHECK_FALSE(r.related);
    CHECK(r.worst_leak == Catch::Approx(0.5).margin(1e-12));
    // The z pair itself is deterministic.
    CHECK(r.transports[0].captured_mass == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("argmax ties break to the smallest column") {
    ComplexVector zero(2);
    zero << 1, 0;
    const ComplexMatrix rho =
        tensor_product(projector_onto(zero), identity(2) / 2.0);
    const EffectiveResult r = effective_related(two_qubit_scenario(rho));
    for (const auto& t : r.transports)
      for (int tau : t.tau) CHECK(tau == 0);
  }
}

TEST_CASE("all-matched mode enumerates equal-size exhaustive pairs", "[relations]") {
  JointScenario s = two_qubit_scenario(bell_rho(0));
  s.mode = PairingMode::AllMatchedContexts;
  const auto pairs = resolve_tested_pairs(s);
  REQUIRE(pairs.size() == 4);  // {z,x} x {z,x}
  CHECK(pairs[0].label == "A0xB0");
  CHECK(pairs[3].label == "A1xB1");
  for (const auto& p : pairs) {
    CHECK(p.a.size() == p.b.size());
    CHECK(p.matching == std::vector<int>{0, 1});
  }

  // The unbiased cross pairs leak half the mass, so the bell state is not
  // effectively related when every matched pair is tested.
  const EffectiveResult r = effective_related(s);
  CHECK_FALSE(r.related);
  CHECK(r.worst_leak == Catch::Approx(0.5).margin(1e-12));

  SECTION("designated mode requires pairs") {
    JointScenario bare = two_qubit_scenario(bell_rho(0));
    bare.pairs.clear();
    CHECK_THROWS_AS(resolve_tested_pairs(bare), ValidationError);
  }
}

TEST_CASE("schmidt rank against reduced-state purity", "[relations]") {
  CHECK(schmidt_rank(support::bell_vector(0), {2, 2}) == 2);
  CHECK(schmidt_rank(support::bell_vector(3), {2, 2}) == 2);

  ComplexVector product = ComplexVector::Zero(4);
  product(0) = 1.0;
  CHECK(schmidt_rank(product, {2, 2}) == 1);

  support::Rng rng(32, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexVector psi = support::random_pure(6, rng);
    const int rank = schmidt_rank(psi, {2, 3});
    const DensityMatrix reduced =
        partial_trace(DensityMatrix(psi * psi.adjoint()), {2, 3}, Side::A);
    // Rank 1 exactly when the reduced state is pure.
    CHECK((rank == 1) == (1.0 - reduced.purity() < 1e-9));
    CHECK(rank >= 1);
    CHECK(rank <= 2);
  }

  SECTION("validation") {
    CHECK_THROWS_AS(schmidt_rank(ComplexVector::Zero(4), {2, 2}),
                    InvalidStateError);
    CHECK_THROWS_AS(schmidt_rank(support::bell_vector(0), {2, 3}),
                    DimensionError);
  }
}

TEST_CASE("partial transpose is an involution matching its definition",
          "[relations]") {
  support::Rng rng(33, 0);
  const ComplexMatrix m = support::ginibre(6, 6, rng);
  const ComplexMatrix pt = partial_transpose(m, {2, 3});
  CHECK((partial_transpose(pt, {2, 3}) - m).norm() == 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 3; ++b2)
          CHECK(pt(a * 3 + b, a2 * 3 + b2) == m(a * 3 + b2, a2 * 3 + b));
  CHECK_THROWS_AS(partial_transpose(m, {4, 2}), DimensionError);
}

TEST_CASE("ppt criterion separates the werner family at one third", "[relations]") {
  for (const double v : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.9}) {
    const DensityMatrix rho(v * bell_rho(3) + (1.0 - v) * identity(4) / 4.0);
    const PptResult r = ppt_separable(rho, {2, 2});
    CHECK(r.min_eigenvalue == Catch::Approx((1.0 - 3.0 * v) / 4.0).margin(1e-12));
    CHECK(r.separable == (v <= 1.0 / 3.0 + 1e-12));
    CHECK(r.conclusive);
  }

  SECTION("bell states are detected") {
    const PptResult r = ppt_separable(DensityMatrix(bell_rho(0)), {2, 2});
    CHECK_FALSE(r.separable);
    CHECK(r.min_eigenvalue == Catch::Approx(-0.5).margin(1e-12));
  }
  SECTION("large systems are inconclusive or rejected") {
    const PptResult dice = ppt_separable(DensityMatrix(identity(36) / 36.0), {6, 6});
    CHECK(dice.separable);
    CHECK_FALSE(dice.conclusive);
    Config big;
    big.max_dim = 64;
    CHECK_THROWS_AS(
        ppt_separable(DensityMatrix(identity(49) / 49.0, big), {7, 7}, big),
        DimensionError);
  }
}

TEST_CASE("classification truth table", "[relations]") {
  CHECK(classification_from(true, true) == Classification::Entangled);
  CHECK(classification_from(true, false) == Classification::IntensiveOnly);
  CHECK(classification_from(false, false) == Classification::Separable);
  CHECK(classification_from(false, true) == Classification::EffectiveOnlyAnomaly);
  CHECK(to_string(Classification::EffectiveOnlyAnomaly) ==
        std::string("effective_only_anomaly"));
}

TEST_CASE("classify produces verdicts and baselines", "[relations]") {
  SECTION("maximally entangled pure state") {
    const RelationVerdict v = classify(two_qubit_scenario(bell_rho(0)));
    CHECK(v.classification == Classification::Entangled);
    CHECK(v.baselines.purity == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(v.baselines.schmidt_rank.has_value());
    CHECK(*v.baselines.schmidt_rank == 2);
    REQUIRE(v.baselines.ppt.has_value());
    CHECK_FALSE(v.baselines.ppt->separable);
  }
  SECTION("werner noise keeps only the intensive relation") {
    const ComplexMatrix rho = 0.5 * bell_rho(3) + 0.5 * identity(4) / 4.0;
    const RelationVerdict v = classify(two_qubit_scenario(rho));
    CHECK(v.classification == Classification::IntensiveOnly);
    CHECK_FALSE(v.baselines.schmidt_rank.has_value());  // mixed state
    REQUIRE(v.baselines.ppt.has_value());
    CHECK_FALSE(v.baselines.ppt->separable);
  }
}

TEST_CASE("asymmetric probes expose the effective-only diagnostic", "[relations]") {
  // |0><0| (x) |0><0| on dims (2,3), probed only in computational bases:
  // the transport is perfect, but graphs of different size can never be
  // intensively related.
  const GraphBundle a = generate_graph_with_contexts({support::named_basis("z", 2)});
  const GraphBundle b = generate_graph_with_contexts({support::named_basis("z", 3)});
  ComplexMatrix rho = ComplexMatrix::Zero(6, 6);
  rho(0, 0) = 1.0;
  JointScenario s;
  s.state = DensityMatrix(rho);
  s.dims = {2, 3};
  s.graph_a = a.graph;
  s.graph_b = b.graph;
  ContextPair pair;
  pair.a = a.basis_contexts.at("z");
  pair.b = b.basis_contexts.at("z");
  pair.matching = {0, 1};
  pair.label = "(z,z)";
  s.pairs.push_back(std::move(pair));

  const RelationVerdict v = classify(s);
  CHECK(v.effective.related);
  CHECK(v.effective.sign == CorrelationSign::Correlated);
  CHECK_FALSE(v.intensive.related);
  CHECK(v.intensive.obstruction == IntensiveObstruction::SizeMismatch);
  CHECK(v.classification == Classification::EffectiveOnlyAnomaly);
}

TEST_CASE("every corpus entry classifies as designed", "[relations][corpus]") {
  const auto entries = corpus::build();
  REQUIRE(entries.size() == 22);
  int intensive_only = 0;
  for (const auto& e : entries) {
    const RelationVerdict v = classify(e.assembled.joint, e.spec.config);
    INFO(e.name);
    CHECK(v.classification == e.expected);
    if (v.effective.related) CHECK(v.intensive.related);
    if (v.classification == Classification::IntensiveOnly) ++intensive_only;
  }
  CHECK(intensive_only >= 1);
}
