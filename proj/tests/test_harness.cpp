#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "entroset/harness.hpp"

using namespace entroset;

namespace {

bool is_solver_id(const std::string& id) { return find_inequality(id).solver_dependent; }

}  // namespace

TEST(Registry, HasEveryIdOnce) {
  const auto ids = registry_ids();
  EXPECT_EQ(ids.size(), 18u);
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
  for (const char* id : {"ruzsa-triangle-sets", "ruzsa-sum-sets", "katz-tao-restricted", "sum-diff-sets",
                         "gen-ruzsa-sum-diff-sets", "kt-entropy", "kt-mutual-info", "kt-independent",
                         "mmt-independent", "hr-triangle", "max-coupling-sum", "prop1-sum-diff", "cor6-sum-diff",
                         "cor8-four-marginal", "remark-sum-diff-entropic", "copy-identity", "lemma2-count",
                         "appendix-a-chain"}) {
    EXPECT_NO_THROW(find_inequality(id)) << id;
  }
  EXPECT_THROW(find_inequality("bogus-id"), InvalidArgumentError);
}

TEST(Registry, PoliciesAndThresholds) {
  HarnessConfig cfg;
  cfg.tol = 1e-7;
  EXPECT_EQ(find_inequality("katz-tao-restricted").policy, GroupPolicy::kTorsionFreeOnly);
  EXPECT_EQ(find_inequality("kt-entropy").policy, GroupPolicy::kAnyAbelian);
  EXPECT_DOUBLE_EQ(slack_threshold(find_inequality("hr-triangle"), cfg), -1e-6);
  EXPECT_DOUBLE_EQ(slack_threshold(find_inequality("kt-entropy"), cfg), -1e-9);
  EXPECT_DOUBLE_EQ(slack_threshold(find_inequality("copy-identity"), cfg), -1e-10);
}

TEST(Suite, EveryIdHoldsOnASmallBudget) {
  for (const auto& id : registry_ids()) {
    const auto trials = is_solver_id(id) ? 40u : 300u;
    const auto rep = run_suite(id, trials, 99);
    EXPECT_EQ(rep.violations, 0u) << id << " worst " << rep.worst_instance.dump();
    EXPECT_EQ(rep.trials, trials);
    EXPECT_FALSE(rep.worst_instance.is_null()) << id;
  }
}

TEST(Suite, IsDeterministic) {
  for (const char* id : {"kt-entropy", "hr-triangle", "copy-identity", "sum-diff-sets"}) {
    const auto a = to_json(run_suite(id, 25, 7)).dump();
    const auto b = to_json(run_suite(id, 25, 7)).dump();
    EXPECT_EQ(a, b) << id;
    EXPECT_NE(a, to_json(run_suite(id, 25, 8)).dump()) << id;
  }
}

TEST(Suite, TrialsDoNotDependOnBudget) {
  // Trial t draws from its own derived seed, so a longer run extends a shorter one.
  const auto& s = find_inequality("kt-mutual-info");
  HarnessConfig cfg;
  const auto t5 = run_trial(s, 3, 5, cfg);
  const auto rep = run_suite("kt-mutual-info", 6, 3);
  EXPECT_GE(t5.rhs - t5.lhs, rep.min_slack);
  EXPECT_EQ(run_trial(s, 3, 5, cfg).instance.dump(), t5.instance.dump());
}

TEST(Suite, PolicyIsEnforced) {
  EXPECT_THROW(run_suite("katz-tao-restricted", 5, 1, {}, GroupSpec::cyclic(5)), TorsionError);
  EXPECT_THROW(run_suite("hr-triangle", 5, 1, {}, GroupSpec::cyclic(3)), TorsionError);
  EXPECT_NO_THROW(run_suite("kt-entropy", 5, 1, {}, GroupSpec::cyclic(5)));
  EXPECT_THROW(run_suite("bogus-id", 5, 1), InvalidArgumentError);
}

TEST(Suite, TorsionFreeIdsOnlySeeTorsionFreeGroups) {
  HarnessConfig cfg;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto trial = run_trial(find_inequality("katz-tao-restricted"), 4, t, cfg);
    EXPECT_TRUE(group_from_json(trial.instance["group"]).torsion_free());
  }
}

TEST(Suite, FlagsAFalseStatement) {
  // H(X - Y) <= H(X) fails for independent fair bits on Z.
  InequalitySpec bogus{"bogus", "H(X-Y) <= H(X)", GroupPolicy::kAnyAbelian, false, false,
                       [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                         const auto j = random_joint(rng, g, c);
                         return Trial{linear_entropy(j, g, {{1, -1}}), linear_entropy(j, g, {{1, 0}}), 0.0,
                                      std::nullopt, {}};
                       }};
  HarnessConfig cfg;
  int flagged = 0;
  for (std::uint64_t t = 0; t < 200; ++t) flagged += is_violation(bogus, run_trial(bogus, 1, t, cfg), cfg) ? 1 : 0;
  EXPECT_GT(flagged, 0);
}

TEST(Examples, SingletonsGiveEqualityInRuzsaSumSets) {
  const auto z = FiniteSet::of_integers({0});
  EXPECT_EQ(z.size() * sumset(z, z).size(), sumset(z, z).size() * sumset(z, z).size());
}

TEST(Examples, TriangleWithRepeatedPoint) {
  Rng rng(2);
  HarnessConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const auto x = random_dist(rng, GroupSpec::integers(), cfg);
    const auto d = LinearForm::difference();
    const double m = max_pushforward_entropy(x, x, d, cfg.tol).value;
    EXPECT_GE(2 * m - (x.entropy() + m), -2 * cfg.tol);
  }
}

TEST(Generators, Deterministic) {
  for (const char* kind : {"set", "dist", "joint-dist", "graph"}) {
    EXPECT_EQ(generate_instance(kind, 42).dump(), generate_instance(kind, 42).dump()) << kind;
  }
  EXPECT_THROW(generate_instance("bogus", 1), InvalidArgumentError);
}

TEST(Generators, DistributionsHaveDenominator64) {
  Rng rng(5);
  HarnessConfig cfg;
  for (int t = 0; t < 200; ++t) {
    const auto d = random_dist(rng, random_group(rng, GroupPolicy::kAnyAbelian), cfg);
    EXPECT_LE(d.size(), cfg.max_support);
    for (double p : d.probs()) {
      const double k = p * 64.0;
      EXPECT_EQ(k, std::round(k));
      EXPECT_GT(p, 0.0);
    }
  }
}

TEST(Generators, JointMarginalsAreConsistent) {
  Rng rng(6);
  HarnessConfig cfg;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_group(rng, GroupPolicy::kAnyAbelian);
    const auto j = random_joint(rng, g, cfg);
    j.check_normalised(1e-12);
    const auto mx = j.marginal({0});
    double s = 0.0;
    for (std::size_t k = 0; k < mx.size(); ++k) {
      double direct = 0.0;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (std::equal(j.value(i, 0).begin(), j.value(i, 0).end(), mx.atom(k).begin())) direct += j.prob(i);
      }
      EXPECT_NEAR(mx.prob(k), direct, 1e-15);
      s += mx.prob(k);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_LE(mx.size(), cfg.max_support);
  }
}

TEST(Generators, GraphsHaveNoIsolatedVertices) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto g = random_bipartite_graph(rng, 5);
    for (std::size_t a = 0; a < g.left_size(); ++a) EXPECT_FALSE(g.neighbors(a).empty());
  }
}

TEST(Witnesses, BothKindsAreFound) {
  const auto w = ordering_witnesses(2000, 1);
  ASSERT_TRUE(w.complete()) << to_json(w).dump();
  EXPECT_LT(w.below->d_hr, w.below->d_r - kWitnessMargin);
  EXPECT_LT(w.below->d_hr_grid, w.below->d_r - kWitnessMargin);
  EXPECT_GT(w.above->d_hr, w.above->d_r + kWitnessMargin);
  EXPECT_GT(w.above->d_hr_grid, w.above->d_r + kWitnessMargin);
  // Uniform marginals on A and B.
  for (double p : w.below->px.probs()) EXPECT_NEAR(p, 1.0 / static_cast<double>(w.below->a.size()), 1e-15);
}

TEST(Witnesses, DifferenceCouplingIsAFeasibleLowerBound) {
  const auto w = ordering_witnesses(2000, 3);
  ASSERT_TRUE(w.above.has_value());
  const auto& j = *w.above->joint;
  const GroupSpec g = GroupSpec::integers();
  const double hd = linear_entropy(j, g, {{1, -1}});
  EXPECT_NEAR(hd, std::log(static_cast<double>(sumset(w.above->a, w.above->b, Sign::kMinus).size())), 1e-12);
  EXPECT_GE(hd - 0.5 * w.above->px.entropy() - 0.5 * w.above->py.entropy(), w.above->d_r - 1e-12);
  EXPECT_GE(w.above->d_hr, hd - 0.5 * w.above->px.entropy() - 0.5 * w.above->py.entropy() - 1e-9);
}

TEST(Witnesses, TinyBudgetIsPartial) {
  const auto w = ordering_witnesses(1, 1);
  EXPECT_EQ(w.trials_used, 1u);
  EXPECT_THROW(ordering_witnesses(0, 1), InvalidArgumentError);
}

TEST(Suite, ThreadCountDoesNotChangeTheReport) {
  for (const char* id : {"kt-entropy", "hr-triangle", "appendix-a-chain", "ruzsa-triangle-sets"}) {
    const auto one = to_json(run_suite(id, 37, 5, {}, std::nullopt, 1)).dump();
    EXPECT_EQ(one, to_json(run_suite(id, 37, 5, {}, std::nullopt, 3)).dump()) << id;
    EXPECT_EQ(one, to_json(run_suite(id, 37, 5, {}, std::nullopt, 64)).dump()) << id;
  }
}
