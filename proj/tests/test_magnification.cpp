#include <gtest/gtest.h>

#include <cmath>

#include "entroset/magnification.hpp"
#include "entroset/rng.hpp"
#include "oracles.hpp"

using namespace entroset;

namespace {

BipartiteGraph matching(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, i);
  return BipartiteGraph::from_edges(n, n, e);
}

BipartiteGraph two_to_one() { return BipartiteGraph::from_edges(2, 1, {{0, 0}, {1, 0}}); }

// Matching a1-b1 next to a complete K_{2,2} on {a2,a3} x {b2,b3}.
BipartiteGraph matching_plus_k22() {
  return BipartiteGraph::from_edges(3, 3, {{0, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}});
}

BipartiteGraph random_graph(Rng& rng, std::size_t max_side) {
  while (true) {
    const auto na = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_side)));
    const auto nb = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_side)));
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b)
        if (rng.bernoulli(0.4)) e.emplace_back(a, b);
    try {
      return BipartiteGraph::from_edges(na, nb, e);
    } catch (const InvalidArgumentError&) {
    }
  }
}

std::vector<double> random_law(Rng& rng, std::size_t n, double zero_prob) {
  while (true) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) s += (v = rng.bernoulli(zero_prob) ? 0.0 : static_cast<double>(rng.uniform_int(1, 64)));
    if (s == 0.0) continue;
    for (auto& v : p) v /= s;
    return p;
  }
}

std::vector<double> uniform_law(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST(Graph, RejectsIsolatedVertices) {
  EXPECT_THROW(BipartiteGraph::from_edges(2, 2, {{0, 0}, {1, 0}}), InvalidArgumentError);
  EXPECT_THROW(BipartiteGraph::from_edges(2, 1, {{0, 0}}), InvalidArgumentError);
  EXPECT_THROW(BipartiteGraph::from_edges(0, 0, {}), InvalidArgumentError);
}

TEST(Neighborhood, Examples) {
  const auto k = BipartiteGraph::from_edges(2, 2, {{0, 0}, {1, 0}, {1, 1}});
  EXPECT_TRUE(neighborhood(k, {}).empty());
  EXPECT_EQ(neighborhood(k, {0}), (std::vector<std::size_t>{0}));
  EXPECT_EQ(neighborhood(BipartiteGraph::complete(3, 4), {1}), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(MuCombinatorial, Examples) {
  const auto m = mu_combinatorial(matching(3));
  EXPECT_EQ(m.mu, (Ratio{1, 1}));
  EXPECT_EQ(m.argmin, (std::vector<std::size_t>{0}));
  const auto k = mu_combinatorial(BipartiteGraph::complete(2, 3));
  EXPECT_EQ(k.mu.str(), "3/2");
  EXPECT_EQ(k.argmin, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(mu_combinatorial(two_to_one()).mu.str(), "1/2");
}

TEST(MuCombinatorial, WithinTrivialBounds) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_graph(rng, 6);
    const double mu = mu_combinatorial(g).mu.value();
    EXPECT_GE(mu, 1.0 / static_cast<double>(g.left_size()) - 1e-15);
    EXPECT_LE(mu, static_cast<double>(g.right_size()) + 1e-15);
  }
}

TEST(InnerMax, Matching) {
  const auto g = matching(3);
  const std::vector<double> px{0.5, 0.3, 0.2};
  const auto r = inner_max(g, px);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(r.channel(a, a), 1.0);
}

TEST(InnerMax, CompleteGraphReachesUniformOutput) {
  const auto g = BipartiteGraph::complete(3, 4);
  const std::vector<double> px{0.7, 0.2, 0.1};
  const auto r = inner_max(g, px);
  EXPECT_NEAR(r.value, std::log(4.0) - entropy(px), 1e-10);
}

TEST(InnerMax, K23Uniform) {
  const auto r = inner_max(BipartiteGraph::complete(2, 3), uniform_law(2));
  EXPECT_NEAR(r.value, std::log(3.0) - std::log(2.0), 1e-10);
}

TEST(InnerMax, MatchesDensestSubsetOracle) {
  Rng rng(31);
  for (int t = 0; t < 300; ++t) {
    const auto g = random_graph(rng, 6);
    const auto px = random_law(rng, g.left_size(), 0.25);
    const auto r = inner_max(g, px);
    ASSERT_TRUE(r.converged) << "trial " << t << " gap " << r.gap;
    const auto expected = oracle::max_entropy_output(g, px);
    for (std::size_t b = 0; b < expected.size(); ++b) EXPECT_NEAR(r.py[b], expected[b], 1e-9) << "trial " << t;
    // Output support is exactly the neighbourhood of the input support.
    std::vector<std::size_t> supp;
    for (std::size_t a = 0; a < px.size(); ++a)
      if (px[a] > 0) supp.push_back(a);
    const auto nb = neighborhood(g, supp);
    std::size_t positive = 0;
    for (double v : r.py) positive += v > 0.0;
    EXPECT_EQ(positive, nb.size());
    for (auto b : nb) EXPECT_GT(r.py[b], 0.0);
  }
}

TEST(InnerMax, RejectsBadInput) {
  EXPECT_THROW(inner_max(matching(2), std::vector<double>{1.0}), InvalidArgumentError);
  EXPECT_THROW(inner_max(matching(2), std::vector<double>{0.5, 0.6}), InvalidArgumentError);
}

TEST(LambdaEntropic, Examples) {
  EXPECT_NEAR(lambda_entropic(matching(3)).value, 0.0, 1e-9);
  const auto k = lambda_entropic(BipartiteGraph::complete(2, 3));
  EXPECT_NEAR(k.value, std::log(1.5), 1e-9);
  EXPECT_FALSE(k.discrepancy);
  const auto t = lambda_entropic(two_to_one());
  EXPECT_NEAR(t.value, std::log(0.5), 1e-9);
  EXPECT_NEAR(t.px[0], 0.5, 1e-12);
}

TEST(LambdaEntropic, EqualsLogMuAndBelowEveryInnerValue) {
  Rng rng(12);
  for (int t = 0; t < 40; ++t) {
    const auto g = random_graph(rng, 5);
    const auto lam = lambda_entropic(g);
    EXPECT_NEAR(lam.value, std::log(mu_combinatorial(g).mu.value()), 1e-6);
    EXPECT_FALSE(lam.discrepancy);
    for (int k = 0; k < 5; ++k) {
      const auto px = random_law(rng, g.left_size(), 0.3);
      EXPECT_LE(lam.value, inner_max(g, px).value + 1e-9);
    }
  }
}

TEST(Kkt, PassesOnOptimalChannels) {
  const auto m = matching(3);
  const auto px = uniform_law(3);
  const auto cm = kkt_check(m, px, Channel::uniform(m));
  EXPECT_TRUE(cm.passed);
  EXPECT_LE(cm.max_violation, 1e-15);
  const auto k = BipartiteGraph::complete(3, 2);
  EXPECT_TRUE(kkt_check(k, uniform_law(3), Channel::uniform(k)).passed);
}

TEST(Kkt, UnequalActiveLevelsFail) {
  // a1 -> {b1, b2} with (0.7, 0.3), a2 -> {b2}: P_Y = (0.35, 0.65) at uniform input.
  const auto g = BipartiteGraph::from_edges(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  const Channel w(g, {0.7, 0.3, 0.0, 1.0});
  const auto c = kkt_check(g, uniform_law(2), w);
  EXPECT_FALSE(c.passed);
  EXPECT_GT(c.max_active_spread, 0.2);
}

TEST(Kkt, InactiveEdgesSitAboveActiveLevel) {
  const auto g = BipartiteGraph::from_edges(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  const std::vector<double> px{0.4, 0.6};
  const auto r = inner_max(g, px);
  EXPECT_NEAR(r.channel(0, 0), 1.0, 1e-12);
  const auto c = kkt_check(g, px, r.channel);
  EXPECT_TRUE(c.passed);
  EXPECT_GT((c.mu.at({0, 1})), 0.0);
}

TEST(Kkt, RandomOptimisersPass) {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const auto g = random_graph(rng, 5);
    const auto px = random_law(rng, g.left_size(), 0.2);
    const auto r = inner_max(g, px);
    const auto c = kkt_check(g, px, r.channel, 1e-6);
    EXPECT_TRUE(c.passed) << (c.failures.empty() ? "" : c.failures.front());
    EXPECT_LE(c.max_violation, 1e-6);
  }
}

TEST(EquivalenceClasses, Examples) {
  const auto k = BipartiteGraph::complete(3, 3);
  const auto px = std::vector<double>{0.5, 0.25, 0.25};
  EXPECT_EQ(equivalence_classes(k, px, inner_max(k, px).channel).classes.size(), 1u);

  const auto m = matching(3);
  const std::vector<double> pm{0.5, 0.3, 0.2};
  const auto part = equivalence_classes(m, pm, inner_max(m, pm).channel);
  ASSERT_EQ(part.classes.size(), 3u);
  EXPECT_NEAR(part.classes[0].level, 0.5, 1e-12);
  EXPECT_NEAR(part.classes[1].level, 0.3, 1e-12);
  EXPECT_NEAR(part.classes[2].level, 0.2, 1e-12);

  const auto k23 = BipartiteGraph::complete(2, 3);
  const auto p23 = uniform_law(2);
  const auto pk = equivalence_classes(k23, p23, inner_max(k23, p23).channel);
  ASSERT_EQ(pk.classes.size(), 1u);
  EXPECT_NEAR(pk.classes[0].level, 1.0 / 3.0, 1e-12);
}

TEST(EquivalenceClasses, RejectsNonOptimalChannel) {
  const auto g = BipartiteGraph::from_edges(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  EXPECT_THROW(equivalence_classes(g, uniform_law(2), Channel(g, {0.7, 0.3, 0.0, 1.0})), InvalidArgumentError);
}

TEST(EquivalenceClasses, MassEqualsLevelTimesSize) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto g = random_graph(rng, 5);
    const auto px = random_law(rng, g.left_size(), 0.2);
    const auto part = equivalence_classes(g, px, inner_max(g, px).channel);
    for (std::size_t i = 0; i < part.classes.size(); ++i) {
      const auto& c = part.classes[i];
      EXPECT_NEAR(c.mass, c.level * static_cast<double>(c.outputs.size()), 1e-9);
      if (i > 0) {
        EXPECT_GT(part.classes[i - 1].level, c.level);
      }
    }
  }
}

TEST(ReweightPath, TwoVertexMatching) {
  const auto g = matching(2);
  const std::vector<double> px{0.6, 0.4};
  const auto w = inner_max(g, px).channel;
  const auto part = equivalence_classes(g, px, w);
  const auto [amin, amax] = alpha_interval(part);
  EXPECT_NEAR(amax, 0.1, 1e-15);
  EXPECT_NEAR(amin, -0.4, 1e-15);
  const auto top = reweight_path(g, px, w, amax);
  EXPECT_NEAR(top[0], 0.5, 1e-15);
  EXPECT_NEAR(top[1], 0.5, 1e-15);
  EXPECT_EQ(equivalence_classes(g, top, w).classes.size(), 1u);
  EXPECT_EQ(reweight_path(g, px, w, 0.0), px);
  EXPECT_THROW(reweight_path(g, px, w, 0.2), InvalidArgumentError);
}

TEST(ReweightPath, FixedChannelStaysOptimal) {
  Rng rng(17);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 40; ++t) {
    const auto g = random_graph(rng, 5);
    const auto px = random_law(rng, g.left_size(), 0.1);
    const auto w = inner_max(g, px).channel;
    const auto part = equivalence_classes(g, px, w);
    if (part.classes.size() < 2) continue;
    ++checked;
    const auto [amin, amax] = alpha_interval(part);
    for (double alpha : {amin, 0.5 * amin, 0.0, 0.5 * amax, amax}) {
      const auto pa = reweight_path(g, px, w, alpha);
      EXPECT_NEAR(inner_max(g, pa).value, channel_value(pa, w), 1e-6);
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(ReweightPath, ConstantAlongPathAtOuterMinimiser) {
  const auto g = matching_plus_k22();
  const std::vector<double> px{0.5, 0.25, 0.25};
  const auto r = inner_max(g, px);
  EXPECT_NEAR(r.value, 0.0, 1e-12);  // = log mu
  const auto part = equivalence_classes(g, px, r.channel);
  ASSERT_EQ(part.classes.size(), 2u);
  const auto f = class_values(part, px);
  EXPECT_NEAR(f[0], f[1], 1e-9);
  const auto [amin, amax] = alpha_interval(part);
  EXPECT_NEAR(amax, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(amin, -0.5, 1e-15);
  for (int k = 1; k <= 5; ++k) {
    const double alpha = amin + (amax - amin) * k / 6.0;
    const auto pa = reweight_path(g, px, r.channel, alpha);
    EXPECT_NEAR(inner_max(g, pa).value, r.value, 1e-9);
  }
  const auto merged = reweight_path(g, px, r.channel, amax);
  EXPECT_EQ(equivalence_classes(g, merged, inner_max(g, merged).channel).classes.size(), 1u);
}

TEST(GraphJson, RoundTripAndLabels) {
  const auto j = nlohmann::json::parse(R"({"left":["x","y"],"right":["u","v","w"],
      "edges":[["x","u"],["x","v"],["x","w"],["y","u"],["y","v"],["y","w"]]})");
  const auto g = graph_from_json(j);
  EXPECT_EQ(mu_combinatorial(g).mu.str(), "3/2");
  EXPECT_EQ(graph_from_json(to_json(g)).edges(), g.edges());
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"left":["x"],"right":["u"],"edges":[["x","q"]]})")),
               InvalidArgumentError);
}
