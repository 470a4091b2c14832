#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "entroset/entropy.hpp"
#include "entroset/group.hpp"
#include "entroset/rng.hpp"

using namespace entroset;

namespace {

FiniteSet ints(std::initializer_list<std::int64_t> v) { return FiniteSet::of_integers(v); }

FiniteSet random_set(Rng& rng, const GroupSpec& g, std::int64_t radius, std::size_t max_size) {
  const auto size = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_size)));
  std::vector<Element> els;
  for (std::size_t i = 0; i < size; ++i) {
    std::vector<std::int64_t> c(g.dim());
    for (auto& x : c) x = rng.uniform_int(-radius, radius);
    els.push_back(Element{c});
  }
  return FiniteSet(g, els);
}

// Brute-force |{a - b}| via std::set of raw integer pairs.
std::size_t naive_diff_size_1d(const FiniteSet& a, const FiniteSet& b) {
  std::set<std::int64_t> out;
  for (const auto& x : a.elements())
    for (const auto& y : b.elements()) out.insert(x.coords[0] - y.coords[0]);
  return out.size();
}

}  // namespace

TEST(GroupSpec, RejectsBadModuli) {
  EXPECT_THROW(GroupSpec(std::vector<std::int64_t>{}), InvalidArgumentError);
  EXPECT_THROW(GroupSpec(std::vector<std::int64_t>{-1}), InvalidArgumentError);
  EXPECT_TRUE(GroupSpec::integers(2).torsion_free());
  EXPECT_FALSE(GroupSpec(std::vector<std::int64_t>{0, 5}).torsion_free());
}

TEST(Element, CyclicReductionIsCanonical) {
  const auto g = GroupSpec::cyclic(5);
  EXPECT_EQ(make_element(g, {-1}), make_element(g, {4}));
  EXPECT_EQ(make_element(g, {12}).coords[0], 2);
  EXPECT_THROW(make_element(g, {1, 2}), GroupMismatchError);
}

TEST(Sumset, SingletonTranslation) {
  EXPECT_EQ(sumset(ints({0}), ints({5})), ints({5}));
}

TEST(Sumset, SmallSum) {
  EXPECT_EQ(sumset(ints({0, 1}), ints({0, 1})), ints({0, 1, 2}));
}

TEST(Sumset, DifferenceSet) {
  const auto d = sumset(ints({0, 1, 3}), ints({0, 2}), Sign::kMinus);
  EXPECT_EQ(d, ints({-2, -1, 0, 1, 3}));
  EXPECT_EQ(d.size(), 5u);
}

TEST(Sumset, Errors) {
  EXPECT_THROW(sumset(ints({0}), FiniteSet::of_integers({0}, GroupSpec::cyclic(3))), GroupMismatchError);
  EXPECT_THROW(sumset(ints({0}), FiniteSet(GroupSpec::integers(), {})), InvalidArgumentError);
}

TEST(Sumset, CyclicWraps) {
  const auto g = GroupSpec::cyclic(5);
  EXPECT_EQ(sumset(FiniteSet::of_integers({3, 4}, g), FiniteSet::of_integers({2}, g)),
            FiniteSet::of_integers({0, 1}, g));
}

TEST(LinearImage, Examples) {
  const std::vector<FiniteSet> two{ints({0, 1}), ints({0, 1})};
  EXPECT_EQ(linear_image(LinearForm({1, 2}), two), ints({0, 1, 2, 3}));
  const std::vector<FiniteSet> one{ints({7})};
  EXPECT_EQ(linear_image(LinearForm({1}), one), ints({7}));
  EXPECT_EQ(linear_image(LinearForm::difference(), two), ints({-1, 0, 1}));
  EXPECT_THROW(linear_image(LinearForm({1, 1, 1}), two), InvalidArgumentError);
}

TEST(LinearImage, ZeroCoefficientsSkipSets) {
  const std::vector<FiniteSet> sets{ints({0, 5}), ints({1, 2})};
  EXPECT_EQ(linear_image(LinearForm({1, 0, -1}), sets), ints({-2, -1, 3, 4}));
}

TEST(RestrictedSumset, Examples) {
  const auto a = ints({0, 1});
  std::vector<std::pair<Element, Element>> g{{Element{{0}}, Element{{0}}}, {Element{{1}}, Element{{1}}}};
  EXPECT_EQ(restricted_sumset(a, a, g), ints({0, 2}));

  const auto a2 = ints({0, 1, 3});
  const auto b2 = ints({0, 2});
  std::vector<std::pair<Element, Element>> g2{
      {Element{{0}}, Element{{2}}}, {Element{{1}}, Element{{2}}}, {Element{{3}}, Element{{0}}}};
  EXPECT_EQ(restricted_sumset(a2, b2, g2, Sign::kMinus), ints({-2, -1, 3}));

  std::vector<std::pair<Element, Element>> full;
  for (const auto& x : a2.elements())
    for (const auto& y : b2.elements()) full.emplace_back(x, y);
  EXPECT_EQ(restricted_sumset(a2, b2, full, Sign::kMinus), sumset(a2, b2, Sign::kMinus));
  EXPECT_EQ(restricted_sumset(a2, b2, full), sumset(a2, b2));

  std::vector<std::pair<Element, Element>> bad{{Element{{2}}, Element{{0}}}};
  EXPECT_THROW(restricted_sumset(a2, b2, bad), InvalidArgumentError);
}

TEST(RuzsaDistance, Examples) {
  EXPECT_DOUBLE_EQ(ruzsa_distance(ints({0}), ints({0})), 0.0);
  EXPECT_NEAR(ruzsa_distance(ints({0, 1}), ints({0, 1})), std::log(1.5), 1e-15);
  EXPECT_THROW(ruzsa_distance(ints({0}), FiniteSet(GroupSpec::integers(), {})), InvalidArgumentError);
}

TEST(RuzsaDistance, SymmetricAndNonNegativeOnSelf) {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto g = t % 3 == 0 ? GroupSpec::cyclic(6) : GroupSpec::integers(1 + t % 2);
    const auto a = random_set(rng, g, 4, 6);
    const auto b = random_set(rng, g, 4, 6);
    EXPECT_EQ(ruzsa_distance(a, b), ruzsa_distance(b, a));
    EXPECT_GE(ruzsa_distance(a, a), 0.0);
  }
}

TEST(Sumset, MatchesNaiveEnumeration) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_set(rng, GroupSpec::integers(), 6, 6);
    const auto b = random_set(rng, GroupSpec::integers(), 6, 6);
    EXPECT_EQ(sumset(a, b, Sign::kMinus).size(), naive_diff_size_1d(a, b));
  }
}

TEST(Sumset, TorsionFreeLowerBound) {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    const auto g = GroupSpec::integers(1 + t % 2);
    const auto a = random_set(rng, g, 3, 6);
    const auto b = random_set(rng, g, 3, 6);
    const auto m = std::max(a.size(), b.size());
    EXPECT_GE(sumset(a, b).size(), m);
    EXPECT_GE(sumset(a, b, Sign::kMinus).size(), m);
  }
}

TEST(Sumset, RuzsaTriangleThousandInstances) {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto g = GroupSpec::integers(1 + t % 2);
    const auto a = random_set(rng, g, 3, 5);
    const auto b = random_set(rng, g, 3, 5);
    const auto c = random_set(rng, g, 3, 5);
    const auto lhs = b.size() * sumset(a, c, Sign::kMinus).size();
    const auto rhs = sumset(a, b, Sign::kMinus).size() * sumset(b, c, Sign::kMinus).size();
    ASSERT_LE(lhs, rhs) << "trial " << t;
  }
}

TEST(Flatten, Examples) {
  const auto one = FiniteSet(GroupSpec::integers(), {Element{{0}}, Element{{4}}});
  EXPECT_EQ(flatten(one, 2), ints({0, 4}));
  EXPECT_EQ(flatten(one, 17), ints({0, 4}));

  const auto two = FiniteSet(GroupSpec::integers(2), {Element{{0, 0}}, Element{{1, 1}}});
  EXPECT_EQ(flatten(two, 3), ints({0, 4}));
  EXPECT_THROW(flatten(FiniteSet::of_integers({1}, GroupSpec::cyclic(3)), 3), TorsionError);
}

TEST(ChooseQ, SingletonsAcceptFirstCandidate) {
  const std::vector<FiniteSet> sets{FiniteSet(GroupSpec::integers(2), {Element{{1, -2}}})};
  const std::vector<LinearForm> forms{LinearForm({1})};
  EXPECT_EQ(choose_q(sets, forms), 5);
}

TEST(ChooseQ, IdentityFormOnDiagonal) {
  const std::vector<FiniteSet> sets{FiniteSet(GroupSpec::integers(2), {Element{{0, 0}}, Element{{1, 1}}})};
  const std::vector<LinearForm> forms{LinearForm({1})};
  const auto q = choose_q(sets, forms);
  EXPECT_GE(q, 3);
  for (std::int64_t r = 3; r < 40; ++r) EXPECT_TRUE(psi_injective(sets[0], r));
}

TEST(ChooseQ, AdversarialSetDoublesPastCollision) {
  const std::int64_t k = 6;
  const FiniteSet s(GroupSpec::integers(2), {Element{{0, k}}, Element{{k, 0}}});
  // psi_q(0,k) = kq and psi_q(k,0) = k collide only at q = 1; a larger coordinate
  // pattern is needed for a genuine small-q collision.
  const FiniteSet t(GroupSpec::integers(2), {Element{{0, 1}}, Element{{k, 0}}});
  EXPECT_FALSE(psi_injective(t, k, 1));
  const std::vector<FiniteSet> sets{t};
  const std::vector<LinearForm> forms{LinearForm({1})};
  const auto q = choose_q(sets, forms, 1, k);
  EXPECT_TRUE(psi_injective(t, q));
  EXPECT_GT(q, k);
  EXPECT_EQ(q, 2 * k);
  EXPECT_TRUE(psi_injective(s, choose_q(std::vector<FiniteSet>{s}, forms)));
  EXPECT_THROW(choose_q(std::vector<FiniteSet>{FiniteSet::of_integers({1}, GroupSpec::cyclic(4))}, forms),
               TorsionError);
}

TEST(Flatten, PreservesSumsetCardinality) {
  Rng rng(77);
  const std::vector<LinearForm> forms{LinearForm::sum(), LinearForm::difference()};
  for (int t = 0; t < 200; ++t) {
    const auto g = GroupSpec::integers(2 + 2 * (t % 2));
    const auto a = random_set(rng, g, 3, 6);
    const auto b = random_set(rng, g, 3, 6);
    const std::vector<FiniteSet> sets{a, b};
    const auto q = choose_q(sets, forms);
    const auto fa = flatten(a, q);
    const auto fb = flatten(b, q);
    EXPECT_EQ(sumset(a, b).size(), sumset(fa, fb).size());
    EXPECT_EQ(sumset(a, b, Sign::kMinus).size(), sumset(fa, fb, Sign::kMinus).size());
  }
}

TEST(Flatten, BlockDimension) {
  // (Z^2)^2 -> Z^2 with q = 10: ((1,2),(3,4)) -> (31, 42).
  const FiniteSet s(GroupSpec::integers(4), {Element{{1, 2, 3, 4}}});
  const auto f = flatten(s, 10, 2);
  EXPECT_EQ(f.group(), GroupSpec::integers(2));
  EXPECT_EQ(f.elements()[0].coords, (std::vector<std::int64_t>{31, 42}));
}

TEST(Json, SetRoundTrip) {
  const auto s = FiniteSet::of_integers({4, 1, 1}, GroupSpec::cyclic(3));
  const auto j = to_json(s);
  EXPECT_EQ(j.at("elements").size(), 1u);
  EXPECT_EQ(set_from_json(j), s);
}

TEST(Dist, PrunesAndMerges) {
  const auto g = GroupSpec::integers();
  Dist d(g, {Element{{1}}, Element{{0}}, Element{{1}}, Element{{2}}}, {0.25, 0.5, 0.25, 0.0});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.support()[0].coords[0], 0);
  EXPECT_DOUBLE_EQ(d.probs()[1], 0.5);
  EXPECT_NEAR(d.entropy(), std::log(2.0), 1e-15);
  EXPECT_THROW(Dist(g, {Element{{0}}}, {0.9}), InvalidArgumentError);
  EXPECT_THROW(Dist(g, {Element{{0}}}, {-1.0}), InvalidArgumentError);
}
