#pragma once

// Registry of sumset and entropy inequalities with seeded instance generators,
// fuzzing, and the witness search showing d_HR and d_R are not ordered.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroset/coupling.hpp"
#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/group.hpp"
#include "entroset/magnification.hpp"
#include "entroset/markov.hpp"
#include "entroset/rng.hpp"

namespace entroset {

enum class GroupPolicy { kTorsionFreeOnly, kAnyAbelian };

inline const char* policy_name(GroupPolicy p) {
  return p == GroupPolicy::kTorsionFreeOnly ? "torsion-free-only" : "any-abelian";
}

struct HarnessConfig {
  std::size_t max_support = 5;
  std::int64_t radius = 3;        // coordinate box [-R, R]^d for torsion-free groups
  std::int64_t denominator = 64;  // probabilities are multiples of 1/denominator
  double tol = 1e-8;              // coupling-solver duality-gap target
  std::size_t max_chain = 4;
};

inline nlohmann::json to_json(const HarnessConfig& c) {
  return {{"max_support", c.max_support},
          {"radius", c.radius},
          {"denominator", c.denominator},
          {"tol", c.tol},
          {"max_chain", c.max_chain}};
}

// Generators. Every draw is deterministic in the Rng state.

/// 50% Z, 25% Z^2, 25% Z_m (m in 2..7); torsion-free policies redistribute to Z (2/3) and Z^2 (1/3).
inline GroupSpec random_group(Rng& rng, GroupPolicy policy) {
  if (policy == GroupPolicy::kTorsionFreeOnly) {
    return rng.uniform_int(0, 2) < 2 ? GroupSpec::integers(1) : GroupSpec::integers(2);
  }
  const auto r = rng.uniform_int(0, 3);
  if (r < 2) return GroupSpec::integers(1);
  if (r == 2) return GroupSpec::integers(2);
  return GroupSpec::cyclic(rng.uniform_int(2, 7));
}

inline Element random_element(Rng& rng, const GroupSpec& g, std::int64_t radius) {
  Element e;
  for (auto m : g.moduli()) e.coords.push_back(m == 0 ? rng.uniform_int(-radius, radius) : rng.uniform_int(0, m - 1));
  return e;
}

inline std::size_t group_box_size(const GroupSpec& g, std::int64_t radius) {
  std::size_t n = 1;
  for (auto m : g.moduli()) n *= static_cast<std::size_t>(m == 0 ? 2 * radius + 1 : m);
  return n;
}

/// Uniformly sized (1..max_support) random subset of the coordinate box.
inline FiniteSet random_set(Rng& rng, const GroupSpec& g, const HarnessConfig& cfg, std::size_t max_size = 0) {
  if (max_size == 0) max_size = cfg.max_support;
  max_size = std::min(max_size, group_box_size(g, cfg.radius));
  const auto k = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_size)));
  std::set<Element> picked;
  while (picked.size() < k) picked.insert(make_element(g, random_element(rng, g, cfg.radius).coords));
  return FiniteSet(g, std::vector<Element>(picked.begin(), picked.end()));
}

/// Positive integer weights summing to `total` (k <= total).
inline std::vector<std::int64_t> random_composition(Rng& rng, std::int64_t total, std::size_t k) {
  std::vector<std::int64_t> w(k, 1);
  for (std::int64_t left = total - static_cast<std::int64_t>(k); left > 0; --left) {
    ++w[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))];
  }
  return w;
}

/// Distribution on a random set with probabilities in (1/denominator) Z.
inline Dist random_dist(Rng& rng, const GroupSpec& g, const HarnessConfig& cfg, std::size_t max_size = 0) {
  const auto s = random_set(rng, g, cfg, std::min<std::size_t>(max_size == 0 ? cfg.max_support : max_size,
                                                                static_cast<std::size_t>(cfg.denominator)));
  const auto w = random_composition(rng, cfg.denominator, s.size());
  std::vector<double> p;
  for (auto x : w) p.push_back(static_cast<double>(x) / static_cast<double>(cfg.denominator));
  return Dist(g, std::vector<Element>(s.elements().begin(), s.elements().end()), p);
}

/// Law of (X, Y) from a random non-negative integer matrix on A x B, normalised.
inline JointDist random_joint(Rng& rng, const GroupSpec& g, const HarnessConfig& cfg, std::size_t max_size = 0) {
  while (true) {
    const auto a = random_set(rng, g, cfg, max_size);
    const auto b = random_set(rng, g, cfg, max_size);
    std::vector<Label> rows;
    std::vector<std::int64_t> w;
    std::int64_t total = 0;
    for (const auto& x : a.elements()) {
      for (const auto& y : b.elements()) {
        const auto v = rng.bernoulli(0.3) ? 0 : rng.uniform_int(1, 8);
        if (v == 0) continue;
        Label r = x.coords;
        r.insert(r.end(), y.coords.begin(), y.coords.end());
        rows.push_back(std::move(r));
        w.push_back(v);
        total += v;
      }
    }
    if (total == 0) continue;
    std::vector<double> p;
    for (auto v : w) p.push_back(static_cast<double>(v) / static_cast<double>(total));
    return JointDist::from_atoms({g.dim(), g.dim()}, rows, p);
  }
}

inline JointDist as_joint(const Dist& d) { return JointDist::from_dist(d); }

/// Random bipartite graph without isolated vertices, sides of size 1..max_side.
inline BipartiteGraph random_bipartite_graph(Rng& rng, std::size_t max_side, double density = 0.4) {
  while (true) {
    const auto na = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_side)));
    const auto nb = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_side)));
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b)
        if (rng.bernoulli(density)) e.emplace_back(a, b);
    try {
      return BipartiteGraph::from_edges(na, nb, e);
    } catch (const InvalidArgumentError&) {
    }
  }
}

/// kind in {set, dist, joint-dist, graph}.
inline nlohmann::json generate_instance(const std::string& kind, std::uint64_t seed, const HarnessConfig& cfg = {}) {
  Rng rng(seed);
  if (kind == "graph") return to_json(random_bipartite_graph(rng, cfg.max_support));
  const auto g = random_group(rng, GroupPolicy::kAnyAbelian);
  if (kind == "set") return to_json(random_set(rng, g, cfg));
  if (kind == "dist") return to_json(random_dist(rng, g, cfg));
  if (kind == "joint-dist") {
    auto j = to_json(random_joint(rng, g, cfg));
    j["group"] = to_json(g);
    return j;
  }
  throw InvalidArgumentError("unknown instance kind '" + kind + "'");
}

// Registry.

struct Trial {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;           // identity residual carried alongside (0 when none)
  std::optional<bool> exact_holds;  // integer comparisons decide violation exactly
  nlohmann::json instance;
};

struct InequalitySpec {
  std::string id;
  std::string statement;
  GroupPolicy policy = GroupPolicy::kAnyAbelian;
  bool solver_dependent = false;
  bool identity = false;  // lhs is a residual, rhs is 0
  std::function<Trial(Rng&, const GroupSpec&, const HarnessConfig&)> evaluate;
};

inline constexpr double kSlackThreshold = 1e-9;
inline constexpr double kIdentityThreshold = 1e-10;

namespace detail {

inline double logn(std::size_t n) { return std::log(static_cast<double>(n)); }

inline double maxent(const Dist& a, const Dist& b, const LinearForm& f, const HarnessConfig& cfg) {
  return max_pushforward_entropy(a, b, f, cfg.tol).value;
}

inline nlohmann::json sets_json(std::initializer_list<std::pair<const char*, const FiniteSet*>> xs) {
  nlohmann::json j;
  for (const auto& [k, s] : xs) j[k] = to_json(*s);
  return j;
}

inline nlohmann::json dists_json(std::initializer_list<std::pair<const char*, const Dist*>> xs) {
  nlohmann::json j;
  for (const auto& [k, d] : xs) j[k] = to_json(*d);
  return j;
}

inline nlohmann::json joint_json(const GroupSpec& g, const JointDist& j) {
  auto out = to_json(j);
  out["group"] = to_json(g);
  return out;
}

using Rows = std::vector<std::vector<std::int64_t>>;

inline std::vector<InequalitySpec> build_registry() {
  std::vector<InequalitySpec> r;
  const auto tf = GroupPolicy::kTorsionFreeOnly;
  const auto any = GroupPolicy::kAnyAbelian;

  r.push_back({"ruzsa-triangle-sets", "|B||A-C| <= |A-B||B-C|", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto a = random_set(rng, g, c), b = random_set(rng, g, c), cc = random_set(rng, g, c);
                 const auto lhs = b.size() * sumset(a, cc, Sign::kMinus).size();
                 const auto rhs = sumset(a, b, Sign::kMinus).size() * sumset(b, cc, Sign::kMinus).size();
                 return Trial{logn(lhs), logn(rhs), 0.0, lhs <= rhs, sets_json({{"A", &a}, {"B", &b}, {"C", &cc}})};
               }});
  r.push_back({"ruzsa-sum-sets", "|A||B+C| <= |A+B||A+C|", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto a = random_set(rng, g, c), b = random_set(rng, g, c), cc = random_set(rng, g, c);
                 const auto lhs = a.size() * sumset(b, cc).size();
                 const auto rhs = sumset(a, b).size() * sumset(a, cc).size();
                 return Trial{logn(lhs), logn(rhs), 0.0, lhs <= rhs, sets_json({{"A", &a}, {"B", &b}, {"C", &cc}})};
               }});
  r.push_back({"katz-tao-restricted", "|A -_G B| <= |A|^(2/3) |B|^(2/3) |A +_G B|^(1/2)", tf, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto a0 = random_set(rng, g, c), b0 = random_set(rng, g, c);
                 std::vector<std::pair<Element, Element>> edges;
                 while (edges.empty()) {
                   for (const auto& x : a0.elements())
                     for (const auto& y : b0.elements())
                       if (rng.bernoulli(0.5)) edges.emplace_back(x, y);
                 }
                 std::vector<Element> as, bs;
                 for (const auto& [x, y] : edges) {
                   as.push_back(x);
                   bs.push_back(y);
                 }
                 const FiniteSet a(g, as), b(g, bs);
                 const auto dm = restricted_sumset(a, b, edges, Sign::kMinus).size();
                 const auto dp = restricted_sumset(a, b, edges, Sign::kPlus).size();
                 // |A-_G B|^6 <= |A|^4 |B|^4 |A+_G B|^3, exactly in 128 bits (all sizes <= 25).
                 auto pw = [](unsigned __int128 x, int k) {
                   unsigned __int128 v = 1;
                   for (int i = 0; i < k; ++i) v *= x;
                   return v;
                 };
                 const bool ok = pw(dm, 6) <= pw(a.size(), 4) * pw(b.size(), 4) * pw(dp, 3);
                 nlohmann::json e = nlohmann::json::array();
                 for (const auto& [x, y] : edges) e.push_back({x.coords, y.coords});
                 auto inst = sets_json({{"A", &a}, {"B", &b}});
                 inst["G"] = std::move(e);
                 return Trial{logn(dm), 2.0 / 3.0 * logn(a.size()) + 2.0 / 3.0 * logn(b.size()) + 0.5 * logn(dp), 0.0,
                              ok, inst};
               }});
  r.push_back({"sum-diff-sets", "|A+B||A||B| <= |A-B|^3", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto a = random_set(rng, g, c), b = random_set(rng, g, c);
                 const std::uint64_t s = sumset(a, b).size(), d = sumset(a, b, Sign::kMinus).size();
                 const std::uint64_t lhs = s * a.size() * b.size(), rhs = d * d * d;
                 return Trial{std::log(static_cast<double>(lhs)), std::log(static_cast<double>(rhs)), 0.0, lhs <= rhs,
                              sets_json({{"A", &a}, {"B", &b}})};
               }});
  r.push_back({"gen-ruzsa-sum-diff-sets", "|A||B||C+D| <= |A-B||C-B||A-D|", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto a = random_set(rng, g, c), b = random_set(rng, g, c);
                 const auto cc = random_set(rng, g, c), d = random_set(rng, g, c);
                 const std::uint64_t lhs = a.size() * b.size() * sumset(cc, d).size();
                 const std::uint64_t rhs = sumset(a, b, Sign::kMinus).size() * sumset(cc, b, Sign::kMinus).size() *
                                           sumset(a, d, Sign::kMinus).size();
                 return Trial{std::log(static_cast<double>(lhs)), std::log(static_cast<double>(rhs)), 0.0, lhs <= rhs,
                              sets_json({{"A", &a}, {"B", &b}, {"C", &cc}, {"D", &d}})};
               }});
  r.push_back({"kt-entropy", "H(X-Y) <= 2/3 H(X) + 2/3 H(Y) + 1/2 H(X+Y)", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto j = random_joint(rng, g, c);
                 auto h = [&](Rows rows) { return linear_entropy(j, g, rows); };
                 return Trial{h({{1, -1}}), 2.0 / 3.0 * h({{1, 0}}) + 2.0 / 3.0 * h({{0, 1}}) + 0.5 * h({{1, 1}}), 0.0,
                              std::nullopt, joint_json(g, j)};
               }});
  r.push_back({"kt-mutual-info",
               "1/2 I(X;X-Y) + 1/2 I(Y;X-Y) <= 3/2 I(X;X+Y) + 3/2 I(Y;X+Y) + 3 I(X;Y)", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto j = random_joint(rng, g, c);
                 auto h = [&](Rows rows) { return linear_entropy(j, g, rows); };
                 const double hx = h({{1, 0}}), hy = h({{0, 1}}), hxy = h({{1, 0}, {0, 1}});
                 const double hd = h({{1, -1}}), hs = h({{1, 1}});
                 auto mi = [&](double ha, double hb, double hab) { return ha + hb - hab; };
                 const double ixd = mi(hx, hd, h({{1, 0}, {1, -1}}));
                 const double iyd = mi(hy, hd, h({{0, 1}, {1, -1}}));
                 const double ixs = mi(hx, hs, h({{1, 0}, {1, 1}}));
                 const double iys = mi(hy, hs, h({{0, 1}, {1, 1}}));
                 const double ixy = mi(hx, hy, hxy);
                 return Trial{0.5 * ixd + 0.5 * iyd, 1.5 * ixs + 1.5 * iys + 3.0 * ixy, 0.0, std::nullopt,
                              joint_json(g, j)};
               }});
  r.push_back({"kt-independent", "H(X-Y) <= 3 H(X+Y) - H(X) - H(Y), X independent of Y", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c);
                 const auto j = product(as_joint(x), as_joint(y));
                 auto h = [&](Rows rows) { return linear_entropy(j, g, rows); };
                 return Trial{h({{1, -1}}), 3.0 * h({{1, 1}}) - h({{1, 0}}) - h({{0, 1}}), 0.0, std::nullopt,
                              dists_json({{"X", &x}, {"Y", &y}})};
               }});
  r.push_back({"mmt-independent", "H(Y) + H(X-Z) <= H(X-Y) + H(Y-Z), Y independent of (X,Z)", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto xz = random_joint(rng, g, c);
                 const auto y = random_dist(rng, g, c);
                 const auto j = product(xz, as_joint(y));  // X, Z, Y
                 auto h = [&](Rows rows) { return linear_entropy(j, g, rows); };
                 auto inst = nlohmann::json{{"XZ", joint_json(g, xz)}, {"Y", to_json(y)}};
                 return Trial{h({{0, 0, 1}}) + h({{1, -1, 0}}), h({{1, 0, -1}}) + h({{0, -1, 1}}), 0.0, std::nullopt,
                              inst};
               }});
  r.push_back({"hr-triangle", "H(Y) + max H(X-Z) <= max H(X-Y) + max H(Y-Z)", tf, true, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c), z = random_dist(rng, g, c);
                 const auto d = LinearForm::difference();
                 return Trial{y.entropy() + maxent(x, z, d, c), maxent(x, y, d, c) + maxent(y, z, d, c), 0.0,
                              std::nullopt, dists_json({{"X", &x}, {"Y", &y}, {"Z", &z}})};
               }});
  r.push_back({"max-coupling-sum", "H(X) + max H(Y+Z) <= max H(X+Y) + max H(X+Z)", tf, true, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c), z = random_dist(rng, g, c);
                 const auto s = LinearForm::sum();
                 return Trial{x.entropy() + maxent(y, z, s, c), maxent(x, y, s, c) + maxent(x, z, s, c), 0.0,
                              std::nullopt, dists_json({{"X", &x}, {"Y", &y}, {"Z", &z}})};
               }});
  r.push_back({"prop1-sum-diff", "H(X1,Y1) + H(X2,Y2) + H(X3+Y3) <= H(X1-Y1) + H(X1, Y2, X2-Y3, X3-Y1)", any,
               false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto pxy = random_joint(rng, g, c);
                 const auto p3 = random_joint(rng, g, c);
                 const auto e = sum_diff_entropies(g, build_sum_diff_coupling(g, pxy, p3));
                 return Trial{e.coupled_lhs, e.coupled_rhs, 0.0, std::nullopt,
                              {{"XY", joint_json(g, pxy)}, {"X3Y3", joint_json(g, p3)}}};
               }});
  r.push_back({"cor6-sum-diff", "H(X2) + H(Y1) + H(X3+Y3) <= H(X1-Y1) + H(X3-Y1) + H(X2-Y3)", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c);
                 const auto p3 = random_joint(rng, g, c);
                 const auto e = sum_diff_entropies(g, build_sum_diff_coupling(g, product(as_joint(x), as_joint(y)), p3));
                 auto inst = dists_json({{"X", &x}, {"Y", &y}});
                 inst["X3Y3"] = joint_json(g, p3);
                 return Trial{e.marginal_lhs, e.marginal_rhs, 0.0, std::nullopt, inst};
               }});
  r.push_back({"cor8-four-marginal", "H(X) + H(Y) + max H(U+V) <= max H(X-Y) + max H(X-U) + max H(V-Y)", tf, true,
               false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c);
                 const auto u = random_dist(rng, g, c), v = random_dist(rng, g, c);
                 const auto d = LinearForm::difference();
                 return Trial{x.entropy() + y.entropy() + maxent(u, v, LinearForm::sum(), c),
                              maxent(x, y, d, c) + maxent(x, u, d, c) + maxent(v, y, d, c), 0.0, std::nullopt,
                              dists_json({{"X", &x}, {"Y", &y}, {"U", &u}, {"V", &v}})};
               }});
  r.push_back({"remark-sum-diff-entropic", "H(X) + H(Y) + max H(X+Y) <= 3 max H(X-Y)", tf, true, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto x = random_dist(rng, g, c), y = random_dist(rng, g, c);
                 return Trial{x.entropy() + y.entropy() + maxent(x, y, LinearForm::sum(), c),
                              3.0 * maxent(x, y, LinearForm::difference(), c), 0.0, std::nullopt,
                              dists_json({{"X", &x}, {"Y", &y}})};
               }});
  r.push_back({"copy-identity", "H(X_1..X_n) + sum H(U_i) = sum H(X_i) and the chain-rule form", any, false, true,
               [](Rng& rng, const GroupSpec&, const HarnessConfig& c) {
                 const auto n = static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(c.max_chain)));
                 const auto spec = random_chain_spec(rng, n, static_cast<std::int64_t>(std::min<std::size_t>(c.max_support, 4)));
                 const double res = std::max(verify_copy_identity(spec), verify_chain_rule_identity(spec));
                 nlohmann::json m = nlohmann::json::array();
                 for (const auto& x : spec.marginals) m.push_back(to_json(x));
                 return Trial{res, 0.0, res, std::nullopt, {{"marginals", m}}};
               }});
  r.push_back({"lemma2-count", "|C| prod |B_i| >= |A|^n", any, false, false,
               [](Rng& rng, const GroupSpec&, const HarnessConfig& c) {
                 const auto a = rng.uniform_int(1, static_cast<std::int64_t>(c.max_support));
                 const auto n = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(c.max_chain)));
                 const auto uc = random_uniform_chain(rng, n, a, rng.uniform_int(1, static_cast<std::int64_t>(c.max_support)));
                 std::uint64_t lhs = 1;
                 for (std::size_t i = 0; i < n; ++i) lhs *= static_cast<std::uint64_t>(a);
                 std::uint64_t rhs = chain_joint(uc.spec).size();
                 for (auto b : uc.image_sizes) rhs *= b;
                 return Trial{std::log(static_cast<double>(lhs)), std::log(static_cast<double>(rhs)), 0.0, lhs <= rhs,
                              {{"A", a}, {"n", n}, {"image_sizes", uc.image_sizes}}};
               }});
  r.push_back({"appendix-a-chain", "5 H(X,Y) - 4 H(X) - 4 H(Y) - 3 H(X+Y) + H(X-Y) <= 0", any, false, false,
               [](Rng& rng, const GroupSpec& g, const HarnessConfig& c) {
                 const auto pxy = random_joint(rng, g, c, std::min<std::size_t>(c.max_support, 3));
                 const auto rep = build_appendix_a_chain(g, pxy);
                 const double residual = std::max(rep.triple_residual, rep.chain_residual);
                 return Trial{rep.final_value, 0.0, residual, rep.upper_slack >= -kSlackThreshold ? std::nullopt : std::optional<bool>(false),
                              joint_json(g, pxy)};
               }});
  return r;
}

}  // namespace detail

inline const std::vector<InequalitySpec>& registry() {
  static const std::vector<InequalitySpec> r = detail::build_registry();
  return r;
}

inline const InequalitySpec& find_inequality(const std::string& id) {
  for (const auto& s : registry()) {
    if (s.id == id) return s;
  }
  throw InvalidArgumentError("unknown inequality id '" + id + "'");
}

inline std::vector<std::string> registry_ids() {
  std::vector<std::string> ids;
  for (const auto& s : registry()) ids.push_back(s.id);
  return ids;
}

struct SuiteReport {
  std::string id;
  std::string statement;
  std::string policy;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();  // min over trials of rhs - lhs
  double max_residual = 0.0;
  std::uint64_t violations = 0;
  nlohmann::json worst_instance;
  std::uint64_t worst_trial = 0;
  HarnessConfig config;
};

inline nlohmann::json to_json(const SuiteReport& r) {
  return {{"id", r.id},
          {"statement", r.statement},
          {"policy", r.policy},
          {"trials", r.trials},
          {"seed", r.seed},
          {"threshold", r.threshold},
          {"min_slack", r.min_slack},
          {"max_residual", r.max_residual},
          {"violations", r.violations},
          {"worst_trial", r.worst_trial},
          {"worst_instance", r.worst_instance},
          {"config", to_json(r.config)}};
}

/// Violation threshold on rhs - lhs for an id under a config.
inline double slack_threshold(const InequalitySpec& s, const HarnessConfig& cfg) {
  if (s.identity) return -kIdentityThreshold;
  return s.solver_dependent ? -10.0 * cfg.tol : -kSlackThreshold;
}

/// Evaluates trial t of a run; the trial seed depends only on (seed, t).
inline Trial run_trial(const InequalitySpec& s, std::uint64_t seed, std::uint64_t t, const HarnessConfig& cfg,
                       const std::optional<GroupSpec>& group = std::nullopt) {
  Rng rng(derive_seed(seed, t));
  const auto g = group ? *group : random_group(rng, s.policy);
  if (s.policy == GroupPolicy::kTorsionFreeOnly) require_torsion_free(g, s.id.c_str());
  auto trial = s.evaluate(rng, g, cfg);
  trial.instance["group"] = to_json(g);
  return trial;
}

inline bool is_violation(const InequalitySpec& s, const Trial& t, const HarnessConfig& cfg) {
  if (t.residual > kIdentityThreshold) return true;
  if (t.exact_holds) return !*t.exact_holds;
  return t.rhs - t.lhs < slack_threshold(s, cfg);
}

/// `group` pins every trial to one group; a torsion-free-only id rejects torsion with TorsionError.
/// Trials are split into contiguous chunks over `jobs` threads; the merge keeps the earliest
/// trial among equal slacks, so the report does not depend on `jobs`.
inline SuiteReport run_suite(const std::string& id, std::uint64_t trials, std::uint64_t seed,
                             const HarnessConfig& cfg = {}, const std::optional<GroupSpec>& group = std::nullopt,
                             unsigned jobs = 1) {
  const auto& s = find_inequality(id);
  if (group && s.policy == GroupPolicy::kTorsionFreeOnly) require_torsion_free(*group, id.c_str());
  SuiteReport rep;
  rep.id = s.id;
  rep.statement = s.statement;
  rep.policy = policy_name(s.policy);
  rep.trials = trials;
  rep.seed = seed;
  rep.threshold = slack_threshold(s, cfg);
  rep.config = cfg;

  struct Partial {
    double min_slack = std::numeric_limits<double>::infinity();
    std::uint64_t worst = 0;
    nlohmann::json instance;
    double max_residual = 0.0;
    std::uint64_t violations = 0;
    std::exception_ptr error;
  };
  auto run_range = [&](std::uint64_t lo, std::uint64_t hi, Partial& p) {
    try {
      for (std::uint64_t t = lo; t < hi; ++t) {
        auto trial = run_trial(s, seed, t, cfg, group);
        const double slack = trial.rhs - trial.lhs;
        p.max_residual = std::max(p.max_residual, trial.residual);
        if (is_violation(s, trial, cfg)) ++p.violations;
        if (slack < p.min_slack) {
          p.min_slack = slack;
          p.worst = t;
          p.instance = std::move(trial.instance);
        }
      }
    } catch (...) {
      p.error = std::current_exception();
    }
  };

  jobs = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(jobs, std::max<std::uint64_t>(trials, 1))));
  std::vector<Partial> parts(jobs);
  if (jobs == 1) {
    run_range(0, trials, parts[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back(run_range, trials * w / jobs, trials * (w + 1) / jobs, std::ref(parts[w]));
    }
    for (auto& th : pool) th.join();
  }
  for (auto& p : parts) {
    if (p.error) std::rethrow_exception(p.error);
    rep.max_residual = std::max(rep.max_residual, p.max_residual);
    rep.violations += p.violations;
    if (p.min_slack < rep.min_slack) {
      rep.min_slack = p.min_slack;
      rep.worst_trial = p.worst;
      rep.worst_instance = std::move(p.instance);
    }
  }
  return rep;
}

// Witnesses that d_HR and d_R are not ordered.

struct OrderingWitness {
  FiniteSet a;
  FiniteSet b;
  Dist px;
  Dist py;
  std::optional<JointDist> joint;  // the uniform-on-differences coupling for the second kind
  double d_r = 0.0;
  double d_hr = 0.0;        // solver
  double d_hr_grid = 0.0;   // grid oracle at resolution 1e-3
  double solver_gap = 0.0;
  std::uint64_t trial = 0;
};

struct OrderingWitnesses {
  std::optional<OrderingWitness> below;  // d_HR < d_R - margin, uniform marginals
  std::optional<OrderingWitness> above;  // d_HR > d_R + margin, marginals of a uniform-on-differences joint
  std::uint64_t trials_used = 0;
  [[nodiscard]] bool complete() const { return below.has_value() && above.has_value(); }
};

inline constexpr double kWitnessMargin = 1e-3;

namespace detail {
inline double grid_d_hr(const Dist& px, const Dist& py) {
  return grid_oracle(px, py, LinearForm::difference(), 1e-3) - 0.5 * px.entropy() - 0.5 * py.entropy();
}

inline Dist dist_from_counts(const GroupSpec& g, const std::map<Element, int>& counts, int total) {
  std::vector<Element> s;
  std::vector<double> p;
  for (const auto& [e, c] : counts) {
    s.push_back(e);
    p.push_back(static_cast<double>(c) / total);
  }
  return Dist::from_weights(g, s, p);
}
}  // namespace detail

/// Seeded search over subsets of Z of size <= 3 (grid-checkable). The first kind needs the
/// solver's upper bound value + gap below d_R - margin; the second needs the grid lower bound
/// above d_R + margin.
inline OrderingWitnesses ordering_witnesses(std::uint64_t budget, std::uint64_t seed, double tol = 1e-9) {
  if (budget == 0) throw InvalidArgumentError("witness budget must be positive");
  const auto g = GroupSpec::integers(1);
  HarnessConfig cfg;
  cfg.max_support = 3;
  OrderingWitnesses out;
  for (std::uint64_t t = 0; t < budget && !out.complete(); ++t) {
    out.trials_used = t + 1;
    Rng rng(derive_seed(seed, t));
    const auto a = random_set(rng, g, cfg);
    const auto b = random_set(rng, g, cfg);
    if (!out.below) {
      const auto px = Dist::uniform(a);
      const auto py = Dist::uniform(b);
      const double dr = ruzsa_distance(a, b);
      const auto res = max_pushforward_entropy(px, py, LinearForm::difference(), tol);
      const double dhr = res.value - 0.5 * px.entropy() - 0.5 * py.entropy();
      if (dhr + res.duality_gap < dr - kWitnessMargin) {
        const double grid = detail::grid_d_hr(px, py);
        if (grid < dr - kWitnessMargin) out.below = OrderingWitness{a, b, px, py, std::nullopt, dr, dhr, grid, res.duality_gap, t};
      }
    }
    if (!out.above) {
      // One random representative pair per difference, joint uniform over them.
      std::map<Element, std::vector<std::pair<Element, Element>>> reps;
      for (const auto& x : a.elements())
        for (const auto& y : b.elements()) reps[subtract(g, x, y)].emplace_back(x, y);
      std::map<Element, int> cx, cy;
      std::vector<Label> rows;
      for (const auto& [d, pairs] : reps) {
        const auto& [x, y] = pairs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pairs.size()) - 1))];
        ++cx[x];
        ++cy[y];
        rows.push_back({x.coords[0], y.coords[0]});
      }
      const int total = static_cast<int>(reps.size());
      const auto px = detail::dist_from_counts(g, cx, total);
      const auto py = detail::dist_from_counts(g, cy, total);
      const auto sa = px.support_set();
      const auto sb = py.support_set();
      const double dr = ruzsa_distance(sa, sb);
      const auto res = max_pushforward_entropy(px, py, LinearForm::difference(), tol);
      const double dhr = res.value - 0.5 * px.entropy() - 0.5 * py.entropy();
      if (dhr > dr + kWitnessMargin) {
        const double grid = detail::grid_d_hr(px, py);
        if (grid > dr + kWitnessMargin) {
          auto joint = JointDist::from_atoms({1, 1}, rows, std::vector<double>(rows.size(), 1.0 / total));
          out.above = OrderingWitness{sa, sb, px, py, std::move(joint), dr, dhr, grid, res.duality_gap, t};
        }
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const OrderingWitness& w) {
  nlohmann::json j{{"A", to_json(w.a)},         {"B", to_json(w.b)},          {"PX", to_json(w.px)},
                   {"PY", to_json(w.py)},       {"d_r", w.d_r},               {"d_hr", w.d_hr},
                   {"d_hr_grid", w.d_hr_grid},  {"solver_gap", w.solver_gap}, {"trial", w.trial}};
  if (w.joint) j["joint"] = to_json(*w.joint);
  return j;
}

inline nlohmann::json to_json(const OrderingWitnesses& w) {
  return {{"below", w.below ? to_json(*w.below) : nlohmann::json()},
          {"above", w.above ? to_json(*w.above) : nlohmann::json()},
          {"trials_used", w.trials_used},
          {"complete", w.complete()}};
}

}  // namespace entroset
