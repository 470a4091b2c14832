#pragma once

// Magnification ratio of a bipartite graph, computed by subset scan and through
// the entropic min-max characterisation, plus the structural checks on optimal
// channels (KKT certificate, equivalence classes, class reweighting).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/rng.hpp"

namespace entroset {

/// Bipartite graph G on A x B. Vertices are indices; labels are kept for I/O.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  BipartiteGraph(std::vector<std::string> left, std::vector<std::string> right,
                 std::vector<std::pair<std::size_t, std::size_t>> edges)
      : left_(std::move(left)), right_(std::move(right)), adj_(left_.size()) {
    if (left_.empty() || right_.empty()) throw InvalidArgumentError("graph sides must be nonempty");
    std::vector<bool> right_hit(right_.size(), false);
    for (auto [a, b] : edges) {
      if (a >= left_.size() || b >= right_.size()) throw InvalidArgumentError("edge endpoint out of range");
      adj_[a].push_back(b);
      right_hit[b] = true;
    }
    for (std::size_t a = 0; a < adj_.size(); ++a) {
      auto& n = adj_[a];
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
      if (n.empty()) throw InvalidArgumentError("left vertex '" + left_[a] + "' is isolated");
    }
    for (std::size_t b = 0; b < right_.size(); ++b) {
      if (!right_hit[b]) throw InvalidArgumentError("right vertex '" + right_[b] + "' is isolated");
    }
  }

  /// Unlabelled graph with vertices named a1.., b1...
  static BipartiteGraph from_edges(std::size_t n_left, std::size_t n_right,
                                   std::vector<std::pair<std::size_t, std::size_t>> edges) {
    std::vector<std::string> l, r;
    for (std::size_t i = 0; i < n_left; ++i) l.push_back("a" + std::to_string(i + 1));
    for (std::size_t j = 0; j < n_right; ++j) r.push_back("b" + std::to_string(j + 1));
    return BipartiteGraph(std::move(l), std::move(r), std::move(edges));
  }

  static BipartiteGraph complete(std::size_t n_left, std::size_t n_right) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t a = 0; a < n_left; ++a)
      for (std::size_t b = 0; b < n_right; ++b) e.emplace_back(a, b);
    return from_edges(n_left, n_right, std::move(e));
  }

  [[nodiscard]] std::size_t left_size() const noexcept { return left_.size(); }
  [[nodiscard]] std::size_t right_size() const noexcept { return right_.size(); }
  [[nodiscard]] const std::vector<std::string>& left_labels() const noexcept { return left_; }
  [[nodiscard]] const std::vector<std::string>& right_labels() const noexcept { return right_; }
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t a) const { return adj_.at(a); }
  [[nodiscard]] bool has_edge(std::size_t a, std::size_t b) const {
    return std::binary_search(adj_.at(a).begin(), adj_.at(a).end(), b);
  }
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t a = 0; a < adj_.size(); ++a)
      for (auto b : adj_[a]) e.emplace_back(a, b);
    return e;
  }

 private:
  std::vector<std::string> left_;
  std::vector<std::string> right_;
  std::vector<std::vector<std::size_t>> adj_;
};

/// N(S) for S given as a list of left indices; sorted.
inline std::vector<std::size_t> neighborhood(const BipartiteGraph& g, const std::vector<std::size_t>& s) {
  std::vector<bool> hit(g.right_size(), false);
  for (auto a : s) {
    if (a >= g.left_size()) throw InvalidArgumentError("subset index out of range");
    for (auto b : g.neighbors(a)) hit[b] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < hit.size(); ++b)
    if (hit[b]) out.push_back(b);
  return out;
}

/// Non-negative reduced fraction.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio of(std::int64_t n, std::int64_t d) {
    const auto g = std::gcd(n, d);
    return {n / g, d / g};
  }
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  [[nodiscard]] std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct MuResult {
  Ratio mu;
  std::vector<std::size_t> argmin;  // lexicographically least minimising subset
};

inline constexpr std::size_t kMaxExhaustiveLeft = 20;

/// min over nonempty S of |N(S)| / |S|, by scanning all 2^|A| - 1 subsets.
inline MuResult mu_combinatorial(const BipartiteGraph& g) {
  const auto n = g.left_size();
  if (n > kMaxExhaustiveLeft) throw SizeLimitError("subset scan limited to 20 left vertices");
  std::vector<std::uint32_t> nbr_mask(n, 0);
  const bool wide = g.right_size() > 32;
  for (std::size_t a = 0; a < n && !wide; ++a)
    for (auto b : g.neighbors(a)) nbr_mask[a] |= 1u << b;

  MuResult best{{std::numeric_limits<std::int64_t>::max(), 1}, {}};
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1u) s.push_back(a);
    std::int64_t nn;
    if (wide) {
      nn = static_cast<std::int64_t>(neighborhood(g, s).size());
    } else {
      std::uint32_t m = 0;
      for (auto a : s) m |= nbr_mask[a];
      nn = std::popcount(m);
    }
    const auto ss = static_cast<std::int64_t>(s.size());
    // nn/ss vs best.num/best.den
    const auto lhs = static_cast<__int128>(nn) * best.mu.den;
    const auto rhs = static_cast<__int128>(best.mu.num) * ss;
    if (lhs < rhs || (lhs == rhs && s < best.argmin)) {
      best.mu = Ratio::of(nn, ss);
      best.argmin = std::move(s);
    }
  }
  return best;
}

/// Stochastic matrix W(b|a), dense |A| x |B|, vanishing off the edges of a graph.
class Channel {
 public:
  Channel() = default;
  Channel(const BipartiteGraph& g, std::vector<double> w)
      : na_(g.left_size()), nb_(g.right_size()), w_(std::move(w)) {
    if (w_.size() != na_ * nb_) throw InvalidArgumentError("channel matrix has the wrong shape");
    for (std::size_t a = 0; a < na_; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb_; ++b) {
        const double v = w_[a * nb_ + b];
        if (!(v >= 0.0)) throw InvalidArgumentError("channel entries must be non-negative");
        if (v > 0.0 && !g.has_edge(a, b)) throw InvalidArgumentError("channel uses a non-edge");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-12) throw InvalidArgumentError("channel row does not sum to 1");
    }
  }

  static Channel uniform(const BipartiteGraph& g) {
    std::vector<double> w(g.left_size() * g.right_size(), 0.0);
    for (std::size_t a = 0; a < g.left_size(); ++a) {
      const auto& n = g.neighbors(a);
      for (auto b : n) w[a * g.right_size() + b] = 1.0 / static_cast<double>(n.size());
    }
    return Channel(g, std::move(w));
  }

  [[nodiscard]] double operator()(std::size_t a, std::size_t b) const { return w_[a * nb_ + b]; }
  [[nodiscard]] std::span<const double> row(std::size_t a) const { return {w_.data() + a * nb_, nb_}; }
  [[nodiscard]] std::size_t inputs() const noexcept { return na_; }
  [[nodiscard]] std::size_t outputs() const noexcept { return nb_; }

  /// Output law P_Y(b) = sum_a P_X(a) W(b|a).
  [[nodiscard]] std::vector<double> output(std::span<const double> px) const {
    std::vector<double> py(nb_, 0.0);
    for (std::size_t a = 0; a < na_; ++a) {
      if (px[a] == 0.0) continue;
      for (std::size_t b = 0; b < nb_; ++b) py[b] += px[a] * w_[a * nb_ + b];
    }
    return py;
  }

 private:
  std::size_t na_ = 0;
  std::size_t nb_ = 0;
  std::vector<double> w_;
};

namespace detail {
inline void check_input_law(const BipartiteGraph& g, std::span<const double> px) {
  if (px.size() != g.left_size()) throw InvalidArgumentError("input law must have one entry per left vertex");
  double s = 0.0;
  for (double v : px) {
    if (!(v >= 0.0)) throw InvalidArgumentError("input probabilities must be non-negative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw InvalidArgumentError("input law does not sum to 1");
}
}  // namespace detail

struct InnerResult {
  double value = 0.0;  // H(P_Y) - H(P_X), nats
  Channel channel;
  std::vector<double> py;
  double gap = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

struct InnerOptions {
  double tol = 1e-10;
  /// Also required: on every used row, max active P_Y - min neighbour P_Y below this.
  double spread_tol = 1e-12;
  std::size_t max_sweeps = 200000;
};

/// max over G-consistent channels of H(Y) - H(X). Row-wise pairwise Frank-Wolfe:
/// each move shifts mass of one input from its most loaded active output to its
/// least loaded neighbour with the exact line-search step.
inline InnerResult inner_max(const BipartiteGraph& g, std::span<const double> px, const InnerOptions& opt,
                             const Channel* warm = nullptr) {
  detail::check_input_law(g, px);
  const auto na = g.left_size();
  const auto nb = g.right_size();
  std::vector<double> w(na * nb, 0.0);
  if (warm != nullptr) {
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) w[a * nb + b] = (*warm)(a, b);
  } else {
    for (std::size_t a = 0; a < na; ++a) {
      const auto& n = g.neighbors(a);
      for (auto b : n) w[a * nb + b] = 1.0 / static_cast<double>(n.size());
    }
  }
  std::vector<double> py(nb, 0.0);
  for (std::size_t a = 0; a < na; ++a)
    for (auto b : g.neighbors(a)) py[b] += px[a] * w[a * nb + b];

  std::vector<std::size_t> used;
  for (std::size_t a = 0; a < na; ++a)
    if (px[a] > kSupportThreshold) used.push_back(a);

  auto gap_of = [&]() {
    double gap = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      if (px[a] == 0.0) continue;
      double lo = std::numeric_limits<double>::infinity();
      double avg = 0.0;
      for (auto b : g.neighbors(a)) {
        lo = std::min(lo, py[b]);
        if (w[a * nb + b] > 0.0) avg += w[a * nb + b] * std::log(py[b]);
      }
      gap += px[a] * (avg - std::log(lo));
    }
    return std::max(gap, 0.0);
  };

  InnerResult res;
  std::size_t sweep = 0;
  double gap = gap_of();
  for (; sweep < opt.max_sweeps; ++sweep) {
    double worst_spread = 0.0;
    for (auto a : used) {
      const auto& n = g.neighbors(a);
      for (int rep = 0; rep < 4; ++rep) {
        std::size_t hi = nb;
        std::size_t lo = nb;
        for (auto b : n) {
          if (w[a * nb + b] > 0.0 && (hi == nb || py[b] > py[hi])) hi = b;
          if (lo == nb || py[b] < py[lo]) lo = b;
        }
        const double spread = py[hi] - py[lo];
        if (rep == 0) worst_spread = std::max(worst_spread, spread);
        if (spread <= 0.0) break;
        const double t = std::min(w[a * nb + hi], spread / (2.0 * px[a]));
        const double delta = px[a] * t;
        if (t >= w[a * nb + hi]) {
          w[a * nb + lo] += w[a * nb + hi];
          w[a * nb + hi] = 0.0;
        } else {
          w[a * nb + hi] -= t;
          w[a * nb + lo] += t;
        }
        py[hi] -= delta;
        py[lo] += delta;
      }
    }
    if (worst_spread <= opt.spread_tol) {
      gap = gap_of();
      if (gap <= opt.tol) break;
    }
    if ((sweep & 63u) == 63u) {
      // Refresh P_Y to keep incremental rounding from drifting.
      std::fill(py.begin(), py.end(), 0.0);
      for (std::size_t a = 0; a < na; ++a)
        for (auto b : g.neighbors(a)) py[b] += px[a] * w[a * nb + b];
    }
  }
  // Normalise rows exactly and recompute the output law.
  for (std::size_t a = 0; a < na; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < nb; ++b) s += w[a * nb + b];
    for (std::size_t b = 0; b < nb; ++b) w[a * nb + b] /= s;
  }
  res.channel = Channel(g, std::move(w));
  res.py = res.channel.output(px);
  gap = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    if (px[a] == 0.0) continue;
    double lo = std::numeric_limits<double>::infinity();
    double avg = 0.0;
    for (auto b : g.neighbors(a)) {
      lo = std::min(lo, res.py[b]);
      if (res.channel(a, b) > 0.0) avg += res.channel(a, b) * std::log(res.py[b]);
    }
    gap += px[a] * (avg - std::log(lo));
  }
  res.gap = std::max(gap, 0.0);
  res.value = entropy(res.py) - entropy(px);
  res.sweeps = sweep;
  res.converged = res.gap <= opt.tol;
  return res;
}

inline InnerResult inner_max(const BipartiteGraph& g, std::span<const double> px, double tol = 1e-10) {
  InnerOptions opt;
  opt.tol = tol;
  return inner_max(g, px, opt);
}

/// H(Y) - H(X) for a fixed channel.
inline double channel_value(std::span<const double> px, const Channel& w) {
  return entropy(w.output(px)) - entropy(px);
}

struct LambdaResult {
  double value = 0.0;
  std::vector<double> px;
  Channel channel;
  std::vector<std::size_t> argmin_subset;  // support of the returned P_X when it came from the scan
  double exhaustive_value = 0.0;
  double gradient_value = 0.0;
  bool discrepancy = false;
};

namespace detail {

inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    css += u[k];
    const double t = (css - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  double s = 0.0;
  for (auto& x : v) s += (x = std::max(x - theta, 0.0));
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace detail

struct LambdaOptions {
  double tol = 1e-9;
  std::size_t starts = 20;
  std::size_t max_steps = 100;
  std::uint64_t seed = 1;
};

/// min over P_X of max over channels of H(Y) - H(X). The authority is the scan over
/// uniform laws on every nonempty subset; multistart projected gradient descent is a
/// cross-check, and `discrepancy` is set when it beats the scan by more than 10 tol.
inline LambdaResult lambda_entropic(const BipartiteGraph& g, const LambdaOptions& opt = {}) {
  const auto n = g.left_size();
  if (n > kMaxExhaustiveLeft) throw SizeLimitError("subset scan limited to 20 left vertices");
  InnerOptions iopt;
  iopt.tol = opt.tol * 0.1;

  LambdaResult out;
  out.exhaustive_value = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1u) s.push_back(a);
    std::vector<double> px(n, 0.0);
    for (auto a : s) px[a] = 1.0 / static_cast<double>(s.size());
    auto r = inner_max(g, px, iopt);
    const bool better = r.value < out.exhaustive_value - 1e-12;
    const bool tie = std::abs(r.value - out.exhaustive_value) <= 1e-12 && s < out.argmin_subset;
    if (better || tie) {
      out.exhaustive_value = std::min(out.exhaustive_value, r.value);
      out.argmin_subset = std::move(s);
      out.px = std::move(px);
      out.channel = std::move(r.channel);
    }
  }

  Rng rng(opt.seed);
  out.gradient_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_px;
  Channel best_w;
  for (std::size_t start = 0; start < opt.starts; ++start) {
    std::vector<double> px(n, 1.0 / static_cast<double>(n));
    if (start > 0) {
      double s = 0.0;
      for (auto& v : px) s += (v = -std::log(1.0 - rng.uniform01()));
      for (auto& v : px) v /= s;
    }
    auto cur = inner_max(g, px, iopt);
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
      std::vector<double> grad(n);
      for (std::size_t a = 0; a < n; ++a) {
        double e = 0.0;
        for (auto b : g.neighbors(a)) {
          const double wab = cur.channel(a, b);
          if (wab > 0.0) e += wab * std::log(std::max(cur.py[b], 1e-300));
        }
        grad[a] = std::log(std::max(px[a], 1e-300)) - e;
      }
      double eta = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt, eta *= 0.5) {
        std::vector<double> cand(n);
        for (std::size_t a = 0; a < n; ++a) cand[a] = px[a] - eta * grad[a];
        cand = detail::project_to_simplex(std::move(cand));
        double decrease = 0.0;
        for (std::size_t a = 0; a < n; ++a) decrease += grad[a] * (px[a] - cand[a]);
        if (decrease <= 0.0) continue;
        auto next = inner_max(g, cand, iopt, &cur.channel);
        if (next.value <= cur.value - 1e-4 * decrease) {
          moved = cur.value - next.value > 1e-13;
          px = std::move(cand);
          cur = std::move(next);
          break;
        }
      }
      if (!moved) break;
    }
    if (cur.value < out.gradient_value) {
      out.gradient_value = cur.value;
      best_px = px;
      best_w = cur.channel;
    }
  }

  out.value = out.exhaustive_value;
  out.discrepancy = out.gradient_value < out.exhaustive_value - 10.0 * opt.tol;
  if (out.gradient_value < out.exhaustive_value) {
    out.value = out.gradient_value;
    if (out.discrepancy) {
      out.px = std::move(best_px);
      out.channel = std::move(best_w);
      out.argmin_subset.clear();
      for (std::size_t a = 0; a < n; ++a)
        if (out.px[a] > kSupportThreshold) out.argmin_subset.push_back(a);
    }
  }
  return out;
}

inline LambdaResult lambda_entropic(const BipartiteGraph& g, double tol) {
  LambdaOptions opt;
  opt.tol = tol;
  return lambda_entropic(g, opt);
}

struct KktCertificate {
  bool passed = false;
  std::vector<double> lambda;                                  // per input; NaN when P_X(a) = 0
  std::map<std::pair<std::size_t, std::size_t>, double> mu;   // per edge
  double max_violation = 0.0;   // stationarity, dual feasibility, complementary slackness
  double max_active_spread = 0.0;
  double max_inactive_shortfall = 0.0;
  std::vector<std::string> failures;
};

/// Checks optimality of W for max H(Y): on each used row the active outputs share one
/// P_Y level, inactive neighbours sit at or above it, and the reconstructed duals
/// (lambda_a, mu_ab >= 0) satisfy stationarity P_X(a)(log P_Y(b) + 1) - mu_ab - lambda_a = 0.
inline KktCertificate kkt_check(const BipartiteGraph& g, std::span<const double> px, const Channel& w,
                                double tol = 1e-6) {
  detail::check_input_law(g, px);
  const auto py = w.output(px);
  KktCertificate cert;
  cert.lambda.assign(g.left_size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t a = 0; a < g.left_size(); ++a) {
    if (px[a] <= kSupportThreshold) continue;
    double amax = -1.0;
    double amin = 2.0;
    double lam = 0.0;
    std::size_t active = 0;
    for (auto b : g.neighbors(a)) {
      if (w(a, b) <= kSupportThreshold) continue;
      amax = std::max(amax, py[b]);
      amin = std::min(amin, py[b]);
      lam += px[a] * (std::log(py[b]) + 1.0);
      ++active;
    }
    lam /= static_cast<double>(active);
    cert.lambda[a] = lam;
    const double spread = amax - amin;
    cert.max_active_spread = std::max(cert.max_active_spread, spread);
    if (spread > tol) {
      cert.failures.push_back("input '" + g.left_labels()[a] + "': active outputs at unequal levels");
    }
    for (auto b : g.neighbors(a)) {
      const double wab = w(a, b);
      const double grad = px[a] * (std::log(py[b]) + 1.0);
      if (wab > kSupportThreshold) {
        cert.mu[{a, b}] = 0.0;
        cert.max_violation = std::max(cert.max_violation, std::abs(grad - lam));
      } else {
        const double m = grad - lam;
        cert.mu[{a, b}] = std::max(m, 0.0);
        cert.max_violation = std::max(cert.max_violation, std::max(-m, 0.0));
        cert.max_violation = std::max(cert.max_violation, std::max(m, 0.0) * wab);
        const double shortfall = amin - py[b];
        cert.max_inactive_shortfall = std::max(cert.max_inactive_shortfall, shortfall);
        if (shortfall > tol) {
          cert.failures.push_back("input '" + g.left_labels()[a] + "': inactive output '" +
                                  g.right_labels()[b] + "' below the active level");
        }
      }
    }
  }
  if (cert.max_violation > tol) cert.failures.push_back("stationarity residual exceeds tolerance");
  cert.passed = cert.failures.empty();
  return cert;
}

struct EquivalenceClass {
  std::vector<std::size_t> inputs;   // S_i
  std::vector<std::size_t> outputs;  // T_i
  double level = 0.0;                // common P_Y value, p_i / n_i
  double mass = 0.0;                 // p_i
};

struct ClassPartition {
  std::vector<EquivalenceClass> classes;  // strictly decreasing level
};

/// Groups outputs of an optimal channel by P_Y level (within `level_tol`) and inputs by
/// the level of their active edges. Throws when the channel fails kkt_check.
inline ClassPartition equivalence_classes(const BipartiteGraph& g, std::span<const double> px, const Channel& w,
                                          double level_tol = 1e-9, double kkt_tol = 1e-6) {
  const auto cert = kkt_check(g, px, w, kkt_tol);
  if (!cert.passed) throw InvalidArgumentError("channel is not optimal: " + cert.failures.front());
  const auto py = w.output(px);
  std::vector<std::size_t> outs;
  for (std::size_t b = 0; b < py.size(); ++b)
    if (py[b] > kSupportThreshold) outs.push_back(b);
  std::sort(outs.begin(), outs.end(), [&](auto x, auto y) { return py[x] > py[y] || (py[x] == py[y] && x < y); });

  ClassPartition part;
  std::vector<std::size_t> class_of(py.size(), SIZE_MAX);
  for (auto b : outs) {
    if (part.classes.empty() || part.classes.back().level - py[b] > level_tol) {
      part.classes.push_back({{}, {}, py[b], 0.0});
    }
    part.classes.back().outputs.push_back(b);
    class_of[b] = part.classes.size() - 1;
  }
  for (auto& c : part.classes) {
    std::sort(c.outputs.begin(), c.outputs.end());
    double s = 0.0;
    for (auto b : c.outputs) s += py[b];
    c.level = s / static_cast<double>(c.outputs.size());
  }
  for (std::size_t a = 0; a < g.left_size(); ++a) {
    if (px[a] <= kSupportThreshold) continue;
    std::size_t k = SIZE_MAX;
    for (auto b : g.neighbors(a)) {
      if (w(a, b) > kSupportThreshold) {
        k = class_of[b];
        break;
      }
    }
    part.classes[k].inputs.push_back(a);
    part.classes[k].mass += px[a];
  }
  return part;
}

/// Admissible reweighting interval [alpha_min, alpha_max] between the two top classes.
inline std::pair<double, double> alpha_interval(const ClassPartition& part) {
  if (part.classes.size() < 2) throw InvalidArgumentError("reweighting needs at least two classes");
  const auto& c1 = part.classes[0];
  const auto& c2 = part.classes[1];
  const double n1 = static_cast<double>(c1.outputs.size());
  const double n2 = static_cast<double>(c2.outputs.size());
  const double p1 = c1.mass;
  const double p2 = c2.mass;
  double p3n3 = 0.0;
  if (part.classes.size() > 2) {
    p3n3 = part.classes[2].mass / static_cast<double>(part.classes[2].outputs.size());
  }
  const double amax = (p1 * n2 - p2 * n1) / (n1 + n2);
  const double amin = n2 * (p3n3 - p2 / n2);
  return {amin, amax};
}

/// Moves mass alpha from the top class to the second one, proportionally within each class.
inline std::vector<double> reweight_path(const BipartiteGraph& g, std::span<const double> px, const Channel& w,
                                         double alpha) {
  const auto part = equivalence_classes(g, px, w);
  const auto [amin, amax] = alpha_interval(part);
  if (alpha < amin - 1e-12 || alpha > amax + 1e-12) {
    throw InvalidArgumentError("alpha outside the admissible interval");
  }
  std::vector<double> out(px.begin(), px.end());
  const auto& c1 = part.classes[0];
  const auto& c2 = part.classes[1];
  for (auto a : c1.inputs) out[a] *= 1.0 - alpha / c1.mass;
  for (auto a : c2.inputs) out[a] *= 1.0 + alpha / c2.mass;
  return out;
}

/// f_i = log n_i - H(input shares within class i), one per class.
inline std::vector<double> class_values(const ClassPartition& part, std::span<const double> px) {
  std::vector<double> f;
  for (const auto& c : part.classes) {
    std::vector<double> share;
    for (auto a : c.inputs) share.push_back(px[a] / c.mass);
    f.push_back(std::log(static_cast<double>(c.outputs.size())) - entropy(share));
  }
  return f;
}

// Graph JSON: {"left":["a1",...],"right":["b1",...],"edges":[["a1","b1"],...]}

inline BipartiteGraph graph_from_json(const nlohmann::json& j) {
  auto label = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  std::vector<std::string> left, right;
  std::map<std::string, std::size_t> li, ri;
  for (const auto& v : j.at("left")) {
    if (!li.emplace(label(v), left.size()).second) throw InvalidArgumentError("duplicate left label " + label(v));
    left.push_back(label(v));
  }
  for (const auto& v : j.at("right")) {
    if (!ri.emplace(label(v), right.size()).second) throw InvalidArgumentError("duplicate right label " + label(v));
    right.push_back(label(v));
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw InvalidArgumentError("edge must be a pair");
    const auto a = li.find(label(e[0]));
    const auto b = ri.find(label(e[1]));
    if (a == li.end() || b == ri.end()) throw InvalidArgumentError("edge names an unknown vertex");
    edges.emplace_back(a->second, b->second);
  }
  return BipartiteGraph(std::move(left), std::move(right), std::move(edges));
}

inline nlohmann::json to_json(const BipartiteGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({g.left_labels()[a], g.right_labels()[b]});
  return {{"left", g.left_labels()}, {"right", g.right_labels()}, {"edges", std::move(edges)}};
}

}  // namespace entroset
