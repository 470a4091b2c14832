#pragma once

// Entropy of a linear image f(X, Y) maximised over all couplings of two fixed
// marginals, and the entropic Ruzsa distance built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/group.hpp"
#include "entroset/transport.hpp"

namespace entroset {

/// Joint law of (X, Y) stored row-major over support(row) x support(col).
class Coupling {
 public:
  Coupling() = default;
  Coupling(Dist row, Dist col, std::vector<double> mass)
      : row_(std::move(row)), col_(std::move(col)), mass_(std::move(mass)) {
    if (!(row_.group() == col_.group())) throw GroupMismatchError("coupling marginals live in different groups");
    if (mass_.size() != rows() * cols()) throw InvalidArgumentError("coupling matrix has the wrong shape");
    for (double v : mass_) {
      if (!(v >= 0.0)) throw InvalidArgumentError("coupling entries must be non-negative");
    }
    if (marginal_error() > 1e-9) throw InvalidArgumentError("coupling does not match its marginals");
  }

  static Coupling independent(const Dist& row, const Dist& col) {
    std::vector<double> m;
    m.reserve(row.size() * col.size());
    for (double p : row.probs())
      for (double q : col.probs()) m.push_back(p * q);
    return Coupling(row, col, std::move(m));
  }

  [[nodiscard]] const Dist& row() const noexcept { return row_; }
  [[nodiscard]] const Dist& col() const noexcept { return col_; }
  [[nodiscard]] std::size_t rows() const noexcept { return row_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return col_.size(); }
  [[nodiscard]] std::span<const double> mass() const noexcept { return mass_; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return mass_[i * cols() + j]; }

  /// Largest deviation of a row or column sum from its marginal.
  [[nodiscard]] double marginal_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols(); ++j) s += at(i, j);
      err = std::max(err, std::abs(s - row_.probs()[i]));
    }
    for (std::size_t j = 0; j < cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows(); ++i) s += at(i, j);
      err = std::max(err, std::abs(s - col_.probs()[j]));
    }
    return err;
  }

 private:
  Dist row_;
  Dist col_;
  std::vector<double> mass_;
};

/// Cell -> output index map of a two-variable linear form over a product support.
struct PushforwardMap {
  std::vector<std::size_t> cell_to_value;
  std::vector<Element> values;

  PushforwardMap(const Dist& row, const Dist& col, const LinearForm& f) {
    if (f.arity() != 2) throw InvalidArgumentError("pushforward needs a two-variable linear form");
    if (!(row.group() == col.group())) throw GroupMismatchError("marginals live in different groups");
    const auto& g = row.group();
    std::map<Element, std::size_t> index;
    std::vector<Element> raw;
    raw.reserve(row.size() * col.size());
    for (const auto& x : row.support()) {
      for (const auto& y : col.support()) {
        const Element* args[2] = {&x, &y};
        raw.push_back(combine(g, f.coefficients(), args));
      }
    }
    for (const auto& z : raw) index.emplace(z, 0);
    std::size_t k = 0;
    for (auto& [z, id] : index) {
      id = k++;
      values.push_back(z);
    }
    cell_to_value.reserve(raw.size());
    for (const auto& z : raw) cell_to_value.push_back(index.at(z));
  }

  [[nodiscard]] std::vector<double> apply(std::span<const double> mass) const {
    std::vector<double> q(values.size(), 0.0);
    for (std::size_t c = 0; c < mass.size(); ++c) q[cell_to_value[c]] += mass[c];
    return q;
  }
};

/// H(f(X, Y)) in nats for the law P.
inline double pushforward_entropy(const Coupling& p, const LinearForm& f) {
  const PushforwardMap map(p.row(), p.col(), f);
  return entropy(map.apply(p.mass()));
}

struct SolveResult {
  double value = 0.0;
  Coupling coupling;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SolverOptions {
  double tol = 1e-8;
  std::size_t max_iterations = 50000;
  /// Called with (iteration, objective, gap) after every gap evaluation.
  std::function<void(std::size_t, double, double)> observer;
};

namespace detail {

inline constexpr double kLogFloor = 1e-300;

inline double safe_log(double v) { return std::log(std::max(v, kLogFloor)); }

// Maximiser of phi(g) = H(q + g dq) on [0, gmax]; phi is concave.
inline double entropy_line_search(std::span<const double> q, std::span<const double> dq, double gmax) {
  auto slope = [&](double g) {
    double s = 0.0;
    for (std::size_t z = 0; z < q.size(); ++z) {
      if (dq[z] != 0.0) s -= dq[z] * safe_log(q[z] + g * dq[z]);
    }
    return s;
  };
  auto curvature = [&](double g) {
    double s = 0.0;
    for (std::size_t z = 0; z < q.size(); ++z) {
      if (dq[z] != 0.0) s -= dq[z] * dq[z] / std::max(q[z] + g * dq[z], kLogFloor);
    }
    return s;
  };
  if (gmax <= 0.0) return 0.0;
  if (slope(0.0) <= 0.0) return 0.0;
  if (slope(gmax) >= 0.0) return gmax;
  double lo = 0.0;
  double hi = gmax;
  double g = 0.5 * gmax;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * (1.0 + gmax); ++it) {
    const double s = slope(g);
    if (s > 0.0) {
      lo = g;
    } else {
      hi = g;
    }
    const double c = curvature(g);
    double next = c < 0.0 ? g - s / c : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - g) <= 1e-18) break;
    g = next;
  }
  return std::clamp(g, 0.0, gmax);
}

inline bool same_vertex(std::span<const double> a, std::span<const double> b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1e-14) return false;
  }
  return true;
}

}  // namespace detail

/// max over couplings of (row, col) of H(f(X, Y)), by pairwise Frank-Wolfe with
/// exact line search. The duality gap certifies value >= optimum - gap.
inline SolveResult max_pushforward_entropy(const Dist& row, const Dist& col, const LinearForm& f,
                                           const SolverOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgumentError("tolerance must be positive");
  const PushforwardMap map(row, col, f);
  const auto r = row.size();
  const auto c = col.size();
  const auto cells = r * c;

  struct Atom {
    std::vector<double> x;
    double w;
  };
  std::vector<Atom> atoms;
  {
    std::vector<double> x0;
    for (double p : row.probs())
      for (double q : col.probs()) x0.push_back(p * q);
    atoms.push_back({std::move(x0), 1.0});
  }
  std::vector<double> x = atoms[0].x;
  std::vector<double> q = map.apply(x);
  std::vector<double> grad(cells);
  std::vector<double> cost(cells);
  std::vector<double> dq(q.size());

  SolveResult res;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (;; ++it) {
    // Gradient of H(Q) w.r.t. a cell is -log Q(z) - 1; the constant cancels on the polytope.
    for (std::size_t k = 0; k < cells; ++k) {
      grad[k] = -detail::safe_log(q[map.cell_to_value[k]]);
      cost[k] = -grad[k];
    }
    auto s = transport_lmo(row.probs(), col.probs(), cost);
    gap = 0.0;
    for (std::size_t k = 0; k < cells; ++k) gap += grad[k] * (s[k] - x[k]);
    gap = std::max(gap, 0.0);
    if (opt.observer) opt.observer(it, entropy(q), gap);
    if (gap <= opt.tol || it >= opt.max_iterations) break;

    std::size_t away = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      double v = 0.0;
      for (std::size_t k = 0; k < cells; ++k) v += grad[k] * atoms[a].x[k];
      if (v < worst) {
        worst = v;
        away = a;
      }
    }
    std::size_t target = atoms.size();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (detail::same_vertex(atoms[a].x, s)) {
        target = a;
        break;
      }
    }
    if (target == away) {
      // The best vertex already carries weight yet the gap is open: take a plain FW step.
      std::vector<double> d(cells);
      for (std::size_t k = 0; k < cells; ++k) d[k] = s[k] - x[k];
      dq = map.apply(d);
      const double g = detail::entropy_line_search(q, dq, 1.0);
      if (g <= 0.0) break;
      for (auto& a : atoms) a.w *= (1.0 - g);
      atoms[target].w += g;
      for (std::size_t k = 0; k < cells; ++k) x[k] += g * d[k];
    } else {
      if (target == atoms.size()) atoms.push_back({std::move(s), 0.0});
      std::vector<double> d(cells);
      for (std::size_t k = 0; k < cells; ++k) d[k] = atoms[target].x[k] - atoms[away].x[k];
      dq = map.apply(d);
      const double gmax = atoms[away].w;
      const double g = detail::entropy_line_search(q, dq, gmax);
      if (g <= 0.0) {
        if (atoms[target].w == 0.0) atoms.pop_back();
        break;
      }
      atoms[target].w += g;
      atoms[away].w -= g;
      for (std::size_t k = 0; k < cells; ++k) x[k] += g * d[k];
      if (g >= gmax) atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away));
    }
    for (auto& v : x) v = std::max(v, 0.0);
    q = map.apply(x);
  }

  // Rebuild the iterate from the active set to shed accumulated drift.
  std::vector<double> xr(cells, 0.0);
  double wsum = 0.0;
  for (const auto& a : atoms) {
    wsum += a.w;
    for (std::size_t k = 0; k < cells; ++k) xr[k] += a.w * a.x[k];
  }
  for (auto& v : xr) v = std::max(v / wsum, 0.0);
  if (entropy(map.apply(xr)) >= entropy(q) - 1e-14) x = std::move(xr);

  res.coupling = Coupling(row, col, x);
  res.value = entropy(map.apply(res.coupling.mass()));
  res.duality_gap = gap;
  res.iterations = it;
  res.converged = gap <= opt.tol;
  return res;
}

inline SolveResult max_pushforward_entropy(const Dist& row, const Dist& col, const LinearForm& f, double tol) {
  SolverOptions opt;
  opt.tol = tol;
  return max_pushforward_entropy(row, col, f, opt);
}

/// Brute-force lower bound on max H(f(X, Y)): scans the free (r-1)(c-1) block of the
/// coupling matrix on a grid of the given resolution (coarse-to-fine when the full
/// grid is too large). Requires (r-1)(c-1) <= 4.
inline double grid_oracle(const Dist& row, const Dist& col, const LinearForm& f, double resolution) {
  if (!(resolution > 0.0)) throw InvalidArgumentError("resolution must be positive");
  const PushforwardMap map(row, col, f);
  const auto r = row.size();
  const auto c = col.size();
  const auto dim = (r - 1) * (c - 1);
  if (dim > 4) throw SizeLimitError("grid oracle supports at most 4 free coupling parameters");
  const auto p = row.probs();
  const auto qv = col.probs();
  std::vector<double> ub(dim);
  for (std::size_t i = 0; i + 1 < r; ++i)
    for (std::size_t j = 0; j + 1 < c; ++j) ub[i * (c - 1) + j] = std::min(p[i], qv[j]);

  std::vector<double> mass(r * c);
  auto value_at = [&](std::span<const double> t) -> double {
    for (std::size_t i = 0; i + 1 < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < c; ++j) {
        mass[i * c + j] = t[i * (c - 1) + j];
        s += t[i * (c - 1) + j];
      }
      mass[i * c + c - 1] = p[i] - s;
    }
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < r; ++i) s += mass[i * c + j];
      mass[(r - 1) * c + j] = qv[j] - s;
    }
    for (double v : mass) {
      if (v < -1e-12) return -std::numeric_limits<double>::infinity();
    }
    std::vector<double> q(map.values.size(), 0.0);
    for (std::size_t k = 0; k < mass.size(); ++k) q[map.cell_to_value[k]] += std::max(mass[k], 0.0);
    return entropy(q);
  };

  if (dim == 0) return value_at({});

  // Scan lo[k] + i_k * step[k] for i_k in [0, count[k]], clipped to [0, ub[k]].
  std::vector<double> best_t(dim, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<double>& lo, const std::vector<double>& step,
                  const std::vector<std::size_t>& count) {
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> t(dim);
    while (true) {
      bool inside = true;
      for (std::size_t k = 0; k < dim; ++k) {
        t[k] = lo[k] + static_cast<double>(idx[k]) * step[k];
        if (t[k] < -1e-15 || t[k] > ub[k] + 1e-15) inside = false;
        t[k] = std::clamp(t[k], 0.0, ub[k]);
      }
      if (inside) {
        const double v = value_at(t);
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      std::size_t k = 0;
      while (k < dim && ++idx[k] > count[k]) idx[k++] = 0;
      if (k == dim) break;
    }
  };

  const double range = *std::max_element(ub.begin(), ub.end());
  if (range <= 0.0) return value_at(best_t);
  const double full_points = std::pow(range / resolution + 1.0, static_cast<double>(dim));
  std::vector<double> lo(dim, 0.0);
  std::vector<double> step(dim);
  std::vector<std::size_t> count(dim);
  if (full_points <= 4e6) {
    for (std::size_t k = 0; k < dim; ++k) {
      step[k] = resolution;
      count[k] = static_cast<std::size_t>(std::floor(ub[k] / resolution + 1e-9));
    }
    scan(lo, step, count);
    return best;
  }

  const auto n0 = static_cast<std::size_t>(std::floor(std::pow(2e6, 1.0 / static_cast<double>(dim)))) - 1;
  for (std::size_t k = 0; k < dim; ++k) {
    step[k] = ub[k] / static_cast<double>(n0);
    count[k] = n0;
  }
  scan(lo, step, count);
  // Zoom: boxes of +-2 steps around the incumbent; recentre while it sits on the box edge.
  while (true) {
    const double cur = *std::max_element(step.begin(), step.end());
    if (cur <= resolution) break;
    for (int recentre = 0; recentre < 64; ++recentre) {
      const auto centre = best_t;
      for (std::size_t k = 0; k < dim; ++k) {
        lo[k] = centre[k] - 2.0 * step[k];
        count[k] = 4;
      }
      scan(lo, step, count);
      bool on_edge = false;
      for (std::size_t k = 0; k < dim; ++k) {
        if (step[k] == 0.0) continue;
        const double off = std::abs(best_t[k] - centre[k]);
        const bool clipped = best_t[k] <= 0.0 || best_t[k] >= ub[k];
        if (off > 1.5 * step[k] && !clipped) on_edge = true;
      }
      if (!on_edge) break;
    }
    for (auto& s : step) s /= 4.0;
  }
  return best;
}

/// Entropic Ruzsa distance max H(X - Y) - H(X)/2 - H(Y)/2 over couplings.
struct DhrResult {
  double value = 0.0;
  SolveResult solve;
};

inline DhrResult d_hr_detail(const Dist& px, const Dist& py, double tol = 1e-8) {
  DhrResult out;
  out.solve = max_pushforward_entropy(px, py, LinearForm::difference(), tol);
  out.value = out.solve.value - 0.5 * px.entropy() - 0.5 * py.entropy();
  return out;
}

inline double d_hr(const Dist& px, const Dist& py, double tol = 1e-8) { return d_hr_detail(px, py, tol).value; }

inline nlohmann::json to_json(const SolveResult& r, bool with_coupling = false) {
  nlohmann::json j{{"value", r.value},
                   {"gap", r.duality_gap},
                   {"iterations", r.iterations},
                   {"converged", r.converged}};
  if (with_coupling) {
    nlohmann::json m = nlohmann::json::array();
    for (std::size_t i = 0; i < r.coupling.rows(); ++i) {
      std::vector<double> rowv;
      for (std::size_t k = 0; k < r.coupling.cols(); ++k) rowv.push_back(r.coupling.at(i, k));
      m.push_back(rowv);
    }
    j["coupling"] = {{"row", to_json(r.coupling.row())}, {"col", to_json(r.coupling.col())}, {"mass", m}};
  }
  return j;
}

}  // namespace entroset
