#pragma once

// Sparse joint distributions of tuple-valued variables, the function-agreement
// Markov chain construction, and the exact entropy identities built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/group.hpp"
#include "entroset/rng.hpp"

namespace entroset {

using Label = std::vector<std::int64_t>;

/// Joint law of variables V_0..V_{k-1}; variable v is a block of widths[v] integers.
/// Atoms are stored flat, sorted and merged once canonical() has run.
class JointDist {
 public:
  JointDist() = default;
  explicit JointDist(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    offsets_.resize(widths_.size());
    std::size_t off = 0;
    for (std::size_t v = 0; v < widths_.size(); ++v) {
      offsets_[v] = off;
      off += widths_[v];
    }
    stride_ = off;
  }

  /// Joint with one variable per column block from explicit atoms; merges duplicates.
  static JointDist from_atoms(std::vector<std::size_t> widths, const std::vector<Label>& atoms,
                              const std::vector<double>& probs) {
    if (atoms.size() != probs.size()) throw InvalidArgumentError("atoms and probs differ in length");
    JointDist j(std::move(widths));
    for (std::size_t k = 0; k < atoms.size(); ++k) j.push(atoms[k], probs[k]);
    j.canonicalize();
    j.check_normalised(1e-9);
    return j;
  }

  /// Single variable over the support of a group distribution.
  static JointDist from_dist(const Dist& d) {
    JointDist j({d.group().dim()});
    for (std::size_t k = 0; k < d.size(); ++k) j.push(d.support()[k].coords, d.probs()[k]);
    j.canonicalize();
    return j;
  }

  void push(std::span<const std::int64_t> coords, double p) {
    if (coords.size() != stride_) throw InvalidArgumentError("atom has the wrong number of coordinates");
    if (!(p >= 0.0)) throw InvalidArgumentError("atom probability must be non-negative");
    coords_.insert(coords_.end(), coords.begin(), coords.end());
    probs_.push_back(p);
  }

  /// Sorts atoms, merges duplicates and drops zero-mass atoms.
  void canonicalize() {
    std::vector<std::size_t> order(probs_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return std::lexicographical_compare(coords_.begin() + a * stride_, coords_.begin() + (a + 1) * stride_,
                                          coords_.begin() + b * stride_, coords_.begin() + (b + 1) * stride_);
    });
    std::vector<std::int64_t> nc;
    std::vector<double> np;
    nc.reserve(coords_.size());
    np.reserve(probs_.size());
    for (auto k : order) {
      if (probs_[k] <= 0.0) continue;
      const auto first = coords_.begin() + k * stride_;
      if (!np.empty() && std::equal(first, first + stride_, nc.end() - stride_)) {
        np.back() += probs_[k];
      } else {
        nc.insert(nc.end(), first, first + stride_);
        np.push_back(probs_[k]);
      }
    }
    coords_ = std::move(nc);
    probs_ = std::move(np);
  }

  void check_normalised(double tol) const {
    const double s = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(s - 1.0) > tol) throw InvalidArgumentError("joint distribution sums to " + std::to_string(s));
  }

  [[nodiscard]] std::size_t vars() const noexcept { return widths_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  [[nodiscard]] std::span<const std::int64_t> atom(std::size_t k) const {
    return {coords_.data() + k * stride_, stride_};
  }
  [[nodiscard]] std::span<const std::int64_t> value(std::size_t k, std::size_t v) const {
    return {coords_.data() + k * stride_ + offsets_[v], widths_[v]};
  }
  [[nodiscard]] double prob(std::size_t k) const { return probs_[k]; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

  [[nodiscard]] double entropy() const { return entroset::entropy(probs_); }

  /// Entropy of key(atom) where key maps an atom to a label.
  template <typename Key>
  [[nodiscard]] double entropy_of(Key&& key) const {
    std::map<Label, double> m;
    for (std::size_t k = 0; k < size(); ++k) m[key(atom(k))] += probs_[k];
    return entropy_of_masses(m);
  }

  /// Entropy of the sub-tuple (V_i : i in vs).
  [[nodiscard]] double entropy_of_vars(const std::vector<std::size_t>& vs) const {
    return entropy_of([&](std::span<const std::int64_t> a) { return project(a, vs); });
  }

  [[nodiscard]] JointDist marginal(const std::vector<std::size_t>& vs) const {
    std::vector<std::size_t> w;
    for (auto v : vs) w.push_back(widths_.at(v));
    JointDist out(std::move(w));
    for (std::size_t k = 0; k < size(); ++k) out.push(project(atom(k), vs), probs_[k]);
    out.canonicalize();
    return out;
  }

  [[nodiscard]] Label project(std::span<const std::int64_t> a, const std::vector<std::size_t>& vs) const {
    Label l;
    for (auto v : vs) l.insert(l.end(), a.begin() + offsets_.at(v), a.begin() + offsets_[v] + widths_[v]);
    return l;
  }

  friend bool operator==(const JointDist&, const JointDist&) = default;

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
  std::size_t stride_ = 0;
  std::vector<std::int64_t> coords_;
  std::vector<double> probs_;
};

/// Independent product: variables of a followed by variables of b.
inline JointDist product(const JointDist& a, const JointDist& b) {
  auto w = a.widths();
  w.insert(w.end(), b.widths().begin(), b.widths().end());
  JointDist out(std::move(w));
  Label buf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      buf.assign(a.atom(i).begin(), a.atom(i).end());
      buf.insert(buf.end(), b.atom(k).begin(), b.atom(k).end());
      out.push(buf, a.prob(i) * b.prob(k));
    }
  }
  out.canonicalize();
  return out;
}

/// I(A; B | C) over variable index sets.
inline double conditional_mutual_information(const JointDist& j, std::vector<std::size_t> a,
                                             std::vector<std::size_t> b, const std::vector<std::size_t>& c) {
  auto ac = a;
  ac.insert(ac.end(), c.begin(), c.end());
  auto bc = b;
  bc.insert(bc.end(), c.begin(), c.end());
  auto abc = a;
  abc.insert(abc.end(), bc.begin(), bc.end());
  const double hc = c.empty() ? 0.0 : j.entropy_of_vars(c);
  return j.entropy_of_vars(ac) + j.entropy_of_vars(bc) - j.entropy_of_vars(abc) - hc;
}

using LinkFn = std::function<Label(std::span<const std::int64_t>)>;

struct ChainLink {
  LinkFn f;  // on the whole tuple of marginal i
  LinkFn g;  // on the whole tuple of marginal i + 1
};

/// X_1 -> U_1 -> X_2 -> ... -> X_n with f_i(X_i) = g_i(X_{i+1}) = U_i.
struct ChainSpec {
  std::vector<JointDist> marginals;
  std::vector<ChainLink> links;
};

inline constexpr std::size_t kDefaultAtomCap = 1000000;

namespace detail {

inline std::map<Label, double> pushforward(const JointDist& d, const LinkFn& fn) {
  std::map<Label, double> m;
  for (std::size_t k = 0; k < d.size(); ++k) m[fn(d.atom(k))] += d.prob(k);
  return m;
}

inline void check_link(std::size_t i, const std::map<Label, double>& pf, const std::map<Label, double>& pg) {
  auto mismatch = [&](const Label& u, double a, double b) {
    if (std::abs(a - b) <= 1e-12) return;
    std::string s;
    for (auto c : u) s += (s.empty() ? "" : ",") + std::to_string(c);
    throw InconsistentLinkError(i, "f and g induce different laws at value (" + s + "): " + std::to_string(a) +
                                       " vs " + std::to_string(b));
  };
  for (const auto& [u, p] : pf) {
    const auto it = pg.find(u);
    mismatch(u, p, it == pg.end() ? 0.0 : it->second);
  }
  for (const auto& [u, p] : pg) {
    if (!pf.contains(u)) mismatch(u, 0.0, p);
  }
}

}  // namespace detail

/// P(x_1..x_n) = P(x_1) prod P(x_{i+1}) / P(g_i = u_i) on the fibre g_i(x_{i+1}) = f_i(x_i).
/// Links are numbered from 1 in errors.
inline JointDist chain_joint(const ChainSpec& spec, std::size_t max_atoms = kDefaultAtomCap) {
  if (spec.marginals.empty()) throw InvalidArgumentError("chain needs at least one variable");
  if (spec.links.size() + 1 != spec.marginals.size()) {
    throw InvalidArgumentError("chain with n variables needs n - 1 links");
  }
  for (const auto& m : spec.marginals) m.check_normalised(1e-9);

  // Partial chains: flat coords of the prefix, probability, index of the last atom.
  struct Partial {
    Label coords;
    double p;
    std::size_t last;
  };
  std::vector<Partial> cur;
  const auto& first = spec.marginals[0];
  for (std::size_t k = 0; k < first.size(); ++k) {
    cur.push_back({Label(first.atom(k).begin(), first.atom(k).end()), first.prob(k), k});
  }
  std::vector<std::size_t> widths = first.widths();

  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    const auto& from = spec.marginals[i];
    const auto& to = spec.marginals[i + 1];
    const auto& link = spec.links[i];
    const auto pf = detail::pushforward(from, link.f);
    const auto pg = detail::pushforward(to, link.g);
    detail::check_link(i + 1, pf, pg);

    std::map<Label, std::vector<std::size_t>> fibre;
    for (std::size_t k = 0; k < to.size(); ++k) fibre[link.g(to.atom(k))].push_back(k);
    std::vector<Label> f_of(from.size());
    for (std::size_t k = 0; k < from.size(); ++k) f_of[k] = link.f(from.atom(k));

    std::vector<Partial> next;
    for (const auto& part : cur) {
      const auto& u = f_of[part.last];
      const auto it = fibre.find(u);
      const double pu = pg.at(u);
      for (auto k : it->second) {
        if (next.size() >= max_atoms) {
          throw SizeLimitError("chain support exceeds " + std::to_string(max_atoms) + " atoms");
        }
        Label c = part.coords;
        c.insert(c.end(), to.atom(k).begin(), to.atom(k).end());
        next.push_back({std::move(c), part.p * to.prob(k) / pu, k});
      }
    }
    cur = std::move(next);
    widths.insert(widths.end(), to.widths().begin(), to.widths().end());
  }

  JointDist out(std::move(widths));
  for (const auto& part : cur) out.push(part.coords, part.p);
  out.canonicalize();
  return out;
}

namespace detail {
// Variable index ranges of each marginal inside the chain joint.
inline std::vector<std::vector<std::size_t>> block_vars(const ChainSpec& spec) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t v = 0;
  for (const auto& m : spec.marginals) {
    std::vector<std::size_t> b(m.vars());
    std::iota(b.begin(), b.end(), v);
    v += m.vars();
    out.push_back(std::move(b));
  }
  return out;
}
}  // namespace detail

/// |H(X_1..X_n) + sum H(U_i) - sum H(X_i)|.
inline double verify_copy_identity(const ChainSpec& spec, std::size_t max_atoms = kDefaultAtomCap) {
  const auto joint = chain_joint(spec, max_atoms);
  double lhs = joint.entropy();
  double rhs = 0.0;
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    lhs += entropy_of_masses(detail::pushforward(spec.marginals[i], spec.links[i].f));
  }
  for (const auto& m : spec.marginals) rhs += m.entropy();
  return std::abs(lhs - rhs);
}

/// Residual of H(X_1..X_n, U_1..U_{n-1}) + sum I(X_i;U_i) + sum I(U_i;X_{i+1})
///   = sum H(X_i) + sum H(U_i)
/// for a joint whose variables are ordered X_1, U_1, X_2, ..., U_{n-1}, X_n.
inline double chain_rule_residual(const JointDist& joint) {
  if (joint.vars() % 2 != 1) throw InvalidArgumentError("expected variables X_1, U_1, ..., X_n");
  const auto n = (joint.vars() + 1) / 2;
  double lhs = joint.entropy();
  double rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) rhs += joint.entropy_of_vars({2 * i});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t x = 2 * i;
    const std::size_t u = 2 * i + 1;
    const std::size_t y = 2 * i + 2;
    rhs += joint.entropy_of_vars({u});
    lhs += conditional_mutual_information(joint, {x}, {u}, {});
    lhs += conditional_mutual_information(joint, {u}, {y}, {});
  }
  return std::abs(lhs - rhs);
}

/// Chain joint with U_i = f_i(X_i) interleaved, each X_i packed as one variable.
inline JointDist chain_with_links(const ChainSpec& spec, std::size_t max_atoms = kDefaultAtomCap) {
  const auto joint = chain_joint(spec, max_atoms);
  const auto blocks = detail::block_vars(spec);
  std::vector<std::size_t> widths;
  std::vector<std::size_t> xw;
  for (const auto& m : spec.marginals) xw.push_back(m.stride());
  std::vector<std::size_t> uw(spec.links.size(), 0);
  std::vector<Label> rows;
  for (std::size_t k = 0; k < joint.size(); ++k) {
    Label row;
    for (std::size_t i = 0; i < spec.marginals.size(); ++i) {
      const auto xi = joint.project(joint.atom(k), blocks[i]);
      row.insert(row.end(), xi.begin(), xi.end());
      if (i < spec.links.size()) {
        const auto u = spec.links[i].f(xi);
        if (uw[i] == 0) {
          uw[i] = u.size();
        } else if (uw[i] != u.size()) {
          throw InvalidArgumentError("link function returns labels of varying length");
        }
        row.insert(row.end(), u.begin(), u.end());
      }
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < xw.size(); ++i) {
    widths.push_back(xw[i]);
    if (i < uw.size()) widths.push_back(uw[i]);
  }
  return JointDist::from_atoms(std::move(widths), rows, std::vector<double>(joint.probs().begin(), joint.probs().end()));
}

/// Chain-rule residual for the functional chain U_i = f_i(X_i).
inline double verify_chain_rule_identity(const ChainSpec& spec, std::size_t max_atoms = kDefaultAtomCap) {
  return chain_rule_residual(chain_with_links(spec, max_atoms));
}

/// Largest I(X_i; X_{i+1} | U_i) over the links of the chain.
inline double max_link_conditional_information(const ChainSpec& spec, std::size_t max_atoms = kDefaultAtomCap) {
  const auto j = chain_with_links(spec, max_atoms);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < spec.marginals.size(); ++i) {
    worst = std::max(worst, conditional_mutual_information(j, {2 * i}, {2 * i + 2}, {2 * i + 1}));
  }
  return worst;
}

/// Appends a variable drawn from kernel(value of the current last variable).
inline JointDist extend_markov(const JointDist& j, std::size_t width,
                               const std::function<std::vector<std::pair<Label, double>>(std::span<const std::int64_t>)>& kernel) {
  auto w = j.widths();
  w.push_back(width);
  JointDist out(std::move(w));
  const auto last = j.vars() - 1;
  for (std::size_t k = 0; k < j.size(); ++k) {
    for (const auto& [label, p] : kernel(j.value(k, last))) {
      if (label.size() != width) throw InvalidArgumentError("kernel label has the wrong width");
      Label row(j.atom(k).begin(), j.atom(k).end());
      row.insert(row.end(), label.begin(), label.end());
      out.push(row, j.prob(k) * p);
    }
  }
  out.canonicalize();
  return out;
}

// Random chains. Masses are multiples of 2^-20 so link laws agree exactly.

namespace detail {
inline constexpr std::int64_t kDyadicUnit = std::int64_t{1} << 20;

inline std::vector<std::int64_t> split_mass(Rng& rng, std::int64_t mass, std::size_t parts) {
  parts = std::max<std::size_t>(1, std::min<std::size_t>(parts, static_cast<std::size_t>(mass)));
  std::vector<std::int64_t> cuts{0, mass};
  while (cuts.size() < parts + 1) {
    const auto c = rng.uniform_int(1, mass - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::int64_t> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) out.push_back(cuts[k + 1] - cuts[k]);
  return out;
}

inline LinkFn table_link(std::vector<std::int64_t> table) {
  return [table = std::move(table)](std::span<const std::int64_t> a) { return Label{table.at(static_cast<std::size_t>(a[0]))}; };
}

inline JointDist labelled(const std::vector<std::int64_t>& masses) {
  std::vector<Label> rows;
  std::vector<double> probs;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    rows.push_back({static_cast<std::int64_t>(k)});
    probs.push_back(static_cast<double>(masses[k]) / static_cast<double>(kDyadicUnit));
  }
  return JointDist::from_atoms({1}, rows, probs);
}
}  // namespace detail

/// Chain of n single-coordinate variables with random fibres; each X_i has at most
/// max_labels atoms per link value and each U_i at most max_labels values.
inline ChainSpec random_chain_spec(Rng& rng, std::size_t n, std::int64_t max_labels = 4) {
  if (n == 0) throw InvalidArgumentError("chain needs at least one variable");
  ChainSpec spec;
  std::vector<std::int64_t> masses = detail::split_mass(rng, detail::kDyadicUnit,
                                                        static_cast<std::size_t>(rng.uniform_int(1, max_labels)));
  spec.marginals.push_back(detail::labelled(masses));
  for (std::size_t i = 1; i < n; ++i) {
    const auto values = rng.uniform_int(1, max_labels);
    std::vector<std::int64_t> f(masses.size());
    std::map<std::int64_t, std::int64_t> law;
    for (std::size_t k = 0; k < masses.size(); ++k) {
      f[k] = rng.uniform_int(0, values - 1);
      law[f[k]] += masses[k];
    }
    std::vector<std::int64_t> next;
    std::vector<std::int64_t> g;
    for (const auto& [u, m] : law) {
      for (auto piece : detail::split_mass(rng, m, static_cast<std::size_t>(rng.uniform_int(1, max_labels)))) {
        next.push_back(piece);
        g.push_back(u);
      }
    }
    spec.links.push_back({detail::table_link(std::move(f)), detail::table_link(std::move(g))});
    masses = std::move(next);
    spec.marginals.push_back(detail::labelled(masses));
  }
  return spec;
}

/// X_1..X_n uniform on {0..a-1} linked by random maps f_i : A -> {0..b-1}.
/// image_sizes[i] = |f_i(A)|.
struct UniformChain {
  ChainSpec spec;
  std::vector<std::size_t> image_sizes;
};

inline UniformChain random_uniform_chain(Rng& rng, std::size_t n, std::int64_t a, std::int64_t b) {
  if (n == 0 || a <= 0 || b <= 0) throw InvalidArgumentError("chain parameters must be positive");
  UniformChain out;
  std::vector<Label> rows;
  for (std::int64_t x = 0; x < a; ++x) rows.push_back({x});
  const auto uniform = JointDist::from_atoms({1}, rows, std::vector<double>(static_cast<std::size_t>(a), 1.0 / static_cast<double>(a)));
  out.spec.marginals.assign(n, uniform);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::int64_t> f(static_cast<std::size_t>(a));
    for (auto& v : f) v = rng.uniform_int(0, b - 1);
    std::vector<std::int64_t> img = f;
    std::sort(img.begin(), img.end());
    out.image_sizes.push_back(static_cast<std::size_t>(std::unique(img.begin(), img.end()) - img.begin()));
    auto link = detail::table_link(std::move(f));
    out.spec.links.push_back({link, link});
  }
  return out;
}

// Linear expressions over group-valued variables of a joint law.

/// Entropy of the tuple (sum_v rows[r][v] * V_v)_r, each V_v an element of g.
inline double linear_entropy(const JointDist& j, const GroupSpec& g, const std::vector<std::vector<std::int64_t>>& rows) {
  for (const auto& r : rows) {
    if (r.size() != j.vars()) throw InvalidArgumentError("expression arity differs from the number of variables");
  }
  for (auto w : j.widths()) {
    if (w != g.dim()) throw GroupMismatchError("variable width differs from the group dimension");
  }
  return j.entropy_of([&](std::span<const std::int64_t> a) {
    Label key;
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < g.dim(); ++c) {
        std::int64_t acc = 0;
        for (std::size_t v = 0; v < r.size(); ++v) acc += r[v] * a[v * g.dim() + c];
        key.push_back(reduce_coord(acc, g.moduli()[c]));
      }
    }
    return key;
  });
}

/// Joint law of (X, Y) on g from a list of (x, y) pairs.
inline JointDist pair_dist(const GroupSpec& g, const std::vector<std::pair<Element, Element>>& pairs,
                           const std::vector<double>& probs) {
  std::vector<Label> rows;
  for (const auto& [x, y] : pairs) {
    Label r = make_element(g, x.coords).coords;
    const auto yr = make_element(g, y.coords).coords;
    r.insert(r.end(), yr.begin(), yr.end());
    rows.push_back(std::move(r));
  }
  return JointDist::from_atoms({g.dim(), g.dim()}, rows, probs);
}

namespace detail {
inline LinkFn linear_link(const GroupSpec& g, std::vector<std::vector<std::int64_t>> rows) {
  return [g, rows = std::move(rows)](std::span<const std::int64_t> a) {
    Label key;
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < g.dim(); ++c) {
        std::int64_t acc = 0;
        for (std::size_t v = 0; v < r.size(); ++v) acc += r[v] * a[v * g.dim() + c];
        key.push_back(reduce_coord(acc, g.moduli()[c]));
      }
    }
    return key;
  };
}
}  // namespace detail

/// (X1, Y1, X2, Y2, X3, Y3): two copies of P_XY glued along U = X - Y, conditionally
/// independent given U, and an independent copy of P_X3Y3.
inline JointDist build_sum_diff_coupling(const GroupSpec& g, const JointDist& pxy, const JointDist& p3,
                                         std::size_t max_atoms = kDefaultAtomCap) {
  const auto diff = detail::linear_link(g, {{1, -1}});
  ChainSpec spec{{pxy, pxy}, {{diff, diff}}};
  const auto pair = chain_joint(spec, max_atoms);
  if (pair.size() * p3.size() > max_atoms) throw SizeLimitError("coupling support exceeds the atom cap");
  return product(pair, p3);
}

struct SumDiffEntropies {
  double coupled_lhs = 0.0;  // H(X1,Y1) + H(X2,Y2) + H(X3+Y3)
  double coupled_rhs = 0.0;  // H(X1-Y1) + H(X1, Y2, X2-Y3, X3-Y1)
  double marginal_lhs = 0.0;   // H(X2) + H(Y1) + H(X3+Y3)
  double marginal_rhs = 0.0;   // H(X1-Y1) + H(X3-Y1) + H(X2-Y3)
};

inline SumDiffEntropies sum_diff_entropies(const GroupSpec& g, const JointDist& c) {
  auto h = [&](std::vector<std::vector<std::int64_t>> rows) { return linear_entropy(c, g, rows); };
  SumDiffEntropies e;
  const double h33 = h({{0, 0, 0, 0, 1, 1}});
  const double hu = h({{1, -1, 0, 0, 0, 0}});
  e.coupled_lhs = h({{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}}) + h({{0, 0, 1, 0, 0, 0}, {0, 0, 0, 1, 0, 0}}) + h33;
  e.coupled_rhs = hu + h({{1, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0}, {0, 0, 1, 0, 0, -1}, {0, -1, 0, 0, 1, 0}});
  e.marginal_lhs = h({{0, 0, 1, 0, 0, 0}}) + h({{0, 1, 0, 0, 0, 0}}) + h33;
  e.marginal_rhs = hu + h({{0, -1, 0, 0, 1, 0}}) + h({{0, 0, 1, 0, 0, -1}});
  return e;
}

struct FourCopyReport {
  JointDist triple;  // (X, Y, Y')
  JointDist joint;   // four linked copies of the triple, 12 variables
  double triple_residual = 0.0;  // |H(X,Y,Y') - (2H(X,Y) - H(X))|
  double chain_residual = 0.0;  // |H(all) - (4H(triple) - H(f1) - H(f2) - H(f3))|
  double upper_slack = 0.0;    // H(X1,Y1,Y1',X3,Y4) + H(X4 | X4 - Y4') - H(all), >= 0
  double final_value = 0.0;    // 5H(X,Y) - 4H(X) - 4H(Y) - 3H(X+Y) + H(X-Y), <= 0
};

/// Builds the three-copy triple and the four-copy chain of the Katz-Tao entropy argument
/// and evaluates its identities and the final inequality.
inline FourCopyReport build_appendix_a_chain(const GroupSpec& g, const JointDist& pxy,
                                              std::size_t max_atoms = kDefaultAtomCap) {
  if (pxy.vars() != 2) throw InvalidArgumentError("expected a joint law of (X, Y)");
  FourCopyReport rep;
  // Y -> X -> Y': two copies of (X, Y) glued on X; keep (X, Y, Y').
  const auto x_of = detail::linear_link(g, {{1, 0}});
  const auto glued = chain_joint(ChainSpec{{pxy, pxy}, {{x_of, x_of}}}, max_atoms);
  rep.triple = glued.marginal({0, 1, 3});

  const double hxy = linear_entropy(pxy, g, {{1, 0}, {0, 1}});
  const double hx = linear_entropy(pxy, g, {{1, 0}});
  const double hy = linear_entropy(pxy, g, {{0, 1}});
  rep.triple_residual = std::abs(rep.triple.entropy() - (2.0 * hxy - hx));

  const auto f1 = detail::linear_link(g, {{1, 1, 0}, {1, 0, 1}});
  const auto f2 = detail::linear_link(g, {{0, 1, 0}, {0, 0, 1}});
  const auto f3 = detail::linear_link(g, {{1, 1, 0}, {0, 0, 1}});
  const auto& t = rep.triple;
  rep.joint = chain_joint(ChainSpec{{t, t, t, t}, {{f1, f1}, {f2, f2}, {f3, f3}}}, max_atoms);

  auto ht = [&](std::vector<std::vector<std::int64_t>> rows) { return linear_entropy(t, g, rows); };
  const double h_all = rep.joint.entropy();
  const double predicted = 4.0 * t.entropy() - ht({{1, 1, 0}, {1, 0, 1}}) - ht({{0, 1, 0}, {0, 0, 1}}) -
                           ht({{1, 1, 0}, {0, 0, 1}});
  rep.chain_residual = std::abs(h_all - predicted);

  // Variables: X1 Y1 Y1' X2 Y2 Y2' X3 Y3 Y3' X4 Y4 Y4' -> indices 0..11.
  auto unit = [](std::size_t v) {
    std::vector<std::int64_t> r(12, 0);
    r[v] = 1;
    return r;
  };
  auto hj = [&](std::vector<std::vector<std::int64_t>> rows) { return linear_entropy(rep.joint, g, rows); };
  std::vector<std::int64_t> x4_minus_y4d(12, 0);
  x4_minus_y4d[9] = 1;
  x4_minus_y4d[11] = -1;
  const double h_x4_given_diff = hj({unit(9), x4_minus_y4d}) - hj({x4_minus_y4d});
  rep.upper_slack = hj({unit(0), unit(1), unit(2), unit(6), unit(10)}) + h_x4_given_diff - h_all;

  const double hsum = linear_entropy(pxy, g, {{1, 1}});
  const double hdiff = linear_entropy(pxy, g, {{1, -1}});
  rep.final_value = 5.0 * hxy - 4.0 * hx - 4.0 * hy - 3.0 * hsum + hdiff;
  return rep;
}

// JSON: {"widths":[...],"atoms":[[...],...],"probs":[...]}

inline nlohmann::json to_json(const JointDist& j) {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t k = 0; k < j.size(); ++k) atoms.push_back(Label(j.atom(k).begin(), j.atom(k).end()));
  return {{"widths", j.widths()},
          {"atoms", std::move(atoms)},
          {"probs", std::vector<double>(j.probs().begin(), j.probs().end())}};
}

inline JointDist joint_from_json(const nlohmann::json& js) {
  return JointDist::from_atoms(js.at("widths").get<std::vector<std::size_t>>(),
                               js.at("atoms").get<std::vector<Label>>(), js.at("probs").get<std::vector<double>>());
}

}  // namespace entroset
