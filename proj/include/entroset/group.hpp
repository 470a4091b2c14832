#pragma once

// Finite abelian groups Z^a x Z_m1 x ... , finite subsets, sumsets and the
// base-q flattening map used to pull (Z^d)^m down to Z^d.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroset/error.hpp"

namespace entroset {

/// Coordinate-wise description of the ambient group: modulus 0 means Z, m > 0 means Z_m.
class GroupSpec {
 public:
  GroupSpec() = default;
  explicit GroupSpec(std::vector<std::int64_t> moduli) : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw InvalidArgumentError("group dimension must be at least 1");
    for (auto m : moduli_) {
      if (m < 0) throw InvalidArgumentError("group moduli must be non-negative");
    }
  }

  static GroupSpec integers(std::size_t dim = 1) {
    return GroupSpec(std::vector<std::int64_t>(dim, 0));
  }
  static GroupSpec cyclic(std::int64_t modulus, std::size_t dim = 1) {
    if (modulus < 1) throw InvalidArgumentError("cyclic modulus must be positive");
    return GroupSpec(std::vector<std::int64_t>(dim, modulus));
  }

  [[nodiscard]] std::size_t dim() const noexcept { return moduli_.size(); }
  [[nodiscard]] std::span<const std::int64_t> moduli() const noexcept { return moduli_; }
  [[nodiscard]] bool torsion_free() const noexcept {
    return std::all_of(moduli_.begin(), moduli_.end(), [](auto m) { return m == 0; });
  }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  std::vector<std::int64_t> moduli_;
};

struct Element {
  std::vector<std::int64_t> coords;

  friend auto operator<=>(const Element&, const Element&) = default;
  friend bool operator==(const Element&, const Element&) = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto c : e.coords) {
      h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline void require_torsion_free(const GroupSpec& g, const char* what) {
  if (!g.torsion_free()) throw TorsionError(std::string(what) + " requires a torsion-free group");
}

inline std::int64_t reduce_coord(std::int64_t value, std::int64_t modulus) {
  if (modulus == 0) return value;
  auto r = value % modulus;
  return r < 0 ? r + modulus : r;
}

inline Element make_element(const GroupSpec& g, std::vector<std::int64_t> coords) {
  if (coords.size() != g.dim()) {
    throw GroupMismatchError("element has " + std::to_string(coords.size()) +
                             " coordinates, group dimension is " + std::to_string(g.dim()));
  }
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = reduce_coord(coords[i], g.moduli()[i]);
  return Element{std::move(coords)};
}

/// sum of coeffs[k] * xs[k] in g.
inline Element combine(const GroupSpec& g, std::span<const std::int64_t> coeffs,
                       std::span<const Element* const> xs) {
  std::vector<std::int64_t> out(g.dim(), 0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0) continue;
    const auto& x = xs[k]->coords;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto m = g.moduli()[i];
      if (m == 0) {
        out[i] += coeffs[k] * x[i];
      } else {
        out[i] = reduce_coord(out[i] + reduce_coord(coeffs[k], m) * x[i] % m, m);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = reduce_coord(out[i], g.moduli()[i]);
  return Element{std::move(out)};
}

inline Element add(const GroupSpec& g, const Element& a, const Element& b) {
  const std::int64_t c[2] = {1, 1};
  const Element* xs[2] = {&a, &b};
  return combine(g, c, xs);
}

inline Element subtract(const GroupSpec& g, const Element& a, const Element& b) {
  const std::int64_t c[2] = {1, -1};
  const Element* xs[2] = {&a, &b};
  return combine(g, c, xs);
}

inline Element negate(const GroupSpec& g, const Element& a) {
  const std::int64_t c[1] = {-1};
  const Element* xs[1] = {&a};
  return combine(g, c, xs);
}

/// Canonically sorted, duplicate-free finite subset of a group.
class FiniteSet {
 public:
  FiniteSet() = default;
  FiniteSet(GroupSpec group, std::vector<Element> elements) : group_(std::move(group)) {
    elements_.reserve(elements.size());
    for (auto& e : elements) elements_.push_back(make_element(group_, std::move(e.coords)));
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  }

  /// Convenience for one-dimensional groups.
  static FiniteSet of_integers(std::initializer_list<std::int64_t> values,
                               GroupSpec group = GroupSpec::integers()) {
    std::vector<Element> els;
    for (auto v : values) els.push_back(Element{{v}});
    return FiniteSet(std::move(group), std::move(els));
  }

  [[nodiscard]] const GroupSpec& group() const noexcept { return group_; }
  [[nodiscard]] std::span<const Element> elements() const noexcept { return elements_; }
  [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }
  [[nodiscard]] bool empty() const noexcept { return elements_.empty(); }
  [[nodiscard]] bool contains(const Element& e) const {
    return std::binary_search(elements_.begin(), elements_.end(), e);
  }

  friend bool operator==(const FiniteSet&, const FiniteSet&) = default;

 private:
  GroupSpec group_;
  std::vector<Element> elements_;
};

enum class Sign { kPlus, kMinus };

/// Integer linear form a_1 t_1 + ... + a_n t_n.
class LinearForm {
 public:
  explicit LinearForm(std::vector<std::int64_t> coefficients)
      : coefficients_(std::move(coefficients)) {
    if (coefficients_.empty()) throw InvalidArgumentError("linear form needs at least one coefficient");
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
      if (coefficients_[i] != 0) support_.push_back(i);
    }
  }

  static LinearForm sum() { return LinearForm({1, 1}); }
  static LinearForm difference() { return LinearForm({1, -1}); }

  [[nodiscard]] std::span<const std::int64_t> coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] std::span<const std::size_t> support() const noexcept { return support_; }
  [[nodiscard]] std::size_t arity() const noexcept { return coefficients_.size(); }

  Element evaluate(const GroupSpec& g, std::span<const Element> args) const {
    if (args.size() != coefficients_.size()) throw InvalidArgumentError("linear form arity mismatch");
    std::vector<const Element*> ptrs;
    for (const auto& a : args) ptrs.push_back(&a);
    return combine(g, coefficients_, ptrs);
  }

 private:
  std::vector<std::int64_t> coefficients_;
  std::vector<std::size_t> support_;
};

namespace detail {
inline void require_same_group(const FiniteSet& a, const FiniteSet& b) {
  if (!(a.group() == b.group())) throw GroupMismatchError("sets live in different groups");
}
inline void require_nonempty(const FiniteSet& a) {
  if (a.empty()) throw InvalidArgumentError("set must be nonempty");
}
}  // namespace detail

/// A + B or A - B.
inline FiniteSet sumset(const FiniteSet& a, const FiniteSet& b, Sign sign = Sign::kPlus) {
  detail::require_same_group(a, b);
  detail::require_nonempty(a);
  detail::require_nonempty(b);
  const auto& g = a.group();
  std::vector<Element> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a.elements()) {
    for (const auto& y : b.elements()) {
      out.push_back(sign == Sign::kPlus ? add(g, x, y) : subtract(g, x, y));
    }
  }
  return FiniteSet(g, std::move(out));
}

/// f(A_S): image of the product of the sets attached to the support of f.
/// `sets[k]` is the set for the k-th support index of f.
inline FiniteSet linear_image(const LinearForm& f, std::span<const FiniteSet> sets) {
  const auto support = f.support();
  if (sets.size() != support.size()) {
    throw InvalidArgumentError("linear_image needs one set per support index (" +
                               std::to_string(support.size()) + "), got " +
                               std::to_string(sets.size()));
  }
  if (support.empty()) throw InvalidArgumentError("linear form with empty support");
  for (const auto& s : sets) {
    detail::require_nonempty(s);
    detail::require_same_group(s, sets[0]);
  }
  const auto& g = sets[0].group();
  std::vector<std::int64_t> coeffs;
  for (auto i : support) coeffs.push_back(f.coefficients()[i]);

  std::vector<Element> out;
  std::vector<std::size_t> idx(sets.size(), 0);
  std::vector<const Element*> args(sets.size());
  while (true) {
    for (std::size_t k = 0; k < sets.size(); ++k) args[k] = &sets[k].elements()[idx[k]];
    out.push_back(combine(g, coeffs, args));
    std::size_t k = 0;
    while (k < sets.size() && ++idx[k] == sets[k].size()) idx[k++] = 0;
    if (k == sets.size()) break;
  }
  return FiniteSet(g, std::move(out));
}

/// A +_G B / A -_G B over an explicit edge set G of (a, b) pairs.
inline FiniteSet restricted_sumset(const FiniteSet& a, const FiniteSet& b,
                                   std::span<const std::pair<Element, Element>> edges,
                                   Sign sign = Sign::kPlus) {
  detail::require_same_group(a, b);
  const auto& g = a.group();
  std::vector<Element> out;
  out.reserve(edges.size());
  for (const auto& [x, y] : edges) {
    const auto xr = make_element(g, x.coords);
    const auto yr = make_element(g, y.coords);
    if (!a.contains(xr) || !b.contains(yr)) throw InvalidArgumentError("edge lies outside A x B");
    out.push_back(sign == Sign::kPlus ? add(g, xr, yr) : subtract(g, xr, yr));
  }
  return FiniteSet(g, std::move(out));
}

/// log|A - B| - (log|A| + log|B|) / 2, in nats.
inline double ruzsa_distance(const FiniteSet& a, const FiniteSet& b) {
  const auto diff = sumset(a, b, Sign::kMinus);
  return std::log(static_cast<double>(diff.size())) -
         0.5 * std::log(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace detail {
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw SizeLimitError("flattening overflows 64-bit coordinates");
  return r;
}
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw SizeLimitError("flattening overflows 64-bit coordinates");
  return r;
}
}  // namespace detail

/// psi_q(t_1, ..., t_m) = t_1 + t_2 q + ... + t_m q^(m-1), applied to a point of (Z^d)^m
/// laid out as m consecutive blocks of `block_dim` coordinates.
inline Element psi(const Element& e, std::int64_t q, std::size_t block_dim) {
  const auto m = e.coords.size() / block_dim;
  std::vector<std::int64_t> out(block_dim, 0);
  for (std::size_t c = 0; c < block_dim; ++c) {
    std::int64_t acc = 0;
    for (std::size_t j = m; j-- > 0;) {
      acc = detail::checked_add(detail::checked_mul(acc, q), e.coords[j * block_dim + c]);
    }
    out[c] = acc;
  }
  return Element{std::move(out)};
}

/// Image of a set over Z^(m*block_dim) under psi_q, as a subset of Z^block_dim.
inline FiniteSet flatten(const FiniteSet& lifted, std::int64_t q, std::size_t block_dim = 1) {
  require_torsion_free(lifted.group(), "flatten");
  if (q < 1) throw InvalidArgumentError("flatten needs q >= 1");
  if (block_dim == 0 || lifted.group().dim() % block_dim != 0) {
    throw InvalidArgumentError("group dimension is not a multiple of the block dimension");
  }
  std::vector<Element> out;
  out.reserve(lifted.size());
  for (const auto& e : lifted.elements()) out.push_back(psi(e, q, block_dim));
  return FiniteSet(GroupSpec::integers(block_dim), std::move(out));
}

/// True when psi_q is injective on `s`.
inline bool psi_injective(const FiniteSet& s, std::int64_t q, std::size_t block_dim = 1) {
  std::unordered_set<Element, ElementHash> seen;
  seen.reserve(s.size() * 2);
  for (const auto& e : s.elements()) {
    if (!seen.insert(psi(e, q, block_dim)).second) return false;
  }
  return true;
}

/// Picks q making psi_q injective on every image f(A_S) of the given forms.
/// `sets` are the lifted sets A_1..A_n over Z^(m*block_dim); each form has arity n.
/// Starts at 1 + 2*max|coordinate| over all images (or at `start` when given) and
/// doubles until every image is verified injective.
inline std::int64_t choose_q(std::span<const FiniteSet> sets, std::span<const LinearForm> forms,
                             std::size_t block_dim = 1, std::int64_t start = 0) {
  if (sets.empty()) throw InvalidArgumentError("choose_q needs at least one set");
  for (const auto& s : sets) require_torsion_free(s.group(), "choose_q");
  std::vector<FiniteSet> images;
  for (const auto& f : forms) {
    if (f.arity() != sets.size()) throw InvalidArgumentError("form arity differs from number of sets");
    std::vector<FiniteSet> chosen;
    for (auto i : f.support()) chosen.push_back(sets[i]);
    images.push_back(linear_image(f, chosen));
  }
  if (forms.empty()) images.assign(sets.begin(), sets.end());

  std::int64_t q = start;
  if (q <= 0) {
    std::int64_t max_abs = 0;
    for (const auto& img : images) {
      for (const auto& e : img.elements()) {
        for (auto c : e.coords) max_abs = std::max(max_abs, c < 0 ? -c : c);
      }
    }
    q = 1 + 2 * max_abs;
  }
  while (true) {
    bool ok = true;
    for (const auto& img : images) {
      if (!psi_injective(img, q, block_dim)) {
        ok = false;
        break;
      }
    }
    if (ok) return q;
    if (q > std::numeric_limits<std::int64_t>::max() / 2) throw SizeLimitError("choose_q overflow");
    q *= 2;
  }
}

// JSON: {"group":{"dim":d,"moduli":[...]},"elements":[[...],...]}

inline nlohmann::json to_json(const GroupSpec& g) {
  return {{"dim", g.dim()}, {"moduli", std::vector<std::int64_t>(g.moduli().begin(), g.moduli().end())}};
}

inline GroupSpec group_from_json(const nlohmann::json& j) {
  auto moduli = j.at("moduli").get<std::vector<std::int64_t>>();
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != moduli.size()) {
    throw InvalidArgumentError("group dim does not match number of moduli");
  }
  return GroupSpec(std::move(moduli));
}

inline nlohmann::json to_json(const FiniteSet& s) {
  nlohmann::json els = nlohmann::json::array();
  for (const auto& e : s.elements()) els.push_back(e.coords);
  return {{"group", to_json(s.group())}, {"elements", std::move(els)}};
}

inline FiniteSet set_from_json(const nlohmann::json& j) {
  auto g = group_from_json(j.at("group"));
  std::vector<Element> els;
  for (const auto& e : j.at("elements")) els.push_back(Element{e.get<std::vector<std::int64_t>>()});
  return FiniteSet(std::move(g), std::move(els));
}

}  // namespace entroset
