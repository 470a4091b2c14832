#pragma once

// Exact method-of-types arithmetic. Logs in this header are base 2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/group.hpp"

namespace entroset {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kTypeEnumerationCap = 10000000;

/// Empirical counts of a length-n sequence over an alphabet of size counts.size().
struct TypeVector {
  std::int64_t n = 0;
  std::vector<std::int64_t> counts;

  [[nodiscard]] double at(std::size_t i) const { return static_cast<double>(counts[i]) / static_cast<double>(n); }
  [[nodiscard]] std::vector<double> probs() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = at(i);
    return p;
  }
  friend bool operator==(const TypeVector&, const TypeVector&) = default;
};

inline double log2_big(const BigInt& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  const auto bits = boost::multiprecision::msb(x);
  if (bits < 60) return std::log2(x.convert_to<double>());
  const auto shift = bits - 60;
  const BigInt top = x >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

inline BigInt binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// |T_n| for an alphabet of size m.
inline BigInt count_types(std::int64_t m, std::int64_t n) {
  if (m <= 0 || n < 0) throw InvalidArgumentError("alphabet size must be positive and n non-negative");
  return binomial(n + m - 1, m - 1);
}

namespace detail {
inline void require_enumerable(std::int64_t m, std::int64_t n) {
  if (count_types(m, n) > kTypeEnumerationCap) {
    throw SizeLimitError("more than " + std::to_string(kTypeEnumerationCap) + " types for M=" + std::to_string(m) +
                         ", n=" + std::to_string(n));
  }
}
}  // namespace detail

/// Visits every composition of n into m parts in lexicographic order.
inline void for_each_type(std::int64_t m, std::int64_t n, const std::function<void(const TypeVector&)>& fn) {
  detail::require_enumerable(m, n);
  TypeVector t{n, std::vector<std::int64_t>(static_cast<std::size_t>(m), 0)};
  const auto last = static_cast<std::size_t>(m - 1);
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
    if (i == last) {
      t.counts[i] = left;
      fn(t);
      return;
    }
    for (std::int64_t c = 0; c <= left; ++c) {
      t.counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, n);
}

inline std::vector<TypeVector> enumerate_types(std::int64_t m, std::int64_t n) {
  std::vector<TypeVector> out;
  for_each_type(m, n, [&](const TypeVector& t) { out.push_back(t); });
  return out;
}

/// Floors of n*mu, then +1 in index order where n*mu is fractional, until the counts sum to n.
inline TypeVector nearest_type(std::span<const double> mu, std::int64_t n) {
  if (n <= 0) throw InvalidArgumentError("block length must be positive");
  TypeVector t{n, std::vector<std::int64_t>(mu.size(), 0)};
  std::vector<bool> fractional(mu.size(), false);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = static_cast<double>(n) * mu[i];
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9) {
      t.counts[i] = static_cast<std::int64_t>(r);
    } else {
      t.counts[i] = static_cast<std::int64_t>(std::floor(x));
      fractional[i] = true;
    }
    total += t.counts[i];
  }
  for (std::size_t i = 0; i < mu.size() && total < n; ++i) {
    if (fractional[i]) {
      ++t.counts[i];
      ++total;
    }
  }
  if (total != n) throw InvalidArgumentError("mu does not sum to 1");
  return t;
}

inline TypeVector nearest_type(const Dist& mu, std::int64_t n) { return nearest_type(mu.probs(), n); }

/// n! / prod counts!.
inline BigInt type_class_size(const TypeVector& nu) {
  BigInt r = 1;
  std::int64_t used = 0;
  for (auto c : nu.counts) {
    used += c;
    r *= binomial(used, c);
  }
  if (used != nu.n) throw InvalidArgumentError("type counts do not sum to n");
  return r;
}

inline double entropy2(std::span<const double> p) { return nats_to_bits(entropy(p)); }

/// D(nu || mu) in bits; +inf when nu is not absolutely continuous w.r.t. mu.
inline double divergence2(std::span<const double> nu, std::span<const double> mu) {
  double d = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] <= 0.0) continue;
    if (mu[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += nu[i] * std::log2(nu[i] / mu[i]);
  }
  return d;
}

/// log2 P_mu(type of Y^n = nu).
inline double type_log_probability(std::span<const double> mu, const TypeVector& nu) {
  if (mu.size() != nu.counts.size()) throw InvalidArgumentError("type and distribution have different alphabets");
  double lp = log2_big(type_class_size(nu));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (nu.counts[i] == 0) continue;
    if (mu[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += static_cast<double>(nu.counts[i]) * std::log2(mu[i]);
  }
  return lp;
}

inline double type_log_probability(const Dist& mu, const TypeVector& nu) { return type_log_probability(mu.probs(), nu); }

using SanovEvent = std::function<bool(std::span<const double>)>;

struct SanovResult {
  std::int64_t n = 0;
  double rate = 0.0;            // (1/n) log2 P(type in Gamma), -inf when empty
  double min_divergence = 0.0;  // inf over Gamma ∩ T_n of D(nu || mu)
  double lower_bound = 0.0;     // -min_divergence - (M-1)/n log2(n+1)
  double upper_bound = 0.0;     // -min_divergence + (1/n) log2 |Gamma ∩ T_n ∩ supp|
  std::uint64_t types_in_event = 0;
  bool empty = false;
  [[nodiscard]] bool within_bounds(double slack = 1e-9) const {
    if (empty) return std::isinf(rate) && rate < 0;
    return rate >= lower_bound - slack && rate <= upper_bound + slack;
  }
};

inline SanovResult sanov_exact(std::span<const double> mu, const SanovEvent& event, std::int64_t n) {
  if (n <= 0) throw InvalidArgumentError("block length must be positive");
  const auto m = static_cast<std::int64_t>(mu.size());
  SanovResult r;
  r.n = n;
  r.min_divergence = std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for_each_type(m, n, [&](const TypeVector& t) {
    const auto p = t.probs();
    if (!event(p)) return;
    const double lp = type_log_probability(mu, t);
    if (std::isinf(lp)) return;
    ++r.types_in_event;
    logs.push_back(lp);
    r.min_divergence = std::min(r.min_divergence, divergence2(p, mu));
  });
  const double dn = static_cast<double>(n);
  if (logs.empty()) {
    r.empty = true;
    r.rate = -std::numeric_limits<double>::infinity();
    r.lower_bound = r.upper_bound = r.rate;
    return r;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double lp : logs) s += std::exp2(lp - top);
  r.rate = (top + std::log2(s)) / dn;
  r.lower_bound = -r.min_divergence - static_cast<double>(m - 1) / dn * std::log2(dn + 1.0);
  r.upper_bound = -r.min_divergence + std::log2(static_cast<double>(r.types_in_event)) / dn;
  return r;
}

inline SanovResult sanov_exact(const Dist& mu, const SanovEvent& event, std::int64_t n) {
  return sanov_exact(mu.probs(), event, n);
}

/// omega_n = n^(-1/4).
inline double default_omega(std::int64_t n) { return std::pow(static_cast<double>(n), -0.25); }

struct TypicalSetConfig {
  std::vector<double> base;  // probabilities over the alphabet
  std::int64_t n = 0;
  double omega = 0.0;
};

/// |k(a) - n p(a)| <= n p(a) omega for every symbol a.
inline bool in_band(std::span<const std::int64_t> counts, std::span<const double> p, std::int64_t n, double omega) {
  const double dn = static_cast<double>(n);
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (std::abs(static_cast<double>(counts[a]) - dn * p[a]) > dn * p[a] * omega + 1e-9) return false;
  }
  return true;
}

inline BigInt typical_set_size(const TypicalSetConfig& cfg) {
  if (!(cfg.omega > 0.0)) throw InvalidArgumentError("omega must be positive");
  BigInt total = 0;
  for_each_type(static_cast<std::int64_t>(cfg.base.size()), cfg.n, [&](const TypeVector& t) {
    if (in_band(t.counts, cfg.base, cfg.n, cfg.omega)) total += type_class_size(t);
  });
  return total;
}

inline TypicalSetConfig typical_config(const Dist& base, std::int64_t n) {
  return {std::vector<double>(base.probs().begin(), base.probs().end()), n, default_omega(n)};
}

struct GrowthResult {
  std::int64_t n = 0;
  double omega = 0.0;
  BigInt count = 0;         // |A_n + B_n|
  double rate = 0.0;        // (1/n) log2 count
  std::size_t sum_alphabet = 0;
  std::size_t sum_types = 0;
};

inline constexpr std::size_t kGrowthAlphabetCap = 9;

/// |A_n + B_n| for the omega-typical sets of P_X and P_Y, as a union of type classes on the
/// sum alphabet reached from joint types with typical marginals.
inline GrowthResult sumset_growth(const Dist& px, const Dist& py, std::int64_t n, double omega) {
  if (!(px.group() == py.group())) throw GroupMismatchError("marginals live in different groups");
  require_torsion_free(px.group(), "sumset_growth_rate");
  if (n <= 0) throw InvalidArgumentError("block length must be positive");
  if (!(omega > 0.0)) throw InvalidArgumentError("omega must be positive");
  const auto mx = px.size();
  const auto my = py.size();
  if (mx * my > kGrowthAlphabetCap) {
    throw SizeLimitError("product alphabet has " + std::to_string(mx * my) + " symbols, cap is " +
                         std::to_string(kGrowthAlphabetCap));
  }
  const auto& g = px.group();
  std::map<Element, std::size_t> sum_index;
  for (const auto& x : px.support())
    for (const auto& y : py.support()) sum_index.emplace(add(g, x, y), 0);
  std::size_t next = 0;
  for (auto& [e, i] : sum_index) i = next++;
  std::vector<std::size_t> cell_sum(mx * my);
  for (std::size_t i = 0; i < mx; ++i)
    for (std::size_t j = 0; j < my; ++j) cell_sum[i * my + j] = sum_index.at(add(g, px.support()[i], py.support()[j]));

  std::set<std::vector<std::int64_t>> sums;
  std::vector<std::int64_t> rows(mx);
  std::vector<std::int64_t> cols(my);
  std::vector<std::int64_t> s(sum_index.size());
  for_each_type(static_cast<std::int64_t>(mx * my), n, [&](const TypeVector& t) {
    std::fill(rows.begin(), rows.end(), 0);
    std::fill(cols.begin(), cols.end(), 0);
    for (std::size_t i = 0; i < mx; ++i) {
      for (std::size_t j = 0; j < my; ++j) {
        rows[i] += t.counts[i * my + j];
        cols[j] += t.counts[i * my + j];
      }
    }
    if (!in_band(rows, px.probs(), n, omega) || !in_band(cols, py.probs(), n, omega)) return;
    std::fill(s.begin(), s.end(), 0);
    for (std::size_t c = 0; c < t.counts.size(); ++c) s[cell_sum[c]] += t.counts[c];
    sums.insert(s);
  });

  GrowthResult r;
  r.n = n;
  r.omega = omega;
  r.sum_alphabet = sum_index.size();
  r.sum_types = sums.size();
  for (const auto& counts : sums) r.count += type_class_size(TypeVector{n, counts});
  r.rate = log2_big(r.count) / static_cast<double>(n);
  return r;
}

inline double sumset_growth_rate(const Dist& px, const Dist& py, std::int64_t n) {
  return sumset_growth(px, py, n, default_omega(n)).rate;
}

inline std::string to_decimal(const BigInt& x) { return x.str(); }

}  // namespace entroset
