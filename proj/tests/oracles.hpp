#pragma once

// Independent brute-force reference computations used only by the tests.

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "entroset/magnification.hpp"

namespace oracle {

// Output law of the entropy-maximising channel by peeling densest subsets:
// repeatedly take the input set S maximising P(S) / |N(S) \ used| (largest S among ties);
// its fresh neighbours all sit at that level.
inline std::vector<double> max_entropy_output(const entroset::BipartiteGraph& g, const std::vector<double>& px) {
  const auto n = g.left_size();
  std::vector<bool> in_left(n), used_right(g.right_size(), false);
  for (std::size_t a = 0; a < n; ++a) in_left[a] = px[a] > 1e-12;
  std::vector<double> py(g.right_size(), 0.0);
  while (true) {
    double best = -1.0;
    std::uint32_t best_mask = 0;
    int best_size = -1;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      bool ok = true;
      double mass = 0.0;
      std::set<std::size_t> nb;
      int size = 0;
      for (std::size_t a = 0; a < n; ++a) {
        if (!(mask >> a & 1u)) continue;
        if (!in_left[a]) {
          ok = false;
          break;
        }
        mass += px[a];
        ++size;
        for (auto b : g.neighbors(a))
          if (!used_right[b]) nb.insert(b);
      }
      if (!ok || nb.empty()) continue;
      const double ratio = mass / static_cast<double>(nb.size());
      if (ratio > best + 1e-13 || (ratio > best - 1e-13 && size > best_size)) {
        best = ratio;
        best_mask = mask;
        best_size = size;
      }
    }
    if (best_mask == 0) break;
    for (std::size_t a = 0; a < n; ++a) {
      if (!(best_mask >> a & 1u)) continue;
      in_left[a] = false;
      for (auto b : g.neighbors(a)) {
        if (!used_right[b]) {
          used_right[b] = true;
          py[b] = best;
        }
      }
    }
  }
  return py;
}

// Brute-force count of |A_n + B_n| by enumerating sequences in the typical sets.
// Alphabets are 1-D integer values with probabilities; omega is the band width.
inline std::size_t typical_sumset_size(const std::vector<std::int64_t>& xa, const std::vector<double>& pa,
                                       const std::vector<std::int64_t>& xb, const std::vector<double>& pb,
                                       int n, double omega) {
  auto typical = [&](const std::vector<std::int64_t>& alpha, const std::vector<double>& p) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      std::vector<int> counts(alpha.size(), 0);
      for (auto i : idx) ++counts[i];
      bool ok = true;
      for (std::size_t s = 0; s < alpha.size(); ++s) {
        if (std::abs(counts[s] - n * p[s]) > n * p[s] * omega + 1e-9) ok = false;
      }
      if (ok) {
        std::vector<std::int64_t> seq;
        for (auto i : idx) seq.push_back(alpha[i]);
        out.push_back(seq);
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == alpha.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
    return out;
  };
  const auto a = typical(xa, pa);
  const auto b = typical(xb, pb);
  std::set<std::vector<std::int64_t>> sums;
  for (const auto& s : a) {
    for (const auto& t : b) {
      std::vector<std::int64_t> z(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) z[i] = s[i] + t[i];
      sums.insert(std::move(z));
    }
  }
  return sums.size();
}

}  // namespace oracle
