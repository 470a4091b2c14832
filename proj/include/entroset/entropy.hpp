#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroset/error.hpp"
#include "entroset/group.hpp"

namespace entroset {

/// Probabilities below this are treated as zero and pruned from supports.
inline constexpr double kSupportThreshold = 1e-12;

/// Shannon entropy in nats with 0 log 0 = 0.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

inline double entropy_bits(std::span<const double> p) { return entropy(p) / std::log(2.0); }

template <typename Map>
double entropy_of_masses(const Map& masses) {
  double h = 0.0;
  for (const auto& [key, x] : masses) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

/// Finitely supported probability distribution on a group.
class Dist {
 public:
  Dist() = default;

  /// Duplicate support points are merged; masses below kSupportThreshold are pruned.
  Dist(GroupSpec group, std::vector<Element> support, std::vector<double> probs)
      : group_(std::move(group)) {
    if (support.size() != probs.size()) throw InvalidArgumentError("support and probs differ in length");
    std::map<Element, double> merged;
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
        throw InvalidArgumentError("probabilities must be finite and non-negative");
      }
      merged[make_element(group_, std::move(support[i].coords))] += probs[i];
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidArgumentError("probabilities sum to " + std::to_string(total) + ", not 1");
    }
    double kept = 0.0;
    for (auto& [e, p] : merged) {
      if (p < kSupportThreshold) continue;
      support_.push_back(e);
      probs_.push_back(p);
      kept += p;
    }
    if (support_.empty()) throw InvalidArgumentError("distribution has empty support");
    for (auto& p : probs_) p /= kept;
  }

  /// Normalises arbitrary non-negative weights.
  static Dist from_weights(GroupSpec group, std::vector<Element> support, std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidArgumentError("weights must have positive total");
    for (auto& w : weights) w /= total;
    // Renormalisation can leave ~1e-16 rounding; the constructor tolerates it.
    return Dist(std::move(group), std::move(support), std::move(weights));
  }

  static Dist uniform(const FiniteSet& s) {
    if (s.empty()) throw InvalidArgumentError("uniform distribution on an empty set");
    std::vector<Element> els(s.elements().begin(), s.elements().end());
    std::vector<double> probs(els.size(), 1.0 / static_cast<double>(els.size()));
    return from_weights(s.group(), std::move(els), std::move(probs));
  }

  static Dist point(GroupSpec group, Element e) {
    return Dist(std::move(group), {std::move(e)}, {1.0});
  }

  [[nodiscard]] const GroupSpec& group() const noexcept { return group_; }
  [[nodiscard]] std::span<const Element> support() const noexcept { return support_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }
  [[nodiscard]] double entropy() const { return entroset::entropy(probs_); }
  [[nodiscard]] FiniteSet support_set() const { return FiniteSet(group_, support_); }

 private:
  GroupSpec group_;
  std::vector<Element> support_;
  std::vector<double> probs_;
};

inline nlohmann::json to_json(const Dist& d) {
  nlohmann::json sup = nlohmann::json::array();
  for (const auto& e : d.support()) sup.push_back(e.coords);
  return {{"group", to_json(d.group())},
          {"support", std::move(sup)},
          {"probs", std::vector<double>(d.probs().begin(), d.probs().end())}};
}

/// Accepts either "probs" (must sum to 1) or "weights" (normalised).
inline Dist dist_from_json(const nlohmann::json& j) {
  auto g = group_from_json(j.at("group"));
  std::vector<Element> sup;
  for (const auto& e : j.at("support")) sup.push_back(Element{e.get<std::vector<std::int64_t>>()});
  if (j.contains("weights")) {
    return Dist::from_weights(std::move(g), std::move(sup), j.at("weights").get<std::vector<double>>());
  }
  return Dist(std::move(g), std::move(sup), j.at("probs").get<std::vector<double>>());
}

}  // namespace entroset
