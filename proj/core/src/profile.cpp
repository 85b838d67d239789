#include "rescom/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rescom {

LongTailProfile::LongTailProfile(std::vector<std::size_t> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw std::invalid_argument("profile: no classes");
  for (std::size_t c : counts_)
    if (c < 1) throw std::invalid_argument("profile: class count must be >= 1");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t LongTailProfile::max_count() const {
  return *std::max_element(counts_.begin(), counts_.end());
}

std::size_t LongTailProfile::min_count() const {
  return *std::min_element(counts_.begin(), counts_.end());
}

LongTailProfile LongTailProfile::exponential(std::size_t k_classes,
                                             double imbalance_factor,
                                             std::size_t n_max) {
  if (k_classes < 1) throw std::invalid_argument("profile: K must be >= 1");
  if (imbalance_factor < 1.0)
    throw std::invalid_argument("profile: imbalance factor must be >= 1");
  std::vector<std::size_t> counts(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k) {
    const double expo = k_classes == 1
                            ? 0.0
                            : static_cast<double>(k) / static_cast<double>(k_classes - 1);
    const double n = static_cast<double>(n_max) * std::pow(imbalance_factor, -expo);
    counts[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n)));
  }
  return LongTailProfile(std::move(counts));
}

std::vector<ShotGroup> split_many_medium_few(const LongTailProfile& profile,
                                             GroupThresholds thresholds) {
  if (!(thresholds.hi > thresholds.lo) || thresholds.lo == 0)
    throw std::invalid_argument("split: thresholds must satisfy hi > lo > 0");
  std::vector<ShotGroup> groups(profile.num_classes());
  for (std::size_t k = 0; k < profile.num_classes(); ++k) {
    const std::size_t n = profile.count(k);
    if (n > thresholds.hi)
      groups[k] = ShotGroup::Many;
    else if (n < thresholds.lo)
      groups[k] = ShotGroup::Few;
    else
      groups[k] = ShotGroup::Medium;
  }
  return groups;
}

}  // namespace rescom
