#include "rescom/queue_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rescom {

QueuePolicy queue_policy_from_string(const std::string& s) {
  if (s == "original") return QueuePolicy::Original;
  if (s == "reversed") return QueuePolicy::Reversed;
  if (s == "balanced") return QueuePolicy::Balanced;
  throw std::invalid_argument("unknown queue policy: " + s);
}

std::string to_string(QueuePolicy policy) {
  switch (policy) {
    case QueuePolicy::Original: return "original";
    case QueuePolicy::Reversed: return "reversed";
    case QueuePolicy::Balanced: return "balanced";
  }
  return "?";
}

namespace {

// Largest-remainder apportionment with a floor of 1 per class.
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                           std::size_t total) {
  const std::size_t k = weights.size();
  if (total < k) throw std::invalid_argument("capacity smaller than class count");
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> alloc(k);
  std::vector<double> frac(k);
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / wsum;
    alloc[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(quota)));
    frac[i] = quota - std::floor(quota);
    used += alloc[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  std::size_t oi = 0;
  while (used < total) {
    alloc[order[oi % k]] += 1;
    ++used;
    ++oi;
  }
  // The floor of 1 can overshoot on extreme profiles; trim the largest.
  while (used > total) {
    auto it = std::max_element(alloc.begin(), alloc.end());
    if (*it <= 1) throw std::invalid_argument("capacity smaller than class count");
    --*it;
    --used;
  }
  return alloc;
}

}  // namespace

std::vector<std::size_t> apportion_capacities(const LongTailProfile& profile,
                                              QueuePolicy policy,
                                              std::size_t total_capacity) {
  const std::size_t k = profile.num_classes();
  std::vector<double> weights(k, 1.0);
  if (policy == QueuePolicy::Reversed) {
    // Class at descending-count rank r gets the count of rank K-1-r.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return profile.count(a) > profile.count(b);
    });
    for (std::size_t r = 0; r < k; ++r)
      weights[order[r]] = static_cast<double>(profile.count(order[k - 1 - r]));
  } else if (policy == QueuePolicy::Original) {
    // Reference split only; the original policy uses one global FIFO.
  }
  return largest_remainder(weights, total_capacity);
}

}  // namespace rescom
