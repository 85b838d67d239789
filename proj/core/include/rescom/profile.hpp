#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rescom {

// Per-class sample counts and derived frequencies of a (possibly
// long-tailed) dataset.
class LongTailProfile {
 public:
  explicit LongTailProfile(std::vector<std::size_t> counts);

  std::size_t num_classes() const { return counts_.size(); }
  std::size_t total() const { return total_; }
  std::size_t count(std::size_t k) const { return counts_.at(k); }
  const std::vector<std::size_t>& counts() const { return counts_; }
  double frequency(std::size_t k) const {
    return static_cast<double>(counts_.at(k)) / static_cast<double>(total_);
  }
  std::size_t max_count() const;
  std::size_t min_count() const;

  // Exponential long-tail: N_k = n_max * IF^{-(k-1)/(K-1)}, rounded, min 1.
  static LongTailProfile exponential(std::size_t k_classes, double imbalance_factor,
                                     std::size_t n_max);

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

enum class ShotGroup { Many, Medium, Few };

struct GroupThresholds {
  std::size_t hi = 100;  // Many: count > hi
  std::size_t lo = 20;   // Few: count < lo
};

// Many (> hi) / Medium ([lo, hi]) / Few (< lo) split per class.
std::vector<ShotGroup> split_many_medium_few(const LongTailProfile& profile,
                                             GroupThresholds thresholds = {});

}  // namespace rescom
