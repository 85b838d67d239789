#include "rescom/imbalance_sim.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "rescom/rng.hpp"

namespace rescom {

double PairFrequencyMatrix::max_diagonal() const {
  double m = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) m = std::max(m, at(k, k));
  return m;
}

std::vector<double> PairFrequencyMatrix::normalized() const {
  const double m = max_diagonal();
  std::vector<double> out(counts.size(), 0.0);
  if (m > 0.0)
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / m;
  return out;
}

void PairFrequencyMatrix::write_csv(std::ostream& os) const {
  const auto norm = normalized();
  os << "query_class";
  for (std::size_t k = 0; k < num_classes; ++k) os << "," << k;
  os << "\n";
  os << std::fixed << std::setprecision(6);
  for (std::size_t q = 0; q < num_classes; ++q) {
    os << q;
    for (std::size_t k = 0; k < num_classes; ++k)
      os << "," << norm[q * num_classes + k];
    os << "\n";
  }
}

double expected_positive_pairs(const LongTailProfile& profile,
                               std::size_t queue_size, std::size_t class_index) {
  if (queue_size < 1) throw std::invalid_argument("queue size must be >= 1");
  const double nk = static_cast<double>(profile.count(class_index));
  return nk * nk * static_cast<double>(queue_size) /
         static_cast<double>(profile.total());
}

double contrastive_imbalance_factor(const LongTailProfile& profile) {
  if (profile.num_classes() < 2)
    throw std::invalid_argument("imbalance factor needs >= 2 classes");
  const double r = static_cast<double>(profile.max_count()) /
                   static_cast<double>(profile.min_count());
  return r * r;
}

namespace {

// Label-only queue: per-class FIFO under balanced/reversed capacities, one
// global FIFO under the original policy.
class LabelQueue {
 public:
  LabelQueue(const LongTailProfile& profile, QueuePolicy policy,
             std::size_t total_capacity)
      : policy_(policy),
        total_capacity_(total_capacity),
        occupancy_(profile.num_classes(), 0),
        per_class_(profile.num_classes()) {
    if (policy != QueuePolicy::Original)
      capacities_ = apportion_capacities(profile, policy, total_capacity);
  }

  void push(std::uint32_t label) {
    if (policy_ == QueuePolicy::Original) {
      global_.push_back(label);
      ++occupancy_[label];
      ++size_;
      if (size_ > total_capacity_) {
        --occupancy_[global_.front()];
        global_.pop_front();
        --size_;
      }
    } else {
      auto& q = per_class_[label];
      q.push_back(label);
      ++occupancy_[label];
      ++size_;
      if (q.size() > capacities_[label]) {
        q.pop_front();
        --occupancy_[label];
        --size_;
      }
    }
  }

  bool full() const { return size_ >= total_capacity_; }
  const std::vector<std::size_t>& occupancy() const { return occupancy_; }

 private:
  QueuePolicy policy_;
  std::size_t total_capacity_;
  std::size_t size_ = 0;
  std::vector<std::size_t> capacities_;
  std::vector<std::size_t> occupancy_;
  std::deque<std::uint32_t> global_;
  std::vector<std::deque<std::uint32_t>> per_class_;
};

}  // namespace

PairFrequencyMatrix simulate_pair_frequencies(const LongTailProfile& profile,
                                              const SimConfig& cfg) {
  const std::size_t k_classes = profile.num_classes();
  const std::size_t n = profile.total();
  if (cfg.batch_size < 1 || cfg.batch_size > n)
    throw std::invalid_argument("simulate: batch size must be in [1, N]");
  if (cfg.epochs < 1) throw std::invalid_argument("simulate: epochs must be >= 1");

  std::vector<std::uint32_t> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < k_classes; ++k)
    labels.insert(labels.end(), profile.count(k), static_cast<std::uint32_t>(k));

  PairFrequencyMatrix result;
  result.num_classes = k_classes;
  result.counts.assign(k_classes * k_classes, 0.0);
  result.epochs = cfg.epochs;

  LabelQueue queue(profile, cfg.policy, cfg.queue_size);
  auto rng = make_rng(cfg.seed, "simulate");
  bool accumulating = false;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n);
      if (accumulating) {
        const auto& occ = queue.occupancy();
        for (std::size_t i = start; i < end; ++i) {
          double* row = &result.counts[labels[i] * k_classes];
          for (std::size_t k = 0; k < k_classes; ++k)
            row[k] += static_cast<double>(occ[k]);
        }
      }
      for (std::size_t i = start; i < end; ++i) queue.push(labels[i]);
      if (!accumulating && queue.full()) accumulating = true;
    }
  }
  return result;
}

}  // namespace rescom
