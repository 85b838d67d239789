#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rescom/profile.hpp"
#include "rescom/queue_policy.hpp"

namespace rescom {

// Accumulated (query class, key class) pair counts from the sampling
// simulation.
struct PairFrequencyMatrix {
  std::size_t num_classes = 0;
  std::vector<double> counts;  // row-major K x K
  std::size_t epochs = 0;

  double at(std::size_t query_class, std::size_t key_class) const {
    return counts[query_class * num_classes + key_class];
  }
  double max_diagonal() const;
  // Entries divided by the maximum diagonal entry.
  std::vector<double> normalized() const;
  // Header row of class indices, one row per query class, 6 decimals.
  void write_csv(std::ostream& os) const;
};

// Closed form E[sum_t P_{t,k}] = N_k^2 Q / N for one epoch.
double expected_positive_pairs(const LongTailProfile& profile,
                               std::size_t queue_size, std::size_t class_index);

// (max_k N_k / min_k N_k)^2. Throws for single-class profiles.
double contrastive_imbalance_factor(const LongTailProfile& profile);

struct SimConfig {
  std::size_t batch_size = 128;
  QueuePolicy policy = QueuePolicy::Original;
  std::size_t queue_size = 1024;  // total capacity across classes
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

// Label-level Monte-Carlo of the batch/queue pairing process. Each epoch
// shuffles the N labels, walks batches of size B, counts (batch element,
// queue element) pairs against the current queue, then enqueues the batch.
// Counts accumulate only once the queue has first reached capacity.
PairFrequencyMatrix simulate_pair_frequencies(const LongTailProfile& profile,
                                              const SimConfig& cfg);

}  // namespace rescom
