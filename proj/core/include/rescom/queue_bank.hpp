#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <vector>

#include "rescom/numerics.hpp"
#include "rescom/queue_policy.hpp"

namespace rescom {

struct QueueEntry {
  Vector key;           // unit-norm embedding
  std::uint32_t label = 0;
};

// Key memory of detached view-2 embeddings. Balanced policy keeps K ring
// buffers of capacity Q each; original keeps one global FIFO; reversed keeps
// per-class FIFOs with capacities following the reversed count ranking.
class ClassQueueBank {
 public:
  static ClassQueueBank balanced(std::size_t num_classes, std::size_t per_class_capacity);
  static ClassQueueBank original(std::size_t num_classes, std::size_t total_capacity);
  static ClassQueueBank reversed(const LongTailProfile& profile, std::size_t total_capacity);

  QueuePolicy policy() const { return policy_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t per_class_capacity() const { return per_class_capacity_; }
  std::size_t total_capacity() const { return total_capacity_; }
  std::size_t size() const;
  std::size_t occupancy(std::size_t label) const;
  // Per-class capacity; throws under the original policy, which has none.
  std::size_t capacity(std::size_t label) const;

  // Oldest entry of the key's class (original: globally oldest) is evicted
  // when full. Throws if the key norm deviates from 1 by more than 1e-3.
  void enqueue(const QueueEntry& entry);
  void enqueue(const std::vector<QueueEntry>& entries);

  // All stored keys of the label, oldest first.
  std::vector<Vector> get_positives(std::uint32_t label) const;
  // All stored keys of other labels, ordered by (class id, age).
  std::vector<Vector> get_negatives(std::uint32_t label) const;

  // Balanced/reversed: every buffer at capacity. Original: FIFO at capacity.
  bool warm() const;

  // All stored entries; original policy in arrival order, per-class
  // policies by (class id, age).
  std::vector<QueueEntry> snapshot() const;

  // Rows of "class,occupancy".
  void write_occupancy_csv(std::ostream& os) const;

 private:
  ClassQueueBank() = default;

  QueuePolicy policy_ = QueuePolicy::Balanced;
  std::size_t num_classes_ = 0;
  std::size_t per_class_capacity_ = 0;  // balanced only
  std::size_t total_capacity_ = 0;
  std::vector<std::size_t> capacities_;          // balanced/reversed
  std::vector<std::deque<Vector>> per_class_;    // balanced/reversed
  std::deque<QueueEntry> global_;                // original
};

}  // namespace rescom
