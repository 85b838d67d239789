#include "rescom/queue_bank.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace rescom {

ClassQueueBank ClassQueueBank::balanced(std::size_t num_classes,
                                        std::size_t per_class_capacity) {
  if (num_classes < 1 || per_class_capacity < 1)
    throw std::invalid_argument("balanced bank: K and Q must be >= 1");
  ClassQueueBank bank;
  bank.policy_ = QueuePolicy::Balanced;
  bank.num_classes_ = num_classes;
  bank.per_class_capacity_ = per_class_capacity;
  bank.total_capacity_ = num_classes * per_class_capacity;
  bank.capacities_.assign(num_classes, per_class_capacity);
  bank.per_class_.resize(num_classes);
  return bank;
}

ClassQueueBank ClassQueueBank::original(std::size_t num_classes,
                                        std::size_t total_capacity) {
  if (num_classes < 1 || total_capacity < 1)
    throw std::invalid_argument("original bank: K and capacity must be >= 1");
  ClassQueueBank bank;
  bank.policy_ = QueuePolicy::Original;
  bank.num_classes_ = num_classes;
  bank.total_capacity_ = total_capacity;
  return bank;
}

ClassQueueBank ClassQueueBank::reversed(const LongTailProfile& profile,
                                        std::size_t total_capacity) {
  ClassQueueBank bank;
  bank.policy_ = QueuePolicy::Reversed;
  bank.num_classes_ = profile.num_classes();
  bank.total_capacity_ = total_capacity;
  bank.capacities_ = apportion_capacities(profile, QueuePolicy::Reversed, total_capacity);
  bank.per_class_.resize(profile.num_classes());
  return bank;
}

std::size_t ClassQueueBank::size() const {
  if (policy_ == QueuePolicy::Original) return global_.size();
  std::size_t s = 0;
  for (const auto& q : per_class_) s += q.size();
  return s;
}

std::size_t ClassQueueBank::occupancy(std::size_t label) const {
  if (label >= num_classes_) throw std::out_of_range("occupancy: bad label");
  if (policy_ == QueuePolicy::Original) {
    std::size_t c = 0;
    for (const auto& e : global_)
      if (e.label == label) ++c;
    return c;
  }
  return per_class_[label].size();
}

std::size_t ClassQueueBank::capacity(std::size_t label) const {
  if (policy_ == QueuePolicy::Original)
    throw std::logic_error("capacity: original policy has no per-class cap");
  if (label >= num_classes_) throw std::out_of_range("capacity: bad label");
  return capacities_[label];
}

void ClassQueueBank::enqueue(const QueueEntry& entry) {
  if (entry.label >= num_classes_)
    throw std::invalid_argument("enqueue: label out of range");
  const double n = norm2(entry.key);
  if (std::abs(n - 1.0) > 1e-3)
    throw std::invalid_argument("enqueue: key is not unit-norm");
  if (policy_ == QueuePolicy::Original) {
    global_.push_back(entry);
    if (global_.size() > total_capacity_) global_.pop_front();
    return;
  }
  auto& q = per_class_[entry.label];
  q.push_back(entry.key);
  if (q.size() > capacities_[entry.label]) q.pop_front();
}

void ClassQueueBank::enqueue(const std::vector<QueueEntry>& entries) {
  for (const auto& e : entries) enqueue(e);
}

std::vector<Vector> ClassQueueBank::get_positives(std::uint32_t label) const {
  if (label >= num_classes_) throw std::out_of_range("get_positives: bad label");
  std::vector<Vector> out;
  if (policy_ == QueuePolicy::Original) {
    for (const auto& e : global_)
      if (e.label == label) out.push_back(e.key);
    return out;
  }
  const auto& q = per_class_[label];
  out.assign(q.begin(), q.end());
  return out;
}

std::vector<Vector> ClassQueueBank::get_negatives(std::uint32_t label) const {
  if (label >= num_classes_) throw std::out_of_range("get_negatives: bad label");
  std::vector<Vector> out;
  for (std::size_t k = 0; k < num_classes_; ++k) {
    if (k == label) continue;
    if (policy_ == QueuePolicy::Original) {
      for (const auto& e : global_)
        if (e.label == k) out.push_back(e.key);
    } else {
      out.insert(out.end(), per_class_[k].begin(), per_class_[k].end());
    }
  }
  return out;
}

bool ClassQueueBank::warm() const {
  if (policy_ == QueuePolicy::Original) return global_.size() >= total_capacity_;
  for (std::size_t k = 0; k < num_classes_; ++k)
    if (per_class_[k].size() < capacities_[k]) return false;
  return true;
}

std::vector<QueueEntry> ClassQueueBank::snapshot() const {
  std::vector<QueueEntry> out;
  if (policy_ == QueuePolicy::Original) {
    out.assign(global_.begin(), global_.end());
    return out;
  }
  for (std::size_t k = 0; k < num_classes_; ++k)
    for (const auto& key : per_class_[k])
      out.push_back({key, static_cast<std::uint32_t>(k)});
  return out;
}

void ClassQueueBank::write_occupancy_csv(std::ostream& os) const {
  os << "class,occupancy\n";
  for (std::size_t k = 0; k < num_classes_; ++k)
    os << k << "," << occupancy(k) << "\n";
}

}  // namespace rescom
