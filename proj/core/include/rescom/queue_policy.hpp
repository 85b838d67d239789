#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rescom/profile.hpp"

namespace rescom {

enum class QueuePolicy { Original, Reversed, Balanced };

QueuePolicy queue_policy_from_string(const std::string& s);
std::string to_string(QueuePolicy policy);

// Per-class capacities summing to total_capacity.
//   Original: no per-class constraint (callers use a single FIFO); the
//             returned vector is the balanced split, for reference only.
//   Balanced: equal shares, largest-remainder rounding.
//   Reversed: shares proportional to the reversed class-count ranking,
//             largest-remainder rounding, minimum 1 per class.
std::vector<std::size_t> apportion_capacities(const LongTailProfile& profile,
                                              QueuePolicy policy,
                                              std::size_t total_capacity);

}  // namespace rescom
