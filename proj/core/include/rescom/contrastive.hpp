#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rescom/numerics.hpp"
#include "rescom/profile.hpp"
#include "rescom/queue_bank.hpp"

namespace rescom {

struct ContrastiveConfig {
  double temperature = 0.2;
  double beta = 0.0;      // effective-number parameter, in [0, 1)
  std::size_t q_pos = 1;  // mined positives, <= Q
  std::size_t q_neg = 1;  // mined negatives, <= (K-1)Q
};

struct LossResult {
  double value = 0.0;
  Vector grad_query;  // d value / d query embedding
};

// (1 - beta) / (1 - beta^N); 1 for every N at beta = 0.
double class_weight(double beta, std::size_t class_count);

// Queue version of the supervised contrastive loss: positives are the
// label-matching queue entries, the denominator runs over the whole queue.
LossResult supcon_queue_loss(const Vector& query, std::uint32_t label,
                             const std::vector<QueueEntry>& queue,
                             const ContrastiveConfig& cfg);

// supcon_queue_loss scaled by the effective-number class weight.
LossResult cb_supcon_loss(const Vector& query, std::uint32_t label,
                          const std::vector<QueueEntry>& queue,
                          const LongTailProfile& profile,
                          const ContrastiveConfig& cfg);

// Class-balanced-queue contrastive loss over a warm balanced bank, with the
// analytical gradient decoupled into positive and negative pair parts.
LossResult bq_loss(const Vector& query, std::uint32_t label,
                   const ClassQueueBank& bank, const LongTailProfile& profile,
                   const ContrastiveConfig& cfg);

struct MinedPairs {
  std::vector<Vector> positives;  // q_pos least-similar same-class keys
  std::vector<Vector> negatives;  // q_neg most-similar other-class keys
};

MinedPairs mine_pairs(const Vector& query, std::uint32_t label,
                      const ClassQueueBank& bank, const ContrastiveConfig& cfg);

// Hard-pair-mining contrastive loss; the denominator runs over the mined
// q_pos + q_neg keys only. Degrades to bq_loss at q_pos = Q,
// q_neg = (K-1)Q.
LossResult spm_loss(const Vector& query, std::uint32_t label,
                    const ClassQueueBank& bank, const LongTailProfile& profile,
                    const ContrastiveConfig& cfg);

struct GradProfileEntry {
  std::size_t rank = 0;  // within its polarity, by similarity descending
  bool is_positive = false;
  double similarity = 0.0;
  double grad_norm = 0.0;
};

// Per-key gradient contribution norms of bq_loss, positives and negatives
// each sorted by similarity descending.
std::vector<GradProfileEntry> gradient_norm_profile(const Vector& query,
                                                    std::uint32_t label,
                                                    const ClassQueueBank& bank,
                                                    const LongTailProfile& profile,
                                                    const ContrastiveConfig& cfg);

// Columns: rank, polarity, similarity, grad_norm.
void write_grad_profile_csv(std::ostream& os,
                            const std::vector<GradProfileEntry>& entries);

}  // namespace rescom
