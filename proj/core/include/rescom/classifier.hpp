#pragma once

#include <cstdint>
#include <utility>

#include "rescom/contrastive.hpp"
#include "rescom/numerics.hpp"
#include "rescom/profile.hpp"

namespace rescom {

// Cross-entropy on logits shifted by log class counts. grad is with respect
// to the raw logits: softmax(s + log N) - onehot(y).
LossResult balanced_softmax_loss(const Vector& logits, std::uint32_t label,
                                 const LongTailProfile& profile);

struct SiamBSResult {
  double value = 0.0;
  Vector grad_view1;
  Vector grad_view2;
};

// Two-view average of the balanced softmax loss; per-view gradients carry
// the 1/2 factor.
SiamBSResult siambs_loss(const Vector& logits_view1, const Vector& logits_view2,
                         std::uint32_t label, const LongTailProfile& profile);

}  // namespace rescom
