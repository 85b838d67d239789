#include "rescom/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace rescom {

LossResult balanced_softmax_loss(const Vector& logits, std::uint32_t label,
                                 const LongTailProfile& profile) {
  const std::size_t k_classes = profile.num_classes();
  if (logits.size() != k_classes)
    throw std::invalid_argument("balanced_softmax_loss: logit/class mismatch");
  if (label >= k_classes)
    throw std::invalid_argument("balanced_softmax_loss: label out of range");
  if (k_classes < 2)
    throw std::invalid_argument("balanced_softmax_loss: needs >= 2 classes");

  std::vector<double> adjusted(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k)
    adjusted[k] = logits[k] + std::log(static_cast<double>(profile.count(k)));
  const double lse = log_sum_exp(adjusted);

  LossResult result;
  result.value = lse - adjusted[label];
  result.grad_query.resize(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k)
    result.grad_query[k] = std::exp(adjusted[k] - lse) - (k == label ? 1.0 : 0.0);
  return result;
}

SiamBSResult siambs_loss(const Vector& logits_view1, const Vector& logits_view2,
                         std::uint32_t label, const LongTailProfile& profile) {
  if (logits_view1.size() != logits_view2.size())
    throw std::invalid_argument("siambs_loss: view dimension mismatch");
  const LossResult r1 = balanced_softmax_loss(logits_view1, label, profile);
  const LossResult r2 = balanced_softmax_loss(logits_view2, label, profile);

  SiamBSResult out;
  out.value = 0.5 * (r1.value + r2.value);
  out.grad_view1 = r1.grad_query;
  out.grad_view2 = r2.grad_query;
  for (double& g : out.grad_view1) g *= 0.5;
  for (double& g : out.grad_view2) g *= 0.5;
  return out;
}

}  // namespace rescom
