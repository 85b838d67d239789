#include "rescom/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rescom {

double class_weight(double beta, std::size_t class_count) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("class_weight: beta must be in [0, 1)");
  if (class_count < 1)
    throw std::invalid_argument("class_weight: class count must be >= 1");
  if (beta == 0.0) return 1.0;
  const double n = static_cast<double>(class_count);
  // 1 - beta^N via expm1 for beta close to 1
  const double denom = -std::expm1(n * std::log(beta));
  return (1.0 - beta) / denom;
}

namespace {

void check_config(const ContrastiveConfig& cfg) {
  if (!(cfg.temperature > 0.0))
    throw std::invalid_argument("contrastive: temperature must be > 0");
  if (cfg.beta < 0.0 || cfg.beta >= 1.0)
    throw std::invalid_argument("contrastive: beta must be in [0, 1)");
}

// Shared kernel: value = -(w/m) sum_p [s_p/tau - lse], with the log-sum-exp
// over positives and negatives together; gradient
// (w/tau) [ sum_j z_j P_j - (1/m) sum_p z_p ].
LossResult weighted_softmax_loss(const Vector& query,
                                 const std::vector<Vector>& positives,
                                 const std::vector<Vector>& negatives,
                                 double weight, double tau, std::size_t m) {
  const std::size_t np = positives.size();
  const std::size_t total = np + negatives.size();
  std::vector<double> logits(total);
  for (std::size_t i = 0; i < np; ++i) logits[i] = dot(query, positives[i]) / tau;
  for (std::size_t i = 0; i < negatives.size(); ++i)
    logits[np + i] = dot(query, negatives[i]) / tau;
  const double lse = log_sum_exp(logits);

  LossResult result;
  double pos_logit_sum = 0.0;
  for (std::size_t i = 0; i < np; ++i) pos_logit_sum += logits[i];
  const double md = static_cast<double>(m);
  result.value = -(weight / md) * (pos_logit_sum - static_cast<double>(np) * lse);
  // The m positives in the outer sum are exactly `positives` when m == np;
  // callers guarantee that.
  result.grad_query.assign(query.size(), 0.0);
  auto axpy = [&](double a, const Vector& v) {
    for (std::size_t d = 0; d < v.size(); ++d) result.grad_query[d] += a * v[d];
  };
  const double scale = weight * static_cast<double>(np) / (md * tau);
  for (std::size_t i = 0; i < total; ++i) {
    const double p = std::exp(logits[i] - lse);
    const Vector& z = i < np ? positives[i] : negatives[i - np];
    axpy(scale * p, z);
  }
  for (std::size_t i = 0; i < np; ++i) axpy(-weight / (md * tau), positives[i]);
  return result;
}

}  // namespace

LossResult supcon_queue_loss(const Vector& query, std::uint32_t label,
                             const std::vector<QueueEntry>& queue,
                             const ContrastiveConfig& cfg) {
  check_config(cfg);
  std::vector<Vector> positives;
  std::vector<Vector> negatives;
  for (const auto& e : queue) {
    if (e.label == label)
      positives.push_back(e.key);
    else
      negatives.push_back(e.key);
  }
  if (positives.empty())
    throw std::domain_error("supcon_queue_loss: no positive key in queue");
  return weighted_softmax_loss(query, positives, negatives, 1.0, cfg.temperature,
                               positives.size());
}

LossResult cb_supcon_loss(const Vector& query, std::uint32_t label,
                          const std::vector<QueueEntry>& queue,
                          const LongTailProfile& profile,
                          const ContrastiveConfig& cfg) {
  const double w = class_weight(cfg.beta, profile.count(label));
  LossResult r = supcon_queue_loss(query, label, queue, cfg);
  r.value *= w;
  for (double& g : r.grad_query) g *= w;
  return r;
}

namespace {

void require_warm_balanced(const ClassQueueBank& bank) {
  if (bank.policy() != QueuePolicy::Balanced)
    throw std::invalid_argument("loss requires a balanced bank");
  if (!bank.warm())
    throw std::domain_error("loss requires a warm bank");
}

}  // namespace

LossResult bq_loss(const Vector& query, std::uint32_t label,
                   const ClassQueueBank& bank, const LongTailProfile& profile,
                   const ContrastiveConfig& cfg) {
  check_config(cfg);
  require_warm_balanced(bank);
  const auto positives = bank.get_positives(label);
  const auto negatives = bank.get_negatives(label);
  const double w = class_weight(cfg.beta, profile.count(label));
  return weighted_softmax_loss(query, positives, negatives, w, cfg.temperature,
                               bank.per_class_capacity());
}

MinedPairs mine_pairs(const Vector& query, std::uint32_t label,
                      const ClassQueueBank& bank, const ContrastiveConfig& cfg) {
  check_config(cfg);
  require_warm_balanced(bank);
  const auto positives = bank.get_positives(label);
  const auto negatives = bank.get_negatives(label);
  if (cfg.q_pos < 1 || cfg.q_pos > positives.size())
    throw std::invalid_argument("mine_pairs: q_pos out of range");
  if (cfg.q_neg < 1 || cfg.q_neg > negatives.size())
    throw std::invalid_argument("mine_pairs: q_neg out of range");

  std::vector<double> pos_sims(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i)
    pos_sims[i] = dot(query, positives[i]);
  std::vector<double> neg_sims(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i)
    neg_sims[i] = dot(query, negatives[i]);

  MinedPairs mined;
  for (std::size_t i : top_k_indices(pos_sims, cfg.q_pos, TopKOrder::Smallest))
    mined.positives.push_back(positives[i]);
  for (std::size_t i : top_k_indices(neg_sims, cfg.q_neg, TopKOrder::Largest))
    mined.negatives.push_back(negatives[i]);
  return mined;
}

LossResult spm_loss(const Vector& query, std::uint32_t label,
                    const ClassQueueBank& bank, const LongTailProfile& profile,
                    const ContrastiveConfig& cfg) {
  const MinedPairs mined = mine_pairs(query, label, bank, cfg);
  const double w = class_weight(cfg.beta, profile.count(label));
  // Mined sets are treated as fixed; no gradient through the selection.
  return weighted_softmax_loss(query, mined.positives, mined.negatives, w,
                               cfg.temperature, cfg.q_pos);
}

std::vector<GradProfileEntry> gradient_norm_profile(const Vector& query,
                                                    std::uint32_t label,
                                                    const ClassQueueBank& bank,
                                                    const LongTailProfile& profile,
                                                    const ContrastiveConfig& cfg) {
  check_config(cfg);
  require_warm_balanced(bank);
  const auto positives = bank.get_positives(label);
  const auto negatives = bank.get_negatives(label);
  const double tau = cfg.temperature;
  const double w = class_weight(cfg.beta, profile.count(label));
  const double q = static_cast<double>(bank.per_class_capacity());

  const std::size_t np = positives.size();
  std::vector<double> logits(np + negatives.size());
  for (std::size_t i = 0; i < np; ++i) logits[i] = dot(query, positives[i]) / tau;
  for (std::size_t i = 0; i < negatives.size(); ++i)
    logits[np + i] = dot(query, negatives[i]) / tau;
  const double lse = log_sum_exp(logits);

  auto collect = [&](const std::vector<Vector>& keys, std::size_t offset,
                     bool is_positive) {
    std::vector<GradProfileEntry> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const double p = std::exp(logits[offset + i] - lse);
      const double coef = (w / tau) * (p - (is_positive ? 1.0 / q : 0.0));
      out[i].is_positive = is_positive;
      out[i].similarity = logits[offset + i] * tau;
      out[i].grad_norm = std::abs(coef) * norm2(keys[i]);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GradProfileEntry& a, const GradProfileEntry& b) {
                       return a.similarity > b.similarity;
                     });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i;
    return out;
  };

  auto entries = collect(positives, 0, true);
  auto neg_entries = collect(negatives, np, false);
  entries.insert(entries.end(), neg_entries.begin(), neg_entries.end());
  return entries;
}

void write_grad_profile_csv(std::ostream& os,
                            const std::vector<GradProfileEntry>& entries) {
  os << "rank,polarity,similarity,grad_norm\n";
  os << std::setprecision(12);
  for (const auto& e : entries)
    os << e.rank << "," << (e.is_positive ? "positive" : "negative") << ","
       << e.similarity << "," << e.grad_norm << "\n";
}

}  // namespace rescom
