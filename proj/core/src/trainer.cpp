#include "rescom/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rescom/rng.hpp"

namespace rescom {

TrainVariant train_variant_from_string(const std::string& s) {
  if (s == "rescom") return TrainVariant::ResCom;
  if (s == "supcon_balsfx") return TrainVariant::SupConBalsfx;
  if (s == "original_queue") return TrainVariant::OriginalQueue;
  if (s == "reversed_queue") return TrainVariant::ReversedQueue;
  throw std::invalid_argument("unknown training variant: " + s);
}

std::string to_string(TrainVariant variant) {
  switch (variant) {
    case TrainVariant::ResCom: return "rescom";
    case TrainVariant::SupConBalsfx: return "supcon_balsfx";
    case TrainVariant::OriginalQueue: return "original_queue";
    case TrainVariant::ReversedQueue: return "reversed_queue";
  }
  return "?";
}

namespace {

ClassQueueBank make_bank(TrainVariant variant, const LongTailProfile& profile,
                         std::size_t per_class_capacity) {
  const std::size_t k = profile.num_classes();
  switch (variant) {
    case TrainVariant::ResCom:
      return ClassQueueBank::balanced(k, per_class_capacity);
    case TrainVariant::SupConBalsfx:
    case TrainVariant::OriginalQueue:
      return ClassQueueBank::original(k, k * per_class_capacity);
    case TrainVariant::ReversedQueue:
      return ClassQueueBank::reversed(profile, k * per_class_capacity);
  }
  throw std::logic_error("make_bank: bad variant");
}

Vector corrupt_one(const Vector& x, double sigma, double dropout_p,
                   std::mt19937_64& rng) {
  std::vector<Vector> one{x};
  std::vector<std::uint32_t> label{0};
  return two_view_augment(one, label, sigma, dropout_p, rng).view1.front();
}

}  // namespace

void warmup_bank(ClassQueueBank& bank, const SiameseModel& model,
                 const Dataset& data, const TrainConfig& cfg) {
  auto rng = make_rng(cfg.seed, "train/warmup");
  const std::size_t k_classes = bank.num_classes();
  std::vector<std::vector<std::size_t>> by_class(k_classes);
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[data.labels[i]].push_back(i);

  if (bank.policy() == QueuePolicy::Original) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t guard = 0;
    while (bank.size() < bank.total_capacity()) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        if (bank.size() >= bank.total_capacity()) break;
        const Vector x =
            corrupt_one(data.features[i], cfg.noise_sigma, cfg.dropout_p, rng);
        bank.enqueue({model.embed(x), data.labels[i]});
      }
      if (++guard > 1000)
        throw std::domain_error("warmup: queue capacity unreachable");
    }
    return;
  }

  // Per-class policies: cycle over each class's samples, re-augmenting,
  // until its buffer reaches capacity.
  for (std::size_t k = 0; k < k_classes; ++k) {
    const auto& idx = by_class[k];
    if (idx.empty())
      throw std::domain_error("warmup: class " + std::to_string(k) +
                              " has no samples");
    const std::size_t cap = bank.capacity(k);
    if (cap > 1000 * idx.size())
      throw std::domain_error("warmup: infeasible for class " +
                              std::to_string(k));
    std::size_t pos = 0;
    while (bank.occupancy(k) < cap) {
      const std::size_t i = idx[pos % idx.size()];
      const Vector x =
          corrupt_one(data.features[i], cfg.noise_sigma, cfg.dropout_p, rng);
      bank.enqueue({model.embed(x), static_cast<std::uint32_t>(k)});
      ++pos;
    }
  }
  if (!bank.warm()) throw std::domain_error("warmup: bank did not fill");
}

namespace {

struct BatchLoss {
  double cls_sum = 0.0;
  double cont_sum = 0.0;
};

TrainResult train_impl(TrainVariant variant, const TrainConfig& cfg,
                       const Dataset& train, const Dataset* test) {
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size >= 1");
  if (cfg.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");
  const LongTailProfile profile = train.profile();
  const std::size_t k_classes = profile.num_classes();

  ModelDims dims = cfg.dims;
  dims.num_classes = k_classes;
  dims.input = train.dim();
  TrainResult result{SiameseModel(dims, cfg.seed), {}};
  SiameseModel& model = result.model;
  SgdOptimizer opt(model, cfg.sgd);

  ClassQueueBank bank = make_bank(variant, profile, cfg.queue_per_class);
  const bool use_contrastive = cfg.lambda > 0.0;
  if (use_contrastive) warmup_bank(bank, model, train, cfg);

  auto shuffle_rng = make_rng(cfg.seed, "train/shuffle");
  auto augment_rng = make_rng(cfg.seed, "augment");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.lr, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    BatchLoss epoch_loss;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, train.size());
      const std::size_t b = end - start;
      std::vector<Vector> samples(b);
      std::vector<std::uint32_t> labels(b);
      for (std::size_t i = 0; i < b; ++i) {
        samples[i] = train.features[order[start + i]];
        labels[i] = train.labels[order[start + i]];
      }
      SiameseBatch batch = two_view_augment(samples, labels, cfg.noise_sigma,
                                            cfg.dropout_p, augment_rng);
      SiameseForward fwd = model.forward_siamese(batch.view1, batch.view2);

      const double inv_b = 1.0 / static_cast<double>(b);
      std::vector<Vector> gz1(b, Vector(dims.projection, 0.0));
      std::vector<Vector> gs1(b), gs2(b);
      std::vector<QueueEntry> queue_snapshot;
      if (use_contrastive && variant != TrainVariant::ResCom)
        queue_snapshot = bank.snapshot();

      for (std::size_t i = 0; i < b; ++i) {
        const std::uint32_t y = labels[i];
        if (variant == TrainVariant::SupConBalsfx) {
          LossResult r = balanced_softmax_loss(fwd.s1[i], y, profile);
          epoch_loss.cls_sum += r.value;
          gs1[i] = r.grad_query;
          for (double& g : gs1[i]) g *= inv_b;
          gs2[i].assign(k_classes, 0.0);
        } else {
          SiamBSResult r = siambs_loss(fwd.s1[i], fwd.s2[i], y, profile);
          epoch_loss.cls_sum += r.value;
          gs1[i] = std::move(r.grad_view1);
          gs2[i] = std::move(r.grad_view2);
          for (double& g : gs1[i]) g *= inv_b;
          for (double& g : gs2[i]) g *= inv_b;
        }

        if (!use_contrastive) continue;
        LossResult cont;
        bool have_cont = true;
        if (variant == TrainVariant::ResCom) {
          cont = spm_loss(fwd.z1[i], y, bank, profile, cfg.contrastive);
        } else if (variant == TrainVariant::SupConBalsfx) {
          bool has_pos = false;
          for (const auto& e : queue_snapshot) has_pos = has_pos || e.label == y;
          if (has_pos)
            cont = supcon_queue_loss(fwd.z1[i], y, queue_snapshot, cfg.contrastive);
          else
            have_cont = false;
        } else {
          bool has_pos = false;
          for (const auto& e : queue_snapshot) has_pos = has_pos || e.label == y;
          if (has_pos)
            cont = cb_supcon_loss(fwd.z1[i], y, queue_snapshot, profile,
                                  cfg.contrastive);
          else
            have_cont = false;
        }
        if (have_cont) {
          epoch_loss.cont_sum += cont.value;
          const double s = cfg.lambda * inv_b;
          for (std::size_t d = 0; d < gz1[i].size(); ++d)
            gz1[i][d] = s * cont.grad_query[d];
        }
      }
      seen += b;

      model.zero_grad();
      model.backward(fwd, gz1, gs1, gs2);
      opt.step(model, lr);

      if (use_contrastive)
        for (std::size_t i = 0; i < b; ++i)
          bank.enqueue({fwd.z2[i], labels[i]});
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.mean_cls = epoch_loss.cls_sum / static_cast<double>(seen);
    log.mean_cont = epoch_loss.cont_sum / static_cast<double>(seen);
    log.total = log.mean_cls + cfg.lambda * log.mean_cont;
    if (test && cfg.eval_every_epoch)
      log.eval = evaluate(model, *test, profile, cfg.groups);
    result.log.push_back(std::move(log));
  }
  if (test && !cfg.eval_every_epoch && !result.log.empty())
    result.log.back().eval = evaluate(model, *test, profile, cfg.groups);
  return result;
}

}  // namespace

TrainResult train_rescom(const TrainConfig& cfg, const Dataset& train,
                         const Dataset* test) {
  return train_impl(TrainVariant::ResCom, cfg, train, test);
}

TrainResult train_baseline(TrainVariant variant, const TrainConfig& cfg,
                           const Dataset& train, const Dataset* test) {
  return train_impl(variant, cfg, train, test);
}

double expected_calibration_error(const std::vector<double>& confidences,
                                  const std::vector<bool>& hits,
                                  std::size_t bins) {
  if (confidences.size() != hits.size() || confidences.empty() || bins == 0)
    throw std::invalid_argument("ece: bad inputs");
  std::vector<double> bin_conf(bins, 0.0), bin_acc(bins, 0.0);
  std::vector<std::size_t> bin_count(bins, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    std::size_t bin =
        static_cast<std::size_t>(confidences[i] * static_cast<double>(bins));
    if (bin >= bins) bin = bins - 1;
    bin_conf[bin] += confidences[i];
    bin_acc[bin] += hits[i] ? 1.0 : 0.0;
    bin_count[bin] += 1;
  }
  double ece = 0.0;
  const double total = static_cast<double>(confidences.size());
  for (std::size_t b = 0; b < bins; ++b) {
    if (bin_count[b] == 0) continue;
    const double n = static_cast<double>(bin_count[b]);
    ece += (n / total) * std::abs(bin_acc[b] / n - bin_conf[b] / n);
  }
  return ece;
}

EvalReport evaluate(const SiameseModel& model, const Dataset& test,
                    const LongTailProfile& train_profile,
                    GroupThresholds thresholds) {
  const std::size_t k_classes = train_profile.num_classes();
  std::vector<std::size_t> correct(k_classes, 0), seen(k_classes, 0);

  std::vector<double> confidences;
  std::vector<bool> hits;
  confidences.reserve(test.size());
  hits.reserve(test.size());

  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::uint32_t y = test.labels[i];
    if (y >= k_classes) throw std::invalid_argument("evaluate: label out of range");
    const Vector logits = model.classify(test.features[i]);
    std::size_t pred = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
      if (logits[k] > logits[pred]) pred = k;
    const double lse = log_sum_exp(logits);

    seen[y] += 1;
    const bool hit = pred == y;
    if (hit) correct[y] += 1;
    confidences.push_back(std::exp(logits[pred] - lse));
    hits.push_back(hit);
  }

  EvalReport report;
  report.per_class_accuracy.assign(k_classes,
                                   std::numeric_limits<double>::quiet_NaN());
  std::size_t total_correct = 0;
  for (std::size_t k = 0; k < k_classes; ++k) {
    total_correct += correct[k];
    if (seen[k] > 0)
      report.per_class_accuracy[k] =
          static_cast<double>(correct[k]) / static_cast<double>(seen[k]);
  }
  report.top1_all =
      static_cast<double>(total_correct) / static_cast<double>(test.size());

  const auto groups = split_many_medium_few(train_profile, thresholds);
  auto group_acc = [&](ShotGroup g) -> std::optional<double> {
    std::size_t c = 0, n = 0;
    for (std::size_t k = 0; k < k_classes; ++k) {
      if (groups[k] != g) continue;
      c += correct[k];
      n += seen[k];
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / static_cast<double>(n);
  };
  report.top1_many = group_acc(ShotGroup::Many);
  report.top1_medium = group_acc(ShotGroup::Medium);
  report.top1_few = group_acc(ShotGroup::Few);

  report.ece = expected_calibration_error(confidences, hits);
  return report;
}

void write_metrics_csv(std::ostream& os, const std::vector<EpochLog>& log) {
  os << "epoch,lr,cls_loss,cont_loss,total_loss,top1_all,top1_many,top1_medium,"
        "top1_few,ece\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  auto opt_cell = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const auto& e : log) {
    os << e.epoch << "," << e.lr << "," << e.mean_cls << "," << e.mean_cont << ","
       << e.total << ",";
    if (e.eval) {
      os << e.eval->top1_all << ",";
      opt_cell(e.eval->top1_many);
      os << ",";
      opt_cell(e.eval->top1_medium);
      os << ",";
      opt_cell(e.eval->top1_few);
      os << "," << e.eval->ece;
    } else {
      os << ",,,,";
    }
    os << "\n";
  }
}

void write_eval_report(std::ostream& os, const EvalReport& report) {
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "top1_all: " << report.top1_all << "\n";
  auto line = [&](const char* key, const std::optional<double>& v) {
    os << key << ": ";
    if (v)
      os << *v;
    else
      os << "absent";
    os << "\n";
  };
  line("top1_many", report.top1_many);
  line("top1_medium", report.top1_medium);
  line("top1_few", report.top1_few);
  os << "ece: " << report.ece << "\n";
  os << "per_class_accuracy:";
  for (double a : report.per_class_accuracy) {
    os << " ";
    if (std::isnan(a))
      os << "absent";
    else
      os << a;
  }
  os << "\n";
}

}  // namespace rescom
