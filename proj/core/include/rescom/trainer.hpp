#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rescom/classifier.hpp"
#include "rescom/contrastive.hpp"
#include "rescom/data.hpp"
#include "rescom/model.hpp"
#include "rescom/queue_bank.hpp"

namespace rescom {

enum class TrainVariant {
  ResCom,         // balanced bank, SPM loss, SiamBS
  SupConBalsfx,   // original FIFO, plain SupCon, single-view Balanced Softmax
  OriginalQueue,  // original FIFO, class-balanced SupCon, SiamBS
  ReversedQueue,  // reversed bank, class-balanced SupCon, SiamBS
};

TrainVariant train_variant_from_string(const std::string& s);
std::string to_string(TrainVariant variant);

struct TrainConfig {
  double lambda = 0.5;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  LrSchedule lr;
  SgdConfig sgd;
  ContrastiveConfig contrastive;
  std::size_t queue_per_class = 16;  // Q; non-balanced policies use K*Q total
  ModelDims dims;                    // num_classes overwritten from the data
  double noise_sigma = 0.3;
  double dropout_p = 0.1;
  std::uint64_t seed = 0;
  GroupThresholds groups;
  bool eval_every_epoch = true;
};

struct EvalReport {
  double top1_all = 0.0;
  std::optional<double> top1_many;
  std::optional<double> top1_medium;
  std::optional<double> top1_few;
  double ece = 0.0;
  std::vector<double> per_class_accuracy;
};

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_cls = 0.0;   // SiamBS (or single-view BS) mean
  double mean_cont = 0.0;  // contrastive mean before the lambda weight
  double total = 0.0;      // mean_cls + lambda * mean_cont
  std::optional<EvalReport> eval;
};

struct TrainResult {
  SiameseModel model;
  std::vector<EpochLog> log;
};

// Fill pass over the dataset, re-augmenting classes with fewer samples than
// their buffer capacity, until the bank is warm.
void warmup_bank(ClassQueueBank& bank, const SiameseModel& model,
                 const Dataset& data, const TrainConfig& cfg);

TrainResult train_rescom(const TrainConfig& cfg, const Dataset& train,
                         const Dataset* test = nullptr);
TrainResult train_baseline(TrainVariant variant, const TrainConfig& cfg,
                           const Dataset& train, const Dataset* test = nullptr);

// Equal-width confidence binning of |accuracy - confidence|, weighted by
// bin occupancy.
double expected_calibration_error(const std::vector<double>& confidences,
                                  const std::vector<bool>& hits,
                                  std::size_t bins = 15);

// Inference uses encoder + classifier only; argmax of raw logits. Group
// membership comes from the training profile; empty groups are absent.
EvalReport evaluate(const SiameseModel& model, const Dataset& test,
                    const LongTailProfile& train_profile,
                    GroupThresholds thresholds = {});

void write_metrics_csv(std::ostream& os, const std::vector<EpochLog>& log);
// key: value lines
void write_eval_report(std::ostream& os, const EvalReport& report);

}  // namespace rescom
