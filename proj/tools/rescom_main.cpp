// rescom: command-line surface for the contrastive long-tail toolkit.
// Exit codes: 0 success, 1 check/validation failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rescom/checkpoint.hpp"
#include "rescom/classifier.hpp"
#include "rescom/config.hpp"
#include "rescom/contrastive.hpp"
#include "rescom/data.hpp"
#include "rescom/imbalance_sim.hpp"
#include "rescom/model.hpp"
#include "rescom/rng.hpp"
#include "rescom/trainer.hpp"

namespace fs = std::filesystem;
using namespace rescom;

namespace {

struct ProfileArgs {
  std::size_t k = 10;
  double imbalance = 10.0;
  std::size_t n_max = 500;
  std::vector<std::size_t> counts;  // overrides k/if/nmax when given

  LongTailProfile build() const {
    if (!counts.empty()) return LongTailProfile(counts);
    return LongTailProfile::exponential(k, imbalance, n_max);
  }
};

void add_profile_options(CLI::App* cmd, ProfileArgs& args) {
  cmd->add_option("--k", args.k, "Number of classes");
  cmd->add_option("--if", args.imbalance, "Imbalance factor N_max / N_min");
  cmd->add_option("--nmax", args.n_max, "Largest class count");
  cmd->add_option("--counts", args.counts,
                  "Explicit per-class counts (overrides --k/--if/--nmax)");
}

ConfigMap load_config(const std::string& path,
                      const std::vector<std::string>& sets) {
  ConfigMap map = path.empty() ? ConfigMap() : ConfigMap::from_file(path);
  for (const auto& assignment : sets) {
    // bare keys default to the train section
    if (assignment.find('.') == std::string::npos ||
        assignment.find('.') > assignment.find('='))
      map.apply_set("train." + assignment);
    else
      map.apply_set(assignment);
  }
  return map;
}

Dataset load_train_data(const ExperimentConfig& exp) {
  return exp.synthetic ? make_longtailed_synthetic(exp.synth)
                       : load_csv_dataset(exp.train_csv);
}

Dataset load_test_data(const ExperimentConfig& exp) {
  if (exp.synthetic) return make_balanced_synthetic(exp.synth, exp.test_per_class);
  if (exp.test_csv.empty())
    throw std::runtime_error("no test data: set data.test_path");
  return load_csv_dataset(exp.test_csv);
}

Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector v(dim);
  for (double& x : v) x = gauss(rng);
  return l2_normalize(v);
}

// --- simulate ---------------------------------------------------------------

int run_simulate(const ProfileArgs& pargs, const SimConfig& cfg,
                 const std::string& policy_name, const std::string& out) {
  SimConfig resolved = cfg;
  resolved.policy = queue_policy_from_string(policy_name);
  const LongTailProfile profile = pargs.build();
  const auto freq = simulate_pair_frequencies(profile, resolved);

  std::cout << "gamma = " << contrastive_imbalance_factor(profile) << "\n";
  std::ostringstream closed;
  closed << "class,count,expected_positive_pairs\n";
  for (std::size_t k = 0; k < profile.num_classes(); ++k)
    closed << k << "," << profile.count(k) << ","
           << expected_positive_pairs(profile, resolved.queue_size, k) << "\n";

  if (out.empty()) {
    freq.write_csv(std::cout);
    std::cout << closed.str();
    return 0;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  freq.write_csv(os);
  const std::string expected_path =
      (fs::path(out).parent_path() / (fs::path(out).stem().string() + "_expected.csv"))
          .string();
  std::ofstream es(expected_path);
  if (!es) throw std::runtime_error("cannot write " + expected_path);
  es << closed.str();
  std::cout << "wrote " << out << " and " << expected_path << "\n";
  return 0;
}

// --- grad-check -------------------------------------------------------------

int run_grad_check(std::size_t instances, std::uint64_t seed, double tolerance) {
  auto rng = make_rng(seed, "gradcheck");
  double worst_bq = 0.0, worst_spm = 0.0, worst_net = 0.0;
  std::uint64_t failing_seed = 0;

  auto max_rel = [](const Vector& analytic, const Vector& fd) {
    double scale = 1.0;
    for (double g : fd) scale = std::max(scale, std::abs(g));
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i)
      worst = std::max(worst, std::abs(analytic[i] - fd[i]) / scale);
    return worst;
  };

  const double taus[] = {0.07, 0.2, 1.0};
  for (std::size_t trial = 0; trial < instances; ++trial) {
    const std::uint64_t trial_seed = rng();
    auto trng = make_rng(trial_seed, "gradcheck/instance");
    const std::size_t k = 2 + trng() % 7, q = 2 + trng() % 15,
                      dim = 4 + trng() % 29;
    auto bank = ClassQueueBank::balanced(k, q);
    for (std::uint32_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < q; ++i)
        bank.enqueue({random_unit(dim, trng), c});
    std::vector<std::size_t> counts(k);
    for (auto& c : counts) c = 1 + trng() % 200;
    const LongTailProfile profile(counts);
    ContrastiveConfig cfg;
    cfg.temperature = taus[trial % 3];
    cfg.beta = (trial % 2) ? 0.999 : 0.0;
    cfg.q_pos = 1 + trng() % q;
    cfg.q_neg = 1 + trng() % ((k - 1) * q);
    const Vector query = random_unit(dim, trng);
    const auto label = static_cast<std::uint32_t>(trng() % k);

    const auto bq = bq_loss(query, label, bank, profile, cfg);
    const Vector bq_fd = finite_difference_gradient(
        [&](const Vector& x) { return bq_loss(x, label, bank, profile, cfg).value; },
        query, 1e-5);
    const auto spm = spm_loss(query, label, bank, profile, cfg);
    const Vector spm_fd = finite_difference_gradient(
        [&](const Vector& x) { return spm_loss(x, label, bank, profile, cfg).value; },
        query, 1e-5);
    const double e_bq = max_rel(bq.grad_query, bq_fd);
    const double e_spm = max_rel(spm.grad_query, spm_fd);
    if (std::max(e_bq, e_spm) > std::max(worst_bq, worst_spm))
      failing_seed = trial_seed;
    worst_bq = std::max(worst_bq, e_bq);
    worst_spm = std::max(worst_spm, e_spm);
  }

  // end-to-end network checks, one tenth of the instance budget
  const std::size_t net_instances = std::max<std::size_t>(1, instances / 10);
  ModelDims dims;
  dims.input = 8;
  dims.hidden = 12;
  dims.feature = 12;
  dims.projection = 8;
  dims.num_classes = 4;
  const LongTailProfile profile({40, 20, 10, 5});
  for (std::size_t trial = 0; trial < net_instances; ++trial) {
    const std::uint64_t trial_seed = rng();
    auto trng = make_rng(trial_seed, "gradcheck/net");
    SiameseModel model(dims, trial_seed);
    auto bank = ClassQueueBank::balanced(4, 4);
    for (std::uint32_t c = 0; c < 4; ++c)
      for (int i = 0; i < 4; ++i)
        bank.enqueue({random_unit(dims.projection, trng), c});
    ContrastiveConfig ccfg;
    ccfg.temperature = 0.2;
    ccfg.beta = 0.9;
    ccfg.q_pos = 2;
    ccfg.q_neg = 6;
    const double lambda = 0.5;
    const std::size_t b = 3;
    std::normal_distribution<double> gauss;
    std::vector<Vector> view1(b, Vector(dims.input)), view2(b, Vector(dims.input));
    std::vector<std::uint32_t> labels(b);
    for (std::size_t i = 0; i < b; ++i) {
      for (double& v : view1[i]) v = gauss(trng);
      for (double& v : view2[i]) v = gauss(trng);
      labels[i] = static_cast<std::uint32_t>(trng() % 4);
    }
    auto total = [&](SiameseModel& m) {
      const auto fwd = m.forward_siamese(view1, view2);
      double sum = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        sum += siambs_loss(fwd.s1[i], fwd.s2[i], labels[i], profile).value;
        sum += lambda * spm_loss(fwd.z1[i], labels[i], bank, profile, ccfg).value;
      }
      return sum / static_cast<double>(b);
    };
    const auto fwd = model.forward_siamese(view1, view2);
    std::vector<Vector> gz1(b), gs1(b), gs2(b);
    for (std::size_t i = 0; i < b; ++i) {
      auto cls = siambs_loss(fwd.s1[i], fwd.s2[i], labels[i], profile);
      gs1[i] = cls.grad_view1;
      gs2[i] = cls.grad_view2;
      for (double& g : gs1[i]) g /= static_cast<double>(b);
      for (double& g : gs2[i]) g /= static_cast<double>(b);
      auto cont = spm_loss(fwd.z1[i], labels[i], bank, profile, ccfg);
      gz1[i] = cont.grad_query;
      for (double& g : gz1[i]) g *= lambda / static_cast<double>(b);
    }
    model.zero_grad();
    model.backward(fwd, gz1, gs1, gs2);
    auto tensors = model.named_tensors();
    int checked = 0;
    while (checked < 5) {
      auto& t = tensors[trng() % tensors.size()];
      const std::size_t j = trng() % t.size;
      const double analytic = t.grad[j];
      if (std::abs(analytic) < 1e-5) continue;
      const double h = 1e-5;
      const double saved = t.data[j];
      t.data[j] = saved + h;
      const double fp = total(model);
      t.data[j] = saved - h;
      const double fm = total(model);
      t.data[j] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double err = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8);
      if (err > worst_net) failing_seed = trial_seed;
      worst_net = std::max(worst_net, err);
      ++checked;
    }
  }

  const double net_tolerance = tolerance * 10.0;
  std::cout << "bq_loss  max relative error: " << worst_bq << "\n"
            << "spm_loss max relative error: " << worst_spm << "\n"
            << "network  max relative error: " << worst_net << "\n";
  if (worst_bq > tolerance || worst_spm > tolerance || worst_net > net_tolerance) {
    std::cout << "FAIL (worst instance seed " << failing_seed << ")\n";
    return 1;
  }
  std::cout << "OK\n";
  return 0;
}

// --- train ------------------------------------------------------------------

int run_train(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& out_dir) {
  const ConfigMap map = load_config(config_path, sets);
  const ExperimentConfig exp = experiment_from_config(map);
  const Dataset train = load_train_data(exp);
  Dataset test;
  bool have_test = true;
  try {
    test = load_test_data(exp);
  } catch (const std::exception&) {
    have_test = false;
  }

  const auto result =
      exp.variant == TrainVariant::ResCom
          ? train_rescom(exp.train, train, have_test ? &test : nullptr)
          : train_baseline(exp.variant, exp.train, train,
                           have_test ? &test : nullptr);

  fs::create_directories(out_dir);
  const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.rscm").string();
  const std::string manifest_path = (fs::path(out_dir) / "manifest").string();
  {
    std::ofstream os(metrics_path);
    if (!os) throw std::runtime_error("cannot write " + metrics_path);
    write_metrics_csv(os, result.log);
  }
  save_checkpoint(const_cast<SiameseModel&>(result.model), ckpt_path);
  {
    std::ofstream os(manifest_path);
    if (!os) throw std::runtime_error("cannot write " + manifest_path);
    write_manifest(os, map, {metrics_path, ckpt_path});
  }
  if (!result.log.empty()) {
    const auto& last = result.log.back();
    std::cout << "epoch " << last.epoch << " total loss " << last.total;
    if (last.eval) std::cout << " top1 " << last.eval->top1_all;
    std::cout << "\n";
  }
  std::cout << "wrote " << metrics_path << ", " << ckpt_path << ", "
            << manifest_path << "\n";
  return 0;
}

// --- eval -------------------------------------------------------------------

int run_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& train_data_path, std::size_t many_threshold,
             std::size_t few_threshold, const std::string& out) {
  SiameseModel model = load_checkpoint(ckpt_path);
  const Dataset test = load_csv_dataset(data_path);
  // group membership comes from training counts when available; otherwise the
  // evaluation set's own histogram is the only profile there is
  const LongTailProfile profile = train_data_path.empty()
                                      ? test.profile()
                                      : load_csv_dataset(train_data_path).profile();
  const auto report =
      evaluate(model, test, profile, {many_threshold, few_threshold});
  if (out.empty()) {
    write_eval_report(std::cout, report);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    write_eval_report(os, report);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

// --- profile-gradients ------------------------------------------------------

int run_profile_gradients(const std::string& ckpt_path,
                          const std::string& config_path,
                          const std::vector<std::string>& sets,
                          std::size_t query_index, const std::string& out) {
  const ConfigMap map = load_config(config_path, sets);
  const ExperimentConfig exp = experiment_from_config(map);
  SiameseModel model = load_checkpoint(ckpt_path);
  const Dataset train = load_train_data(exp);
  if (query_index >= train.size())
    throw std::runtime_error("query index out of range");
  const LongTailProfile profile = train.profile();

  auto bank = ClassQueueBank::balanced(train.num_classes, exp.train.queue_per_class);
  std::vector<std::vector<std::size_t>> by_class(train.num_classes);
  for (std::size_t i = 0; i < train.size(); ++i)
    by_class[train.labels[i]].push_back(i);
  for (std::uint32_t c = 0; c < train.num_classes; ++c) {
    if (by_class[c].empty())
      throw std::runtime_error("class " + std::to_string(c) + " has no samples");
    for (std::size_t i = 0; i < exp.train.queue_per_class; ++i) {
      const std::size_t idx = by_class[c][i % by_class[c].size()];
      bank.enqueue({model.embed(train.features[idx]), c});
    }
  }

  const Vector query = model.embed(train.features[query_index]);
  const auto entries = gradient_norm_profile(
      query, train.labels[query_index], bank, profile, exp.train.contrastive);
  if (out.empty()) {
    write_grad_profile_csv(std::cout, entries);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    write_grad_profile_csv(os, entries);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

// --- gen-data ---------------------------------------------------------------

int run_gen_data(const SyntheticSpec& spec, const std::string& out,
                 const std::string& test_out, std::size_t test_per_class) {
  const Dataset train = make_longtailed_synthetic(spec);
  save_csv_dataset(train, out);
  std::cout << "wrote " << out << " (" << train.size() << " rows, "
            << train.num_classes << " classes)\n";
  if (!test_out.empty()) {
    const Dataset test = make_balanced_synthetic(spec, test_per_class);
    save_csv_dataset(test, test_out);
    std::cout << "wrote " << test_out << " (" << test.size() << " rows)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-tailed contrastive learning toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "Monte-Carlo batch/queue pair-frequency simulation");
  ProfileArgs sim_profile;
  add_profile_options(sim, sim_profile);
  SimConfig sim_cfg;
  std::string sim_policy = "original", sim_out;
  sim->add_option("--batch", sim_cfg.batch_size, "Batch size");
  sim->add_option("--epochs", sim_cfg.epochs, "Simulated epochs");
  sim->add_option("--queue", sim_policy, "Queue policy: original|reversed|balanced");
  sim->add_option("--queue-size", sim_cfg.queue_size, "Total queue capacity");
  sim->add_option("--seed", sim_cfg.seed, "Root seed");
  sim->add_option("--out", sim_out, "Pair-frequency CSV path");

  // grad-check
  auto* gc = app.add_subcommand("grad-check",
                                "Randomized finite-difference gradient checks");
  std::size_t gc_instances = 200;
  std::uint64_t gc_seed = 0;
  double gc_tolerance = 1e-4;
  gc->add_option("--instances", gc_instances, "Instances per loss");
  gc->add_option("--seed", gc_seed, "Root seed");
  gc->add_option("--tolerance", gc_tolerance,
                 "Loss tolerance (network allows 10x)");

  // train
  auto* tr = app.add_subcommand("train", "Train a model from a config");
  std::string tr_config, tr_out = "run";
  std::vector<std::string> tr_sets;
  tr->add_option("--config", tr_config, "Config file (key = value sections)");
  tr->add_option("--out", tr_out, "Output directory");
  tr->add_option("--set", tr_sets, "Override: section.key=value");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV dataset");
  std::string ev_ckpt, ev_data, ev_train_data, ev_out;
  std::size_t ev_many = 100, ev_few = 20;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--data", ev_data, "Evaluation CSV")->required();
  ev->add_option("--train-data", ev_train_data,
                 "Training CSV for many/medium/few grouping");
  ev->add_option("--many-threshold", ev_many, "Many-shot lower bound (exclusive)");
  ev->add_option("--few-threshold", ev_few, "Few-shot upper bound (exclusive)");
  ev->add_option("--out", ev_out, "Report path (stdout when omitted)");

  // profile-gradients
  auto* pg = app.add_subcommand(
      "profile-gradients", "Per-key gradient-norm profile against a warm queue");
  std::string pg_ckpt, pg_config, pg_out;
  std::vector<std::string> pg_sets;
  std::size_t pg_index = 0;
  pg->add_option("--checkpoint", pg_ckpt, "Checkpoint path")->required();
  pg->add_option("--config", pg_config, "Config file describing the training data");
  pg->add_option("--set", pg_sets, "Override: section.key=value");
  pg->add_option("--query-index", pg_index, "Training sample used as the query");
  pg->add_option("--out", pg_out, "CSV path (stdout when omitted)");

  // gen-data
  auto* gd = app.add_subcommand("gen-data", "Write a synthetic dataset to CSV");
  SyntheticSpec gd_spec;
  std::string gd_out = "train.csv", gd_test_out;
  std::size_t gd_test_per_class = 50;
  gd->add_option("--k", gd_spec.num_classes, "Number of classes");
  gd->add_option("--if", gd_spec.imbalance_factor, "Imbalance factor");
  gd->add_option("--nmax", gd_spec.n_max, "Largest class count");
  gd->add_option("--dim", gd_spec.dim, "Feature dimension");
  gd->add_option("--separation", gd_spec.class_separation,
                 "Pairwise class-mean distance");
  gd->add_option("--seed", gd_spec.seed, "Root seed");
  gd->add_option("--out", gd_out, "Training CSV path");
  gd->add_option("--test-out", gd_test_out, "Balanced test CSV path");
  gd->add_option("--test-per-class", gd_test_per_class, "Test rows per class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      return run_simulate(sim_profile, sim_cfg, sim_policy, sim_out);
    if (gc->parsed()) return run_grad_check(gc_instances, gc_seed, gc_tolerance);
    if (tr->parsed()) return run_train(tr_config, tr_sets, tr_out);
    if (ev->parsed())
      return run_eval(ev_ckpt, ev_data, ev_train_data, ev_many, ev_few, ev_out);
    if (pg->parsed())
      return run_profile_gradients(pg_ckpt, pg_config, pg_sets, pg_index, pg_out);
    if (gd->parsed())
      return run_gen_data(gd_spec, gd_out, gd_test_out, gd_test_per_class);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
