#include <benchmark/benchmark.h>

#include <random>

#include "rescom/contrastive.hpp"
#include "rescom/imbalance_sim.hpp"
#include "rescom/model.hpp"
#include "rescom/rng.hpp"

using namespace rescom;

namespace {

Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector v(dim);
  for (double& x : v) x = gauss(rng);
  return l2_normalize(v);
}

struct LossFixture {
  ClassQueueBank bank = ClassQueueBank::balanced(10, 64);
  LongTailProfile profile = LongTailProfile::exponential(10, 100.0, 500);
  ContrastiveConfig cfg;
  Vector query;
  std::uint32_t label = 3;

  LossFixture() {
    auto rng = make_rng(1, "bench");
    for (std::uint32_t c = 0; c < 10; ++c)
      for (int i = 0; i < 64; ++i) bank.enqueue({random_unit(32, rng), c});
    cfg.temperature = 0.2;
    cfg.beta = 0.999;
    cfg.q_pos = 8;
    cfg.q_neg = 64;
    query = random_unit(32, rng);
  }
};

void BM_BqLoss(benchmark::State& state) {
  LossFixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(bq_loss(f.query, f.label, f.bank, f.profile, f.cfg));
}
BENCHMARK(BM_BqLoss);

void BM_SpmLoss(benchmark::State& state) {
  LossFixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(spm_loss(f.query, f.label, f.bank, f.profile, f.cfg));
}
BENCHMARK(BM_SpmLoss);

void BM_MinePairs(benchmark::State& state) {
  LossFixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(mine_pairs(f.query, f.label, f.bank, f.cfg));
}
BENCHMARK(BM_MinePairs);

void BM_SiameseForwardBackward(benchmark::State& state) {
  ModelDims dims;
  SiameseModel model(dims, 7);
  auto rng = make_rng(2, "bench/model");
  std::normal_distribution<double> gauss;
  const std::size_t b = 64;
  std::vector<Vector> view1(b, Vector(dims.input)), view2(b, Vector(dims.input));
  for (std::size_t i = 0; i < b; ++i) {
    for (double& v : view1[i]) v = gauss(rng);
    for (double& v : view2[i]) v = gauss(rng);
  }
  std::vector<Vector> gz1(b, Vector(dims.projection, 0.01));
  std::vector<Vector> gs(b, Vector(dims.num_classes, 0.01));
  for (auto _ : state) {
    const auto fwd = model.forward_siamese(view1, view2);
    model.zero_grad();
    model.backward(fwd, gz1, gs, gs);
  }
}
BENCHMARK(BM_SiameseForwardBackward);

void BM_SimulateEpoch(benchmark::State& state) {
  const auto profile = LongTailProfile::exponential(10, 10.0, 500);
  SimConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_pair_frequencies(profile, cfg));
}
BENCHMARK(BM_SimulateEpoch);

}  // namespace

BENCHMARK_MAIN();
