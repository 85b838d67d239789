#include "rescom/imbalance_sim.hpp"

#include <sstream>

#include "doctest.h"

using namespace rescom;

TEST_CASE("expected positive pairs closed form") {
  const LongTailProfile profile({100, 10});
  CHECK(expected_positive_pairs(profile, 10, 0) ==
        doctest::Approx(100.0 * 100.0 * 10.0 / 110.0));
  CHECK(expected_positive_pairs(profile, 10, 1) ==
        doctest::Approx(10.0 * 10.0 * 10.0 / 110.0));

  const LongTailProfile balanced({50, 50, 50, 50});
  const double v = expected_positive_pairs(balanced, 16, 0);
  for (std::size_t k = 1; k < 4; ++k)
    CHECK(expected_positive_pairs(balanced, 16, k) == doctest::Approx(v));
}

TEST_CASE("contrastive imbalance factor") {
  CHECK(contrastive_imbalance_factor(LongTailProfile({100, 10})) ==
        doctest::Approx(100.0));
  CHECK(contrastive_imbalance_factor(LongTailProfile({7, 7, 7})) ==
        doctest::Approx(1.0));
  CHECK(contrastive_imbalance_factor(LongTailProfile({256, 128, 16})) ==
        doctest::Approx(256.0));
  CHECK_THROWS(contrastive_imbalance_factor(LongTailProfile({42})));
}

TEST_CASE("simulation is bit-reproducible for a fixed seed") {
  const auto profile = LongTailProfile::exponential(5, 10.0, 100);
  SimConfig cfg;
  cfg.batch_size = 32;
  cfg.queue_size = 64;
  cfg.epochs = 20;
  cfg.seed = 42;
  const auto a = simulate_pair_frequencies(profile, cfg);
  const auto b = simulate_pair_frequencies(profile, cfg);
  CHECK(a.counts == b.counts);
}

TEST_CASE("balanced profile with original queue gives a flat matrix") {
  const LongTailProfile profile(std::vector<std::size_t>(8, 125));
  SimConfig cfg;
  cfg.batch_size = 100;
  cfg.queue_size = 200;
  cfg.epochs = 200;
  cfg.seed = 3;
  const auto m = simulate_pair_frequencies(profile, cfg);
  const auto norm = m.normalized();
  double lo = 1e300, hi = 0.0;
  for (double v : norm) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // normalization is by the maximum diagonal entry, so sampling noise can
  // push off-diagonal entries marginally above 1
  CHECK(hi <= 1.05);
  CHECK(lo > 0.9 * hi);  // within 10% relative of each other
}

TEST_CASE("balanced queue policy equalizes key composition per query class") {
  const auto profile = LongTailProfile::exponential(4, 10.0, 100);
  SimConfig cfg;
  cfg.batch_size = 32;
  cfg.policy = QueuePolicy::Balanced;
  cfg.queue_size = 40;  // 10 per class
  cfg.epochs = 50;
  cfg.seed = 9;
  const auto m = simulate_pair_frequencies(profile, cfg);
  // After warmup every query sees exactly 10 keys of every class, so the
  // row counts[q][k] depend only on how often class q queries appear.
  for (std::size_t q = 0; q < 4; ++q) {
    const double first = m.at(q, 0);
    for (std::size_t k = 1; k < 4; ++k)
      CHECK(m.at(q, k) == doctest::Approx(first));
    // positive count proportional to N_q only
    CHECK(m.at(q, q) / static_cast<double>(profile.count(q)) ==
          doctest::Approx(m.at(0, 0) / static_cast<double>(profile.count(0))));
  }
}

TEST_CASE("long-tailed diagonal approaches the closed form") {
  const auto profile = LongTailProfile::exponential(6, 10.0, 300);
  SimConfig cfg;
  cfg.batch_size = 64;
  cfg.queue_size = 256;
  cfg.epochs = 300;
  cfg.seed = 17;
  const auto m = simulate_pair_frequencies(profile, cfg);
  for (std::size_t k = 0; k < 6; ++k) {
    const double expected = expected_positive_pairs(profile, cfg.queue_size, k);
    const double got = m.at(k, k) / static_cast<double>(cfg.epochs);
    CHECK(got == doctest::Approx(expected).epsilon(0.08));
  }
}

TEST_CASE("pair frequency CSV has a header and normalized cells") {
  const LongTailProfile profile({20, 10});
  SimConfig cfg;
  cfg.batch_size = 10;
  cfg.queue_size = 8;
  cfg.epochs = 30;
  cfg.seed = 1;
  const auto m = simulate_pair_frequencies(profile, cfg);
  std::ostringstream os;
  m.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("query_class,0,1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
