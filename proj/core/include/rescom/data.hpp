#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rescom/numerics.hpp"
#include "rescom/profile.hpp"

namespace rescom {

struct Dataset {
  std::vector<Vector> features;      // N x D_in
  std::vector<std::uint32_t> labels; // N, in [0, K)
  std::size_t num_classes = 0;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
  LongTailProfile profile() const;  // observed label histogram
};

struct SiameseBatch {
  std::vector<Vector> view1;
  std::vector<Vector> view2;
  std::vector<std::uint32_t> labels;
};

struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t dim = 16;
  double imbalance_factor = 100.0;
  std::size_t n_max = 500;
  double class_separation = 3.0;
  std::uint64_t seed = 0;
};

// Gaussian mixture with exponential long-tail counts. Class means sit on a
// seeded random orthonormal frame at pairwise distance class_separation;
// features are unit-variance around the mean. Requires dim >= num_classes.
Dataset make_longtailed_synthetic(const SyntheticSpec& spec);

// Balanced draw from the same class means (same seed, distinct sub-stream).
Dataset make_balanced_synthetic(const SyntheticSpec& spec, std::size_t per_class);

// Header "label,f0,...,f{D-1}"; label first column, reals after. Ragged
// rows, non-numeric cells, and out-of-range labels are distinct errors.
Dataset load_csv_dataset(const std::string& path);
void save_csv_dataset(const Dataset& dataset, const std::string& path);

// Two independent corruptions of the same rows: additive Gaussian noise
// (sigma) and coordinate zero-masking (probability p).
SiameseBatch two_view_augment(const std::vector<Vector>& samples,
                              const std::vector<std::uint32_t>& labels,
                              double noise_sigma, double dropout_p,
                              std::mt19937_64& rng);

}  // namespace rescom
