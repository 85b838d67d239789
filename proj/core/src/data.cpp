#include "rescom/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rescom/rng.hpp"

namespace rescom {

LongTailProfile Dataset::profile() const {
  if (num_classes == 0) throw std::logic_error("dataset: no classes");
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::uint32_t y : labels) counts.at(y) += 1;
  return LongTailProfile(std::move(counts));
}

namespace {

// Random orthonormal frame via Gram-Schmidt on Gaussian draws; means are
// frame vectors scaled so pairwise distances equal class_separation.
std::vector<Vector> class_means(const SyntheticSpec& spec) {
  if (spec.dim < spec.num_classes)
    throw std::invalid_argument("synthetic: dim must be >= number of classes");
  auto rng = make_rng(spec.seed, "data/means");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> frame;
  while (frame.size() < spec.num_classes) {
    Vector v(spec.dim);
    for (double& x : v) x = gauss(rng);
    for (const Vector& u : frame) {
      const double c = dot(v, u);
      for (std::size_t d = 0; d < v.size(); ++d) v[d] -= c * u[d];
    }
    const double n = norm2(v);
    if (n < 1e-6) continue;
    for (double& x : v) x /= n;
    frame.push_back(std::move(v));
  }
  const double scale = spec.class_separation / std::sqrt(2.0);
  for (Vector& m : frame)
    for (double& x : m) x *= scale;
  return frame;
}

Dataset sample_mixture(const SyntheticSpec& spec,
                       const std::vector<std::size_t>& counts,
                       const char* stream) {
  const auto means = class_means(spec);
  auto rng = make_rng(spec.seed, stream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.num_classes = spec.num_classes;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i) {
      Vector x = means[k];
      for (double& v : x) v += gauss(rng);
      ds.features.push_back(std::move(x));
      ds.labels.push_back(static_cast<std::uint32_t>(k));
    }
  }
  return ds;
}

}  // namespace

Dataset make_longtailed_synthetic(const SyntheticSpec& spec) {
  if (spec.imbalance_factor < 1.0)
    throw std::invalid_argument("synthetic: imbalance factor must be >= 1");
  if (spec.num_classes < 2)
    throw std::invalid_argument("synthetic: needs >= 2 classes");
  const auto profile = LongTailProfile::exponential(
      spec.num_classes, spec.imbalance_factor, spec.n_max);
  return sample_mixture(spec, profile.counts(), "data/train");
}

Dataset make_balanced_synthetic(const SyntheticSpec& spec, std::size_t per_class) {
  if (per_class < 1) throw std::invalid_argument("synthetic: per_class must be >= 1");
  std::vector<std::size_t> counts(spec.num_classes, per_class);
  return sample_mixture(spec, counts, "data/test");
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("dataset: missing header in " + path);

  // the header fixes the column count; every data row must match it
  std::size_t width = 1;
  for (char c : line)
    if (c == ',') ++width;
  if (width < 2)
    throw std::runtime_error("dataset: header needs a label and features in " +
                             path);

  Dataset ds;
  std::size_t row = 1;
  std::uint32_t max_label = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2)
      throw std::runtime_error("dataset: too few columns at row " +
                               std::to_string(row));
    if (cells.size() != width)
      throw std::runtime_error("dataset: ragged row " + std::to_string(row));

    long label = 0;
    {
      auto [ptr, ec] = std::from_chars(cells[0].data(),
                                       cells[0].data() + cells[0].size(), label);
      if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size() || label < 0)
        throw std::runtime_error("dataset: bad label at row " + std::to_string(row) +
                                 " column 1");
    }
    Vector x(width - 1);
    for (std::size_t c = 1; c < width; ++c) {
      try {
        std::size_t used = 0;
        x[c - 1] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::runtime_error("dataset: non-numeric cell at row " +
                                 std::to_string(row) + " column " +
                                 std::to_string(c + 1));
      }
    }
    max_label = std::max(max_label, static_cast<std::uint32_t>(label));
    ds.labels.push_back(static_cast<std::uint32_t>(label));
    ds.features.push_back(std::move(x));
  }
  if (ds.features.empty()) throw std::runtime_error("dataset: no rows in " + path);
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dataset: cannot write " + path);
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "label";
  for (std::size_t d = 0; d < dataset.dim(); ++d) os << ",f" << d;
  os << "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    os << dataset.labels[i];
    for (double v : dataset.features[i]) os << "," << v;
    os << "\n";
  }
}

SiameseBatch two_view_augment(const std::vector<Vector>& samples,
                              const std::vector<std::uint32_t>& labels,
                              double noise_sigma, double dropout_p,
                              std::mt19937_64& rng) {
  if (samples.size() != labels.size())
    throw std::invalid_argument("augment: sample/label size mismatch");
  if (noise_sigma < 0.0 || dropout_p < 0.0 || dropout_p >= 1.0)
    throw std::invalid_argument("augment: bad noise/dropout parameters");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto corrupt = [&](const Vector& x) {
    Vector v = x;
    if (noise_sigma > 0.0)
      for (double& e : v) e += noise_sigma * gauss(rng);
    if (dropout_p > 0.0)
      for (double& e : v)
        if (unif(rng) < dropout_p) e = 0.0;
    return v;
  };
  SiameseBatch batch;
  batch.labels = labels;
  batch.view1.reserve(samples.size());
  batch.view2.reserve(samples.size());
  for (const Vector& x : samples) batch.view1.push_back(corrupt(x));
  for (const Vector& x : samples) batch.view2.push_back(corrupt(x));
  return batch;
}

}  // namespace rescom
