#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rescom/numerics.hpp"

namespace rescom {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Affine {
  Matrix w;  // out x in
  Vector b;
  Matrix gw;
  Vector gb;

  Vector forward(const Vector& x) const;
  // Accumulates gw/gb, returns grad w.r.t. x.
  Vector backward(const Vector& x, const Vector& grad_out);
  void zero_grad();
};

struct MlpCache {
  std::vector<Vector> inputs;       // input to each layer
  std::vector<Vector> activations;  // post-activation output of each layer
};

// Stack of affine layers with tanh after every layer except, optionally,
// the last.
class Mlp {
 public:
  Mlp() = default;
  // dims = {in, hidden..., out}
  Mlp(std::vector<std::size_t> dims, bool tanh_on_output);

  Vector forward(const Vector& x, MlpCache* cache = nullptr) const;
  Vector backward(const MlpCache& cache, const Vector& grad_out);

  std::vector<Affine>& layers() { return layers_; }
  const std::vector<Affine>& layers() const { return layers_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  bool tanh_on_output() const { return tanh_on_output_; }

 private:
  std::vector<Affine> layers_;
  bool tanh_on_output_ = true;
};

struct ModelDims {
  std::size_t input = 16;         // D_in
  std::size_t hidden = 64;        // encoder width, 2 hidden layers
  std::size_t feature = 64;       // D
  std::size_t projection = 32;    // C
  std::size_t num_classes = 10;   // K
};

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  double* data = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

// Forward pass products and caches of one Siamese batch.
struct SiameseForward {
  std::vector<Vector> f1, f2;  // features, B x D
  std::vector<Vector> z1, z2;  // unit-norm embeddings, B x C
  std::vector<Vector> s1, s2;  // classified logits, B x K
  std::vector<MlpCache> enc1, enc2, proj1;
  std::vector<Vector> proj1_prenorm;  // projector output before normalization
  std::uint64_t model_version = 0;
};

// Shared encoder + projection head + linear classifier with manual
// backpropagation. Parameters are doubles; loss-layer math stays in double
// throughout.
class SiameseModel {
 public:
  SiameseModel() = default;
  SiameseModel(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  std::uint64_t version() const { return version_; }

  SiameseForward forward_siamese(const std::vector<Vector>& view1,
                                 const std::vector<Vector>& view2) const;

  // Features and logits only; the inference path (projector discarded).
  Vector classify(const Vector& x) const;
  Vector embed(const Vector& x) const;  // query/key embedding for one input

  // Accumulates parameter gradients from output gradients (w.r.t. z1, s1,
  // s2 per sample). No gradient path through z2.
  void backward(const SiameseForward& fwd, const std::vector<Vector>& grad_z1,
                const std::vector<Vector>& grad_s1,
                const std::vector<Vector>& grad_s2);

  void zero_grad();
  std::vector<NamedTensor> named_tensors();

  Mlp& encoder() { return encoder_; }
  Mlp& projector() { return projector_; }
  Affine& fc() { return fc_; }
  const Mlp& encoder() const { return encoder_; }
  const Mlp& projector() const { return projector_; }
  const Affine& fc() const { return fc_; }

  void bump_version() { ++version_; }

 private:
  ModelDims dims_;
  Mlp encoder_;    // all-tanh: D_in -> hidden -> feature
  Mlp projector_;  // tanh hidden, linear output: feature -> hidden -> C
  Affine fc_;      // feature -> K
  std::uint64_t version_ = 0;
};

struct SgdConfig {
  double momentum = 0.9;
};

// SGD with momentum: v <- mu v + g; p <- p - lr v.
class SgdOptimizer {
 public:
  SgdOptimizer() = default;
  SgdOptimizer(SiameseModel& model, SgdConfig cfg);
  void step(SiameseModel& model, double lr);

 private:
  SgdConfig cfg_;
  std::vector<std::vector<double>> velocity_;
};

enum class LrScheduleKind { Multistep, Cosine };

struct LrSchedule {
  LrScheduleKind kind = LrScheduleKind::Cosine;
  double base_lr = 0.1;
  std::size_t total_epochs = 100;
  std::vector<std::size_t> milestones;  // multistep only
  double decay = 0.1;                   // multistep only
};

double lr_at_epoch(const LrSchedule& schedule, std::size_t epoch);

}  // namespace rescom
