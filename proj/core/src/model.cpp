#include "rescom/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rescom/rng.hpp"

namespace rescom {

Vector Affine::forward(const Vector& x) const {
  if (x.size() != w.cols) throw std::invalid_argument("affine: dimension mismatch");
  Vector y(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double s = b[r];
    const double* wr = &w.data[r * w.cols];
    for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
  return y;
}

Vector Affine::backward(const Vector& x, const Vector& grad_out) {
  Vector gx(w.cols, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double g = grad_out[r];
    gb[r] += g;
    const double* wr = &w.data[r * w.cols];
    double* gwr = &gw.data[r * w.cols];
    for (std::size_t c = 0; c < w.cols; ++c) {
      gwr[c] += g * x[c];
      gx[c] += g * wr[c];
    }
  }
  return gx;
}

void Affine::zero_grad() {
  std::fill(gw.data.begin(), gw.data.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

Mlp::Mlp(std::vector<std::size_t> dims, bool tanh_on_output)
    : tanh_on_output_(tanh_on_output) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: needs >= 2 dims");
  layers_.resize(dims.size() - 1);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers_[i].w = Matrix(dims[i + 1], dims[i]);
    layers_[i].b.assign(dims[i + 1], 0.0);
    layers_[i].gw = Matrix(dims[i + 1], dims[i]);
    layers_[i].gb.assign(dims[i + 1], 0.0);
  }
}

std::size_t Mlp::input_dim() const { return layers_.front().w.cols; }
std::size_t Mlp::output_dim() const { return layers_.back().w.rows; }

Vector Mlp::forward(const Vector& x, MlpCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->activations.clear();
  }
  Vector h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (cache) cache->inputs.push_back(h);
    Vector pre = layers_[i].forward(h);
    const bool apply_tanh = tanh_on_output_ || i + 1 < layers_.size();
    if (apply_tanh)
      for (double& v : pre) v = std::tanh(v);
    if (cache) cache->activations.push_back(pre);
    h = std::move(pre);
  }
  return h;
}

Vector Mlp::backward(const MlpCache& cache, const Vector& grad_out) {
  if (cache.inputs.size() != layers_.size())
    throw std::invalid_argument("mlp backward: stale or missing cache");
  Vector g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const bool applied_tanh = tanh_on_output_ || i + 1 < layers_.size();
    if (applied_tanh) {
      const Vector& a = cache.activations[i];
      for (std::size_t r = 0; r < g.size(); ++r) g[r] *= 1.0 - a[r] * a[r];
    }
    g = layers_[i].backward(cache.inputs[i], g);
  }
  return g;
}

namespace {

void init_affine(Affine& layer, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.w.cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : layer.w.data) v = dist(rng);
  for (double& v : layer.b) v = dist(rng);
}

}  // namespace

SiameseModel::SiameseModel(const ModelDims& dims, std::uint64_t seed) : dims_(dims) {
  encoder_ = Mlp({dims.input, dims.hidden, dims.hidden, dims.feature}, true);
  projector_ = Mlp({dims.feature, dims.hidden, dims.projection}, false);
  fc_.w = Matrix(dims.num_classes, dims.feature);
  fc_.b.assign(dims.num_classes, 0.0);
  fc_.gw = Matrix(dims.num_classes, dims.feature);
  fc_.gb.assign(dims.num_classes, 0.0);

  auto rng = make_rng(seed, "init");
  for (auto& l : encoder_.layers()) init_affine(l, rng);
  for (auto& l : projector_.layers()) init_affine(l, rng);
  init_affine(fc_, rng);
}

SiameseForward SiameseModel::forward_siamese(const std::vector<Vector>& view1,
                                             const std::vector<Vector>& view2) const {
  if (view1.size() != view2.size())
    throw std::invalid_argument("forward: view batch size mismatch");
  const std::size_t batch = view1.size();
  SiameseForward fwd;
  fwd.model_version = version_;
  fwd.f1.resize(batch);
  fwd.f2.resize(batch);
  fwd.z1.resize(batch);
  fwd.z2.resize(batch);
  fwd.s1.resize(batch);
  fwd.s2.resize(batch);
  fwd.enc1.resize(batch);
  fwd.enc2.resize(batch);
  fwd.proj1.resize(batch);
  fwd.proj1_prenorm.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    fwd.f1[i] = encoder_.forward(view1[i], &fwd.enc1[i]);
    fwd.f2[i] = encoder_.forward(view2[i], &fwd.enc2[i]);
    fwd.s1[i] = fc_.forward(fwd.f1[i]);
    fwd.s2[i] = fc_.forward(fwd.f2[i]);
    fwd.proj1_prenorm[i] = projector_.forward(fwd.f1[i], &fwd.proj1[i]);
    fwd.z1[i] = l2_normalize(fwd.proj1_prenorm[i]);
    fwd.z2[i] = l2_normalize(projector_.forward(fwd.f2[i]));
  }
  return fwd;
}

Vector SiameseModel::classify(const Vector& x) const {
  return fc_.forward(encoder_.forward(x));
}

Vector SiameseModel::embed(const Vector& x) const {
  return l2_normalize(projector_.forward(encoder_.forward(x)));
}

void SiameseModel::backward(const SiameseForward& fwd,
                            const std::vector<Vector>& grad_z1,
                            const std::vector<Vector>& grad_s1,
                            const std::vector<Vector>& grad_s2) {
  if (fwd.model_version != version_)
    throw std::logic_error("backward: stale forward cache");
  const std::size_t batch = fwd.f1.size();
  if (grad_z1.size() != batch || grad_s1.size() != batch || grad_s2.size() != batch)
    throw std::invalid_argument("backward: gradient batch size mismatch");
  for (std::size_t i = 0; i < batch; ++i) {
    // classifier path for both views
    Vector gf1 = fc_.backward(fwd.f1[i], grad_s1[i]);
    Vector gf2 = fc_.backward(fwd.f2[i], grad_s2[i]);
    // projection path for view 1 through the exact normalization Jacobian:
    // du = (g - z (z.g)) / |u|
    const Vector& u = fwd.proj1_prenorm[i];
    const Vector& z = fwd.z1[i];
    const double unorm = norm2(u);
    const double zg = dot(z, grad_z1[i]);
    Vector gu(u.size());
    for (std::size_t d = 0; d < u.size(); ++d)
      gu[d] = (grad_z1[i][d] - z[d] * zg) / unorm;
    Vector gf1p = projector_.backward(fwd.proj1[i], gu);
    for (std::size_t d = 0; d < gf1.size(); ++d) gf1[d] += gf1p[d];
    encoder_.backward(fwd.enc1[i], gf1);
    encoder_.backward(fwd.enc2[i], gf2);
  }
}

void SiameseModel::zero_grad() {
  for (auto& l : encoder_.layers()) l.zero_grad();
  for (auto& l : projector_.layers()) l.zero_grad();
  fc_.zero_grad();
}

std::vector<NamedTensor> SiameseModel::named_tensors() {
  std::vector<NamedTensor> tensors;
  auto add_affine = [&](const std::string& prefix, Affine& layer) {
    tensors.push_back({prefix + ".w",
                       {layer.w.rows, layer.w.cols},
                       layer.w.data.data(),
                       layer.gw.data.data(),
                       layer.w.data.size()});
    tensors.push_back({prefix + ".b", {layer.b.size()}, layer.b.data(),
                       layer.gb.data(), layer.b.size()});
  };
  for (std::size_t i = 0; i < encoder_.layers().size(); ++i)
    add_affine("encoder." + std::to_string(i), encoder_.layers()[i]);
  for (std::size_t i = 0; i < projector_.layers().size(); ++i)
    add_affine("projector." + std::to_string(i), projector_.layers()[i]);
  add_affine("fc", fc_);
  return tensors;
}

SgdOptimizer::SgdOptimizer(SiameseModel& model, SgdConfig cfg) : cfg_(cfg) {
  for (const auto& t : model.named_tensors())
    velocity_.emplace_back(t.size, 0.0);
}

void SgdOptimizer::step(SiameseModel& model, double lr) {
  auto tensors = model.named_tensors();
  if (tensors.size() != velocity_.size())
    throw std::logic_error("optimizer: model shape changed");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& t = tensors[i];
    auto& v = velocity_[i];
    for (std::size_t j = 0; j < t.size; ++j) {
      v[j] = cfg_.momentum * v[j] + t.grad[j];
      t.data[j] -= lr * v[j];
    }
  }
  model.bump_version();
}

double lr_at_epoch(const LrSchedule& schedule, std::size_t epoch) {
  if (schedule.kind == LrScheduleKind::Cosine) {
    const double frac = static_cast<double>(epoch) /
                        static_cast<double>(schedule.total_epochs);
    return schedule.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  }
  double lr = schedule.base_lr;
  for (std::size_t m : schedule.milestones)
    if (epoch >= m) lr *= schedule.decay;
  return lr;
}

}  // namespace rescom
