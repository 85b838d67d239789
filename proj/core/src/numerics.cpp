#include "rescom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rescom {

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector l2_normalize(const Vector& v) {
  const double n = norm2(v);
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::domain_error("l2_normalize: zero or non-finite norm");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) throw std::domain_error("log_sum_exp: non-finite input");
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& scores,
                                       std::size_t k, TopKOrder order) {
  if (k < 1 || k > scores.size())
    throw std::invalid_argument("top_k_indices: k out of range");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b])
      return order == TopKOrder::Largest ? scores[a] > scores[b]
                                         : scores[a] < scores[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), better);
  idx.resize(k);
  return idx;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& x, double h) {
  if (h <= 0.0) {
    double xmax = 1.0;
    for (double xi : x) xmax = std::max(xmax, std::abs(xi));
    h = 1e-4 * xmax;
  }
  Vector g(x.size());
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::domain_error("finite_difference_gradient: non-finite evaluation");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace rescom
