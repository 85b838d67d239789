#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rescom {

using Vector = std::vector<double>;

enum class TopKOrder { Largest, Smallest };

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);

// Throws on zero-norm input; result has unit Euclidean norm.
Vector l2_normalize(const Vector& v);

// Max-shifted log(sum(exp(x))). Throws on empty input.
double log_sum_exp(const std::vector<double>& xs);

// Indices of the k most extreme scores, ties broken by smaller original
// index, output ordered by extremity then index.
std::vector<std::size_t> top_k_indices(const std::vector<double>& scores,
                                       std::size_t k, TopKOrder order);

// Central differences, one call pair per coordinate. Default step when
// h <= 0: 1e-4 * max(1, |x|_inf).
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& x, double h = 0.0);

}  // namespace rescom
