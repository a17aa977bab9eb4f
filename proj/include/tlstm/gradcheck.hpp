#pragma once

#include <cstddef>
#include <functional>

#include "tlstm/matrix.hpp"

namespace tlstm {

using ScalarFunction = std::function<double(const Vector&)>;

// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h for every coordinate.
Vector central_difference(const ScalarFunction& f, const Vector& params, double step);

struct GradientDiscrepancy {
  double max_relative = 0.0;
  std::size_t worst_index = 0;
};

// max_k |analytic_k - numeric_k| / max(1, |analytic_k|).
GradientDiscrepancy finite_difference_check(const ScalarFunction& f, const Vector& params,
                                            const Vector& analytic, double step);

}  // namespace tlstm
