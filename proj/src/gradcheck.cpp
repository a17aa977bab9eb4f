#include "tlstm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tlstm {

namespace {

double evaluate_checked(const ScalarFunction& f, const Vector& x) {
  const double value = f(x);
  if (!std::isfinite(value)) throw NumericError("finite difference: function value is not finite");
  return value;
}

}  // namespace

Vector central_difference(const ScalarFunction& f, const Vector& params, double step) {
  if (!(step > 0.0)) throw ContractError("finite difference: step must be positive");
  Vector numeric(params.size());
  Vector probe = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double original = probe[k];
    probe[k] = original + step;
    const double up = evaluate_checked(f, probe);
    probe[k] = original - step;
    const double down = evaluate_checked(f, probe);
    probe[k] = original;
    numeric[k] = (up - down) / (2.0 * step);
  }
  return numeric;
}

GradientDiscrepancy finite_difference_check(const ScalarFunction& f, const Vector& params,
                                            const Vector& analytic, double step) {
  if (analytic.size() != params.size()) {
    throw DimensionError("finite difference: gradient has " + std::to_string(analytic.size()) +
                         " entries for " + std::to_string(params.size()) + " parameters");
  }
  const Vector numeric = central_difference(f, params, step);
  GradientDiscrepancy result;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double rel = std::abs(analytic[k] - numeric[k]) / std::max(1.0, std::abs(analytic[k]));
    if (rel > result.max_relative) {
      result.max_relative = rel;
      result.worst_index = static_cast<std::size_t>(k);
    }
  }
  return result;
}

}  // namespace tlstm
