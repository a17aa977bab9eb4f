#include "tlstm/series.hpp"

#include <cmath>

#include "tlstm/errors.hpp"

namespace tlstm {

void IrregularSeries::validate() const {
  const std::string where = "series '" + id + "': ";
  if (times.empty()) throw ContractError(where + "no observations");
  if (times.size() != values.size()) {
    throw ContractError(where + std::to_string(times.size()) + " times but " +
                        std::to_string(values.size()) + " values");
  }
  for (std::size_t t = 0; t < times.size(); ++t) {
    if (!std::isfinite(times[t]) || !std::isfinite(values[t])) {
      throw ContractError(where + "non-finite entry at index " + std::to_string(t));
    }
    if (t > 0 && !(times[t] > times[t - 1])) {
      throw ContractError(where + "times not strictly increasing at index " + std::to_string(t));
    }
  }
}

}  // namespace tlstm
