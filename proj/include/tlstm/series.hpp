#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tlstm {

// One irregularly sampled univariate profile.
struct IrregularSeries {
  std::string id;
  std::vector<double> times;   // strictly increasing
  std::vector<double> values;  // one observation per time
  std::optional<std::string> label;

  std::size_t size() const { return times.size(); }

  // Time since the previous observation; 0 for the first one.
  double gap(std::size_t t) const { return t == 0 ? 0.0 : times[t] - times[t - 1]; }

  // Throws ContractError on empty, mismatched, unsorted or non-finite data.
  void validate() const;
};

using Dataset = std::vector<IrregularSeries>;

}  // namespace tlstm
