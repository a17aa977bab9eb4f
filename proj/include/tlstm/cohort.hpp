#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "tlstm/series.hpp"

namespace tlstm {

struct LongRecord {
  std::string patient_id;
  std::chrono::sys_days date;
  double egfr = 0.0;
};

struct ColumnMap {
  std::string id = "patient_id";
  std::string date = "date";
  std::string value = "egfr";
};

// Splits one CSV record; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(std::string_view line);

// ISO-8601 calendar date (YYYY-MM-DD, optionally followed by a time part).
std::chrono::sys_days parse_iso_date(std::string_view text);

// Rows of a headed long-format CSV. Errors name the 1-based line number.
std::vector<LongRecord> read_long_csv(std::istream& in, const ColumnMap& columns);

// One series per patient (ordered by id): observations sorted by date,
// same-day readings averaged, times in days since the first observation.
Dataset group_records(std::vector<LongRecord> records);

Dataset load_long_csv(const std::filesystem::path& path, const ColumnMap& columns);

struct CohortCriteria {
  std::size_t min_observations = 11;
  double min_span_days = 366.0;
  // Approximate stage-3 screen; not a clinical determination.
  bool stage3_heuristic = false;
};

// At least two readings in [30, 60) whose dates are 90 or more days apart.
bool stage3_heuristic(const IrregularSeries& series);

struct ExclusionTally {
  std::size_t too_few_observations = 0;
  std::size_t too_short_span = 0;
  std::size_t not_stage3 = 0;
  std::size_t kept = 0;

  std::size_t total() const { return too_few_observations + too_short_span + not_stage3 + kept; }
};

struct CohortResult {
  Dataset kept;
  ExclusionTally tally;  // each exclusion charged to the first rule it fails
};

CohortResult cohort_filter(const Dataset& data, const CohortCriteria& criteria = {});

}  // namespace tlstm
