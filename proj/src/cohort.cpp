#include "tlstm/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "tlstm/errors.hpp"

namespace tlstm {

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) throw ContractError("unterminated quoted field");
  return fields;
}

namespace {

int parse_int(std::string_view text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ContractError("'" + std::string(text) + "' is not an integer");
  }
  return value;
}

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ContractError("'" + std::string(text) + "' is not a number");
  }
  return value;
}

}  // namespace

std::chrono::sys_days parse_iso_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() > 10 && (text[10] == 'T' || text[10] == ' ')) text = text.substr(0, 10);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ContractError("'" + std::string(text) + "' is not an ISO-8601 date");
  }
  const year_month_day ymd{year{parse_int(text.substr(0, 4))},
                           month{static_cast<unsigned>(parse_int(text.substr(5, 2)))},
                           day{static_cast<unsigned>(parse_int(text.substr(8, 2)))}};
  if (!ymd.ok()) throw ContractError("'" + std::string(text) + "' is not a valid calendar date");
  return sys_days{ymd};
}

std::vector<LongRecord> read_long_csv(std::istream& in, const ColumnMap& columns) {
  std::string line;
  if (!std::getline(in, line)) throw ContractError("long CSV: file is empty");
  const std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ContractError("long CSV: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column(columns.id);
  const std::size_t date_col = column(columns.date);
  const std::size_t value_col = column(columns.value);
  const std::size_t needed = std::max({id_col, date_col, value_col}) + 1;

  std::vector<LongRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() < needed) {
        throw ContractError("expected at least " + std::to_string(needed) + " fields, got " +
                            std::to_string(fields.size()));
      }
      LongRecord r;
      r.patient_id = fields[id_col];
      if (r.patient_id.empty()) throw ContractError("empty patient id");
      r.date = parse_iso_date(fields[date_col]);
      r.egfr = parse_double(fields[value_col]);
      if (!std::isfinite(r.egfr) || r.egfr < 0.0) {
        throw ContractError("eGFR must be finite and non-negative");
      }
      records.push_back(std::move(r));
    } catch (const ContractError& e) {
      throw ContractError("long CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (records.empty()) throw ContractError("long CSV: no data rows");
  return records;
}

Dataset group_records(std::vector<LongRecord> records) {
  std::map<std::string, std::map<std::chrono::sys_days, std::pair<double, std::size_t>>> grouped;
  for (const auto& r : records) {
    auto& slot = grouped[r.patient_id][r.date];
    slot.first += r.egfr;
    slot.second += 1;
  }
  Dataset out;
  out.reserve(grouped.size());
  for (const auto& [id, by_date] : grouped) {
    IrregularSeries s;
    s.id = id;
    const auto first = by_date.begin()->first;
    for (const auto& [date, acc] : by_date) {
      s.times.push_back(static_cast<double>((date - first).count()));
      s.values.push_back(acc.first / static_cast<double>(acc.second));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Dataset load_long_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open " + path.string());
  return group_records(read_long_csv(in, columns));
}

bool stage3_heuristic(const IrregularSeries& series) {
  double first = 0.0;
  double last = 0.0;
  bool seen = false;
  for (std::size_t t = 0; t < series.size(); ++t) {
    const double v = series.values[t];
    if (v >= 30.0 && v < 60.0) {
      if (!seen) first = series.times[t];
      last = series.times[t];
      seen = true;
    }
  }
  return seen && last - first >= 90.0;
}

CohortResult cohort_filter(const Dataset& data, const CohortCriteria& criteria) {
  CohortResult result;
  for (const auto& s : data) {
    if (s.size() < criteria.min_observations) {
      ++result.tally.too_few_observations;
      continue;
    }
    const double span = s.times.back() - s.times.front();
    if (span < criteria.min_span_days) {
      ++result.tally.too_short_span;
      continue;
    }
    if (criteria.stage3_heuristic && !stage3_heuristic(s)) {
      ++result.tally.not_stage3;
      continue;
    }
    ++result.tally.kept;
    result.kept.push_back(s);
  }
  return result;
}

}  // namespace tlstm
