#include "tlstm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "tlstm/cohort.hpp"

namespace tlstm {

using nlohmann::json;

std::string format_real(double value) {
  if (!std::isfinite(value)) throw NumericError("cannot serialize a non-finite value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("failed to format a real");
  return {buf, ptr};
}

double parse_real(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ContractError("bad number '" + std::string(text) + "'");
  }
  return value;
}

// ---- datasets ----------------------------------------------------------------

namespace {

IrregularSeries series_from_json(const json& j) {
  IrregularSeries s;
  if (!j.is_object()) throw ContractError("expected a JSON object");
  if (!j.contains("id") || !j.at("id").is_string()) throw ContractError("missing string field 'id'");
  s.id = j.at("id").get<std::string>();
  if (!j.contains("times") || !j.contains("values")) {
    throw ContractError("series '" + s.id + "' lacks 'times' or 'values'");
  }
  s.times = j.at("times").get<std::vector<double>>();
  s.values = j.at("values").get<std::vector<double>>();
  if (j.contains("label") && !j.at("label").is_null()) {
    s.label = j.at("label").is_string() ? j.at("label").get<std::string>() : j.at("label").dump();
  }
  s.validate();
  return s;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(series_from_json(json::parse(line)));
      if (!seen.insert(out.back().id).second) throw ContractError("duplicate id " + out.back().id);
    } catch (const json::exception& e) {
      throw ContractError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ContractError& e) {
      throw ContractError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw ContractError("dataset contains no series");
  return out;
}

Dataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open " + path.string());
  return read_dataset(in);
}

std::string dataset_to_jsonl(const Dataset& data) {
  std::string out;
  for (const auto& s : data) {
    s.validate();
    out += "{\"id\":" + json(s.id).dump() + ",\"times\":[";
    for (std::size_t t = 0; t < s.times.size(); ++t) out += (t ? "," : "") + format_real(s.times[t]);
    out += "],\"values\":[";
    for (std::size_t t = 0; t < s.values.size(); ++t) out += (t ? "," : "") + format_real(s.values[t]);
    out += "]";
    if (s.label) out += ",\"label\":" + json(*s.label).dump();
    out += "}\n";
  }
  return out;
}

// ---- models --------------------------------------------------------------------

namespace {

// Reals are written as raw shortest-round-trip tokens so that
// write -> read -> write reproduces the same bytes.
std::string matrix_json(const Matrix& m) {
  std::string out = "{\"rows\": " + std::to_string(m.rows()) + ", \"cols\": " +
                    std::to_string(m.cols()) + ", \"data\": [";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i || j) out += ", ";
      out += format_real(m(i, j));
    }
  }
  return out + "]}";
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw ContractError("model parameter " + name + ": data length does not match shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
  }
  return m;
}

}  // namespace

std::string model_to_json(const AutoencoderModel& model) {
  model.validate();
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(kModelFormatVersion) + ",\n";
  out += "  \"hidden_dim\": " + std::to_string(model.hidden_dim()) + ",\n";
  out += "  \"input_dim\": " + std::to_string(model.input_dim()) + ",\n";
  out += "  \"gap_divisor\": " + format_real(model.gap_divisor) + ",\n";
  out += "  \"elapse\": \"" + std::string(elapse_name(model.elapse)) + "\",\n";
  out += "  \"normalization\": {\"shift\": " + format_real(model.normalization.shift) +
         ", \"scale\": " + format_real(model.normalization.scale) + "},\n";
  out += "  \"seed\": " + std::to_string(model.seed) + ",\n";
  out += "  \"parameters\": {";
  bool first = true;
  model.params.for_each([&](const std::string& name, const Matrix& m) {
    out += first ? "\n" : ",\n";
    out += "    \"" + name + "\": " + matrix_json(m);
    first = false;
  });
  out += "\n  }\n}\n";
  return out;
}

AutoencoderModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ContractError("model file: unsupported format_version " + std::to_string(version));
    }
    const auto hidden = j.at("hidden_dim").get<Eigen::Index>();
    const auto input = j.at("input_dim").get<Eigen::Index>();
    AutoencoderModel model;
    model.params = AutoencoderParams::zeros(input, hidden);
    model.gap_divisor = j.at("gap_divisor").get<double>();
    model.elapse = parse_elapse(j.value("elapse", std::string("log")));
    model.normalization.shift = j.at("normalization").at("shift").get<double>();
    model.normalization.scale = j.at("normalization").at("scale").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    const json& params = j.at("parameters");
    model.params.for_each([&](const std::string& name, Matrix& m) {
      if (!params.contains(name)) throw ContractError("model file: missing parameter " + name);
      m = matrix_from_json(params.at(name), name);
    });
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ContractError(std::string("model file: ") + e.what());
  }
}

AutoencoderModel read_model_file(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

// ---- files -----------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContractError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw ContractError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ContractError("cannot move output into place at " + path.string());
  }
}

// ---- CSV ---------------------------------------------------------------------------

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ContractError("CSV: missing header");
  return table;
}

std::string embeddings_to_csv(std::span<const Embedding> embeddings, EmbeddingPart part) {
  if (embeddings.empty()) throw ContractError("embeddings: nothing to write");
  const Eigen::Index hid = embeddings.front().hidden.size();
  std::string out = "id";
  if (part != EmbeddingPart::kMemory) {
    for (Eigen::Index j = 0; j < hid; ++j) out += ",h" + std::to_string(j);
  }
  if (part != EmbeddingPart::kHidden) {
    for (Eigen::Index j = 0; j < hid; ++j) out += ",c" + std::to_string(j);
  }
  out += '\n';
  for (const auto& e : embeddings) {
    if (e.hidden.size() != hid || e.memory.size() != hid) {
      throw DimensionError("embeddings: inconsistent dimensions for '" + e.id + "'");
    }
    out += csv_field(e.id);
    const Vector v = e.part(part);
    for (Eigen::Index j = 0; j < v.size(); ++j) out += "," + format_real(v[j]);
    out += '\n';
  }
  return out;
}

EmbeddingTable embeddings_from_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (table.header.size() < 2 || table.header.front() != "id") {
    throw ContractError("embedding CSV: expected header 'id,<dims...>'");
  }
  EmbeddingTable out;
  const std::size_t width = table.header.size() - 1;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != width + 1) {
      throw ContractError("embedding CSV row " + std::to_string(r + 2) + ": expected " +
                          std::to_string(width + 1) + " fields");
    }
    Vector v(static_cast<Eigen::Index>(width));
    for (std::size_t j = 0; j < width; ++j) {
      try {
        v[static_cast<Eigen::Index>(j)] = parse_real(row[j + 1]);
      } catch (const ContractError& e) {
        throw ContractError("embedding CSV row " + std::to_string(r + 2) + ": " + e.what());
      }
    }
    out.ids.push_back(row.front());
    out.rows.push_back(std::move(v));
  }
  if (out.rows.empty()) throw ContractError("embedding CSV: no rows");
  return out;
}

std::string loss_curve_to_csv(std::span<const double> curve) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < curve.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_real(curve[e]) + "\n";
  }
  return out;
}

}  // namespace tlstm
