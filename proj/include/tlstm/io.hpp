#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlstm/autoencoder.hpp"
#include "tlstm/series.hpp"

namespace tlstm {

inline constexpr int kModelFormatVersion = 1;

// Shortest decimal text that parses back to the identical double.
std::string format_real(double value);

// Whole-field finite real; ContractError otherwise.
double parse_real(std::string_view text);

// ---- JSON Lines datasets ---------------------------------------------------
// {"id": ..., "times": [...], "values": [...], "label": ...} per line.

Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::filesystem::path& path);
std::string dataset_to_jsonl(const Dataset& data);

// ---- model files -------------------------------------------------------------

std::string model_to_json(const AutoencoderModel& model);
AutoencoderModel model_from_json(std::string_view text);
AutoencoderModel read_model_file(const std::filesystem::path& path);

// ---- files -------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// ---- CSV tables ----------------------------------------------------------------

// Header row plus data rows, as written by the CSV emitters below.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);

// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(std::string_view text);

// `id,h0..,c0..` with columns selected by `part`.
std::string embeddings_to_csv(std::span<const Embedding> embeddings, EmbeddingPart part);

struct EmbeddingTable {
  std::vector<std::string> ids;
  std::vector<Vector> rows;
};
EmbeddingTable embeddings_from_csv(std::string_view text);

std::string loss_curve_to_csv(std::span<const double> curve);

}  // namespace tlstm
