#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tlstm/autoencoder.hpp"
#include "tlstm/cohort.hpp"
#include "tlstm/errors.hpp"
#include "tlstm/evaluation.hpp"
#include "tlstm/io.hpp"
#include "tlstm/synth.hpp"
#include "tlstm/trainer.hpp"

namespace tlstm::cli {
namespace {

namespace fs = std::filesystem;

struct ModelOptions {
  Eigen::Index hidden_dim = 2;
  std::string normalize = "identity";
  double gap_divisor = 1.0;
  std::string elapse = "log";
};

struct TrainOptions {
  std::size_t epochs = 1;
  double lr = 1e-3;
  std::size_t batch_size = 50;
  std::size_t patience = 0;
  std::uint64_t seed = 0;
};

void add_model_flags(CLI::App* sub, ModelOptions& m, bool with_hidden_dim) {
  if (with_hidden_dim) {
    sub->add_option("--hidden-dim", m.hidden_dim, "Hidden (and memory) dimension")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
  sub->add_option("--normalize", m.normalize, "Input scaling: identity or zscore")
      ->capture_default_str()
      ->check(CLI::IsMember({"identity", "zscore"}));
  sub->add_option("--gap-divisor", m.gap_divisor, "Time gaps are divided by this before decay")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--elapse", m.elapse, "Decay function: log or inverse")
      ->capture_default_str()
      ->check(CLI::IsMember({"log", "inverse"}));
}

void add_train_flags(CLI::App* sub, TrainOptions& t) {
  sub->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--batch-size", t.batch_size, "Maximum mini-batch size (0 = whole length bucket)")
      ->capture_default_str();
  sub->add_option("--patience", t.patience, "Stop after this many epochs without improvement (0 = off)")
      ->capture_default_str();
  sub->add_option("--seed", t.seed, "Random seed")->capture_default_str();
}

ModelDims model_dims(const ModelOptions& m) {
  ModelDims dims;
  dims.hidden_dim = m.hidden_dim;
  dims.gap_divisor = m.gap_divisor;
  dims.elapse = parse_elapse(m.elapse);
  dims.normalization = parse_normalization(m.normalize);
  return dims;
}

TrainConfig train_config(const TrainOptions& t) {
  TrainConfig config;
  config.epochs = t.epochs;
  config.learning_rate = t.lr;
  config.max_batch_size = t.batch_size;
  config.seed = t.seed;
  if (t.patience > 0) config.plateau_patience = t.patience;
  return config;
}

std::string join(const std::vector<std::size_t>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

void check_model_data(const AutoencoderModel& model, const Dataset& data) {
  model.validate();
  for (const auto& s : data) s.validate();
}

// ---- subcommands -------------------------------------------------------------

struct SynthArgs {
  int dataset = 1;
  GeneratorConfig config;
  fs::path out;
};

void run_synth(const SynthArgs& a, std::ostream& out) {
  const Dataset data = generate(a.dataset, a.config);
  write_file_atomic(a.out, dataset_to_jsonl(data));
  out << "wrote " << data.size() << " series to " << a.out.string() << "\n";
}

struct TrainArgs {
  fs::path data;
  ModelOptions model;
  TrainOptions train;
  fs::path out;
  fs::path loss_curve;
};

void run_train(const TrainArgs& a, std::ostream& out) {
  const Dataset data = read_dataset_file(a.data);
  const TrainResult result = train(data, model_dims(a.model), train_config(a.train));
  if (!a.loss_curve.empty()) write_file_atomic(a.loss_curve, loss_curve_to_csv(result.loss_curve));
  write_file_atomic(a.out, model_to_json(result.model));
  out << "epochs " << result.loss_curve.size() << (result.stopped_early ? " (plateau)" : "")
      << ", final loss " << format_real(result.loss_curve.back()) << "\n";
}

struct EmbedArgs {
  fs::path model;
  fs::path data;
  std::string part = "both";
  fs::path out;
};

void run_embed(const EmbedArgs& a, std::ostream& out) {
  const AutoencoderModel model = read_model_file(a.model);
  const Dataset data = read_dataset_file(a.data);
  check_model_data(model, data);
  std::vector<Embedding> embeddings;
  embeddings.reserve(data.size());
  for (const auto& s : data) embeddings.push_back(encode(model, s));
  write_file_atomic(a.out, embeddings_to_csv(embeddings, parse_embedding_part(a.part)));
  out << "wrote " << embeddings.size() << " embeddings to " << a.out.string() << "\n";
}

struct ReconstructArgs {
  fs::path model;
  fs::path data;
  bool free_running = false;
  fs::path out;
};

void run_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  const AutoencoderModel model = read_model_file(a.model);
  const Dataset data = read_dataset_file(a.data);
  check_model_data(model, data);
  const DecodeMode mode = a.free_running ? DecodeMode::kFreeRunning : DecodeMode::kTeacherForced;
  std::string csv = "id,time,original,reconstructed\n";
  for (const auto& s : data) {
    const std::vector<double> rec = reconstruct(model, s, mode);
    const std::string id = csv_field(s.id);
    for (std::size_t t = 0; t < s.size(); ++t) {
      csv += id + "," + format_real(s.times[t]) + "," + format_real(s.values[t]) + "," +
             format_real(rec[t]) + "\n";
    }
  }
  write_file_atomic(a.out, csv);
  out << "wrote reconstructions of " << data.size() << " series to " << a.out.string() << "\n";
}

struct CvArgs {
  fs::path data;
  std::vector<Eigen::Index> dims;
  std::size_t folds = 4;
  std::size_t threads = 1;
  ModelOptions model;
  TrainOptions train;
  fs::path out;
  fs::path overall_out;
};

void run_cv(const CvArgs& a, std::ostream& out) {
  const Dataset data = read_dataset_file(a.data);
  CvConfig config;
  config.dims = a.dims;
  config.folds = a.folds;
  config.threads = a.threads;
  config.model = model_dims(a.model);
  config.train = train_config(a.train);
  const CvReport report = kfold_cv(data, config);

  std::string folds = "dim,fold,rmse\n";
  std::string overall = "dim,overall\n";
  for (const CvRow& row : report.rows) {
    for (std::size_t f = 0; f < row.fold_rmse.size(); ++f) {
      folds += std::to_string(row.hidden_dim) + "," + std::to_string(f + 1) + "," +
               format_real(row.fold_rmse[f]) + "\n";
    }
    overall += std::to_string(row.hidden_dim) + "," + format_real(row.overall) + "\n";
  }
  if (!a.overall_out.empty()) write_file_atomic(a.overall_out, overall);
  write_file_atomic(a.out, folds);
  for (const CvRow& row : report.rows) {
    out << "dim " << row.hidden_dim << ": overall RMSE " << format_real(row.overall) << "\n";
  }
  out << "chosen dimension " << report.chosen_dim << "\n";
}

struct SilhouetteArgs {
  fs::path embeddings;
  fs::path data;
  fs::path out;
};

void run_silhouette(const SilhouetteArgs& a, std::ostream& out) {
  const EmbeddingTable table = embeddings_from_csv(read_text_file(a.embeddings));
  const Dataset data = read_dataset_file(a.data);
  std::map<std::string, std::string> label_of;
  for (const auto& s : data) {
    if (s.label) label_of[s.id] = *s.label;
  }
  std::vector<std::string> labels;
  labels.reserve(table.ids.size());
  for (const auto& id : table.ids) {
    const auto it = label_of.find(id);
    if (it == label_of.end()) throw ContractError("silhouette: no label for id " + id);
    labels.push_back(it->second);
  }
  const SilhouetteResult result = silhouette(table.rows, labels);
  if (!a.out.empty()) {
    std::string csv = "id,label,s\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
      csv += csv_field(table.ids[i]) + "," + csv_field(labels[i]) + "," +
             format_real(result.per_point[i]) + "\n";
    }
    write_file_atomic(a.out, csv);
  }
  out << "average silhouette " << format_real(result.average) << "\n";
}

struct OutliersArgs {
  fs::path embeddings;
  std::size_t top_k = 10;
  fs::path out;
};

void run_outliers(const OutliersArgs& a, std::ostream& out) {
  const EmbeddingTable table = embeddings_from_csv(read_text_file(a.embeddings));
  const OutlierReport report = extreme_dimension_outliers(table.rows, a.top_k);
  std::string csv = "id,extreme_count,dims\n";
  for (std::size_t row : report.ranking) {
    csv += csv_field(table.ids[row]) + "," + std::to_string(report.count(row)) + "," +
           join(report.extreme_dimensions[row], ';') + "\n";
  }
  write_file_atomic(a.out, csv);
  for (std::size_t row : report.ranking) {
    out << table.ids[row] << " " << report.count(row) << "\n";
  }
}

struct VarianceArgs {
  fs::path reconstruction;
  fs::path out;
};

void run_variance(const VarianceArgs& a, std::ostream& out) {
  const CsvTable table = parse_csv(read_text_file(a.reconstruction));
  const std::vector<std::string> expected = {"id", "time", "original", "reconstructed"};
  if (table.header != expected) {
    throw ContractError("variance-test: expected header 'id,time,original,reconstructed'");
  }
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> originals;
  std::vector<std::vector<double>> reconstructions;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 4) {
      throw ContractError("variance-test: row " + std::to_string(r + 2) + " needs 4 fields");
    }
    auto [it, inserted] = index.try_emplace(row[0], order.size());
    if (inserted) {
      order.push_back(row[0]);
      originals.emplace_back();
      reconstructions.emplace_back();
    }
    try {
      originals[it->second].push_back(parse_real(row[2]));
      reconstructions[it->second].push_back(parse_real(row[3]));
    } catch (const ContractError& e) {
      throw ContractError("variance-test: row " + std::to_string(r + 2) + ": " + e.what());
    }
  }
  const TTestResult result = variance_reduction_test(originals, reconstructions);
  if (!a.out.empty()) {
    write_file_atomic(a.out, "t,p_value,n\n" + format_real(result.t) + "," +
                                 format_real(result.p_value) + "," + std::to_string(result.n) +
                                 "\n");
  }
  out << "t " << format_real(result.t) << ", p " << format_real(result.p_value) << ", n "
      << result.n << "\n";
}

struct CohortArgs {
  fs::path input;
  ColumnMap columns;
  CohortCriteria criteria;
  fs::path out;
};

void run_cohort(const CohortArgs& a, std::ostream& out) {
  const CohortResult result = cohort_filter(load_long_csv(a.input, a.columns), a.criteria);
  if (result.kept.empty()) throw ContractError("cohort-filter: no patient meets the criteria");
  write_file_atomic(a.out, dataset_to_jsonl(result.kept));
  const ExclusionTally& t = result.tally;
  out << "patients " << t.total() << ", kept " << t.kept << ", too few observations "
      << t.too_few_observations << ", span too short " << t.too_short_span;
  if (a.criteria.stage3_heuristic) out << ", not stage 3 " << t.not_stage3;
  out << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"T-LSTM autoencoder for irregularly sampled series", "tlstm"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
  synth->add_option("--dataset", synth_args.dataset, "Benchmark id (1, 2 or 3)")
      ->required()
      ->check(CLI::Range(1, 3));
  synth->add_option("--seed", synth_args.config.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output JSON Lines file")->required();
  synth->add_option("--profiles-per-cluster", synth_args.config.profiles_per_cluster)
      ->capture_default_str();
  synth->add_option("--gap-mean", synth_args.config.gap_mean, "Mean gap between visits")
      ->capture_default_str();
  synth->add_option("--horizon", synth_args.config.horizon, "Last admissible time")
      ->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train an autoencoder");
  train_cmd->add_option("--data", train_args.data, "JSON Lines dataset")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_args.out, "Output model JSON")->required();
  train_cmd->add_option("--loss-curve", train_args.loss_curve, "Per-epoch loss CSV");
  add_model_flags(train_cmd, train_args.model, true);
  add_train_flags(train_cmd, train_args.train);

  EmbedArgs embed_args;
  auto* embed = app.add_subcommand("embed", "Export final encoder states");
  embed->add_option("--model", embed_args.model)->required()->check(CLI::ExistingFile);
  embed->add_option("--data", embed_args.data)->required()->check(CLI::ExistingFile);
  embed->add_option("--part", embed_args.part, "hidden, memory or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"hidden", "memory", "both"}));
  embed->add_option("--out", embed_args.out)->required();

  ReconstructArgs rec_args;
  auto* rec = app.add_subcommand("reconstruct", "Write per-observation reconstructions");
  rec->add_option("--model", rec_args.model)->required()->check(CLI::ExistingFile);
  rec->add_option("--data", rec_args.data)->required()->check(CLI::ExistingFile);
  rec->add_flag("--free-running", rec_args.free_running, "Feed predictions back instead of observations");
  rec->add_option("--out", rec_args.out)->required();

  CvArgs cv_args;
  auto* cv = app.add_subcommand("cv", "K-fold cross-validation over hidden dimensions");
  cv->add_option("--data", cv_args.data)->required()->check(CLI::ExistingFile);
  cv->add_option("--dims", cv_args.dims, "Candidate hidden dimensions")->required()->delimiter(',');
  cv->add_option("--folds", cv_args.folds)->capture_default_str();
  cv->add_option("--threads", cv_args.threads)->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--out", cv_args.out, "Per-fold RMSE CSV")->required();
  cv->add_option("--overall-out", cv_args.overall_out, "Per-dimension overall RMSE CSV");
  add_model_flags(cv, cv_args.model, false);
  add_train_flags(cv, cv_args.train);

  SilhouetteArgs sil_args;
  auto* sil = app.add_subcommand("silhouette", "Silhouette of embeddings against dataset labels");
  sil->add_option("--embeddings", sil_args.embeddings)->required()->check(CLI::ExistingFile);
  sil->add_option("--data", sil_args.data, "Dataset holding the labels")->required()->check(CLI::ExistingFile);
  sil->add_option("--out", sil_args.out, "Per-profile silhouette CSV");

  OutliersArgs out_args;
  auto* outl = app.add_subcommand("outliers", "Rank profiles by extreme embedding dimensions");
  outl->add_option("--embeddings", out_args.embeddings)->required()->check(CLI::ExistingFile);
  outl->add_option("--top-k", out_args.top_k)->capture_default_str()->check(CLI::PositiveNumber);
  outl->add_option("--out", out_args.out)->required();

  VarianceArgs var_args;
  auto* var = app.add_subcommand("variance-test", "Paired test of variance reduction");
  var->add_option("--reconstruction", var_args.reconstruction, "CSV written by reconstruct")
      ->required()
      ->check(CLI::ExistingFile);
  var->add_option("--out", var_args.out);

  CohortArgs cohort_args;
  auto* cohort = app.add_subcommand("cohort-filter", "Build a dataset from long-format eGFR rows");
  cohort->add_option("--input", cohort_args.input)->required()->check(CLI::ExistingFile);
  cohort->add_option("--id-col", cohort_args.columns.id)->capture_default_str();
  cohort->add_option("--date-col", cohort_args.columns.date)->capture_default_str();
  cohort->add_option("--value-col", cohort_args.columns.value)->capture_default_str();
  cohort->add_option("--min-obs", cohort_args.criteria.min_observations)->capture_default_str();
  cohort->add_option("--min-span-days", cohort_args.criteria.min_span_days)->capture_default_str();
  cohort->add_flag("--stage3-heuristic", cohort_args.criteria.stage3_heuristic);
  cohort->add_option("--out", cohort_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*synth) run_synth(synth_args, out);
    if (*train_cmd) run_train(train_args, out);
    if (*embed) run_embed(embed_args, out);
    if (*rec) run_reconstruct(rec_args, out);
    if (*cv) run_cv(cv_args, out);
    if (*sil) run_silhouette(sil_args, out);
    if (*outl) run_outliers(out_args, out);
    if (*var) run_variance(var_args, out);
    if (*cohort) run_cohort(cohort_args, out);
  } catch (const NumericError& e) {
    err << name << ": numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ContractError& e) {
    err << name << ": " << e.what() << "\n";
    return kContract;
  } catch (const fs::filesystem_error& e) {
    err << name << ": " << e.what() << "\n";
    return kContract;
  }
  return kOk;
}

}  // namespace tlstm::cli
