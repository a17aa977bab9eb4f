#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "tlstm/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "tlstm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = tlstm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tlstm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string s(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("synth writes one line per profile") {
  const fs::path dir = scratch_dir("synth");
  const Outcome o = run({"synth", "--dataset", "1", "--seed", "7", "--out", s(dir / "d1.jsonl")});
  CHECK(o.code == 0);
  CHECK(line_count(dir / "d1.jsonl") == 200);
  fs::remove_all(dir);
}

TEST_CASE("full pipeline") {
  const fs::path dir = scratch_dir("pipeline");
  const std::string data = s(dir / "d.jsonl");
  REQUIRE(run({"synth", "--dataset", "2", "--seed", "3", "--profiles-per-cluster", "5", "--out", data}).code == 0);
  const Outcome trained = run({"train", "--data", data, "--hidden-dim", "3", "--epochs", "4", "--seed", "3",
                               "--lr", "0.01", "--out", s(dir / "m.json"), "--loss-curve", s(dir / "loss.csv")});
  REQUIRE(trained.code == 0);
  CHECK(line_count(dir / "loss.csv") == 5);
  CHECK(tlstm::read_model_file(dir / "m.json").hidden_dim() == 3);

  REQUIRE(run({"embed", "--model", s(dir / "m.json"), "--data", data, "--part", "both", "--out",
               s(dir / "emb.csv")}).code == 0);
  const tlstm::CsvTable emb = tlstm::parse_csv(tlstm::read_text_file(dir / "emb.csv"));
  CHECK(emb.header.size() == 7);
  CHECK(emb.rows.size() == 20);

  const Outcome sil = run({"silhouette", "--embeddings", s(dir / "emb.csv"), "--data", data, "--out",
                           s(dir / "sil.csv")});
  CHECK(sil.code == 0);
  CHECK(sil.out.find("average silhouette") != std::string::npos);
  CHECK(line_count(dir / "sil.csv") == 21);

  CHECK(run({"outliers", "--embeddings", s(dir / "emb.csv"), "--top-k", "4", "--out", s(dir / "out.csv")}).code == 0);
  CHECK(line_count(dir / "out.csv") == 5);

  REQUIRE(run({"reconstruct", "--model", s(dir / "m.json"), "--data", data, "--out", s(dir / "rec.csv")}).code == 0);
  const tlstm::CsvTable rec = tlstm::parse_csv(tlstm::read_text_file(dir / "rec.csv"));
  CHECK(rec.header == std::vector<std::string>{"id", "time", "original", "reconstructed"});
  CHECK(run({"reconstruct", "--model", s(dir / "m.json"), "--data", data, "--free-running", "--out",
             s(dir / "rec_free.csv")}).code == 0);

  const Outcome var = run({"variance-test", "--reconstruction", s(dir / "rec.csv"), "--out", s(dir / "var.csv")});
  CHECK(var.code == 0);
  CHECK(line_count(dir / "var.csv") == 2);

  const Outcome cv = run({"cv", "--data", data, "--dims", "2,3", "--folds", "4", "--epochs", "2", "--seed", "1",
                          "--out", s(dir / "cv.csv"), "--overall-out", s(dir / "overall.csv")});
  CHECK(cv.code == 0);
  CHECK(cv.out.find("chosen dimension") != std::string::npos);
  CHECK(line_count(dir / "cv.csv") == 9);
  CHECK(line_count(dir / "overall.csv") == 3);

  std::vector<std::string> leftovers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".tmp") leftovers.push_back(entry.path().string());
  }
  CHECK(leftovers.empty());
  fs::remove_all(dir);
}

TEST_CASE("cohort-filter") {
  const fs::path dir = scratch_dir("cohort");
  {
    std::ofstream csv(dir / "long.csv");
    csv << "pid,day,value\n";
    for (int i = 0; i < 12; ++i) csv << "A,2020-" << (i < 9 ? "0" : "") << (i + 1) << "-01,45\n";
    csv << "A,2021-06-01,44\nB,2020-01-01,50\nB,2020-02-01,51\n";
  }
  const Outcome o = run({"cohort-filter", "--input", s(dir / "long.csv"), "--id-col", "pid", "--date-col", "day",
                         "--value-col", "value", "--stage3-heuristic", "--out", s(dir / "cohort.jsonl")});
  CHECK(o.code == 0);
  CHECK(line_count(dir / "cohort.jsonl") == 1);
  CHECK(o.out.find("kept 1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"synth", "--dataset", "4", "--out", "x"}).code == 2);
  CHECK(run({"synth", "--dataset", "1"}).code == 2);
  CHECK(run({"synth", "--dataset", "1", "--out", "x", "--bogus"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("contract errors exit 3 and leave no output") {
  const fs::path dir = scratch_dir("errors");
  {
    std::ofstream bad(dir / "bad.jsonl");
    bad << R"({"id":"a","times":[0,2,1],"values":[1,2,3]})" << "\n";
  }
  const Outcome o = run({"train", "--data", s(dir / "bad.jsonl"), "--out", s(dir / "m.json"), "--loss-curve",
                         s(dir / "loss.csv")});
  CHECK(o.code == 3);
  CHECK(o.err.find("train") != std::string::npos);
  CHECK(o.err.find("line 1") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.json"));
  CHECK_FALSE(fs::exists(dir / "loss.csv"));

  {
    std::ofstream emb(dir / "emb.csv");
    emb << "id,h0\na,1\nb,2\n";
    std::ofstream data(dir / "d.jsonl");
    data << R"({"id":"a","times":[0],"values":[1],"label":"x"})" << "\n";
  }
  const Outcome sil = run({"silhouette", "--embeddings", s(dir / "emb.csv"), "--data", s(dir / "d.jsonl"),
                           "--out", s(dir / "sil.csv")});
  CHECK(sil.code == 3);
  CHECK_FALSE(fs::exists(dir / "sil.csv"));

  const Outcome missing_dir = run({"synth", "--dataset", "1", "--out", s(dir / "no" / "d.jsonl")});
  CHECK(missing_dir.code == 3);
  fs::remove_all(dir);
}

TEST_CASE("numeric failures exit 4") {
  const fs::path dir = scratch_dir("numeric");
  {
    std::ofstream data(dir / "huge.jsonl");
    data << R"({"id":"a","times":[0,1,2],"values":[1e300,-1e300,1e300]})" << "\n";
  }
  const Outcome o = run({"train", "--data", s(dir / "huge.jsonl"), "--epochs", "2", "--out", s(dir / "m.json")});
  CHECK(o.code == 4);
  CHECK_FALSE(fs::exists(dir / "m.json"));
  fs::remove_all(dir);
}
