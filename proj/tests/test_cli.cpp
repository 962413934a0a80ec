#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "droplab/io.hpp"

using namespace droplab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "droplab");
  std::vector<const char *> argv;
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / ("droplab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const std::vector<std::string> kSmallCurves{
    "curves", "--seed", "7", "--n-grid", "60", "--delta-grid", "0", "0.9", "1",
    "--trials", "2", "--test-size", "3000", "--epochs", "40", "--replicates", "2"};

} // namespace

TEST_CASE("verify tails") {
  const Run r = run({"verify", "--suite", "tails", "--seed", "7"});
  CHECK(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["passed"].get<bool>());
  CHECK(j["checks"].size() == 6);
  for (const auto &c : j["checks"]) {
    CHECK(c["passed"].get<bool>());
  }
  CHECK(j["header"]["seed"] == 7);
  CHECK(j["header"]["config"]["suite"] == "tails");
}

TEST_CASE("validation errors exit 1") {
  const Run r = run({"train", "--delta", "1.5"});
  CHECK(r.code == 1);
  CHECK(r.err.find("range") != std::string::npos);
  CHECK(run({"bogus"}).code == 1);
  const Run flag = run({"sample", "--no-such-flag"});
  CHECK(flag.code == 1);
  CHECK(flag.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"verify", "--suite", "nope"}).code == 1);
  CHECK(run({"sample", "--model", "missing-model"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("curves output is byte-identical across runs and thread counts") {
  const Run a = run(kSmallCurves);
  const Run b = run(kSmallCurves);
  auto threaded = kSmallCurves;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Run c = run(threaded);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  CHECK(a.out.rfind("# {", 0) == 0);
  CHECK(a.out.find("\nn,delta,trial,test_error,train_error,wall_time_ms,seed\n") != std::string::npos);
}

TEST_CASE("sample, train and eval through files under --out") {
  TempDir dir("pipeline");
  const std::string out = dir.path.string();
  const std::string model = (dir.path / "model.json").string();
  {
    std::ofstream m(model);
    m << R"({"label_prior":0.5,"vocab_size":3,"topics":[)"
         R"({"id":0,"rho0":1,"rho1":0,"intensity":[6,3,1]},)"
         R"({"id":1,"rho0":0,"rho1":1,"intensity":[1,3,6]}]})";
  }
  CHECK(run({"sample", "--model", model, "--n", "400", "--seed", "3", "--out", out}).code == 0);
  const fs::path docs = dir.path / "documents.json";
  REQUIRE(fs::exists(docs));
  CHECK(Json::parse(slurp(docs))["documents"].size() == 400);

  CHECK(run({"train", "--data", docs.string(), "--delta", "0.5", "--seed", "3", "--out", out}).code == 0);
  const fs::path clf = dir.path / "classifier.json";
  REQUIRE(fs::exists(clf));
  const Json cj = Json::parse(slurp(clf));
  CHECK(cj["weights"].size() == 3);
  CHECK(cj["meta"]["kind"] == "logistic");

  const Run ev = run({"eval", "--classifier", clf.string(), "--model", model, "--n", "5000",
                      "--delta", "0.5"});
  REQUIRE(ev.code == 0);
  const Json ej = Json::parse(ev.out);
  CHECK(ej["original"]["error"].get<double>() < 0.2);
  CHECK(ej["dropout"]["error"].get<double>() >= 0.0);

  const Run nb = run({"train", "--data", docs.string(), "--delta", "1"});
  REQUIRE(nb.code == 0);
  CHECK(Json::parse(nb.out)["meta"]["kind"] == "naive-bayes");

  std::vector<std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(dir.path)) {
    files.push_back(e.path().filename().string());
  }
  std::sort(files.begin(), files.end());
  CHECK(files == std::vector<std::string>{"classifier.json", "documents.json", "model.json"});
}

TEST_CASE("corpus training") {
  TempDir dir("corpus");
  const fs::path tsv = dir.path / "c.tsv";
  {
    std::ofstream f(tsv);
    for (int i = 0; i < 60; ++i) {
      f << (i % 2) << '\t' << (i % 2 ? "great fun film" : "dull boring film") << '\n';
    }
  }
  const Run tr = run({"train", "--corpus", tsv.string(), "--train-size", "40", "--seed", "1",
                      "--out", dir.path.string()});
  REQUIRE(tr.code == 0);
  const Run ev = run({"eval", "--classifier", (dir.path / "classifier.json").string(), "--corpus",
                      tsv.string(), "--train-size", "40", "--seed", "1"});
  REQUIRE(ev.code == 0);
  CHECK(Json::parse(ev.out)["original"]["error"].get<double>() == 0.0);
  CHECK(run({"train", "--corpus", (dir.path / "missing.tsv").string()}).code == 1);
}

TEST_CASE("curves writes CSV and summary under --out") {
  TempDir dir("curves");
  auto args = kSmallCurves;
  args.insert(args.end(), {"--out", dir.path.string()});
  REQUIRE(run(args).code == 0);
  CHECK(fs::exists(dir.path / "curves.csv"));
  const Json s = Json::parse(slurp(dir.path / "summary.json"));
  CHECK(s["cells"].size() == 3);
  CHECK(s["header"]["command"] == "curves");
}

TEST_CASE("verify exit code follows the report") {
  const Run bias = run({"verify", "--suite", "bias"});
  CHECK(bias.code == 0);
  const Run alt = run({"verify", "--suite", "altitude", "--mc", "200000", "--threads", "2"});
  const bool passed = Json::parse(alt.out)["passed"].get<bool>();
  CHECK(alt.code == (passed ? 0 : 2));
  const Run alt1 = run({"verify", "--suite", "altitude", "--mc", "200000", "--threads", "1"});
  CHECK(alt1.out == alt.out);
}

TEST_CASE("influence demo output") {
  const Run r = run({"demo-influence", "--n", "1500", "--epochs", "100", "--seed", "2"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["delta"] == 0.75);
  CHECK(j["plain"]["weights"].size() == 2);
  CHECK(j["model"]["topics"].size() == 3);
}
