#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droplab/classifiers.hpp"
#include "droplab/corpus.hpp"
#include "droplab/dataset.hpp"
#include "droplab/errors.hpp"
#include "droplab/experiments.hpp"
#include "droplab/io.hpp"
#include "droplab/parallel.hpp"
#include "droplab/random.hpp"
#include "droplab/verify.hpp"
#include "droplab/version.hpp"

namespace droplab {

namespace {

constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;
constexpr std::uint64_t kSampleStream = 0x73616d70ULL;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  int threads = default_threads();
  std::string model = "synthetic-sec6";
  double delta = 0.0;
  std::int64_t mc = 1'000'000;
};

struct DataArgs {
  std::string data;   // documents JSON
  std::string corpus; // TSV
  std::optional<std::size_t> train_size;
  double train_fraction = 0.6;
  int n = 1000;
};

// Every option of the app and of the chosen subcommand, as given or as
// defaulted. --threads and --out never change results and are omitted.
Json run_config(const CLI::App &app, const CLI::App &sub) {
  Json cfg = Json::object();
  auto add = [&](const CLI::App &a) {
    for (const CLI::Option *opt : a.get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "version" || name == "threads" ||
          name == "out") {
        continue;
      }
      if (opt->get_type_size_max() == 0) {
        cfg[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto &res = opt->results();
        if (opt->get_expected_max() > 1) {
          cfg[name] = res;
        } else {
          cfg[name] = res.empty() ? std::string("true") : res.back();
        }
      } else {
        cfg[name] = opt->get_default_str();
      }
    }
  };
  add(app);
  add(sub);
  return cfg;
}

Json header(const std::string &command, const Json &config, std::uint64_t seed) {
  return {{"version", kVersion}, {"command", command}, {"config", config}, {"seed", seed}};
}

class Output {
public:
  Output(std::string dir, std::ostream &out) : dir_(std::move(dir)), out_(out) {}

  /// Primary result: file under --out, or stdout.
  void primary(const std::string &name, const std::string &text) {
    if (dir_.empty()) {
      out_ << text;
    } else {
      write_text_file(std::filesystem::path(dir_) / name, text);
    }
  }
  /// Secondary files are only written when --out is set.
  void secondary(const std::string &name, const std::string &text) {
    if (!dir_.empty()) {
      write_text_file(std::filesystem::path(dir_) / name, text);
    }
  }

private:
  std::string dir_;
  std::ostream &out_;
};

void add_data_options(CLI::App *sub, DataArgs &d) {
  sub->add_option("--data", d.data, "Documents JSON (as written by 'sample')");
  sub->add_option("--corpus", d.corpus, "Corpus TSV: <0|1>\\t<text> per line");
  sub->add_option("--train-size", d.train_size, "Corpus training documents");
  sub->add_option("--train-fraction", d.train_fraction, "Corpus training share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

// Training data (train = true) or evaluation data for a command.
Dataset load_data(const DataArgs &d, const Globals &g, bool train) {
  if (!d.data.empty() && !d.corpus.empty()) {
    throw InvalidArgument("--data and --corpus are exclusive");
  }
  if (!d.data.empty()) {
    return dataset_from_json(read_json_file(d.data));
  }
  if (!d.corpus.empty()) {
    SplitSpec split;
    split.train_size = d.train_size;
    split.train_fraction = d.train_fraction;
    split.seed = g.seed;
    auto [tr, te] = load_corpus(d.corpus, split);
    return train ? std::move(tr.data) : std::move(te.data);
  }
  if (d.n < 1) {
    throw InvalidArgument("--n must be positive");
  }
  const GenerativeSampler sampler = resolve_model(g.model);
  const auto docs = sample_documents(sampler, static_cast<std::size_t>(d.n),
                                     derive_seed(g.seed, {train ? kTrainStream : kEvalStream}));
  return Dataset::from_documents(docs, sampler.vocab_size());
}

Json error_json(const ErrorReport &r) {
  Json per = Json::object();
  for (const auto &[topic, est] : r.per_topic) {
    per[std::to_string(topic)] = {{"mean", est.mean}, {"se", est.se}};
  }
  return {{"error", r.error}, {"mistakes", r.mistakes}, {"total", r.total}, {"per_topic", per}};
}

Json classifier_line(const LinearClassifier &c) {
  Json w = Json::array();
  for (Eigen::Index i = 0; i < c.weights.size(); ++i) {
    w.push_back(c.weights[i]);
  }
  return {{"weights", w}, {"intercept", c.intercept}};
}

Json cluster_json(const ClusterErrors &e) {
  return {{"blue", e.blue}, {"common_red", e.common_red}, {"rare_red", e.rare_red}};
}

} // namespace

int cli_dispatch(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Dropout and the Poisson topic model: simulation, training and checks",
               "droplab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory (default: stdout)");
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--model", g.model, "Preset name or topic-model JSON")->capture_default_str();
  auto *delta_opt = app.add_option("--delta", g.delta, "Dropout rate in [0, 1]")
                        ->check(CLI::Range(0.0, 1.0))
                        ->capture_default_str();
  app.add_option("--mc", g.mc, "Monte Carlo draws")->check(CLI::PositiveNumber)->capture_default_str();

  // sample
  int sample_n = 100;
  auto *sample = app.add_subcommand("sample", "Draw documents from a model");
  sample->add_option("--n", sample_n, "Documents")->check(CLI::PositiveNumber)->capture_default_str();

  // train
  DataArgs train_data;
  TrainConfig tcfg;
  std::string train_kind = "auto";
  double smoothing = 1.0;
  bool no_recalibrate = false;
  auto *train = app.add_subcommand("train", "Fit a classifier and write it as JSON");
  add_data_options(train, train_data);
  train->add_option("--n", train_data.n, "Sampled training documents")->capture_default_str();
  train->add_option("--classifier", train_kind, "auto | logistic | naive-bayes")
      ->check(CLI::IsMember({"auto", "logistic", "naive-bayes"}))
      ->capture_default_str();
  train->add_option("--epochs", tcfg.epochs, "Gradient epochs")->capture_default_str();
  train->add_option("--l2", tcfg.l2_weight, "Ridge weight")->capture_default_str();
  train->add_option("--replicates", tcfg.dropout.mc_replicates, "Thinned copies per epoch")
      ->capture_default_str();
  train->add_option("--smoothing", smoothing, "Naive Bayes pseudo-count")->capture_default_str();
  train->add_flag("--fit-intercept", tcfg.fit_intercept, "Train the intercept jointly");
  train->add_flag("--no-recalibrate", no_recalibrate, "Keep the trained intercept");

  // eval
  DataArgs eval_data;
  eval_data.n = 100000;
  std::string clf_path;
  int eval_replicates = 10;
  auto *eval = app.add_subcommand("eval", "Error of a saved classifier");
  add_data_options(eval, eval_data);
  eval->add_option("--classifier", clf_path, "Classifier JSON")->required();
  eval->add_option("--n", eval_data.n, "Sampled test documents")->capture_default_str();
  eval->add_option("--replicates", eval_replicates, "Thinned copies for the dropout error")
      ->capture_default_str();

  // curves
  CurveSpec cspec(build_synthetic_model());
  auto *curves = app.add_subcommand("curves", "Learning curves over (n, delta) as CSV");
  curves->add_option("--n-grid", cspec.n_grid, "Training sizes")->capture_default_str();
  curves->add_option("--delta-grid", cspec.delta_grid, "Dropout rates (1 = naive Bayes)")
      ->capture_default_str();
  curves->add_option("--trials", cspec.trials, "Trials per cell")->capture_default_str();
  curves->add_option("--test-size", cspec.test_size, "Test documents per trial")
      ->capture_default_str();
  curves->add_option("--epochs", cspec.train_cfg.epochs, "Gradient epochs")->capture_default_str();
  curves->add_option("--replicates", cspec.train_cfg.dropout.mc_replicates,
                     "Thinned copies per epoch")
      ->capture_default_str();
  curves->add_option("--smoothing", cspec.nb_smoothing, "Naive Bayes pseudo-count")
      ->capture_default_str();
  curves->add_flag("--record-time", cspec.record_time, "Store measured training times");

  // verify
  std::string suite = "all";
  auto *verify = app.add_subcommand("verify", "Monte Carlo and numeric checks of the theory");
  std::vector<std::string> suite_names = verify_suites();
  suite_names.push_back("all");
  verify->add_option("--suite", suite, "Suite name")
      ->check(CLI::IsMember(suite_names))
      ->capture_default_str();

  // demo-influence
  InfluenceConfig icfg;
  auto *demo = app.add_subcommand("demo-influence", "Two-cluster influence demo (2 words)");
  demo->add_option("--n", icfg.n, "Training documents")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_option("--length", icfg.doc_length, "Expected document length")->capture_default_str();
  demo->add_option("--blue", icfg.blue_word1, "Class-0 share of word 1")->capture_default_str();
  demo->add_option("--common-red", icfg.common_red_word1, "Common class-1 share of word 1")
      ->capture_default_str();
  demo->add_option("--rare-red", icfg.rare_red_word1, "Rare class-1 share of word 1")
      ->capture_default_str();
  demo->add_option("--epochs", icfg.train.epochs, "Gradient epochs")->capture_default_str();
  demo->add_option("--rare-fraction", icfg.rare_fraction, "Share of the rare class-1 topic")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    if (code == 0) {
      return kExitOk;
    }
    err << app.help();
    return kExitInvalid;
  }

  Output output(g.out, out);
  try {
    if (*sample) {
      const GenerativeSampler sampler = resolve_model(g.model);
      const auto docs = sample_documents(sampler, static_cast<std::size_t>(sample_n),
                                         derive_seed(g.seed, {kSampleStream}));
      Json j = documents_to_json(docs, sampler.vocab_size());
      j["header"] = header("sample", run_config(app, *sample), g.seed);
      output.primary("documents.json", dump_json(j));
    } else if (*train) {
      const Dataset data = load_data(train_data, g, true);
      LinearClassifier clf;
      const bool nb = train_kind == "naive-bayes" || (train_kind == "auto" && g.delta == 1.0);
      if (nb) {
        clf = train_naive_bayes(data, smoothing);
      } else {
        if (g.delta == 1.0) {
          throw InvalidArgument("logistic regression needs --delta < 1");
        }
        tcfg.dropout.delta = g.delta;
        tcfg.seed = g.seed;
        clf = train_logistic_dropout(data, tcfg);
      }
      if (!no_recalibrate) {
        clf = recalibrate_intercept(clf, data);
      }
      Json meta = header("train", run_config(app, *train), g.seed);
      meta["kind"] = nb ? "naive-bayes" : "logistic";
      meta["train_error"] = evaluate_error(clf, data).error;
      output.primary("classifier.json", dump_json(classifier_to_json(clf, meta)));
    } else if (*eval) {
      const LinearClassifier clf = classifier_from_json(read_json_file(clf_path));
      const Dataset data = load_data(eval_data, g, false);
      if (clf.weights.size() != data.dims()) {
        throw InvalidArgument("classifier and data dimensions differ");
      }
      Json j{{"header", header("eval", run_config(app, *eval), g.seed)},
             {"original", error_json(evaluate_error(clf, data))}};
      if (g.delta > 0.0) {
        Rng rng = Rng::stream(g.seed, {kEvalStream, 1});
        j["dropout"] = error_json(evaluate_dropout_error(clf, data, g.delta, eval_replicates, rng));
      }
      output.primary("eval.json", dump_json(j));
    } else if (*curves) {
      cspec.sampler = resolve_model(g.model);
      cspec.master_seed = g.seed;
      const Json hdr = header("curves", run_config(app, *curves), g.seed);
      const CurveResult result = run_learning_curves(cspec, g.threads);
      std::string provenance = dump_json(hdr, -1);
      provenance.pop_back();
      output.primary("curves.csv", curves_csv(result, provenance));
      Json cells = Json::array();
      for (const auto &c : result.summary()) {
        cells.push_back({{"n", c.n}, {"delta", c.delta}, {"trials", c.count},
                         {"test_error", {{"mean", c.test_error.mean}, {"se", c.test_error.se}}},
                         {"train_error", {{"mean", c.train_error.mean}, {"se", c.train_error.se}}}});
      }
      Json failures = Json::array();
      for (const auto &r : result.records) {
        if (!r.failure.empty()) {
          failures.push_back({{"n", r.n}, {"delta", r.delta}, {"trial", r.trial}, {"error", r.failure}});
        }
      }
      output.secondary("summary.json",
                       dump_json({{"header", hdr}, {"cells", cells}, {"failures", failures}}));
    } else if (*verify) {
      VerifyOptions vo{g.seed, g.mc, g.threads};
      Json report = run_verify_suite(suite, vo);
      Json j{{"header", header("verify", run_config(app, *verify), g.seed)}};
      j.update(report);
      output.primary("verify.json", dump_json(j));
      if (!report["passed"].get<bool>()) {
        err << "verification failed\n";
        return kExitVerifyFailed;
      }
    } else if (*demo) {
      icfg.delta = delta_opt->count() > 0 ? g.delta : 0.75;
      icfg.seed = g.seed;
      const auto r = run_influence_demo(icfg);
      Json j{{"header", header("demo-influence", run_config(app, *demo), g.seed)},
             {"delta", icfg.delta},
             {"model", topic_model_to_json(icfg.model())},
             {"plain", classifier_line(r.plain)},
             {"dropout", classifier_line(r.dropout)},
             {"normal_angle_deg", r.normal_angle_deg},
             {"plain_errors", cluster_json(r.plain_errors)},
             {"dropout_errors", cluster_json(r.dropout_errors)},
             {"posterior_field_gap", r.posterior_field_gap}};
      output.primary("influence.json", dump_json(j));
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

} // namespace droplab
