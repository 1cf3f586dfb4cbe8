// Command-line front end: dataset generation, estimator runs, FOCI selection,
// and the three training objectives, each emitting deterministic result files
// plus one manifest per run.
//
// Exit codes: 0 success, 2 usage error, 3 degenerate-input error, 4 numeric
// error.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffoci/datasets.hpp"
#include "diffoci/errors.hpp"
#include "diffoci/eval.hpp"
#include "diffoci/foci.hpp"
#include "diffoci/rank_core.hpp"
#include "diffoci/report_io.hpp"
#include "diffoci/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace diffoci;

struct ManifestBuilder {
  json doc;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  ManifestBuilder(const std::string& command, int argc, char** argv) {
    doc["command"] = command;
    json args = json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    doc["argv"] = args;
    doc["input_hashes"] = json::object();
    doc["outputs"] = json::array();
    doc["warnings"] = json::array();
  }

  void input(const std::string& path) { doc["input_hashes"][path] = hash_hex(fnv1a64_file(path)); }
  void output(const std::string& path) { doc["outputs"].push_back(path); }
  void warn(const std::string& msg) { doc["warnings"].push_back(msg); }

  void write(const std::string& path) {
    doc["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(path, doc);
  }
};

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : split_csv_list(s)) out.push_back(std::stoi(tok));
  return out;
}

const char* kGenKinds = "toy1, toy2, toy3, foci_toy, functional, spurious, fairness";

Dataset generate(const std::string& kind, uint64_t seed) {
  if (kind == "functional") return gen_functional(seed);
  if (kind == "spurious") return gen_spurious(seed);
  if (kind == "fairness") return gen_fairness(seed);
  try {
    return gen_toy(toy_kind_from_string(kind), seed);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("unknown kind '" + kind + "'; valid kinds: " + kGenKinds);
  }
}

// ---- gen --------------------------------------------------------------------

int cmd_gen(CLI::App& app, int argc, char** argv) {
  std::string kind;
  uint64_t seed = 0;
  std::string out_dir = ".";
  std::string name;
  auto* sub = app.add_subcommand("gen", "generate a synthetic dataset CSV");
  sub->add_option("--kind", kind, std::string("dataset kind: ") + kGenKinds)->required();
  sub->add_option("--seed", seed, "RNG seed")->required();
  sub->add_option("--out-dir", out_dir, "output directory (default .)");
  sub->add_option("--name", name, "output file name (default <kind>_seed<seed>.csv)");

  app.parse(argc, argv);
  ManifestBuilder manifest("gen", argc, argv);

  Dataset ds = generate(kind, seed);
  fs::create_directories(out_dir);
  const std::string file =
      name.empty() ? kind + "_seed" + std::to_string(seed) + ".csv" : name;
  const std::string path = (fs::path(out_dir) / file).string();
  write_csv(path, ds);
  manifest.output(path);
  manifest.doc["kind"] = kind;
  manifest.doc["seed"] = seed;
  manifest.doc["rows"] = ds.n();
  manifest.doc["feature_columns"] = ds.p();
  manifest.write((fs::path(out_dir) / (file + ".manifest.json")).string());
  std::cout << path << "\n";
  return 0;
}

// ---- estimate -----------------------------------------------------------------

int cmd_estimate(CLI::App& app, int argc, char** argv) {
  std::string input, target, which;
  std::string z_cols_arg, cond_cols_arg;
  uint64_t seed = 0;
  int repeat = 1;
  std::string out_dir = ".";
  auto* sub = app.add_subcommand("estimate", "evaluate xi_n or t_n on a CSV");
  sub->add_option("--input", input, "input CSV file")->required();
  sub->add_option("--target", target, "response column name")->required();
  sub->add_option("--which", which, "estimator: xi or t")->required();
  sub->add_option("--z-cols", z_cols_arg,
                  "predictor column names (comma separated; default: all non-target)");
  sub->add_option("--cond-cols", cond_cols_arg, "conditioning column names (t only)");
  sub->add_option("--seed", seed, "RNG seed");
  sub->add_option("--repeat", repeat, "run seeds seed..seed+N-1 and summarize")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", out_dir, "manifest/summary directory (default .)");

  app.parse(argc, argv);
  if (which != "xi" && which != "t")
    throw InvalidArgument("--which must be 'xi' or 't'");

  ManifestBuilder manifest("estimate", argc, argv);
  manifest.input(input);

  CsvOptions opts;
  opts.target_column = target;
  opts.seed = seed;
  Dataset ds = load_csv(input, opts);

  std::vector<std::string> z_names = split_csv_list(z_cols_arg);
  const std::vector<std::string> cond_names = split_csv_list(cond_cols_arg);
  auto col_index = [&](const std::string& name) {
    for (int j = 0; j < ds.p(); ++j)
      if (ds.X.column_names[j] == name) return j;
    throw MissingColumn("estimate: column not found: " + name);
  };
  std::vector<int> cond_idx;
  for (const auto& nm : cond_names) cond_idx.push_back(col_index(nm));
  std::vector<int> z_idx;
  if (z_names.empty()) {
    std::vector<char> is_cond(ds.p(), 0);
    for (int j : cond_idx) is_cond[j] = 1;
    for (int j = 0; j < ds.p(); ++j)
      if (!is_cond[j]) z_idx.push_back(j);
  } else {
    for (const auto& nm : z_names) z_idx.push_back(col_index(nm));
  }
  if (z_idx.empty()) throw InvalidArgument("estimate: no predictor columns");
  if (which == "xi" && z_idx.size() != 1)
    throw InvalidArgument("estimate: xi takes exactly one predictor column");

  std::vector<double> values;
  for (int rep = 0; rep < repeat; ++rep) {
    const uint64_t s = seed + static_cast<uint64_t>(rep);
    double v = 0.0;
    if (which == "xi") {
      v = xi_n(ds.X.values.col(z_idx[0]), ds.y, s);
    } else {
      const DataMatrix z = ds.X.select_columns(z_idx);
      if (cond_idx.empty()) {
        v = t_n(ds.y, z.values, nullptr, s);
      } else {
        const DataMatrix x = ds.X.select_columns(cond_idx);
        v = t_n(ds.y, z.values, &x.values, s);
      }
    }
    values.push_back(v);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    std::cout << buf << "\n";
  }

  fs::create_directories(out_dir);
  if (repeat > 1) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= values.size();
    json summary;
    summary["values"] = values;
    summary["mean"] = mean;
    summary["std"] = std::sqrt(var);
    const std::string spath = (fs::path(out_dir) / "estimate_summary.json").string();
    write_json(spath, summary);
    manifest.output(spath);
  }
  manifest.doc["which"] = which;
  manifest.doc["seed"] = seed;
  manifest.doc["values"] = values;
  manifest.write((fs::path(out_dir) / "estimate.manifest.json").string());
  return 0;
}

// ---- foci ---------------------------------------------------------------------

int cmd_foci(CLI::App& app, int argc, char** argv) {
  std::string input, target, expect_arg;
  uint64_t seed = 0;
  int repeat = 1;
  int max_k = -1;
  std::string out_dir = ".";
  auto* sub = app.add_subcommand("foci", "step-wise feature selection");
  sub->add_option("--input", input, "input CSV file")->required();
  sub->add_option("--target", target, "response column name")->required();
  sub->add_option("--seed", seed, "RNG seed");
  sub->add_option("--max-k", max_k, "cap on selected features (default min(p, n-1))");
  sub->add_option("--repeat", repeat, "run seeds seed..seed+N-1 and summarize")
      ->check(CLI::PositiveNumber);
  sub->add_option("--expect-subset", expect_arg,
                  "comma-separated indices; summary reports the fraction of runs whose "
                  "selected set equals this set");
  sub->add_option("--out-dir", out_dir, "output directory (default .)");

  app.parse(argc, argv);
  ManifestBuilder manifest("foci", argc, argv);
  manifest.input(input);

  CsvOptions opts;
  opts.target_column = target;
  opts.seed = seed;
  Dataset ds = load_csv(input, opts);

  std::optional<std::vector<int>> expect;
  if (!expect_arg.empty()) {
    std::vector<int> e = parse_int_list(expect_arg);
    std::sort(e.begin(), e.end());
    expect = e;
  }

  fs::create_directories(out_dir);
  int successes = 0;
  std::vector<double> sizes;
  for (int rep = 0; rep < repeat; ++rep) {
    const uint64_t s = seed + static_cast<uint64_t>(rep);
    SelectionResult sel =
        foci_select(ds.y, ds.X, max_k >= 0 ? std::optional<int>(max_k) : std::nullopt, s);
    json j = to_json(sel);
    j["seed"] = s;
    std::vector<std::string> names;
    for (int idx : sel.selected) names.push_back(ds.X.column_names[idx]);
    j["selected_names"] = names;
    const std::string file = repeat > 1 ? "seed_" + std::to_string(s) + "_selection.json"
                                        : "selection.json";
    const std::string path = (fs::path(out_dir) / file).string();
    write_json(path, j);
    manifest.output(path);
    sizes.push_back(static_cast<double>(sel.selected.size()));
    if (expect) {
      std::vector<int> got = sel.selected;
      std::sort(got.begin(), got.end());
      if (got == *expect) ++successes;
    }
    std::cout << j["selected"].dump() << " (" << to_string(sel.stopped_reason) << ")\n";
  }

  if (repeat > 1) {
    double mean = 0.0;
    for (double v : sizes) mean += v;
    mean /= sizes.size();
    double var = 0.0;
    for (double v : sizes) var += (v - mean) * (v - mean);
    var /= sizes.size();
    json summary;
    summary["runs"] = repeat;
    summary["selected_count_mean"] = mean;
    summary["selected_count_std"] = std::sqrt(var);
    if (expect) {
      summary["expect_subset"] = *expect;
      summary["success_fraction"] = static_cast<double>(successes) / repeat;
    }
    const std::string spath = (fs::path(out_dir) / "foci_summary.json").string();
    write_json(spath, summary);
    manifest.output(spath);
    std::cout << "success_fraction: "
              << (expect ? std::to_string(static_cast<double>(successes) / repeat) : "n/a")
              << "\n";
  }
  manifest.write((fs::path(out_dir) / "foci.manifest.json").string());
  return 0;
}

// ---- train --------------------------------------------------------------------

json eval_df1(const TrainReport& rep, const Dataset& ds, const ExperimentConfig& cfg) {
  // Scores the run with ridge on the learned representation: the selected raw
  // columns for vec, the transformed features for the MLP.
  const std::vector<int> train = ds.indices_of(Split::kTrain);
  json out;
  Mat feats;
  std::string model_spec;
  if (cfg.param_kind == ParamKind::kVec) {
    if (rep.selected.empty()) {
      out["note"] = "empty selection; baseline only";
      model_spec = "ridge on selected columns (none)";
    } else {
      feats = ds.X.select_columns(rep.selected).values;
      model_spec = "ridge on " + std::to_string(rep.selected.size()) + " selected columns";
    }
  } else {
    feats = mlp_apply(rep.mlp(), ds.X.values);
    model_spec = "ridge on MLP features";
  }

  double train_mean = 0.0;
  std::vector<double> y_train;
  for (int i : train) y_train.push_back(ds.y[i]);
  for (double v : y_train) train_mean += v;
  train_mean /= static_cast<double>(y_train.size());

  RidgeModel ridge;
  bool have_model = feats.rows > 0;
  if (have_model) {
    Mat ftrain(static_cast<int>(train.size()), feats.cols);
    for (size_t k = 0; k < train.size(); ++k)
      for (int j = 0; j < feats.cols; ++j)
        ftrain.at(static_cast<int>(k), j) = feats.at(train[k], j);
    ridge = fit_ridge(ftrain, y_train, 1.0);
  }

  out["model"] = model_spec;
  out["baseline"] = "mean predictor";
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::vector<int> idx = ds.indices_of(s);
    if (idx.empty()) continue;
    std::vector<double> truth;
    for (int i : idx) truth.push_back(ds.y[i]);
    json entry;
    entry["baseline_mse"] = mean_baseline_mse(train_mean, truth);
    if (have_model) {
      Mat fx(static_cast<int>(idx.size()), feats.cols);
      for (size_t k = 0; k < idx.size(); ++k)
        for (int j = 0; j < feats.cols; ++j)
          fx.at(static_cast<int>(k), j) = feats.at(idx[k], j);
      entry["mse"] = metrics(predict(ridge, fx), truth).mse;
    }
    const char* names[] = {"train", "val", "test"};
    out[names[static_cast<int>(s)]] = entry;
  }
  return out;
}

json eval_df2(const TrainReport& rep, const Dataset& ds) {
  const MlpParam mlp = rep.mlp();
  const Mat logits = mlp_apply(mlp, ds.X.values);
  json out;
  out["model"] = "trained classifier";
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::vector<int> idx = ds.indices_of(s);
    if (idx.empty()) continue;
    std::vector<double> prob, truth;
    std::vector<int> grp;
    for (int i : idx) {
      prob.push_back(1.0 / (1.0 + std::exp(-logits.a[i])));
      truth.push_back(ds.y[i]);
      grp.push_back((*ds.groups)[i]);
    }
    const char* names[] = {"train", "val", "test"};
    out[names[static_cast<int>(s)]] = to_json(metrics(prob, truth, &grp));
  }
  return out;
}

json probe_report(const Mat& feats, const Dataset& ds, const std::vector<double>& labels,
                  const std::string& what) {
  const std::vector<int> train = ds.indices_of(Split::kTrain);
  Mat ftrain(static_cast<int>(train.size()), feats.cols);
  std::vector<double> ltrain;
  for (size_t k = 0; k < train.size(); ++k) {
    for (int j = 0; j < feats.cols; ++j)
      ftrain.at(static_cast<int>(k), j) = feats.at(train[k], j);
    ltrain.push_back(labels[train[k]]);
  }
  const LogisticModel probe = fit_logistic(ftrain, ltrain);
  json out;
  out["what"] = what;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::vector<int> idx = ds.indices_of(s);
    if (idx.empty()) continue;
    Mat fx(static_cast<int>(idx.size()), feats.cols);
    std::vector<double> truth;
    for (size_t k = 0; k < idx.size(); ++k) {
      for (int j = 0; j < feats.cols; ++j)
        fx.at(static_cast<int>(k), j) = feats.at(idx[k], j);
      truth.push_back(labels[idx[k]]);
    }
    const char* names[] = {"train", "val", "test"};
    out[names[static_cast<int>(s)]] = metrics(predict_proba(probe, fx), truth).accuracy;
  }
  return out;
}

json eval_df3(const TrainReport& rep, const Dataset& ds, const ExperimentConfig& cfg) {
  // Probe protocol: logistic probes on the learned features for the response
  // and for the (binary) sensitive attribute.
  Mat feats = cfg.param_kind == ParamKind::kVec
                  ? vec_apply(rep.vec(), ds.X.values)
                  : mlp_apply(rep.mlp(), ds.X.values);
  json out;
  out["model"] = "logistic probes on learned features";
  bool y_binary = true;
  for (double v : ds.y)
    if (v != 0.0 && v != 1.0) y_binary = false;
  if (y_binary) out["y_probe"] = probe_report(feats, ds, ds.y, "response");
  const std::vector<double> s_col = ds.sensitive->values.col(0);
  bool s_binary = true;
  for (double v : s_col)
    if (v != 0.0 && v != 1.0) s_binary = false;
  if (s_binary) out["sensitive_probe"] = probe_report(feats, ds, s_col, "sensitive");
  return out;
}

int cmd_train(CLI::App& app, int argc, char** argv) {
  std::string input, target, objective_arg = "df1", param_arg = "vec";
  std::string group_col, split_col, sensitive_arg, weighting_arg = "erm", optimizer_arg;
  std::string hidden_arg;
  ExperimentConfig cfg;
  uint64_t seed = 0;
  int repeat = 1;
  bool no_standardize = false;
  bool no_final_clip = false;
  std::string out_dir = ".";

  auto* sub = app.add_subcommand("train", "run a difFOCI training objective");
  sub->add_option("--input", input, "input CSV file")->required();
  sub->add_option("--target", target, "response column name")->required();
  sub->add_option("--objective", objective_arg, "df1 | df2 | df3");
  sub->add_option("--param", param_arg, "vec | mlp");
  sub->add_option("--group-col", group_col, "group attribute column (df2)");
  sub->add_option("--sensitive-cols", sensitive_arg, "sensitive columns (df3)");
  sub->add_option("--split-col", split_col, "column with split tags 0/1/2");
  sub->add_option("--seed", seed, "RNG seed");
  sub->add_option("--beta", cfg.beta, "softmax temperature (default 5)");
  sub->add_option("--upsilon", cfg.upsilon, "clipping cutoff (default 0.1)");
  sub->add_option("--lr", cfg.gamma, "learning rate");
  sub->add_option("--weight-decay", cfg.weight_decay, "weight decay");
  sub->add_option("--batch", cfg.batch_size, "minibatch size (0 = full batch)");
  sub->add_option("--epochs", cfg.epochs, "training epochs");
  sub->add_option("--eta", cfg.eta, "df2 regularization strength");
  sub->add_option("--weighting", weighting_arg, "df2 weighting: erm | gdro");
  sub->add_option("--optimizer", optimizer_arg, "adam | sgd (default per objective)");
  sub->add_option("--hidden", hidden_arg, "MLP hidden widths, e.g. 20,20");
  sub->add_flag("--no-standardize", no_standardize, "skip train-split standardization");
  sub->add_flag("--no-final-clip", no_final_clip, "df2: skip final all-parameter clipping");
  sub->add_option("--repeat", repeat, "run seeds seed..seed+N-1")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", out_dir, "output directory (default .)");

  app.parse(argc, argv);
  ManifestBuilder manifest("train", argc, argv);
  manifest.input(input);

  if (objective_arg == "df1") cfg.objective = Objective::kDf1;
  else if (objective_arg == "df2") cfg.objective = Objective::kDf2;
  else if (objective_arg == "df3") cfg.objective = Objective::kDf3;
  else throw InvalidArgument("--objective must be df1, df2, or df3");
  if (param_arg == "vec") cfg.param_kind = ParamKind::kVec;
  else if (param_arg == "mlp") cfg.param_kind = ParamKind::kMlp;
  else throw InvalidArgument("--param must be vec or mlp");
  if (cfg.objective == Objective::kDf2) cfg.param_kind = ParamKind::kMlp;
  if (weighting_arg == "erm") cfg.weighting = Weighting::kErm;
  else if (weighting_arg == "gdro") cfg.weighting = Weighting::kGdro;
  else throw InvalidArgument("--weighting must be erm or gdro");
  if (!optimizer_arg.empty()) {
    if (optimizer_arg == "adam") cfg.optimizer = OptimKind::kAdam;
    else if (optimizer_arg == "sgd") cfg.optimizer = OptimKind::kSgd;
    else throw InvalidArgument("--optimizer must be adam or sgd");
  }
  if (!hidden_arg.empty()) cfg.hidden = parse_int_list(hidden_arg);
  cfg.clip_final_all = !no_final_clip;

  CsvOptions opts;
  opts.target_column = target;
  if (!group_col.empty()) opts.group_column = group_col;
  if (!sensitive_arg.empty()) opts.sensitive_columns = split_csv_list(sensitive_arg);
  if (!split_col.empty()) opts.split_column = split_col;
  opts.seed = seed;
  Dataset ds = load_csv(input, opts);

  if (cfg.objective == Objective::kDf2 && !ds.groups)
    throw InvalidArgument("df2 requires --group-col");
  if (cfg.objective == Objective::kDf3 && !ds.sensitive)
    throw InvalidArgument("df3 requires --sensitive-cols");

  if (!no_standardize) {
    std::vector<std::string> warnings;
    ds = standardize(ds, &warnings);
    for (const std::string& w : warnings) manifest.warn(w);
  }

  fs::create_directories(out_dir);
  const std::vector<int> train_rows = ds.indices_of(Split::kTrain);
  if (train_rows.size() < 2) throw InsufficientSamples("train split too small");
  const Dataset train_ds = ds.subset(train_rows);

  for (int rep_i = 0; rep_i < repeat; ++rep_i) {
    cfg.seed = seed + static_cast<uint64_t>(rep_i);
    TrainReport report;
    switch (cfg.objective) {
      case Objective::kDf1:
        report = train_df1(train_ds.y, train_ds.X, cfg);
        break;
      case Objective::kDf2:
        report = train_df2(train_ds.y, train_ds.X, *train_ds.groups, cfg);
        break;
      case Objective::kDf3:
        report = train_df3(train_ds.y, train_ds.X, *train_ds.sensitive, cfg);
        break;
    }

    json eval;
    switch (cfg.objective) {
      case Objective::kDf1:
        eval = eval_df1(report, ds, cfg);
        break;
      case Objective::kDf2:
        eval = eval_df2(report, ds);
        break;
      case Objective::kDf3:
        eval = eval_df3(report, ds, cfg);
        break;
    }

    const std::string prefix = repeat > 1 ? "seed_" + std::to_string(cfg.seed) + "_" : "";
    const std::string rpath = (fs::path(out_dir) / (prefix + "report.json")).string();
    const std::string epath = (fs::path(out_dir) / (prefix + "eval.json")).string();
    const std::string ppath = (fs::path(out_dir) / (prefix + "params.txt")).string();
    write_json(rpath, report_to_json(report));
    write_json(epath, eval);
    save_params(ppath, report.final_params);
    manifest.output(rpath);
    manifest.output(epath);
    manifest.output(ppath);
    std::cout << "seed " << cfg.seed << ": final objective "
              << (report.epoch_objective.empty() ? 0.0 : report.epoch_objective.back())
              << ", skipped batches " << report.skipped_batches << "\n";
  }

  manifest.write((fs::path(out_dir) / "train.manifest.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("DIFFOCI_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }

  CLI::App app{"rank-based dependence estimators, FOCI, and difFOCI training"};
  app.require_subcommand(1);

  std::string which;
  if (argc >= 2) which = argv[1];

  try {
    if (which == "gen") return cmd_gen(app, argc, argv);
    if (which == "estimate") return cmd_estimate(app, argc, argv);
    if (which == "foci") return cmd_foci(app, argc, argv);
    if (which == "train") return cmd_train(app, argc, argv);
    // No recognized subcommand: let CLI11 print usage/help.
    app.parse(argc, argv);
    std::cerr << "unknown subcommand\n";
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const MissingColumn& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const NonNumericColumn& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InsufficientSamples& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateResponse& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateDenominator& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return 3;
  } catch (const EmptyAfterFiltering& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const DoubleBackward& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const NonScalarLoss& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
