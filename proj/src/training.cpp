#include "diffoci/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "diffoci/errors.hpp"
#include "diffoci/rank_core.hpp"
#include "diffoci/rng.hpp"
#include "diffoci/t_n_beta.hpp"

namespace diffoci {

std::string to_string(Objective o) {
  switch (o) {
    case Objective::kDf1: return "df1";
    case Objective::kDf2: return "df2";
    case Objective::kDf3: return "df3";
  }
  return "unknown";
}

std::string to_string(ParamKind k) { return k == ParamKind::kVec ? "vec" : "mlp"; }

std::string to_string(Weighting w) { return w == Weighting::kErm ? "erm" : "gdro"; }

OptimKind ExperimentConfig::effective_optimizer() const {
  if (optimizer) return *optimizer;
  return objective == Objective::kDf2 ? OptimKind::kSgd : OptimKind::kAdam;
}

void ExperimentConfig::validate() const {
  if (beta <= 0.0) throw InvalidArgument("config: beta must be positive");
  if (upsilon < 0.0) throw InvalidArgument("config: upsilon must be >= 0");
  if (batch_size != 0 && batch_size < 2)
    throw InvalidArgument("config: batch_size must be 0 (full) or >= 2");
  if (epochs < 1) throw InvalidArgument("config: epochs must be >= 1");
  if (gamma <= 0.0) throw InvalidArgument("config: learning rate must be positive");
  if (weight_decay < 0.0) throw InvalidArgument("config: weight_decay must be >= 0");
  if (eta < 0.0) throw InvalidArgument("config: eta must be >= 0");
}

std::vector<int> epoch_shuffle(uint64_t seed, int epoch, int n) {
  Rng rng(derive_seed(seed, {kTagShuffle, static_cast<uint64_t>(epoch)}));
  return rng.permutation(n);
}

std::vector<std::vector<int>> make_batches(const std::vector<int>& order, int batch) {
  const int n = static_cast<int>(order.size());
  const int b = batch == 0 ? n : batch;
  std::vector<std::vector<int>> out;
  for (int start = 0; start < n; start += b) {
    const int end = std::min(n, start + b);
    if (end - start < 2) break;  // drop a 1-row tail
    out.emplace_back(order.begin() + start, order.begin() + end);
  }
  return out;
}

uint64_t batch_rank_seed(uint64_t seed, int epoch, int batch_index) {
  return derive_seed(seed, {kTagBatchRanks, static_cast<uint64_t>(epoch),
                            static_cast<uint64_t>(batch_index)});
}

VecParam TrainReport::vec() const {
  for (const NamedTensor& t : final_params)
    if (t.name == "theta") {
      VecParam v;
      v.theta = t.value.a;
      return v;
    }
  throw InvalidArgument("TrainReport: no theta tensor");
}

MlpParam TrainReport::mlp() const {
  MlpParam m;
  std::map<int, Mat> ws, bs;
  for (const NamedTensor& t : final_params) {
    if (t.name.rfind("w", 0) == 0) ws[std::stoi(t.name.substr(1))] = t.value;
    if (t.name.rfind("b", 0) == 0) bs[std::stoi(t.name.substr(1))] = t.value;
  }
  if (ws.empty()) throw InvalidArgument("TrainReport: no MLP tensors");
  m.dims.push_back(ws.begin()->second.rows);
  for (auto& [k, w] : ws) {
    m.dims.push_back(w.cols);
    m.weights.push_back(w);
  }
  for (auto& [k, b] : bs) m.biases.push_back(b);
  return m;
}

namespace {

struct BatchView {
  Mat x;
  std::vector<double> y;
  std::vector<int> g;
  Mat xs;
};

BatchView gather(const std::vector<int>& rows, const Mat& X, const std::vector<double>& y,
                 const std::vector<int>* g, const Mat* xs) {
  BatchView b;
  b.x = Mat(static_cast<int>(rows.size()), X.cols);
  b.y.resize(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    const double* src = X.row(rows[k]);
    double* dst = b.x.row(static_cast<int>(k));
    for (int j = 0; j < X.cols; ++j) dst[j] = src[j];
    b.y[k] = y[rows[k]];
  }
  if (g) {
    b.g.resize(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) b.g[k] = (*g)[rows[k]];
  }
  if (xs) {
    b.xs = Mat(static_cast<int>(rows.size()), xs->cols);
    for (size_t k = 0; k < rows.size(); ++k) {
      const double* src = xs->row(rows[k]);
      double* dst = b.xs.row(static_cast<int>(k));
      for (int j = 0; j < xs->cols; ++j) dst[j] = src[j];
    }
  }
  return b;
}

// Shared state for a vec or MLP parameterization during one run.
struct Params {
  ParamKind kind;
  VecParam vec;
  MlpParam mlp;

  std::vector<Mat> storage;  // canonical values: theta, or w0,b0,w1,b1,...

  static Params init(ParamKind kind, int input_width, const std::vector<int>& hidden,
                     uint64_t seed) {
    Params p;
    p.kind = kind;
    if (kind == ParamKind::kVec) {
      p.vec = VecParam::init(input_width, seed);
      p.storage.push_back(Mat::from_vector(p.vec.theta));
    } else {
      p.mlp = MlpParam::init(default_mlp_dims(input_width, hidden), seed);
      for (int k = 0; k < p.mlp.layer_count(); ++k) {
        p.storage.push_back(p.mlp.weights[k]);
        p.storage.push_back(p.mlp.biases[k]);
      }
    }
    return p;
  }

  void sync_model() {
    if (kind == ParamKind::kVec) {
      vec.theta = storage[0].a;
    } else {
      for (int k = 0; k < mlp.layer_count(); ++k) {
        mlp.weights[k] = storage[2 * k];
        mlp.biases[k] = storage[2 * k + 1];
      }
    }
  }

  std::vector<Mat*> pointers() {
    std::vector<Mat*> out;
    for (Mat& m : storage) out.push_back(&m);
    return out;
  }

  std::vector<NamedTensor> named() const {
    std::vector<NamedTensor> out;
    if (kind == ParamKind::kVec) {
      out.push_back({"theta", storage[0]});
    } else {
      for (size_t k = 0; k < storage.size(); k += 2) {
        out.push_back({"w" + std::to_string(k / 2), storage[k]});
        out.push_back({"b" + std::to_string(k / 2), storage[k + 1]});
      }
    }
    return out;
  }
};

struct ForwardIds {
  TensorId out = -1;
  TensorId features = -1;
  std::vector<TensorId> leaves;
};

ForwardIds forward_params(Tape& tape, Params& p, const Mat& xb) {
  ForwardIds f;
  if (p.kind == ParamKind::kVec) {
    VecForward vf = vec_forward(tape, p.vec, xb);
    f.out = vf.out;
    f.features = vf.out;
    f.leaves = {vf.theta};
  } else {
    MlpForward mf = mlp_forward(tape, p.mlp, xb);
    f.out = mf.out;
    f.features = mf.features;
    for (size_t k = 0; k < mf.weight_ids.size(); ++k) {
      f.leaves.push_back(mf.weight_ids[k]);
      f.leaves.push_back(mf.bias_ids[k]);
    }
  }
  return f;
}

void finalize_vec(TrainReport& rep, const Params& p, double upsilon) {
  rep.final_theta = p.storage[0].a;
  rep.clipped_theta = clip_params(rep.final_theta, upsilon);
  for (size_t j = 0; j < rep.clipped_theta.size(); ++j)
    if (rep.clipped_theta[j] != 0.0) rep.selected.push_back(static_cast<int>(j));
}

}  // namespace

TrainReport train_df1(const std::vector<double>& y, const DataMatrix& X,
                      const ExperimentConfig& cfg) {
  if (cfg.objective != Objective::kDf1) throw InvalidArgument("train_df1: objective must be dF1");
  cfg.validate();
  if (static_cast<int>(y.size()) != X.n()) throw InvalidArgument("train_df1: y length mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  Params params = Params::init(cfg.param_kind, X.p(), cfg.hidden, cfg.seed);
  OptimizerState opt =
      OptimizerState::make(cfg.effective_optimizer(), cfg.gamma, cfg.weight_decay);

  TrainReport rep;
  rep.config = cfg;
  const int n = X.n();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = epoch_shuffle(cfg.seed, epoch, n);
    const auto batches = make_batches(order, cfg.batch_size);
    double obj_sum = 0.0;
    int obj_count = 0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      BatchView b = gather(batches[bi], X.values, y, nullptr, nullptr);
      if (is_constant(b.y)) {
        ++rep.skipped_batches;
        continue;
      }
      const RankVector ranks =
          compute_ranks(b.y, batch_rank_seed(cfg.seed, epoch, static_cast<int>(bi)));

      Tape tape;
      params.sync_model();
      ForwardIds f = forward_params(tape, params, b.x);
      const TensorId t = t_n_beta(tape, ranks, f.out, nullptr, cfg.beta);
      const TensorId loss = tape.scale(t, -1.0);
      tape.backward(loss);

      std::vector<const Mat*> grads;
      for (TensorId leaf : f.leaves) grads.push_back(&tape.grad(leaf));
      opt.step(params.pointers(), grads);

      obj_sum += tape.value(t).scalar();
      ++obj_count;
    }
    rep.epoch_objective.push_back(obj_count > 0 ? obj_sum / obj_count : 0.0);
  }

  params.sync_model();
  rep.final_params = params.named();
  if (cfg.param_kind == ParamKind::kVec) finalize_vec(rep, params, cfg.upsilon);
  rep.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

TrainReport train_df3(const std::vector<double>& y, const DataMatrix& X,
                      const DataMatrix& Xs, const ExperimentConfig& cfg) {
  if (cfg.objective != Objective::kDf3) throw InvalidArgument("train_df3: objective must be dF3");
  cfg.validate();
  if (static_cast<int>(y.size()) != X.n()) throw InvalidArgument("train_df3: y length mismatch");
  if (Xs.n() != X.n()) throw InvalidArgument("train_df3: Xs row count mismatch");
  if (Xs.p() < 1) throw InvalidArgument("train_df3: sensitive set must be nonempty (use dF1)");
  const auto t0 = std::chrono::steady_clock::now();

  Params params = Params::init(cfg.param_kind, X.p(), cfg.hidden, cfg.seed);
  OptimizerState opt =
      OptimizerState::make(cfg.effective_optimizer(), cfg.gamma, cfg.weight_decay);

  TrainReport rep;
  rep.config = cfg;
  const int n = X.n();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = epoch_shuffle(cfg.seed, epoch, n);
    const auto batches = make_batches(order, cfg.batch_size);
    double obj_sum = 0.0;
    int obj_count = 0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      BatchView b = gather(batches[bi], X.values, y, nullptr, &Xs.values);
      const uint64_t rank_seed = batch_rank_seed(cfg.seed, epoch, static_cast<int>(bi));

      // Skip the batch when y is sample-wise a function of Xs on it (this is
      // the zero-denominator condition of the untied estimator).
      const NeighborIndex nn =
          nearest_neighbors(b.xs, derive_seed(rank_seed, {kTagNeighbor}));
      if (degenerate_given(b.y, nn)) {
        ++rep.skipped_batches;
        continue;
      }
      const RankVector ranks = compute_ranks(b.y, rank_seed);

      Tape tape;
      params.sync_model();
      ForwardIds f = forward_params(tape, params, b.x);
      const TensorId t = t_n_beta(tape, ranks, f.out, &b.xs, cfg.beta);
      const TensorId loss = tape.scale(t, -1.0);
      tape.backward(loss);

      std::vector<const Mat*> grads;
      for (TensorId leaf : f.leaves) grads.push_back(&tape.grad(leaf));
      opt.step(params.pointers(), grads);

      obj_sum += tape.value(t).scalar();
      ++obj_count;
    }
    rep.epoch_objective.push_back(obj_count > 0 ? obj_sum / obj_count : 0.0);
  }

  params.sync_model();
  rep.final_params = params.named();
  if (cfg.param_kind == ParamKind::kVec) finalize_vec(rep, params, cfg.upsilon);
  rep.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

GdroState GdroState::make(const std::vector<int>& groups) {
  GdroState s;
  s.num_groups = *std::max_element(groups.begin(), groups.end()) + 1;
  s.q.assign(static_cast<size_t>(2 * s.num_groups), 1.0 / (2.0 * s.num_groups));
  return s;
}

int GdroState::cell(double label, int group) const {
  return (label == 1.0 ? 1 : 0) * num_groups + group;
}

void GdroState::update(const std::vector<double>& cell_mean_loss,
                       const std::vector<int>& cell_count) {
  // Cells absent from the batch keep their unnormalized weight.
  for (size_t c = 0; c < q.size(); ++c)
    if (cell_count[c] > 0) q[c] *= std::exp(kStep * cell_mean_loss[c]);
  double total = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= total;
}

namespace {

double bce_loss_value(double logit, double label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::fabs(logit)));
}

}  // namespace

TrainReport train_df2(const std::vector<double>& y, const DataMatrix& X,
                      const std::vector<int>& groups, const ExperimentConfig& cfg) {
  if (cfg.objective != Objective::kDf2) throw InvalidArgument("train_df2: objective must be dF2");
  cfg.validate();
  if (cfg.param_kind != ParamKind::kMlp)
    throw InvalidArgument("train_df2: requires the MLP parameterization");
  if (static_cast<int>(y.size()) != X.n()) throw InvalidArgument("train_df2: y length mismatch");
  if (groups.size() != y.size()) throw InvalidArgument("train_df2: group length mismatch");
  for (double v : y)
    if (v != 0.0 && v != 1.0) throw InvalidArgument("train_df2: labels must be 0/1");
  for (int g : groups)
    if (g < 0) throw InvalidArgument("train_df2: group codes must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();

  // Feature extractor: input -> hidden (ReLU); scoring layer: hidden -> 1.
  const int p = X.p();
  std::vector<int> dims;
  dims.push_back(p);
  if (cfg.hidden.empty()) {
    dims.push_back(2 * p);
  } else {
    for (int h : cfg.hidden) dims.push_back(h);
  }
  dims.push_back(1);

  Params params;
  params.kind = ParamKind::kMlp;
  params.mlp = MlpParam::init(dims, cfg.seed);
  for (int k = 0; k < params.mlp.layer_count(); ++k) {
    params.storage.push_back(params.mlp.weights[k]);
    params.storage.push_back(params.mlp.biases[k]);
  }

  OptimizerState opt =
      OptimizerState::make(cfg.effective_optimizer(), cfg.gamma, cfg.weight_decay);
  GdroState gdro = GdroState::make(groups);

  TrainReport rep;
  rep.config = cfg;
  const int n = X.n();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = epoch_shuffle(cfg.seed, epoch, n);
    const auto batches = make_batches(order, cfg.batch_size);
    double obj_sum = 0.0;
    double reg_sum = 0.0;
    int obj_count = 0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      BatchView b = gather(batches[bi], X.values, y, &groups, nullptr);
      const int nb = static_cast<int>(b.y.size());

      Tape tape;
      params.sync_model();
      ForwardIds f = forward_params(tape, params, b.x);

      // Per-sample weights: 1/nb under erm; q_cell / cell-count under gdro,
      // with the multiplicative update applied before weighting.
      std::vector<double> weights(nb, 1.0 / nb);
      if (cfg.weighting == Weighting::kGdro) {
        const Mat& logits = tape.value(f.out);
        std::vector<double> cell_loss(gdro.q.size(), 0.0);
        std::vector<int> cell_count(gdro.q.size(), 0);
        for (int i = 0; i < nb; ++i) {
          const int c = gdro.cell(b.y[i], b.g[i]);
          cell_loss[c] += bce_loss_value(logits.a[i], b.y[i]);
          cell_count[c] += 1;
        }
        for (size_t c = 0; c < cell_loss.size(); ++c)
          if (cell_count[c] > 0) cell_loss[c] /= cell_count[c];
        gdro.update(cell_loss, cell_count);
        for (int i = 0; i < nb; ++i) {
          const int c = gdro.cell(b.y[i], b.g[i]);
          weights[i] = gdro.q[c] / cell_count[c];
        }
      }

      const TensorId task_loss = tape.bce_with_logits(f.out, b.y, weights);
      TensorId loss = task_loss;
      double reg_value = 0.0;
      if (cfg.eta > 0.0) {
        std::vector<double> g_real(b.g.begin(), b.g.end());
        const RankVector g_ranks =
            compute_ranks(g_real, batch_rank_seed(cfg.seed, epoch, static_cast<int>(bi)));
        const TensorId reg = t_n_beta(tape, g_ranks, f.features, nullptr, cfg.beta);
        reg_value = tape.value(reg).scalar();
        loss = tape.add(task_loss, tape.scale(reg, cfg.eta));
      }
      tape.backward(loss);

      std::vector<const Mat*> grads;
      for (TensorId leaf : f.leaves) grads.push_back(&tape.grad(leaf));
      opt.step(params.pointers(), grads);

      obj_sum += tape.value(loss).scalar();
      reg_sum += reg_value;
      ++obj_count;
    }
    rep.epoch_objective.push_back(obj_count > 0 ? obj_sum / obj_count : 0.0);
    rep.epoch_regularizer.push_back(obj_count > 0 ? reg_sum / obj_count : 0.0);
  }

  if (cfg.clip_final_all)
    for (Mat& m : params.storage) clip_params_inplace(m, cfg.upsilon);
  params.sync_model();
  rep.final_params = params.named();
  rep.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace diffoci
