#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffoci/mat.hpp"
#include "diffoci/models.hpp"
#include "diffoci/optim.hpp"

namespace diffoci {

// The three training objectives:
//   dF1  maximize T_{n,beta}(Y, f_theta(X))                (feature selection)
//   dF2  task loss + eta * T_{n,beta}(G, features)          (shortcut penalty)
//   dF3  maximize T_{n,beta}(Y, f_theta(X) | X_s)           (conditioning)

enum class Objective { kDf1, kDf2, kDf3 };
enum class ParamKind { kVec, kMlp };
enum class Weighting { kErm, kGdro };

std::string to_string(Objective o);
std::string to_string(ParamKind k);
std::string to_string(Weighting w);

struct ExperimentConfig {
  Objective objective = Objective::kDf1;
  ParamKind param_kind = ParamKind::kVec;
  std::vector<int> hidden;      // MLP hidden widths; empty => one layer of 2p
  double beta = 5.0;
  double upsilon = 0.1;
  double gamma = 5e-3;          // learning rate
  double weight_decay = 1e-4;
  int batch_size = 0;           // 0 => full batch
  int epochs = 100;
  double eta = 1.0;             // dF2 regularization strength
  Weighting weighting = Weighting::kErm;
  std::optional<OptimKind> optimizer;  // default adam (dF1/dF3), sgd (dF2)
  bool clip_final_all = true;   // dF2: clip every network parameter at upsilon
  uint64_t seed = 0;

  OptimKind effective_optimizer() const;
  void validate() const;
};

struct TrainReport {
  ExperimentConfig config;
  std::vector<double> epoch_objective;    // mean per-batch objective by epoch
  std::vector<double> epoch_regularizer;  // dF2 only: mean T(G, features)
  std::vector<NamedTensor> final_params;
  std::vector<double> final_theta;        // vec runs, pre-clip
  std::vector<double> clipped_theta;      // vec runs, post-clip
  std::vector<int> selected;              // indices with |theta_i| > 0 after clip
  int skipped_batches = 0;
  double wall_clock_sec = 0.0;

  // Rebuilds the parameterizations from final_params.
  VecParam vec() const;
  MlpParam mlp() const;
};

// dF1: minimizes -T_{n,beta}(Y, f_theta(X)) over minibatches with the
// configured optimizer. Batches with constant response are skipped and
// counted. Vec runs end with clip_params(theta, upsilon).
TrainReport train_df1(const std::vector<double>& y, const DataMatrix& X,
                      const ExperimentConfig& cfg);

// dF2: binary classification with the difFOCI regularizer. Per batch,
// loss = BCE-with-logits + eta * T_{n,beta}(G, features), where the features
// are the post-activation output of the penultimate layer. erm averages the
// per-sample loss; gdro reweights per (label x group) cell with multiplicative
// weight updates (step 0.1) and keeps the weights on the simplex.
TrainReport train_df2(const std::vector<double>& y, const DataMatrix& X,
                      const std::vector<int>& groups, const ExperimentConfig& cfg);

// dF3: minimizes -T_{n,beta}(Y, f_theta(X) | Xs). Batches where the response
// is sample-wise a function of Xs are skipped and counted.
TrainReport train_df3(const std::vector<double>& y, const DataMatrix& X,
                      const DataMatrix& Xs, const ExperimentConfig& cfg);

// Multiplicative-weights state over (label x group) cells used by gdro
// weighting: q_c <- q_c * exp(step * mean-loss_c) for cells present in the
// batch, then renormalized onto the simplex.
struct GdroState {
  std::vector<double> q;
  int num_groups = 0;
  static constexpr double kStep = 0.1;

  static GdroState make(const std::vector<int>& groups);
  int cell(double label, int group) const;
  void update(const std::vector<double>& cell_mean_loss, const std::vector<int>& cell_count);
};

// Shuffle/batch plumbing, exposed so tests can replay the exact stream.
std::vector<int> epoch_shuffle(uint64_t seed, int epoch, int n);
// Splits the order into batches of `batch` rows (0 => one full batch); a short
// tail is kept when it has >= 2 rows and dropped otherwise.
std::vector<std::vector<int>> make_batches(const std::vector<int>& order, int batch);
// Rank tie seed for a given (epoch, batch) pair.
uint64_t batch_rank_seed(uint64_t seed, int epoch, int batch_index);

}  // namespace diffoci
