#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

enum class Split : int { kTrain = 0, kVal = 1, kTest = 2 };

struct Dataset {
  DataMatrix X;
  std::vector<double> y;
  std::optional<std::vector<int>> groups;
  std::optional<DataMatrix> sensitive;
  std::vector<Split> split_tags;
  // True when the generating distribution differs across splits, in which
  // case the split assignment is part of the data and must be persisted.
  bool split_dependent = false;

  int n() const { return X.n(); }
  int p() const { return X.p(); }
  std::vector<int> indices_of(Split s) const;
  Dataset subset(const std::vector<int>& rows) const;
};

// Seeded 75/15/10 split assignment by permutation.
std::vector<Split> assign_splits(int n, uint64_t seed);

// Functional synthetic dataset: 100 grid points on [-6, 6], 60 transformed
// sinusoid features noised four times (p = 240), response y = sin(x).
Dataset gen_functional(uint64_t seed);

// The 60 pre-noise feature columns (pure; no RNG) plus their closed forms,
// exposed so tests can check column statistics analytically.
struct FunctionalColumnSpec {
  double scale;  // overall sign/scale applied to the base sinusoid
  double a, b, c;
};
Mat functional_base_features();
std::vector<FunctionalColumnSpec> functional_column_specs();

enum class ToyKind { kToy1, kToy2, kToy3, kFociToy };
ToyKind toy_kind_from_string(const std::string& s);

// Sinusoidal toy regressions and the product/interaction selection toy.
// noise_std overrides the response noise (default 0.1; ignored by kFociToy,
// which has no additive response noise).
Dataset gen_toy(ToyKind kind, uint64_t seed, std::optional<double> noise_std = {});

// Spurious-correlation binary task: balanced labels, a group attribute that
// tracks the label with probability train_corr on the train/val splits and
// 0.5 on test, core features carrying the label and one wider-margin
// shortcut feature carrying the group.
struct SpuriousConfig {
  double train_corr = 0.9;
  int n = 4000;
  int p_core = 5;
  int p_spur = 1;
  double mu_core = 0.4;
  double mu_spur = 3.0;
};
Dataset gen_spurious(uint64_t seed, const SpuriousConfig& cfg = {});

// Fairness toy: a binary sensitive attribute s, a clean latent u independent
// of s, and y = 1{u + alpha * (2s - 1) > 0}. Features: two noisy copies of u,
// two strong proxies of s, two pure-noise columns. The proxies genuinely help
// predict y (through s) but carry no information once s is conditioned out.
struct FairnessConfig {
  int n = 4000;
  double alpha = 0.3;
  double mu_proxy = 1.5;
  double clean_noise = 0.5;
};
Dataset gen_fairness(uint64_t seed, const FairnessConfig& cfg = {});

// CSV ingestion. Header row required; numeric cells only (anything else is
// NonNumericColumn); empty/NA/NaN cells mark the row as missing and drop it,
// counted in dropped_rows. Splits come from split_column when given (values
// 0/1/2), otherwise from a seeded permutation.
struct CsvOptions {
  std::string target_column;
  std::optional<std::string> group_column;
  std::vector<std::string> sensitive_columns;
  std::optional<std::string> split_column;
  uint64_t seed = 0;
};
Dataset load_csv(const std::string& path, const CsvOptions& opts, int* dropped_rows = nullptr);

// Writes features, target "y", then optional "g" and sensitive columns. A
// "split" column (0/1/2) is appended only for split-dependent datasets.
void write_csv(const std::string& path, const Dataset& ds);

// Z-scores every feature column using train-split statistics; zero-variance
// train columns are left unscaled and counted as warnings.
Dataset standardize(const Dataset& ds, std::vector<std::string>* warnings = nullptr);

}  // namespace diffoci
