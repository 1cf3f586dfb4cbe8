#pragma once

#include "diffoci/autodiff.hpp"
#include "diffoci/mat.hpp"
#include "diffoci/rank_core.hpp"

namespace diffoci {

// Differentiable relaxation of T_n: hard nearest-neighbor rank lookups are
// replaced by softmax-weighted rank averages at inverse temperature beta.
//
// Conditional form (X present):
//       sum_i (min{r_i, (U r)_i} - min{r_i, (S r)_i})
//   T = ---------------------------------------------
//       sum_i (r_i - min{r_i, (S r)_i})
// with U the soft-neighbor matrix of (X, Z) and S the soft-neighbor matrix of
// X alone. S and the entire denominator are constants with respect to Z: the
// trainable parameterizations only ever enter through Z, so no graph is built
// for them.
//
// Unconditional form (X == nullptr) mirrors the hard p = 0 estimator with the
// single softmax substitution:
//   T = sum_i (n * min{r_i, (U r)_i} - l_i^2) / sum_i l_i (n - l_i).

// Builds the graph on `tape` and returns the scalar result node. z must be an
// n x q tensor already on the tape (q >= 1). Throws DegenerateDenominator if
// the constant denominator is not positive.
TensorId t_n_beta(Tape& tape, const RankVector& y_ranks, TensorId z, const Mat* x,
                  double beta);

// Forward-only evaluation.
double t_n_beta_value(const RankVector& y_ranks, const Mat& z, const Mat* x, double beta);

// The soft analogues of the Q_n / P_n diagnostics (same scaling conventions
// as q_n_p_n); their ratio equals t_n_beta_value exactly.
struct TnBetaParts {
  double q_nb = 0.0;
  double p_nb = 0.0;
};
TnBetaParts t_n_beta_parts(const RankVector& y_ranks, const Mat& z, const Mat* x, double beta);

}  // namespace diffoci
