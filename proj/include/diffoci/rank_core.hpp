#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

// Exact (non-differentiable) rank statistics and nearest-neighbor machinery.
//
// Ranks use the convention r_i = #{j : y_j <= y_i} including i itself, so the
// minimum rank is 1. Ties are resolved by a seeded random strict total order
// (a random permutation used as secondary sort key), which keeps ranks
// integral and runs exactly reproducible. With that rule the perturbed values
// are always pairwise distinct, hence l_i = n - r_i + 1.

struct RankVector {
  std::vector<int> r;  // 1-based ranks after tie perturbation
  std::vector<int> l;  // l_i = #{j : y_j >= y_i} after perturbation
  uint64_t tie_seed = 0;

  int n() const { return static_cast<int>(r.size()); }
};

struct NeighborIndex {
  std::vector<int> idx;  // 0-based, idx[i] != i
  uint64_t tie_seed = 0;
};

// Ranks of y with seeded tie-breaking. Throws InsufficientSamples for n < 2.
RankVector compute_ranks(const std::vector<double>& y, uint64_t seed);

// Raw (unperturbed) max-ranks: r_i = #{j : y_j <= y_i}, l_i = #{j : y_j >= y_i}.
// These keep the tie structure and drive the degeneracy checks.
void raw_ranks(const std::vector<double>& y, std::vector<int>& r, std::vector<int>& l);

// Brute-force O(n^2 p) Euclidean nearest neighbor per row; exact-distance
// ties broken uniformly at random from per-row substreams of `seed`.
NeighborIndex nearest_neighbors(const DataMatrix& X, uint64_t seed);
NeighborIndex nearest_neighbors(const Mat& X, uint64_t seed);

// True when y takes a single value (up to bit equality).
bool is_constant(const std::vector<double>& y);

// True when the raw-rank denominator sum_i (r_i - min{r_i, r_N(i)}) vanishes
// for the given conditioning neighbors, i.e. every sample's X-neighbor carries
// a y value >= its own. This is exactly the zero-denominator condition of the
// untied estimator and signals that y is sample-wise a function of X.
bool degenerate_given(const std::vector<double>& y, const NeighborIndex& nn);

// Chatterjee's rank correlation estimator xi_n(X, Y). Pairs are sorted by x
// with seeded tie-breaking; y ranks use an independent substream. Throws
// DegenerateResponse when y is constant. Finite-sample values may fall
// slightly outside [0, 1] and are returned unclamped.
double xi_n(const std::vector<double>& x, const std::vector<double>& y, uint64_t seed);

// Conditional dependence estimator T_n(Y, Z | X). X == nullptr selects the
// unconditional (p = 0) form. Throws DegenerateDenominator when y is
// sample-wise a function of the conditioning set (or constant, for p = 0).
double t_n(const std::vector<double>& y, const Mat& Z, const Mat* X, uint64_t seed);

// The numerator / denominator diagnostics behind T_n. For p >= 1 both carry a
// 1/n^2 scale; for p = 0 Q_n is 1/n^2- and P_n is 1/n^3-scaled, matching the
// limit statements they estimate. In both cases t_n == Q_n / P_n exactly.
struct QnPn {
  double q_n = 0.0;
  double p_n = 0.0;
};
QnPn q_n_p_n(const std::vector<double>& y, const Mat& Z, const Mat* X, uint64_t seed);

namespace detail {

// Per-step scan context used by FOCI: the conditioning-set pieces of T_n are
// shared across every candidate column, so they are computed once.
struct ConditionalContext {
  RankVector ranks;
  std::vector<double> y;
  // p >= 1 only:
  Mat cond_sqdist;            // pairwise squared distances of the conditioning set
  std::vector<int> n_idx;     // N(i)
  int64_t denom = 0;          // sum_i (r_i - min{r_i, r_N(i)}) or sum_i l_i (n - l_i)
  bool conditional = false;   // false => p = 0 form
  bool degenerate = false;    // raw-rank denominator vanished
};

ConditionalContext make_context(const std::vector<double>& y, const Mat* X, uint64_t seed);

// Numerator for one candidate column (p>=1: conditional form over
// (X, extra); p=0: unconditional form over extra alone), with t_n assembled
// as numerator/denominator. extra is the candidate feature column.
double t_n_candidate(const ConditionalContext& ctx, const std::vector<double>& extra,
                     uint64_t seed);

int64_t numerator_p_ge_1(const RankVector& ranks, const std::vector<int>& m_idx,
                         const std::vector<int>& n_idx);

}  // namespace detail

}  // namespace diffoci
