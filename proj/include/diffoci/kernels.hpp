#pragma once

#include <cstdint>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci::kernels {

// Data-parallel kernels behind the estimators. Every kernel is parallelized
// over rows only; each row is a fixed serial sweep, so parallel output is
// bit-identical to the serial reference regardless of thread count. The
// serial reference implementations live in kernels::serial and are kept for
// testing and benchmarking.

// out[i*n+j] = squared Euclidean distance between rows i and j of A.
void pairwise_sqdist(const Mat& A, Mat& out);

// out[i*n+j] = sqrt(sqdist(i,j) + eps). eps keeps the gradient finite at
// coincident rows.
void pairwise_dist_eps(const Mat& A, double eps, Mat& out);

// Backward of pairwise_dist_eps: accumulates into grad_A given upstream g
// (n x n) and the forward output D (n x n).
void pairwise_dist_eps_backward(const Mat& A, const Mat& D, const Mat& g, Mat& grad_A);

// idx[i] = argmin over j != i of squared distance, ties broken uniformly at
// random from a per-row substream of `seed`. Per-row derivation keeps the
// result independent of scheduling.
void nn_argmin(const Mat& A, uint64_t seed, std::vector<int>& idx);

// Same, but distances are taken as base_sqdist[i][j] + (extra_i - extra_j)^2,
// used by the FOCI scan where the conditioning-set distances are shared
// across candidate columns. extra may be nullptr (no extra column).
void nn_argmin_plus_col(const Mat& base_sqdist, const std::vector<double>* extra,
                        uint64_t seed, std::vector<int>& idx);

// Row-stochastic softmax of -beta * (M + lambda * I), computed with per-row
// max subtraction. lambda suppresses the diagonal.
void row_softmax_neg(const Mat& M, double beta, double lambda, Mat& out);

// Backward through row_softmax_neg: given S (forward output) and upstream g
// on S, accumulates dL/dM. The diagonal offset is constant so the diagonal
// of grad_M receives the plain chain-rule term like any other entry.
void row_softmax_neg_backward(const Mat& S, const Mat& g, double beta, Mat& grad_M);

// y[i] = sum_j A[i][j] * x[j].
void matvec(const Mat& A, const std::vector<double>& x, std::vector<double>& y);

// C = A * B.
void matmul(const Mat& A, const Mat& B, Mat& C);

// C += A^T * B  (used by linear-layer backward).
void matmul_at_b_accum(const Mat& A, const Mat& B, Mat& C);

// C += A * B^T.
void matmul_a_bt_accum(const Mat& A, const Mat& B, Mat& C);

namespace serial {
void pairwise_sqdist(const Mat& A, Mat& out);
void pairwise_dist_eps(const Mat& A, double eps, Mat& out);
void pairwise_dist_eps_backward(const Mat& A, const Mat& D, const Mat& g, Mat& grad_A);
void nn_argmin(const Mat& A, uint64_t seed, std::vector<int>& idx);
void nn_argmin_plus_col(const Mat& base_sqdist, const std::vector<double>* extra,
                        uint64_t seed, std::vector<int>& idx);
void row_softmax_neg(const Mat& M, double beta, double lambda, Mat& out);
void row_softmax_neg_backward(const Mat& S, const Mat& g, double beta, Mat& grad_M);
void matvec(const Mat& A, const std::vector<double>& x, std::vector<double>& y);
void matmul(const Mat& A, const Mat& B, Mat& C);
void matmul_at_b_accum(const Mat& A, const Mat& B, Mat& C);
void matmul_a_bt_accum(const Mat& A, const Mat& B, Mat& C);
}  // namespace serial

}  // namespace diffoci::kernels
