#include "diffoci/kernels.hpp"

#include <cmath>

#include "diffoci/rng.hpp"

namespace diffoci::kernels {

namespace {

// Row-level bodies shared by the serial and OpenMP entry points. Keeping a
// single body per kernel makes bit-identity between the two paths structural
// rather than something the tests merely hope for.

inline void sqdist_row(const Mat& A, int i, double* out) {
  const int n = A.rows;
  const int d = A.cols;
  const double* ai = A.row(i);
  for (int j = 0; j < n; ++j) {
    const double* aj = A.row(j);
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = ai[k] - aj[k];
      acc += diff * diff;
    }
    out[j] = acc;
  }
}

inline void dist_eps_row(const Mat& A, int i, double eps, double* out) {
  sqdist_row(A, i, out);
  const int n = A.rows;
  for (int j = 0; j < n; ++j) out[j] = std::sqrt(out[j] + eps);
}

inline void dist_eps_backward_row(const Mat& A, const Mat& D, const Mat& g, int i,
                                  double* grad_row) {
  // d D_ij / d A_ik = (A_ik - A_jk) / D_ij. Row i of grad_A collects the
  // contributions of both D_ij and D_ji (D symmetric, computed symmetric).
  const int n = A.rows;
  const int d = A.cols;
  const double* ai = A.row(i);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;  // zero difference, zero gradient
    const double w = (g.at(i, j) + g.at(j, i)) / D.at(i, j);
    const double* aj = A.row(j);
    for (int k = 0; k < d; ++k) grad_row[k] += w * (ai[k] - aj[k]);
  }
}

// Reservoir-sampled argmin over a fixed j sweep: exact uniform choice among
// tied minima, deterministic given the per-row seed.
inline int argmin_row_with_ties(const double* dist, int n, int self, uint64_t row_seed) {
  Rng rng(row_seed);
  int best = -1;
  double best_d = 0.0;
  uint64_t tie_count = 0;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    const double dj = dist[j];
    if (best < 0 || dj < best_d) {
      best = j;
      best_d = dj;
      tie_count = 1;
    } else if (dj == best_d) {
      ++tie_count;
      if (rng.uniform_below(tie_count) == 0) best = j;
    }
  }
  return best;
}

inline int nn_row(const Mat& A, int i, uint64_t seed, std::vector<double>& scratch) {
  sqdist_row(A, i, scratch.data());
  return argmin_row_with_ties(scratch.data(), A.rows, i, derive_seed(seed, {kTagNeighbor, static_cast<uint64_t>(i)}));
}

inline int nn_plus_col_row(const Mat& base, const std::vector<double>* extra, int i,
                           uint64_t seed, std::vector<double>& scratch) {
  const int n = base.rows;
  const double* bi = base.row(i);
  if (extra) {
    const double xi = (*extra)[i];
    for (int j = 0; j < n; ++j) {
      const double diff = xi - (*extra)[j];
      scratch[j] = bi[j] + diff * diff;
    }
  } else {
    for (int j = 0; j < n; ++j) scratch[j] = bi[j];
  }
  return argmin_row_with_ties(scratch.data(), n, i, derive_seed(seed, {kTagNeighbor, static_cast<uint64_t>(i)}));
}

inline void softmax_row(const Mat& M, int i, double beta, double lambda, double* out) {
  const int n = M.rows;
  const double* mi = M.row(i);
  // x_j = -beta * (M_ij + lambda * [j == i]); shift by the row max.
  double mx = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double x = -beta * (mi[j] + (j == i ? lambda : 0.0));
    if (x > mx) mx = x;
  }
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = -beta * (mi[j] + (j == i ? lambda : 0.0));
    const double e = std::exp(x - mx);
    out[j] = e;
    sum += e;
  }
  const double inv = 1.0 / sum;
  for (int j = 0; j < n; ++j) out[j] *= inv;
}

inline void softmax_backward_row(const Mat& S, const Mat& g, int i, double beta,
                                 double* grad_row) {
  // With s = softmax(x), x = -beta*(M + lambda I):
  //   dL/dx_j = s_j * (g_j - sum_k g_k s_k),  dL/dM_ij = -beta * dL/dx_j.
  const int n = S.rows;
  const double* si = S.row(i);
  const double* gi = g.row(i);
  double dot = 0.0;
  for (int j = 0; j < n; ++j) dot += gi[j] * si[j];
  for (int j = 0; j < n; ++j) grad_row[j] += -beta * si[j] * (gi[j] - dot);
}

}  // namespace

// ---- serial reference -----------------------------------------------------

namespace serial {

void pairwise_sqdist(const Mat& A, Mat& out) {
  out = Mat(A.rows, A.rows);
  for (int i = 0; i < A.rows; ++i) sqdist_row(A, i, out.row(i));
}

void pairwise_dist_eps(const Mat& A, double eps, Mat& out) {
  out = Mat(A.rows, A.rows);
  for (int i = 0; i < A.rows; ++i) dist_eps_row(A, i, eps, out.row(i));
}

void pairwise_dist_eps_backward(const Mat& A, const Mat& D, const Mat& g, Mat& grad_A) {
  for (int i = 0; i < A.rows; ++i) dist_eps_backward_row(A, D, g, i, grad_A.row(i));
}

void nn_argmin(const Mat& A, uint64_t seed, std::vector<int>& idx) {
  idx.assign(A.rows, -1);
  std::vector<double> scratch(A.rows);
  for (int i = 0; i < A.rows; ++i) idx[i] = nn_row(A, i, seed, scratch);
}

void nn_argmin_plus_col(const Mat& base_sqdist, const std::vector<double>* extra,
                        uint64_t seed, std::vector<int>& idx) {
  const int n = base_sqdist.rows;
  idx.assign(n, -1);
  std::vector<double> scratch(n);
  for (int i = 0; i < n; ++i) idx[i] = nn_plus_col_row(base_sqdist, extra, i, seed, scratch);
}

void row_softmax_neg(const Mat& M, double beta, double lambda, Mat& out) {
  out = Mat(M.rows, M.cols);
  for (int i = 0; i < M.rows; ++i) softmax_row(M, i, beta, lambda, out.row(i));
}

void row_softmax_neg_backward(const Mat& S, const Mat& g, double beta, Mat& grad_M) {
  for (int i = 0; i < S.rows; ++i) softmax_backward_row(S, g, i, beta, grad_M.row(i));
}

void matvec(const Mat& A, const std::vector<double>& x, std::vector<double>& y) {
  y.assign(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double acc = 0.0;
    for (int j = 0; j < A.cols; ++j) acc += ai[j] * x[j];
    y[i] = acc;
  }
}

void matmul(const Mat& A, const Mat& B, Mat& C) {
  C = Mat(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int k = 0; k < A.cols; ++k) {
      const double a = ai[k];
      const double* bk = B.row(k);
      for (int j = 0; j < B.cols; ++j) ci[j] += a * bk[j];
    }
  }
}

void matmul_at_b_accum(const Mat& A, const Mat& B, Mat& C) {
  for (int i = 0; i < C.rows; ++i) {  // C is A.cols x B.cols
    double* ci = C.row(i);
    for (int k = 0; k < A.rows; ++k) {
      const double a = A.at(k, i);
      const double* bk = B.row(k);
      for (int j = 0; j < B.cols; ++j) ci[j] += a * bk[j];
    }
  }
}

void matmul_a_bt_accum(const Mat& A, const Mat& B, Mat& C) {
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int j = 0; j < B.rows; ++j) {
      const double* bj = B.row(j);
      double acc = 0.0;
      for (int k = 0; k < A.cols; ++k) acc += ai[k] * bj[k];
      ci[j] += acc;
    }
  }
}

}  // namespace serial

// ---- OpenMP entry points ---------------------------------------------------

void pairwise_sqdist(const Mat& A, Mat& out) {
  out = Mat(A.rows, A.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) sqdist_row(A, i, out.row(i));
}

void pairwise_dist_eps(const Mat& A, double eps, Mat& out) {
  out = Mat(A.rows, A.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) dist_eps_row(A, i, eps, out.row(i));
}

void pairwise_dist_eps_backward(const Mat& A, const Mat& D, const Mat& g, Mat& grad_A) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) dist_eps_backward_row(A, D, g, i, grad_A.row(i));
}

void nn_argmin(const Mat& A, uint64_t seed, std::vector<int>& idx) {
  idx.assign(A.rows, -1);
#pragma omp parallel
  {
    std::vector<double> scratch(A.rows);
#pragma omp for schedule(static)
    for (int i = 0; i < A.rows; ++i) idx[i] = nn_row(A, i, seed, scratch);
  }
}

void nn_argmin_plus_col(const Mat& base_sqdist, const std::vector<double>* extra,
                        uint64_t seed, std::vector<int>& idx) {
  const int n = base_sqdist.rows;
  idx.assign(n, -1);
#pragma omp parallel
  {
    std::vector<double> scratch(n);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) idx[i] = nn_plus_col_row(base_sqdist, extra, i, seed, scratch);
  }
}

void row_softmax_neg(const Mat& M, double beta, double lambda, Mat& out) {
  out = Mat(M.rows, M.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M.rows; ++i) softmax_row(M, i, beta, lambda, out.row(i));
}

void row_softmax_neg_backward(const Mat& S, const Mat& g, double beta, Mat& grad_M) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < S.rows; ++i) softmax_backward_row(S, g, i, beta, grad_M.row(i));
}

void matvec(const Mat& A, const std::vector<double>& x, std::vector<double>& y) {
  y.assign(A.rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double acc = 0.0;
    for (int j = 0; j < A.cols; ++j) acc += ai[j] * x[j];
    y[i] = acc;
  }
}

void matmul(const Mat& A, const Mat& B, Mat& C) {
  C = Mat(A.rows, B.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int k = 0; k < A.cols; ++k) {
      const double a = ai[k];
      const double* bk = B.row(k);
      for (int j = 0; j < B.cols; ++j) ci[j] += a * bk[j];
    }
  }
}

void matmul_at_b_accum(const Mat& A, const Mat& B, Mat& C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < C.rows; ++i) {
    double* ci = C.row(i);
    for (int k = 0; k < A.rows; ++k) {
      const double a = A.at(k, i);
      const double* bk = B.row(k);
      for (int j = 0; j < B.cols; ++j) ci[j] += a * bk[j];
    }
  }
}

void matmul_a_bt_accum(const Mat& A, const Mat& B, Mat& C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int j = 0; j < B.rows; ++j) {
      const double* bj = B.row(j);
      double acc = 0.0;
      for (int k = 0; k < A.cols; ++k) acc += ai[k] * bj[k];
      ci[j] += acc;
    }
  }
}

}  // namespace diffoci::kernels
