#include "diffoci/t_n_beta.hpp"

#include <algorithm>
#include <cmath>

#include "diffoci/errors.hpp"
#include "diffoci/kernels.hpp"

namespace diffoci {

namespace {

std::vector<double> ranks_as_double(const RankVector& yr) {
  std::vector<double> r(yr.r.size());
  for (size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(yr.r[i]);
  return r;
}

// Constant pieces: (S r)_i from the conditioning matrix, then
// denom = sum_i (r_i - min{r_i, (S r)_i}) and num_s = sum_i min{r_i, (S r)_i}.
struct ConstSide {
  double denom = 0.0;
  double num_s = 0.0;
};

ConstSide conditional_const_side(const RankVector& yr, const Mat& x, double beta) {
  Mat dist;
  kernels::pairwise_dist_eps(x, Tape::kEpsDist, dist);
  double mx = dist.a.empty() ? 0.0 : dist.a[0];
  for (double v : dist.a) mx = std::max(mx, v);
  const double lambda = std::max(1e10, mx + Tape::kEpsMask);
  Mat s;
  kernels::row_softmax_neg(dist, beta, lambda, s);
  std::vector<double> sr;
  kernels::matvec(s, ranks_as_double(yr), sr);

  ConstSide out;
  for (int i = 0; i < yr.n(); ++i) {
    const double ri = static_cast<double>(yr.r[i]);
    const double mn = std::min(ri, sr[i]);
    out.num_s += mn;
    out.denom += ri - mn;
  }
  return out;
}

double unconditional_denominator(const RankVector& yr) {
  const int n = yr.n();
  double denom = 0.0;
  for (int i = 0; i < n; ++i)
    denom += static_cast<double>(yr.l[i]) * (n - yr.l[i]);
  return denom;
}

double sum_l_squared(const RankVector& yr) {
  double s = 0.0;
  for (int li : yr.l) s += static_cast<double>(li) * li;
  return s;
}

}  // namespace

TensorId t_n_beta(Tape& tape, const RankVector& y_ranks, TensorId z, const Mat* x,
                  double beta) {
  const int n = y_ranks.n();
  if (tape.value(z).rows != n) throw InvalidArgument("t_n_beta: Z row count mismatch");
  if (tape.value(z).cols < 1) throw InvalidArgument("t_n_beta: Z needs at least one column");
  if (beta <= 0.0) throw InvalidArgument("t_n_beta: beta must be positive");
  const std::vector<double> r = ranks_as_double(y_ranks);

  // Soft numerator term sum_i min{r_i, (U r)_i}; U comes from (X, Z) for the
  // conditional form and from Z alone otherwise.
  TensorId w = z;
  if (x != nullptr) {
    if (x->rows != n) throw InvalidArgument("t_n_beta: X row count mismatch");
    w = tape.hcat_const_left(*x, z);
  }
  const TensorId dist = tape.pairwise_dist(w);
  const TensorId u = tape.soft_neighbors(dist, beta);
  const TensorId ur = tape.matvec_const(u, r);
  const TensorId mn = tape.min_with_const(ur, r);
  const TensorId num_u = tape.sum(mn);

  if (x != nullptr) {
    const ConstSide cs = conditional_const_side(y_ranks, *x, beta);
    if (!(cs.denom > 0.0))
      throw DegenerateDenominator("t_n_beta: zero conditional denominator");
    return tape.affine_scalar(num_u, 1.0 / cs.denom, -cs.num_s / cs.denom);
  }

  const double denom = unconditional_denominator(y_ranks);
  if (!(denom > 0.0)) throw DegenerateDenominator("t_n_beta: zero denominator");
  return tape.affine_scalar(num_u, static_cast<double>(n) / denom,
                            -sum_l_squared(y_ranks) / denom);
}

TnBetaParts t_n_beta_parts(const RankVector& y_ranks, const Mat& z, const Mat* x,
                           double beta) {
  const int n = y_ranks.n();
  if (z.rows != n) throw InvalidArgument("t_n_beta_parts: Z row count mismatch");
  if (beta <= 0.0) throw InvalidArgument("t_n_beta_parts: beta must be positive");
  const std::vector<double> r = ranks_as_double(y_ranks);
  const double n2 = static_cast<double>(n) * n;

  const Mat w = (x != nullptr) ? Mat::hcat(*x, z) : z;
  Mat dist;
  kernels::pairwise_dist_eps(w, Tape::kEpsDist, dist);
  double mx = dist.a.empty() ? 0.0 : dist.a[0];
  for (double v : dist.a) mx = std::max(mx, v);
  const double lambda = std::max(1e10, mx + Tape::kEpsMask);
  Mat u;
  kernels::row_softmax_neg(dist, beta, lambda, u);
  std::vector<double> ur;
  kernels::matvec(u, r, ur);
  double num_u = 0.0;
  for (int i = 0; i < n; ++i) num_u += std::min(r[i], ur[i]);

  TnBetaParts parts;
  if (x != nullptr) {
    const ConstSide cs = conditional_const_side(y_ranks, *x, beta);
    parts.q_nb = (num_u - cs.num_s) / n2;
    parts.p_nb = cs.denom / n2;
  } else {
    parts.q_nb = (static_cast<double>(n) * num_u - sum_l_squared(y_ranks)) / (n2 * n);
    parts.p_nb = unconditional_denominator(y_ranks) / (n2 * n);
  }
  return parts;
}

double t_n_beta_value(const RankVector& y_ranks, const Mat& z, const Mat* x, double beta) {
  const TnBetaParts parts = t_n_beta_parts(y_ranks, z, x, beta);
  if (!(parts.p_nb > 0.0)) throw DegenerateDenominator("t_n_beta: zero denominator");
  return parts.q_nb / parts.p_nb;
}

}  // namespace diffoci
