#include "diffoci/rank_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "diffoci/errors.hpp"
#include "diffoci/kernels.hpp"
#include "diffoci/rng.hpp"

namespace diffoci {

namespace {

void check_input(const std::vector<double>& y) {
  if (y.size() < 2) throw InsufficientSamples("need n >= 2 samples");
  for (double v : y)
    if (!std::isfinite(v)) throw NumericalError("non-finite response value");
}

}  // namespace

RankVector compute_ranks(const std::vector<double>& y, uint64_t seed) {
  check_input(y);
  const int n = static_cast<int>(y.size());
  Rng rng(seed);
  const std::vector<int> tie_key = rng.permutation(n);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (y[a] != y[b]) return y[a] < y[b];
    return tie_key[a] < tie_key[b];
  });

  RankVector rv;
  rv.tie_seed = seed;
  rv.r.resize(n);
  rv.l.resize(n);
  for (int k = 0; k < n; ++k) {
    rv.r[order[k]] = k + 1;
    rv.l[order[k]] = n - k;
  }
  return rv;
}

void raw_ranks(const std::vector<double>& y, std::vector<int>& r, std::vector<int>& l) {
  const int n = static_cast<int>(y.size());
  std::vector<double> sorted(y);
  std::sort(sorted.begin(), sorted.end());
  r.resize(n);
  l.resize(n);
  for (int i = 0; i < n; ++i) {
    r[i] = static_cast<int>(std::upper_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin());
    l[i] = n - static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin());
  }
}

NeighborIndex nearest_neighbors(const Mat& X, uint64_t seed) {
  if (X.rows < 2) throw InsufficientSamples("nearest_neighbors: need n >= 2");
  if (!X.all_finite()) throw NumericalError("nearest_neighbors: non-finite entry");
  NeighborIndex nn;
  nn.tie_seed = seed;
  kernels::nn_argmin(X, seed, nn.idx);
  return nn;
}

NeighborIndex nearest_neighbors(const DataMatrix& X, uint64_t seed) {
  return nearest_neighbors(X.values, seed);
}

bool is_constant(const std::vector<double>& y) {
  for (size_t i = 1; i < y.size(); ++i)
    if (y[i] != y[0]) return false;
  return true;
}

bool degenerate_given(const std::vector<double>& y, const NeighborIndex& nn) {
  std::vector<int> r, l;
  raw_ranks(y, r, l);
  const int n = static_cast<int>(y.size());
  for (int i = 0; i < n; ++i) {
    if (std::min(r[i], r[nn.idx[i]]) < r[i]) return false;
  }
  return true;
}

double xi_n(const std::vector<double>& x, const std::vector<double>& y, uint64_t seed) {
  check_input(y);
  if (x.size() != y.size()) throw InvalidArgument("xi_n: length mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw NumericalError("xi_n: non-finite predictor value");
  if (is_constant(y)) throw DegenerateResponse("xi_n: constant response");

  const int n = static_cast<int>(y.size());
  // x-ties and y-ties use independent substreams.
  Rng xrng(derive_seed(seed, {kTagXTies}));
  const std::vector<int> x_key = xrng.permutation(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return x_key[a] < x_key[b];
  });

  const RankVector rv = compute_ranks(y, derive_seed(seed, {kTagYTies}));

  int64_t num = 0;
  for (int i = 0; i + 1 < n; ++i)
    num += std::abs(static_cast<int64_t>(rv.r[order[i + 1]]) - rv.r[order[i]]);
  int64_t den = 0;
  for (int i = 0; i < n; ++i)
    den += static_cast<int64_t>(rv.l[i]) * (n - rv.l[i]);

  return 1.0 - static_cast<double>(n) * static_cast<double>(num) /
                   (2.0 * static_cast<double>(den));
}

namespace detail {

int64_t numerator_p_ge_1(const RankVector& ranks, const std::vector<int>& m_idx,
                         const std::vector<int>& n_idx) {
  const int n = ranks.n();
  int64_t num = 0;
  for (int i = 0; i < n; ++i) {
    const int ri = ranks.r[i];
    num += std::min(ri, ranks.r[m_idx[i]]) - std::min(ri, ranks.r[n_idx[i]]);
  }
  return num;
}

ConditionalContext make_context(const std::vector<double>& y, const Mat* X, uint64_t seed) {
  check_input(y);
  ConditionalContext ctx;
  ctx.y = y;
  ctx.ranks = compute_ranks(y, derive_seed(seed, {kTagYTies}));
  const int n = ctx.ranks.n();
  if (X != nullptr) {
    if (X->rows != n) throw InvalidArgument("conditioning matrix row count mismatch");
    if (!X->all_finite()) throw NumericalError("conditioning matrix has non-finite entry");
    ctx.conditional = true;
    kernels::pairwise_sqdist(*X, ctx.cond_sqdist);
    kernels::nn_argmin_plus_col(ctx.cond_sqdist, nullptr,
                                derive_seed(seed, {kTagNeighbor, 0}), ctx.n_idx);
    for (int i = 0; i < n; ++i) {
      const int ri = ctx.ranks.r[i];
      ctx.denom += ri - std::min(ri, ctx.ranks.r[ctx.n_idx[i]]);
    }
    NeighborIndex nn;
    nn.idx = ctx.n_idx;
    ctx.degenerate = degenerate_given(y, nn);
  } else {
    ctx.conditional = false;
    for (int i = 0; i < n; ++i)
      ctx.denom += static_cast<int64_t>(ctx.ranks.l[i]) * (n - ctx.ranks.l[i]);
    ctx.degenerate = is_constant(y);
  }
  return ctx;
}

double t_n_candidate(const ConditionalContext& ctx, const std::vector<double>& extra,
                     uint64_t seed) {
  const int n = ctx.ranks.n();
  std::vector<int> m_idx;
  int64_t num = 0;
  if (ctx.conditional) {
    kernels::nn_argmin_plus_col(ctx.cond_sqdist, &extra, seed, m_idx);
    num = numerator_p_ge_1(ctx.ranks, m_idx, ctx.n_idx);
  } else {
    Mat z = Mat::from_vector(extra);
    kernels::nn_argmin(z, seed, m_idx);
    for (int i = 0; i < n; ++i) {
      const int64_t mn = std::min(ctx.ranks.r[i], ctx.ranks.r[m_idx[i]]);
      num += static_cast<int64_t>(n) * mn -
             static_cast<int64_t>(ctx.ranks.l[i]) * ctx.ranks.l[i];
    }
  }
  return static_cast<double>(num) / static_cast<double>(ctx.denom);
}

}  // namespace detail

double t_n(const std::vector<double>& y, const Mat& Z, const Mat* X, uint64_t seed) {
  check_input(y);
  if (Z.rows != static_cast<int>(y.size())) throw InvalidArgument("t_n: Z row count mismatch");
  if (Z.cols < 1) throw InvalidArgument("t_n: Z needs at least one column");
  if (!Z.all_finite()) throw NumericalError("t_n: non-finite entry in Z");

  detail::ConditionalContext ctx = detail::make_context(y, X, seed);
  if (ctx.degenerate)
    throw DegenerateDenominator(
        ctx.conditional ? "t_n: response is sample-wise a function of the conditioning set"
                        : "t_n: constant response");

  const int n = ctx.ranks.n();
  int64_t num = 0;
  if (ctx.conditional) {
    const Mat W = Mat::hcat(*X, Z);
    std::vector<int> m_idx;
    kernels::nn_argmin(W, derive_seed(seed, {kTagNeighbor, 1}), m_idx);
    num = detail::numerator_p_ge_1(ctx.ranks, m_idx, ctx.n_idx);
  } else {
    std::vector<int> m_idx;
    kernels::nn_argmin(Z, derive_seed(seed, {kTagNeighbor, 1}), m_idx);
    for (int i = 0; i < n; ++i) {
      const int64_t mn = std::min(ctx.ranks.r[i], ctx.ranks.r[m_idx[i]]);
      num += static_cast<int64_t>(n) * mn -
             static_cast<int64_t>(ctx.ranks.l[i]) * ctx.ranks.l[i];
    }
  }
  return static_cast<double>(num) / static_cast<double>(ctx.denom);
}

QnPn q_n_p_n(const std::vector<double>& y, const Mat& Z, const Mat* X, uint64_t seed) {
  check_input(y);
  if (Z.rows != static_cast<int>(y.size())) throw InvalidArgument("q_n_p_n: Z row count mismatch");

  detail::ConditionalContext ctx = detail::make_context(y, X, seed);
  const int n = ctx.ranks.n();
  const double n2 = static_cast<double>(n) * n;

  QnPn out;
  if (ctx.conditional) {
    const Mat W = Mat::hcat(*X, Z);
    std::vector<int> m_idx;
    kernels::nn_argmin(W, derive_seed(seed, {kTagNeighbor, 1}), m_idx);
    const int64_t num = detail::numerator_p_ge_1(ctx.ranks, m_idx, ctx.n_idx);
    out.q_n = static_cast<double>(num) / n2;
    out.p_n = static_cast<double>(ctx.denom) / n2;
  } else {
    std::vector<int> m_idx;
    kernels::nn_argmin(Z, derive_seed(seed, {kTagNeighbor, 1}), m_idx);
    int64_t num = 0;  // n * sum(min) - sum(l^2); Q_n carries an extra 1/n
    for (int i = 0; i < n; ++i) {
      const int64_t mn = std::min(ctx.ranks.r[i], ctx.ranks.r[m_idx[i]]);
      num += static_cast<int64_t>(n) * mn -
             static_cast<int64_t>(ctx.ranks.l[i]) * ctx.ranks.l[i];
    }
    out.q_n = static_cast<double>(num) / (n2 * n);
    out.p_n = static_cast<double>(ctx.denom) / (n2 * n);
  }
  return out;
}

}  // namespace diffoci
