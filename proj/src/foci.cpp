#include "diffoci/foci.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diffoci/errors.hpp"
#include "diffoci/rank_core.hpp"
#include "diffoci/rng.hpp"

namespace diffoci {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kFirstNonPositive:
      return "first_nonpositive";
    case StopReason::kStepNonPositive:
      return "step_nonpositive";
    case StopReason::kExhausted:
      return "exhausted";
    case StopReason::kMaxK:
      return "max_k";
  }
  return "unknown";
}

namespace {

SelectionResult run_greedy(const std::vector<double>& y, const DataMatrix& X, int steps,
                           bool stop_on_nonpositive, uint64_t seed) {
  const int n = X.n();
  const int p = X.p();
  if (static_cast<int>(y.size()) != n) throw InvalidArgument("foci: y length mismatch");

  SelectionResult res;
  std::vector<char> used(p, 0);
  Mat cond;  // n x |selected|, grown one column per step

  for (int step = 0; step < steps; ++step) {
    const uint64_t step_seed = derive_seed(seed, {kTagFociStep, static_cast<uint64_t>(step)});
    const Mat* cond_ptr = res.selected.empty() ? nullptr : &cond;
    detail::ConditionalContext ctx = detail::make_context(y, cond_ptr, step_seed);
    if (ctx.degenerate) {
      if (res.selected.empty())
        throw DegenerateResponse("foci: constant response");
      throw DegenerateDenominator("foci: response became a function of the selected set");
    }

    std::vector<double> score(p, -std::numeric_limits<double>::infinity());
    int evaluated = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : evaluated)
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      const std::vector<double> col = X.values.col(j);
      score[j] = detail::t_n_candidate(
          ctx, col, derive_seed(seed, {kTagFociStep, static_cast<uint64_t>(step),
                                       static_cast<uint64_t>(j)}));
      ++evaluated;
    }
    res.t_n_calls += evaluated;

    int best = -1;
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      if (best < 0 || score[j] > score[best]) best = j;  // ties keep the lower index
    }

    if (stop_on_nonpositive && score[best] <= 0.0) {
      res.stopped_reason = res.selected.empty() ? StopReason::kFirstNonPositive
                                                : StopReason::kStepNonPositive;
      return res;
    }

    res.selected.push_back(best);
    res.scores.push_back(score[best]);
    used[best] = 1;

    Mat grown(n, cond.cols + 1);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < cond.cols; ++c) grown.at(i, c) = cond.at(i, c);
      grown.at(i, cond.cols) = X.values.at(i, best);
    }
    cond = std::move(grown);
  }

  res.stopped_reason = static_cast<int>(res.selected.size()) == p ? StopReason::kExhausted
                                                                  : StopReason::kMaxK;
  return res;
}

}  // namespace

SelectionResult foci_select(const std::vector<double>& y, const DataMatrix& X,
                            std::optional<int> max_k, uint64_t seed) {
  const int cap = max_k.value_or(std::min(X.p(), X.n() - 1));
  if (cap < 0 || cap > X.p()) throw InvalidArgument("foci_select: max_k out of range");
  return run_greedy(y, X, cap, /*stop_on_nonpositive=*/true, seed);
}

SelectionResult foci_order(const std::vector<double>& y, const DataMatrix& X, int k,
                           uint64_t seed) {
  if (k < 0 || k > X.p()) throw InvalidArgument("foci_order: k must lie in [0, p]");
  return run_greedy(y, X, k, /*stop_on_nonpositive=*/false, seed);
}

}  // namespace diffoci
