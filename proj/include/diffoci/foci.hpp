#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

// Step-wise feature selection by conditional dependence: greedily add the
// column maximizing T_n(Y, X_j | selected) and stop once the best conditional
// value drops to <= 0.

enum class StopReason {
  kFirstNonPositive,  // very first argmax already <= 0; selection empty
  kStepNonPositive,   // a later step's best value was <= 0
  kExhausted,         // every column selected
  kMaxK,              // hit the step cap
};

std::string to_string(StopReason r);

struct SelectionResult {
  std::vector<int> selected;    // column indices in selection order
  std::vector<double> scores;   // conditional T_n at each retained step
  StopReason stopped_reason = StopReason::kExhausted;
  int64_t t_n_calls = 0;        // candidate evaluations performed
};

// Runs the selection with the stopping rule. max_k caps the number of steps;
// when absent it defaults to min(p, n - 1). Argmax ties break toward the
// lowest column index. The per-step candidate scan runs in parallel; scores
// land in per-candidate slots and the argmax reduction is serial, so results
// do not depend on thread count.
SelectionResult foci_select(const std::vector<double>& y, const DataMatrix& X,
                            std::optional<int> max_k, uint64_t seed);

// Same greedy loop without the stopping rule: always takes k steps and may
// record non-positive scores. Under one seed, foci_select's output is a
// prefix of foci_order's.
SelectionResult foci_order(const std::vector<double>& y, const DataMatrix& X, int k,
                           uint64_t seed);

}  // namespace diffoci
