#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

// Adam (classic L2-coupled weight decay: the decay term is folded into the
// gradient before the moment update) and plain SGD with weight decay.

enum class OptimKind { kAdam, kSgd };

struct OptimizerState {
  OptimKind kind = OptimKind::kAdam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;
  std::vector<Mat> m;  // first moments, per tensor
  std::vector<Mat> v;  // second moments, per tensor

  static OptimizerState make(OptimKind kind, double learning_rate, double weight_decay);

  // Allocates moment buffers matching the parameter shapes (adam only).
  void init_moments(const std::vector<Mat*>& params);

  // In-place update. Throws NumericalError on non-finite gradients.
  void step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads);
};

// Zeroes every entry with |theta_i| <= upsilon (boundary inclusive).
std::vector<double> clip_params(const std::vector<double>& theta, double upsilon);
void clip_params_inplace(Mat& m, double upsilon);

// Flat text checkpoint: one record per tensor (name, shape, row-major values
// at full precision).
struct NamedTensor {
  std::string name;
  Mat value;
};
void save_params(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_params(const std::string& path);

}  // namespace diffoci
