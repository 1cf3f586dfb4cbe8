#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffoci/autodiff.hpp"
#include "diffoci/mat.hpp"

namespace diffoci {

// Trainable parameterizations f_theta: a vector mask theta (.) X and a small
// rectifier MLP whose output width equals its input width.

struct VecParam {
  std::vector<double> theta;
  uint64_t init_seed = 0;

  // theta_j ~ N(1, variance 0.1).
  static VecParam init(int p, uint64_t seed);
};

struct MlpParam {
  std::vector<Mat> weights;  // layer k: dims[k] x dims[k+1]
  std::vector<Mat> biases;   // 1 x dims[k+1]
  std::vector<int> dims;     // input, hidden..., output
  uint64_t init_seed = 0;

  // Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static MlpParam init(const std::vector<int>& dims, uint64_t seed);

  int layer_count() const { return static_cast<int>(weights.size()); }
};

// Default shape used by NN runs: one hidden layer at double the input width,
// output width equal to input width.
std::vector<int> default_mlp_dims(int input_width, const std::vector<int>& hidden);

struct VecForward {
  TensorId out;    // n x p
  TensorId theta;  // p x 1 leaf
};
// out[i][j] = theta_j * X[i][j], differentiable in theta.
VecForward vec_forward(Tape& tape, const VecParam& p, const Mat& X);

struct MlpForward {
  TensorId out;       // final affine output
  TensorId features;  // post-activation output of the last hidden layer; when
                      // there is no hidden layer this is the input constant
  std::vector<TensorId> weight_ids;
  std::vector<TensorId> bias_ids;
};
// Affine-rectifier chain with a final affine layer, differentiable in all
// weights and biases.
MlpForward mlp_forward(Tape& tape, const MlpParam& p, const Mat& X);

// Forward-only inference paths.
Mat vec_apply(const VecParam& p, const Mat& X);
Mat mlp_apply(const MlpParam& p, const Mat& X);
// Output of the last hidden activation (df2 feature extractor).
Mat mlp_apply_features(const MlpParam& p, const Mat& X);

}  // namespace diffoci
