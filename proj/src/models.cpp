#include "diffoci/models.hpp"

#include <cmath>

#include "diffoci/errors.hpp"
#include "diffoci/kernels.hpp"
#include "diffoci/rng.hpp"

namespace diffoci {

VecParam VecParam::init(int p, uint64_t seed) {
  if (p < 1) throw InvalidArgument("VecParam: p must be >= 1");
  VecParam v;
  v.init_seed = seed;
  v.theta.resize(p);
  Rng rng(derive_seed(seed, {kTagInit}));
  const double stddev = std::sqrt(0.1);
  for (int j = 0; j < p; ++j) v.theta[j] = rng.normal(1.0, stddev);
  return v;
}

MlpParam MlpParam::init(const std::vector<int>& dims, uint64_t seed) {
  if (dims.size() < 2) throw InvalidArgument("MlpParam: need at least input and output dims");
  for (int d : dims)
    if (d < 1) throw InvalidArgument("MlpParam: layer widths must be >= 1");
  MlpParam m;
  m.dims = dims;
  m.init_seed = seed;
  Rng rng(derive_seed(seed, {kTagInit}));
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    const int fan_in = dims[k];
    const int fan_out = dims[k + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Mat w(fan_in, fan_out);
    for (double& v : w.a) v = (2.0 * rng.uniform() - 1.0) * bound;
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(1, fan_out);
  }
  return m;
}

std::vector<int> default_mlp_dims(int input_width, const std::vector<int>& hidden) {
  std::vector<int> dims;
  dims.push_back(input_width);
  if (hidden.empty()) {
    dims.push_back(2 * input_width);
  } else {
    for (int h : hidden) dims.push_back(h);
  }
  dims.push_back(input_width);
  return dims;
}

VecForward vec_forward(Tape& tape, const VecParam& p, const Mat& X) {
  if (static_cast<int>(p.theta.size()) != X.cols)
    throw InvalidArgument("vec_forward: theta length must equal feature count");
  VecForward f;
  f.theta = tape.leaf(Mat::from_vector(p.theta), /*requires_grad=*/true);
  f.out = tape.col_scale(tape.constant(X), f.theta);
  return f;
}

MlpForward mlp_forward(Tape& tape, const MlpParam& p, const Mat& X) {
  if (p.dims.empty() || X.cols != p.dims.front())
    throw InvalidArgument("mlp_forward: input width mismatch");
  MlpForward f;
  TensorId h = tape.constant(X);
  f.features = h;
  const int layers = p.layer_count();
  for (int k = 0; k < layers; ++k) {
    const TensorId w = tape.leaf(p.weights[k], true);
    const TensorId b = tape.leaf(p.biases[k], true);
    f.weight_ids.push_back(w);
    f.bias_ids.push_back(b);
    h = tape.linear(h, w, b);
    if (k + 1 < layers) {
      h = tape.relu(h);
      f.features = h;  // post-activation penultimate output
    }
  }
  f.out = h;
  return f;
}

Mat vec_apply(const VecParam& p, const Mat& X) {
  if (static_cast<int>(p.theta.size()) != X.cols)
    throw InvalidArgument("vec_apply: theta length must equal feature count");
  Mat out = X;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) *= p.theta[j];
  return out;
}

namespace {

Mat mlp_apply_upto(const MlpParam& p, const Mat& X, bool stop_at_features) {
  Mat h = X;
  const int layers = p.layer_count();
  const int last_hidden = layers - 1;  // index of the final affine layer
  for (int k = 0; k < layers; ++k) {
    if (stop_at_features && k == last_hidden) break;
    Mat out;
    kernels::matmul(h, p.weights[k], out);
    for (int i = 0; i < out.rows; ++i)
      for (int j = 0; j < out.cols; ++j) out.at(i, j) += p.biases[k].at(0, j);
    if (k + 1 < layers)
      for (double& v : out.a) v = v > 0.0 ? v : 0.0;
    h = std::move(out);
  }
  return h;
}

}  // namespace

Mat mlp_apply(const MlpParam& p, const Mat& X) { return mlp_apply_upto(p, X, false); }

Mat mlp_apply_features(const MlpParam& p, const Mat& X) { return mlp_apply_upto(p, X, true); }

}  // namespace diffoci
