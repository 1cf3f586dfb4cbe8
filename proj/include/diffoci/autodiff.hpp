#pragma once

#include <functional>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

// Reverse-mode automatic differentiation over small dense tensors.
//
// A Tape owns the computation graph; ops append nodes in construction order,
// which is a topological order, so backward() is a single reverse sweep that
// visits each node exactly once. Tensors are referenced by index. Nodes
// created from constants carry no backward closure and their grad stays zero.
//
// One tape services one forward/backward pass; construction and backward are
// single-threaded per tape (distinct tapes may live on distinct threads).
// The dense kernels inside ops parallelize internally with deterministic
// per-row reductions.

using TensorId = int;

class Tape {
 public:
  struct Node {
    Mat value;
    Mat grad;                 // same shape as value; zero until backward
    bool requires_grad = false;
    std::vector<TensorId> parents;
    std::function<void(Tape&)> backward_fn;  // empty for constants/leaves
  };

  TensorId leaf(Mat v, bool requires_grad);
  TensorId constant(Mat v) { return leaf(std::move(v), false); }

  // Elementwise and reduction ops.
  TensorId add(TensorId a, TensorId b);
  TensorId sub(TensorId a, TensorId b);
  TensorId mul(TensorId a, TensorId b);
  TensorId scale(TensorId a, double c);
  TensorId sum(TensorId a);            // 1x1
  TensorId relu(TensorId a);

  // out = x * W + 1 b   (x: n x d, W: d x h, b: 1 x h broadcast over rows).
  TensorId linear(TensorId x, TensorId w, TensorId b);

  // out[i][j] = theta[j] * X[i][j]   (theta: p x 1, X: n x p).
  TensorId col_scale(TensorId x, TensorId theta);

  // [left | right] with a constant left block (may have zero columns).
  TensorId hcat_const_left(const Mat& left, TensorId right);

  // M[i][j] = sqrt(||A_i - A_j||^2 + eps_dist); eps keeps the gradient finite
  // at coincident rows.
  static constexpr double kEpsDist = 1e-12;
  TensorId pairwise_dist(TensorId a);

  // Row-stochastic softmax of -beta * (M + lambda I) with
  // lambda = max(1e10, max M + eps_mask). lambda is treated as a constant.
  static constexpr double kEpsMask = 1e-6;
  TensorId soft_neighbors(TensorId m, double beta);

  // out = A x for a constant vector x (n x n times n -> n x 1).
  TensorId matvec_const(TensorId a, std::vector<double> x);

  // out_i = min(c_i, u_i) against a constant vector c. The gradient follows
  // the selected branch; exact ties route it to u.
  TensorId min_with_const(TensorId u, std::vector<double> c);

  // Weighted binary cross-entropy with logits: sum_i w_i * softplus-form loss.
  TensorId bce_with_logits(TensorId logits, std::vector<double> targets,
                           std::vector<double> weights);

  // Scalar node a * m + c (a must be 1x1).
  TensorId affine_scalar(TensorId a, double m, double c);

  // Accumulates d(loss)/d(node) into every requires_grad node. loss must be
  // scalar; calling twice on one tape throws DoubleBackward.
  void backward(TensorId loss);

  const Mat& value(TensorId id) const { return nodes_[id].value; }
  const Mat& grad(TensorId id) const { return nodes_[id].grad; }
  bool requires_grad(TensorId id) const { return nodes_[id].requires_grad; }
  const Node& node(TensorId id) const { return nodes_[id]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Computed lambda of the most recent soft_neighbors call (for tests).
  double last_lambda() const { return last_lambda_; }

 private:
  TensorId push(Mat value, std::vector<TensorId> parents, std::function<void(Tape&)> fn);
  Mat& grad_ref(TensorId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  bool backward_ran_ = false;
  double last_lambda_ = 0.0;
};

}  // namespace diffoci
