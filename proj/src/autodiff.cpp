#include "diffoci/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "diffoci/errors.hpp"
#include "diffoci/kernels.hpp"

namespace diffoci {

namespace {

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

TensorId Tape::push(Mat value, std::vector<TensorId> parents, std::function<void(Tape&)> fn) {
  Node node;
  node.value = std::move(value);
  node.grad = Mat(node.value.rows, node.value.cols);
  node.requires_grad = false;
  for (TensorId p : parents) node.requires_grad = node.requires_grad || nodes_[p].requires_grad;
  node.parents = std::move(parents);
  if (node.requires_grad) node.backward_fn = std::move(fn);
  nodes_.push_back(std::move(node));
  return static_cast<TensorId>(nodes_.size() - 1);
}

TensorId Tape::leaf(Mat v, bool requires_grad) {
  Node node;
  node.value = std::move(v);
  node.grad = Mat(node.value.rows, node.value.cols);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return static_cast<TensorId>(nodes_.size() - 1);
}

TensorId Tape::add(TensorId a, TensorId b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows != vb.rows || va.cols != vb.cols) throw InvalidArgument("add: shape mismatch");
  Mat out = va;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] += vb.a[i];
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a, b}, [self, a, b](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (t.nodes_[a].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[a].grad.a[i] += g.a[i];
    if (t.nodes_[b].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[b].grad.a[i] += g.a[i];
  });
}

TensorId Tape::sub(TensorId a, TensorId b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows != vb.rows || va.cols != vb.cols) throw InvalidArgument("sub: shape mismatch");
  Mat out = va;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] -= vb.a[i];
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a, b}, [self, a, b](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (t.nodes_[a].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[a].grad.a[i] += g.a[i];
    if (t.nodes_[b].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[b].grad.a[i] -= g.a[i];
  });
}

TensorId Tape::mul(TensorId a, TensorId b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows != vb.rows || va.cols != vb.cols) throw InvalidArgument("mul: shape mismatch");
  Mat out = va;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] *= vb.a[i];
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a, b}, [self, a, b](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (t.nodes_[a].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[a].grad.a[i] += g.a[i] * t.nodes_[b].value.a[i];
    if (t.nodes_[b].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[b].grad.a[i] += g.a[i] * t.nodes_[a].value.a[i];
  });
}

TensorId Tape::scale(TensorId a, double c) {
  Mat out = value(a);
  for (double& v : out.a) v *= c;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a}, [self, a, c](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (t.nodes_[a].requires_grad)
      for (size_t i = 0; i < g.size(); ++i) t.nodes_[a].grad.a[i] += c * g.a[i];
  });
}

TensorId Tape::sum(TensorId a) {
  double s = 0.0;
  for (double v : value(a).a) s += v;
  Mat out(1, 1);
  out.a[0] = s;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a}, [self, a](Tape& t) {
    const double g = t.nodes_[self].grad.a[0];
    if (t.nodes_[a].requires_grad)
      for (double& v : t.nodes_[a].grad.a) v += g;
  });
}

TensorId Tape::relu(TensorId a) {
  Mat out = value(a);
  for (double& v : out.a) v = v > 0.0 ? v : 0.0;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a}, [self, a](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (!t.nodes_[a].requires_grad) return;
    const Mat& v = t.nodes_[a].value;
    for (size_t i = 0; i < g.size(); ++i)
      if (v.a[i] > 0.0) t.nodes_[a].grad.a[i] += g.a[i];
  });
}

TensorId Tape::linear(TensorId x, TensorId w, TensorId b) {
  const Mat& vx = value(x);
  const Mat& vw = value(w);
  const Mat& vb = value(b);
  if (vx.cols != vw.rows || vb.rows != 1 || vb.cols != vw.cols)
    throw InvalidArgument("linear: shape mismatch");
  Mat out;
  kernels::matmul(vx, vw, out);
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += vb.at(0, j);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {x, w, b}, [self, x, w, b](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    if (t.nodes_[x].requires_grad)
      kernels::matmul_a_bt_accum(g, t.nodes_[w].value, t.nodes_[x].grad);
    if (t.nodes_[w].requires_grad)
      kernels::matmul_at_b_accum(t.nodes_[x].value, g, t.nodes_[w].grad);
    if (t.nodes_[b].requires_grad) {
      Mat& gb = t.nodes_[b].grad;
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
    }
  });
}

TensorId Tape::col_scale(TensorId x, TensorId theta) {
  const Mat& vx = value(x);
  const Mat& vt = value(theta);
  if (vt.cols != 1 || vt.rows != vx.cols) throw InvalidArgument("col_scale: theta must be p x 1");
  Mat out = vx;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) *= vt.at(j, 0);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {x, theta}, [self, x, theta](Tape& t) {
    const Mat& g = t.nodes_[self].grad;
    const Mat& vx2 = t.nodes_[x].value;
    const Mat& vt2 = t.nodes_[theta].value;
    if (t.nodes_[x].requires_grad) {
      Mat& gx = t.nodes_[x].grad;
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) gx.at(i, j) += g.at(i, j) * vt2.at(j, 0);
    }
    if (t.nodes_[theta].requires_grad) {
      Mat& gt = t.nodes_[theta].grad;
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) gt.at(j, 0) += g.at(i, j) * vx2.at(i, j);
    }
  });
}

TensorId Tape::hcat_const_left(const Mat& left, TensorId right) {
  const Mat& vr = value(right);
  Mat out = left.cols == 0 ? vr : Mat::hcat(left, vr);
  const int off = left.cols;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {right}, [self, right, off](Tape& t) {
    if (!t.nodes_[right].requires_grad) return;
    const Mat& g = t.nodes_[self].grad;
    Mat& gr = t.nodes_[right].grad;
    for (int i = 0; i < gr.rows; ++i)
      for (int j = 0; j < gr.cols; ++j) gr.at(i, j) += g.at(i, off + j);
  });
}

TensorId Tape::pairwise_dist(TensorId a) {
  Mat out;
  kernels::pairwise_dist_eps(value(a), kEpsDist, out);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a}, [self, a](Tape& t) {
    if (!t.nodes_[a].requires_grad) return;
    kernels::pairwise_dist_eps_backward(t.nodes_[a].value, t.nodes_[self].value,
                                        t.nodes_[self].grad, t.nodes_[a].grad);
  });
}

TensorId Tape::soft_neighbors(TensorId m, double beta) {
  if (beta <= 0.0) throw InvalidArgument("soft_neighbors: beta must be positive");
  const Mat& vm = value(m);
  if (vm.rows != vm.cols) throw InvalidArgument("soft_neighbors: matrix must be square");
  if (!vm.all_finite()) throw NumericalError("soft_neighbors: non-finite distance matrix");
  double mx = vm.a.empty() ? 0.0 : vm.a[0];
  for (double v : vm.a) mx = std::max(mx, v);
  const double lambda = std::max(1e10, mx + kEpsMask);
  last_lambda_ = lambda;
  Mat out;
  kernels::row_softmax_neg(vm, beta, lambda, out);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {m}, [self, m, beta](Tape& t) {
    if (!t.nodes_[m].requires_grad) return;
    kernels::row_softmax_neg_backward(t.nodes_[self].value, t.nodes_[self].grad, beta,
                                      t.nodes_[m].grad);
  });
}

TensorId Tape::matvec_const(TensorId a, std::vector<double> x) {
  const Mat& va = value(a);
  if (va.cols != static_cast<int>(x.size())) throw InvalidArgument("matvec_const: size mismatch");
  std::vector<double> y;
  kernels::matvec(va, x, y);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(Mat::from_vector(y), {a},
              [self, a, vec = std::move(x)](Tape& t) {
                if (!t.nodes_[a].requires_grad) return;
                const Mat& g = t.nodes_[self].grad;
                Mat& ga = t.nodes_[a].grad;
                for (int i = 0; i < ga.rows; ++i) {
                  const double gi = g.a[i];
                  if (gi == 0.0) continue;
                  double* row = ga.row(i);
                  for (int j = 0; j < ga.cols; ++j) row[j] += gi * vec[j];
                }
              });
}

TensorId Tape::min_with_const(TensorId u, std::vector<double> c) {
  const Mat& vu = value(u);
  if (vu.cols != 1 || vu.rows != static_cast<int>(c.size()))
    throw InvalidArgument("min_with_const: expects an n x 1 tensor");
  Mat out = vu;
  for (int i = 0; i < out.rows; ++i) out.a[i] = std::min(c[i], out.a[i]);
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {u},
              [self, u, cv = std::move(c)](Tape& t) {
                if (!t.nodes_[u].requires_grad) return;
                const Mat& g = t.nodes_[self].grad;
                const Mat& vu2 = t.nodes_[u].value;
                for (int i = 0; i < vu2.rows; ++i)
                  if (vu2.a[i] <= cv[i]) t.nodes_[u].grad.a[i] += g.a[i];
              });
}

TensorId Tape::bce_with_logits(TensorId logits, std::vector<double> targets,
                               std::vector<double> weights) {
  const Mat& vz = value(logits);
  if (vz.cols != 1 || vz.rows != static_cast<int>(targets.size()) ||
      targets.size() != weights.size())
    throw InvalidArgument("bce_with_logits: shape mismatch");
  // loss_i = max(z, 0) - z*y + log(1 + exp(-|z|)); numerically stable form.
  double total = 0.0;
  for (int i = 0; i < vz.rows; ++i) {
    const double z = vz.a[i];
    total += weights[i] *
             (std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::fabs(z))));
  }
  Mat out(1, 1);
  out.a[0] = total;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {logits},
              [self, logits, tv = std::move(targets), wv = std::move(weights)](Tape& t) {
                if (!t.nodes_[logits].requires_grad) return;
                const double g = t.nodes_[self].grad.a[0];
                const Mat& vz2 = t.nodes_[logits].value;
                for (int i = 0; i < vz2.rows; ++i)
                  t.nodes_[logits].grad.a[i] += g * wv[i] * (sigmoid(vz2.a[i]) - tv[i]);
              });
}

TensorId Tape::affine_scalar(TensorId a, double m, double c) {
  const Mat& va = value(a);
  if (!va.is_scalar()) throw InvalidArgument("affine_scalar: expects a scalar node");
  Mat out(1, 1);
  out.a[0] = va.a[0] * m + c;
  const TensorId self = static_cast<TensorId>(nodes_.size());
  return push(std::move(out), {a}, [self, a, m](Tape& t) {
    if (t.nodes_[a].requires_grad) t.nodes_[a].grad.a[0] += m * t.nodes_[self].grad.a[0];
  });
}

void Tape::backward(TensorId loss) {
  if (backward_ran_) throw DoubleBackward("backward already ran on this tape");
  if (!value(loss).is_scalar()) throw NonScalarLoss("backward requires a scalar loss node");
  if (!nodes_[loss].requires_grad)
    throw InvalidArgument("backward: loss does not depend on any trainable leaf");
  backward_ran_ = true;
  nodes_[loss].grad.a[0] = 1.0;
  for (TensorId id = loss; id >= 0; --id) {
    const Node& node = nodes_[id];
    if (node.backward_fn) node.backward_fn(*this);
  }
}

}  // namespace diffoci
