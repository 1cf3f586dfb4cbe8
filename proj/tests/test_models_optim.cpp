#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "diffoci/errors.hpp"
#include "diffoci/models.hpp"
#include "diffoci/optim.hpp"
#include "diffoci/rng.hpp"

using namespace diffoci;

namespace {

Mat random_mat(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("vec_forward identity and single-column masks") {
  const Mat x = random_mat(6, 4, 1);
  VecParam ones;
  ones.theta = {1, 1, 1, 1};
  Tape t;
  const VecForward f = vec_forward(t, ones, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK(t.value(f.out).a[i] == x.a[i]);

  VecParam e1;
  e1.theta = {1, 0, 0, 0};
  Tape t2;
  const VecForward f2 = vec_forward(t2, e1, x);
  for (int i = 0; i < 6; ++i) {
    CHECK(t2.value(f2.out).at(i, 0) == x.at(i, 0));
    for (int j = 1; j < 4; ++j) CHECK(t2.value(f2.out).at(i, j) == 0.0);
  }
}

TEST_CASE("vec_forward gradient check") {
  const Mat x = random_mat(5, 3, 2);
  VecParam p;
  p.theta = {0.5, -1.2, 2.0};
  Tape t;
  const VecForward f = vec_forward(t, p, x);
  t.backward(t.sum(t.mul(f.out, f.out)));

  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    VecParam up = p, down = p;
    up.theta[j] += h;
    down.theta[j] -= h;
    auto value = [&](const VecParam& q) {
      Tape tt;
      const VecForward ff = vec_forward(tt, q, x);
      return tt.value(tt.sum(tt.mul(ff.out, ff.out))).scalar();
    };
    const double want = (value(up) - value(down)) / (2 * h);
    CHECK(t.grad(f.theta).a[j] == doctest::Approx(want).epsilon(1e-4));
  }
}

TEST_CASE("vec init draws theta around one") {
  const VecParam p = VecParam::init(2000, 9);
  double mean = 0, var = 0;
  for (double v : p.theta) mean += v;
  mean /= p.theta.size();
  for (double v : p.theta) var += (v - mean) * (v - mean);
  var /= p.theta.size();
  CHECK(std::fabs(mean - 1.0) < 0.05);
  CHECK(std::fabs(var - 0.1) < 0.02);
}

TEST_CASE("mlp_forward zero weights give zero output") {
  MlpParam p = MlpParam::init({3, 6, 3}, 1);
  for (Mat& w : p.weights)
    for (double& v : w.a) v = 0.0;
  const Mat x = random_mat(4, 3, 3);
  Tape t;
  const MlpForward f = mlp_forward(t, p, x);
  for (double v : t.value(f.out).a) CHECK(v == 0.0);
}

TEST_CASE("identity single layer is transparent on positive inputs") {
  MlpParam p;
  p.dims = {3, 3};
  Mat w(3, 3);
  for (int i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  p.weights = {w};
  p.biases = {Mat(1, 3)};
  Mat x = random_mat(5, 3, 4);
  for (double& v : x.a) v = std::fabs(v);  // positives
  const Mat out = mlp_apply(p, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK(out.a[i] == doctest::Approx(x.a[i]));
}

TEST_CASE("mlp_forward gradient check against finite differences") {
  MlpParam p = MlpParam::init({3, 4, 3}, 5);
  const Mat x = random_mat(6, 3, 6);

  Tape t;
  const MlpForward f = mlp_forward(t, p, x);
  t.backward(t.sum(t.mul(f.out, f.out)));

  auto value = [&](const MlpParam& q) {
    Tape tt;
    const MlpForward ff = mlp_forward(tt, q, x);
    return tt.value(tt.sum(tt.mul(ff.out, ff.out))).scalar();
  };
  const double h = 1e-6;
  for (int layer = 0; layer < 2; ++layer) {
    for (size_t i = 0; i < p.weights[layer].size(); i += 3) {
      MlpParam up = p, down = p;
      up.weights[layer].a[i] += h;
      down.weights[layer].a[i] -= h;
      const double want = (value(up) - value(down)) / (2 * h);
      CHECK(t.grad(f.weight_ids[layer]).a[i] == doctest::Approx(want).epsilon(1e-3));
    }
    MlpParam up = p, down = p;
    up.biases[layer].a[0] += h;
    down.biases[layer].a[0] -= h;
    const double want = (value(up) - value(down)) / (2 * h);
    CHECK(t.grad(f.bias_ids[layer]).a[0] == doctest::Approx(want).epsilon(1e-3));
  }
}

TEST_CASE("mlp_apply matches the tape forward") {
  const MlpParam p = MlpParam::init({4, 8, 4}, 11);
  const Mat x = random_mat(7, 4, 12);
  Tape t;
  const MlpForward f = mlp_forward(t, p, x);
  const Mat direct = mlp_apply(p, x);
  for (size_t i = 0; i < direct.size(); ++i) CHECK(direct.a[i] == t.value(f.out).a[i]);
  const Mat feats = mlp_apply_features(p, x);
  for (size_t i = 0; i < feats.size(); ++i) CHECK(feats.a[i] == t.value(f.features).a[i]);
}

TEST_CASE("optimizer no-ops with zero gradient and zero decay") {
  Mat p(2, 2);
  p.a = {1, 2, 3, 4};
  const Mat zero(2, 2);
  for (OptimKind kind : {OptimKind::kSgd, OptimKind::kAdam}) {
    Mat q = p;
    OptimizerState opt = OptimizerState::make(kind, 0.1, 0.0);
    opt.step({&q}, {&zero});
    for (size_t i = 0; i < q.size(); ++i) CHECK(q.a[i] == p.a[i]);
  }
}

TEST_CASE("sgd scalar arithmetic") {
  Mat p(1, 1);
  p.a = {1.0};
  Mat g(1, 1);
  g.a = {1.0};
  OptimizerState opt = OptimizerState::make(OptimKind::kSgd, 0.1, 0.0);
  opt.step({&p}, {&g});
  CHECK(p.a[0] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("adam first step moves against the gradient sign") {
  for (double g0 : {3.0, -0.002, 12000.0}) {
    Mat p(1, 1);
    p.a = {0.5};
    Mat g(1, 1);
    g.a = {g0};
    OptimizerState opt = OptimizerState::make(OptimKind::kAdam, 0.05, 0.0);
    opt.step({&p}, {&g});
    CHECK(((g0 > 0 && p.a[0] < 0.5) || (g0 < 0 && p.a[0] > 0.5)));
  }
}

TEST_CASE("adam converges on a scalar quadratic") {
  // Oracle: simulate f(x) = x^2, grad = 2x, from x = 1.
  Mat x(1, 1);
  x.a = {1.0};
  OptimizerState opt = OptimizerState::make(OptimKind::kAdam, 0.05, 0.0);
  for (int step = 0; step < 500; ++step) {
    Mat g(1, 1);
    g.a = {2.0 * x.a[0]};
    opt.step({&x}, {&g});
  }
  CHECK(std::fabs(x.a[0] * x.a[0]) < 1e-3);
}

TEST_CASE("optimizer rejects non-finite gradients") {
  Mat p(1, 1);
  Mat g(1, 1);
  g.a = {std::nan("")};
  OptimizerState opt = OptimizerState::make(OptimKind::kSgd, 0.1, 0.0);
  CHECK_THROWS_AS(opt.step({&p}, {&g}), NumericalError);
}

TEST_CASE("clip_params boundary and idempotence") {
  const std::vector<double> theta = {0.05, -0.2, 0.1};
  CHECK(clip_params(theta, 0.1) == std::vector<double>{0.0, -0.2, 0.0});
  CHECK(clip_params({0.0, -0.3, 0.2}, 0.0) == std::vector<double>{0.0, -0.3, 0.2});
  const std::vector<double> once = clip_params(theta, 0.1);
  CHECK(clip_params(once, 0.1) == once);
}

TEST_CASE("parameter checkpoints round-trip at full precision") {
  std::vector<NamedTensor> tensors;
  tensors.push_back({"theta", random_mat(1, 7, 31)});
  tensors.push_back({"w0", random_mat(3, 4, 32)});
  const std::string path = "params_roundtrip_test.txt";
  save_params(path, tensors);
  const std::vector<NamedTensor> back = load_params(path);
  REQUIRE(back.size() == tensors.size());
  for (size_t t = 0; t < tensors.size(); ++t) {
    CHECK(back[t].name == tensors[t].name);
    REQUIRE(back[t].value.size() == tensors[t].value.size());
    for (size_t i = 0; i < tensors[t].value.size(); ++i)
      CHECK(back[t].value.a[i] == tensors[t].value.a[i]);
  }
  std::remove(path.c_str());
}
