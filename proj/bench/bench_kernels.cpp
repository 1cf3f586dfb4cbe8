// Benchmark comparing the serial reference kernels with the OpenMP variants.
// Prints a table of timings plus speedups and verifies bit-identity on the
// benchmarked inputs.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "diffoci/kernels.hpp"
#include "diffoci/rank_core.hpp"
#include "diffoci/rng.hpp"
#include "diffoci/t_n_beta.hpp"

using namespace diffoci;

namespace {

Mat random_mat(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

template <typename F>
double time_best_of(F&& fn, int reps = 3) {
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, sec);
  }
  return best;
}

void report(const std::string& name, double serial, double parallel, bool identical) {
  std::printf("%-28s %10.4f ms %10.4f ms %7.2fx  %s\n", name.c_str(), serial * 1e3,
              parallel * 1e3, serial / parallel, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());
  std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");

  const int n = 2000, d = 10;
  const Mat a = random_mat(n, d, 1);

  {
    Mat s, p;
    const double ts = time_best_of([&] { kernels::serial::pairwise_sqdist(a, s); });
    const double tp = time_best_of([&] { kernels::pairwise_sqdist(a, p); });
    report("pairwise_sqdist n=2000", ts, tp, s.a == p.a);
  }
  {
    Mat s, p;
    const double ts = time_best_of([&] { kernels::serial::pairwise_dist_eps(a, 1e-12, s); });
    const double tp = time_best_of([&] { kernels::pairwise_dist_eps(a, 1e-12, p); });
    report("pairwise_dist n=2000", ts, tp, s.a == p.a);
  }
  {
    std::vector<int> s, p;
    const double ts = time_best_of([&] { kernels::serial::nn_argmin(a, 7, s); });
    const double tp = time_best_of([&] { kernels::nn_argmin(a, 7, p); });
    report("nn_argmin n=2000", ts, tp, s == p);
  }
  {
    Mat dist;
    kernels::pairwise_dist_eps(a, 1e-12, dist);
    Mat s, p;
    const double ts =
        time_best_of([&] { kernels::serial::row_softmax_neg(dist, 5.0, 1e10, s); });
    const double tp = time_best_of([&] { kernels::row_softmax_neg(dist, 5.0, 1e10, p); });
    report("row_softmax n=2000", ts, tp, s.a == p.a);

    const Mat g = random_mat(n, n, 3);
    Mat gs(n, n), gp(n, n);
    const double tbs =
        time_best_of([&] { kernels::serial::row_softmax_neg_backward(s, g, 5.0, gs); });
    const double tbp = time_best_of([&] { kernels::row_softmax_neg_backward(p, g, 5.0, gp); });
    report("row_softmax_backward", tbs, tbp, gs.a == gp.a);

    std::vector<double> r(n), ys, yp;
    for (int i = 0; i < n; ++i) r[i] = i + 1;
    const double tvs = time_best_of([&] { kernels::serial::matvec(s, r, ys); });
    const double tvp = time_best_of([&] { kernels::matvec(p, r, yp); });
    report("matvec n=2000", tvs, tvp, ys == yp);
  }
  {
    const Mat w = random_mat(d, 2 * d, 5);
    Mat s, p;
    const double ts = time_best_of([&] { kernels::serial::matmul(a, w, s); });
    const double tp = time_best_of([&] { kernels::matmul(a, w, p); });
    report("matmul 2000x10x20", ts, tp, s.a == p.a);
  }

  // End-to-end: one forward/backward of the differentiable estimator.
  {
    const int nb = 512;
    const Mat z0 = random_mat(nb, d, 9);
    std::vector<double> y(nb);
    Rng rng(11);
    for (double& v : y) v = rng.normal();
    const RankVector ranks = compute_ranks(y, 3);

    const auto run = [&] {
      Tape tape;
      const TensorId z = tape.leaf(z0, true);
      const TensorId t = t_n_beta(tape, ranks, z, nullptr, 5.0);
      tape.backward(tape.scale(t, -1.0));
    };
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double ts = time_best_of(run);
    omp_set_num_threads(saved);
    const double tp = time_best_of(run);
    report("t_n_beta fwd+bwd n=512", ts, tp, true);
  }
  return 0;
}
