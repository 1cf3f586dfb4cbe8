#include "diffoci/optim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diffoci/errors.hpp"

namespace diffoci {

OptimizerState OptimizerState::make(OptimKind kind, double learning_rate, double weight_decay) {
  OptimizerState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  s.weight_decay = weight_decay;
  return s;
}

void OptimizerState::init_moments(const std::vector<Mat*>& params) {
  m.clear();
  v.clear();
  for (const Mat* p : params) {
    m.emplace_back(p->rows, p->cols);
    v.emplace_back(p->rows, p->cols);
  }
}

void OptimizerState::step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads) {
  if (params.size() != grads.size()) throw InvalidArgument("optimizer step: size mismatch");
  for (const Mat* g : grads)
    if (!g->all_finite()) throw NumericalError("optimizer step: non-finite gradient");

  if (kind == OptimKind::kSgd) {
    ++step_count;
    for (size_t t = 0; t < params.size(); ++t) {
      Mat& p = *params[t];
      const Mat& g = *grads[t];
      for (size_t i = 0; i < p.size(); ++i)
        p.a[i] -= learning_rate * (g.a[i] + weight_decay * p.a[i]);
    }
    return;
  }

  if (m.size() != params.size()) init_moments(params);
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (size_t t = 0; t < params.size(); ++t) {
    Mat& p = *params[t];
    const Mat& g = *grads[t];
    Mat& mt = m[t];
    Mat& vt = v[t];
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = g.a[i] + weight_decay * p.a[i];
      mt.a[i] = beta1 * mt.a[i] + (1.0 - beta1) * gi;
      vt.a[i] = beta2 * vt.a[i] + (1.0 - beta2) * gi * gi;
      const double mhat = mt.a[i] / bc1;
      const double vhat = vt.a[i] / bc2;
      p.a[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

std::vector<double> clip_params(const std::vector<double>& theta, double upsilon) {
  if (upsilon < 0.0) throw InvalidArgument("clip_params: upsilon must be >= 0");
  std::vector<double> out = theta;
  for (double& v : out)
    if (std::fabs(v) <= upsilon) v = 0.0;
  return out;
}

void clip_params_inplace(Mat& m, double upsilon) {
  if (upsilon < 0.0) throw InvalidArgument("clip_params: upsilon must be >= 0");
  for (double& v : m.a)
    if (std::fabs(v) <= upsilon) v = 0.0;
}

void save_params(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("save_params: cannot open " + path);
  out << "diffoci-params v1\n" << tensors.size() << "\n";
  char buf[40];
  for (const NamedTensor& t : tensors) {
    out << t.name << " " << t.value.rows << " " << t.value.cols << "\n";
    for (size_t i = 0; i < t.value.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.value.a[i]);
      out << buf << (i + 1 == t.value.size() ? "" : " ");
    }
    out << "\n";
  }
}

std::vector<NamedTensor> load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_params: cannot open " + path);
  std::string header, version;
  in >> header >> version;
  if (header != "diffoci-params" || version != "v1")
    throw InvalidArgument("load_params: unrecognized format");
  size_t count = 0;
  in >> count;
  std::vector<NamedTensor> tensors(count);
  for (NamedTensor& t : tensors) {
    int rows = 0, cols = 0;
    in >> t.name >> rows >> cols;
    if (!in || rows < 0 || cols < 0) throw InvalidArgument("load_params: corrupt record");
    t.value = Mat(rows, cols);
    for (double& v : t.value.a) in >> v;
    if (!in) throw InvalidArgument("load_params: truncated values");
  }
  return tensors;
}

}  // namespace diffoci
