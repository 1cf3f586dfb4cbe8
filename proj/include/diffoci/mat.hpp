#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "diffoci/errors.hpp"

namespace diffoci {

// Dense row-major matrix of doubles. Deliberately minimal: the library needs
// storage and indexing, not a linear-algebra DSL; the hot loops live in
// kernels.cpp.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
  size_t size() const { return a.size(); }
  bool is_scalar() const { return rows == 1 && cols == 1; }
  double scalar() const { return a[0]; }

  bool all_finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static Mat from_vector(const std::vector<double>& v) {
    Mat m(static_cast<int>(v.size()), 1);
    m.a = v;
    return m;
  }

  std::vector<double> col(int j) const {
    std::vector<double> out(rows);
    for (int i = 0; i < rows; ++i) out[i] = at(i, j);
    return out;
  }

  // Column-wise concatenation [left | right]; row counts must agree.
  static Mat hcat(const Mat& left, const Mat& right) {
    if (left.rows != right.rows)
      throw InvalidArgument("hcat: row count mismatch");
    Mat out(left.rows, left.cols + right.cols);
    for (int i = 0; i < left.rows; ++i) {
      double* dst = out.row(i);
      const double* l = left.row(i);
      const double* r = right.row(i);
      for (int j = 0; j < left.cols; ++j) dst[j] = l[j];
      for (int j = 0; j < right.cols; ++j) dst[left.cols + j] = r[j];
    }
    return out;
  }
};

// n x p predictor matrix with named columns.
struct DataMatrix {
  Mat values;
  std::vector<std::string> column_names;

  DataMatrix() = default;
  DataMatrix(Mat v, std::vector<std::string> names)
      : values(std::move(v)), column_names(std::move(names)) {
    validate();
  }

  int n() const { return values.rows; }
  int p() const { return values.cols; }

  void validate() const {
    if (values.rows < 2) throw InsufficientSamples("DataMatrix requires n >= 2");
    if (static_cast<int>(column_names.size()) != values.cols)
      throw InvalidArgument("DataMatrix: column_names length must equal p");
    if (!values.all_finite())
      throw NumericalError("DataMatrix: non-finite entry");
  }

  // Sub-matrix with the given columns, in the given order.
  DataMatrix select_columns(const std::vector<int>& idx) const {
    Mat out(values.rows, static_cast<int>(idx.size()));
    std::vector<std::string> names;
    names.reserve(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) {
      const int j = idx[k];
      if (j < 0 || j >= values.cols) throw InvalidArgument("select_columns: index out of range");
      for (int i = 0; i < values.rows; ++i) out.at(i, static_cast<int>(k)) = values.at(i, j);
      names.push_back(column_names[j]);
    }
    return DataMatrix(std::move(out), std::move(names));
  }
};

inline std::vector<std::string> default_column_names(int p, const std::string& prefix = "x") {
  std::vector<std::string> names(p);
  for (int j = 0; j < p; ++j) names[j] = prefix + std::to_string(j);
  return names;
}

}  // namespace diffoci
