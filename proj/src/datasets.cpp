#include "diffoci/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "diffoci/errors.hpp"
#include "diffoci/rng.hpp"

namespace diffoci {

std::vector<int> Dataset::indices_of(Split s) const {
  std::vector<int> idx;
  for (int i = 0; i < n(); ++i)
    if (split_tags[i] == s) idx.push_back(i);
  return idx;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.split_dependent = split_dependent;
  Mat xv(static_cast<int>(rows.size()), X.p());
  out.y.resize(rows.size());
  out.split_tags.resize(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    const int i = rows[k];
    for (int j = 0; j < X.p(); ++j) xv.at(static_cast<int>(k), j) = X.values.at(i, j);
    out.y[k] = y[i];
    out.split_tags[k] = split_tags[i];
  }
  out.X = DataMatrix(std::move(xv), X.column_names);
  if (groups) {
    std::vector<int> g(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) g[k] = (*groups)[rows[k]];
    out.groups = std::move(g);
  }
  if (sensitive) {
    Mat sv(static_cast<int>(rows.size()), sensitive->p());
    for (size_t k = 0; k < rows.size(); ++k)
      for (int j = 0; j < sensitive->p(); ++j)
        sv.at(static_cast<int>(k), j) = sensitive->values.at(rows[k], j);
    out.sensitive = DataMatrix(std::move(sv), sensitive->column_names);
  }
  return out;
}

std::vector<Split> assign_splits(int n, uint64_t seed) {
  const int n_train = static_cast<int>(std::lround(0.75 * n));
  const int n_val = static_cast<int>(std::lround(0.15 * n));
  Rng rng(seed);
  const std::vector<int> perm = rng.permutation(n);
  std::vector<Split> tags(n, Split::kTest);
  for (int k = 0; k < n; ++k) {
    if (k < n_train)
      tags[perm[k]] = Split::kTrain;
    else if (k < n_train + n_val)
      tags[perm[k]] = Split::kVal;
  }
  return tags;
}

// ---- functional dataset -----------------------------------------------------

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return v;
}

constexpr int kFnGrid = 100;
constexpr int kFnBase = 240;
constexpr int kFnNoisePasses = 4;

}  // namespace

std::vector<FunctionalColumnSpec> functional_column_specs() {
  const std::vector<double> as = linspace(0.1, 2.0, 4);
  const std::vector<double> bs = linspace(0.1, 2.0, 15);
  const std::vector<double> cs = linspace(-1.0, 1.0, 4);

  // All 240 sinusoids of the (a, b, c) product in lexicographic order, with
  // two sign transforms applied in sequence:
  //   1. columns i*15+j (i in {0,1}, j in 0..14) scaled by (-1)^(i+1);
  //   2. after permuting the parameter roles to (c, a, b), columns i*15+j of
  //      that ordering (i.e. c = c_0, a in {a_0, a_1}) negated.
  std::vector<FunctionalColumnSpec> specs(kFnBase);
  for (int ia = 0; ia < 4; ++ia)
    for (int jb = 0; jb < 15; ++jb)
      for (int kc = 0; kc < 4; ++kc) {
        FunctionalColumnSpec sp;
        sp.a = as[ia];
        sp.b = bs[jb];
        sp.c = cs[kc];
        sp.scale = 1.0;
        specs[ia * 60 + jb * 4 + kc] = sp;
      }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 15; ++j) specs[i * 15 + j].scale *= (i % 2 == 0) ? -1.0 : 1.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 15; ++j) {
      // position i*15+j of the (c, a, b) ordering, mapped back to (a, b, c)
      const int v = i * 15 + j;
      const int kc = v / 60, ia = (v % 60) / 15, jb = v % 15;
      specs[ia * 60 + jb * 4 + kc].scale *= -1.0;
    }
  return specs;
}

Mat functional_base_features() {
  const std::vector<double> x = linspace(-6.0, 6.0, kFnGrid);
  const std::vector<FunctionalColumnSpec> specs = functional_column_specs();
  Mat base(kFnGrid, kFnBase);
  for (int i = 0; i < kFnGrid; ++i)
    for (int k = 0; k < kFnBase; ++k) {
      const FunctionalColumnSpec& s = specs[k];
      base.at(i, k) = s.scale * s.a * std::sin(s.b * x[i] + s.c);
    }
  return base;
}

Dataset gen_functional(uint64_t seed) {
  const Mat base = functional_base_features();
  const std::vector<double> x = linspace(-6.0, 6.0, kFnGrid);
  Rng rng(derive_seed(seed, {kTagData}));

  Dataset ds;
  Mat xv = base;
  for (int pass = 0; pass < kFnNoisePasses; ++pass)
    for (double& v : xv.a) v += 0.1 * rng.normal();
  ds.X = DataMatrix(std::move(xv), default_column_names(kFnBase, "f"));
  ds.y.resize(kFnGrid);
  for (int i = 0; i < kFnGrid; ++i) ds.y[i] = std::sin(x[i]);
  ds.split_tags = assign_splits(kFnGrid, derive_seed(seed, {kTagSplit}));
  return ds;
}

// ---- toy datasets -----------------------------------------------------------

ToyKind toy_kind_from_string(const std::string& s) {
  if (s == "toy1") return ToyKind::kToy1;
  if (s == "toy2") return ToyKind::kToy2;
  if (s == "toy3") return ToyKind::kToy3;
  if (s == "foci_toy") return ToyKind::kFociToy;
  throw InvalidArgument("unknown toy kind: " + s);
}

Dataset gen_toy(ToyKind kind, uint64_t seed, std::optional<double> noise_std) {
  int n = 2000;
  int p = 10;
  double sigma_x = 0.1;
  if (kind == ToyKind::kToy3) {
    // Unit-scale inputs: squared pairwise products of 0.1-scale draws sit at
    // ~1e-8, which would leave the response indistinguishable from its noise.
    n = 5000;
    sigma_x = 1.0;
  }
  if (kind == ToyKind::kFociToy) {
    n = 2000;
    p = 100;
    sigma_x = 1.0;
  }
  const double sigma_eps = noise_std.value_or(0.1);

  Rng rng(derive_seed(seed, {kTagData}));
  Mat xv(n, p);
  for (double& v : xv.a) v = sigma_x * rng.normal();

  Dataset ds;
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double* r = xv.row(i);
    double val = 0.0;
    switch (kind) {
      case ToyKind::kToy1:
        val = std::sin(r[0]) + 2.0 * std::sin(r[1]) + 3.0 * std::sin(r[2]) +
              sigma_eps * rng.normal();
        break;
      case ToyKind::kToy2:
        val = std::sin(r[0] + 2.0 * r[1] + 3.0 * r[2]) + sigma_eps * rng.normal();
        break;
      case ToyKind::kToy3: {
        const double t = (r[0] * r[1]) * (r[0] * r[1]) + (r[1] * r[2]) * (r[1] * r[2]) +
                         (r[0] * r[2]) * (r[0] * r[2]);
        val = std::sin(t) + sigma_eps * rng.normal();
        break;
      }
      case ToyKind::kFociToy:
        val = r[0] * r[1] + std::sin(r[0] * r[2]);
        break;
    }
    ds.y[i] = val;
  }
  ds.X = DataMatrix(std::move(xv), default_column_names(p));
  ds.split_tags = assign_splits(n, derive_seed(seed, {kTagSplit}));
  return ds;
}

// ---- spurious-correlation dataset -------------------------------------------

Dataset gen_spurious(uint64_t seed, const SpuriousConfig& cfg) {
  if (cfg.train_corr < 0.5 || cfg.train_corr > 1.0)
    throw InvalidArgument("gen_spurious: train_corr must lie in [0.5, 1]");
  if (cfg.n < 4 || cfg.p_core < 1 || cfg.p_spur < 1)
    throw InvalidArgument("gen_spurious: bad sizes");

  const int n = cfg.n;
  Dataset ds;
  ds.split_dependent = true;
  ds.split_tags = assign_splits(n, derive_seed(seed, {kTagSplit}));
  Rng rng(derive_seed(seed, {kTagData}));

  // Exactly balanced labels at random positions.
  std::vector<int> yb(n, 0);
  for (int i = 0; i < n / 2; ++i) yb[i] = 1;
  rng.shuffle(yb);

  std::vector<int> g(n, 0);
  const int p = cfg.p_core + cfg.p_spur;
  Mat xv(n, p);
  for (int i = 0; i < n; ++i) {
    if (ds.split_tags[i] == Split::kTest) {
      g[i] = rng.uniform() < 0.5 ? 1 : 0;
    } else {
      g[i] = rng.uniform() < cfg.train_corr ? yb[i] : 1 - yb[i];
    }
    const double ysign = yb[i] == 1 ? 1.0 : -1.0;
    const double gsign = g[i] == 1 ? 1.0 : -1.0;
    for (int j = 0; j < cfg.p_core; ++j) xv.at(i, j) = cfg.mu_core * ysign + rng.normal();
    for (int j = 0; j < cfg.p_spur; ++j)
      xv.at(i, cfg.p_core + j) = cfg.mu_spur * gsign + rng.normal();
  }

  std::vector<std::string> names;
  for (int j = 0; j < cfg.p_core; ++j) names.push_back("core" + std::to_string(j));
  for (int j = 0; j < cfg.p_spur; ++j) names.push_back("spur" + std::to_string(j));
  ds.X = DataMatrix(std::move(xv), std::move(names));
  ds.y.assign(yb.begin(), yb.end());
  ds.groups = std::move(g);
  return ds;
}

// ---- fairness dataset --------------------------------------------------------

Dataset gen_fairness(uint64_t seed, const FairnessConfig& cfg) {
  if (cfg.n < 4) throw InvalidArgument("gen_fairness: n too small");
  const int n = cfg.n;
  Dataset ds;
  ds.split_tags = assign_splits(n, derive_seed(seed, {kTagSplit}));
  Rng rng(derive_seed(seed, {kTagData}));

  Mat xv(n, 6);
  Mat sv(n, 1);
  std::vector<int> g(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const int s = rng.uniform() < 0.5 ? 1 : 0;
    const double ssign = s == 1 ? 1.0 : -1.0;
    const double u = rng.normal();
    ds.y[i] = (u + cfg.alpha * ssign > 0.0) ? 1.0 : 0.0;
    xv.at(i, 0) = u + cfg.clean_noise * rng.normal();
    xv.at(i, 1) = u + cfg.clean_noise * rng.normal();
    xv.at(i, 2) = cfg.mu_proxy * ssign + rng.normal();
    xv.at(i, 3) = cfg.mu_proxy * ssign + rng.normal();
    xv.at(i, 4) = rng.normal();
    xv.at(i, 5) = rng.normal();
    sv.at(i, 0) = static_cast<double>(s);
    g[i] = s;
  }
  ds.X = DataMatrix(std::move(xv),
                    {"clean0", "clean1", "proxy0", "proxy1", "noise0", "noise1"});
  ds.sensitive = DataMatrix(std::move(sv), {"s"});
  ds.groups = std::move(g);
  return ds;
}

// ---- CSV ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool is_missing(const std::string& s) {
  if (s.empty()) return true;
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(c));
  return t.empty() || t == "na" || t == "nan";
}

bool parse_double(const std::string& s, double* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  return true;
}

int require_integral(double v, const std::string& what) {
  const double r = std::nearbyint(v);
  if (std::fabs(v - r) > 1e-9 || r < 0)
    throw InvalidArgument(what + " must hold small non-negative integer codes");
  return static_cast<int>(r);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& opts, int* dropped_rows) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw EmptyAfterFiltering("load_csv: empty file");
  const std::vector<std::string> header = split_line(line);
  const int ncols = static_cast<int>(header.size());

  auto col_of = [&](const std::string& name) -> int {
    for (int j = 0; j < ncols; ++j)
      if (header[j] == name) return j;
    throw MissingColumn("load_csv: column not found: " + name);
  };

  const int target_col = col_of(opts.target_column);
  const int group_col = opts.group_column ? col_of(*opts.group_column) : -1;
  const int split_col = opts.split_column ? col_of(*opts.split_column) : -1;
  std::vector<int> sens_cols;
  for (const std::string& s : opts.sensitive_columns) sens_cols.push_back(col_of(s));

  std::vector<char> special(ncols, 0);
  special[target_col] = 1;
  if (group_col >= 0) special[group_col] = 1;
  if (split_col >= 0) special[split_col] = 1;
  for (int c : sens_cols) special[c] = 1;

  std::vector<int> feature_cols;
  for (int j = 0; j < ncols; ++j)
    if (!special[j]) feature_cols.push_back(j);
  if (feature_cols.empty()) throw InvalidArgument("load_csv: no feature columns remain");

  std::vector<std::vector<double>> rows;
  int dropped = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != ncols)
      throw InvalidArgument("load_csv: row " + std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(ncols));
    std::vector<double> vals(ncols);
    bool missing = false;
    for (int j = 0; j < ncols; ++j) {
      if (is_missing(cells[j])) {
        missing = true;
        break;
      }
      if (!parse_double(cells[j], &vals[j]))
        throw NonNumericColumn("load_csv: non-numeric value '" + cells[j] + "' in column " +
                               header[j]);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(vals));
  }
  if (dropped_rows) *dropped_rows = dropped;
  if (rows.empty()) throw EmptyAfterFiltering("load_csv: no usable rows after filtering");
  if (rows.size() < 2) throw InsufficientSamples("load_csv: need at least 2 usable rows");

  const int n = static_cast<int>(rows.size());
  Dataset ds;
  Mat xv(n, static_cast<int>(feature_cols.size()));
  std::vector<std::string> names;
  for (int c : feature_cols) names.push_back(header[c]);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (size_t k = 0; k < feature_cols.size(); ++k)
      xv.at(i, static_cast<int>(k)) = rows[i][feature_cols[k]];
    ds.y[i] = rows[i][target_col];
  }
  ds.X = DataMatrix(std::move(xv), std::move(names));

  if (group_col >= 0) {
    std::vector<int> g(n);
    for (int i = 0; i < n; ++i) g[i] = require_integral(rows[i][group_col], "group column");
    ds.groups = std::move(g);
  }
  if (!sens_cols.empty()) {
    Mat sv(n, static_cast<int>(sens_cols.size()));
    std::vector<std::string> snames;
    for (int c : sens_cols) snames.push_back(header[c]);
    for (int i = 0; i < n; ++i)
      for (size_t k = 0; k < sens_cols.size(); ++k)
        sv.at(i, static_cast<int>(k)) = rows[i][sens_cols[k]];
    ds.sensitive = DataMatrix(std::move(sv), std::move(snames));
  }
  if (split_col >= 0) {
    ds.split_tags.resize(n);
    for (int i = 0; i < n; ++i) {
      const int tag = require_integral(rows[i][split_col], "split column");
      if (tag > 2) throw InvalidArgument("split column values must be 0 (train), 1 (val), 2 (test)");
      ds.split_tags[i] = static_cast<Split>(tag);
    }
  } else {
    ds.split_tags = assign_splits(n, derive_seed(opts.seed, {kTagSplit}));
  }
  return ds;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_csv: cannot open " + path);
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };

  for (int j = 0; j < ds.p(); ++j) out << ds.X.column_names[j] << ",";
  out << "y";
  if (ds.groups) out << ",g";
  if (ds.sensitive)
    for (const std::string& s : ds.sensitive->column_names) out << "," << s;
  if (ds.split_dependent) out << ",split";
  out << "\n";

  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.p(); ++j) {
      emit(ds.X.values.at(i, j));
      out << ",";
    }
    emit(ds.y[i]);
    if (ds.groups) out << "," << (*ds.groups)[i];
    if (ds.sensitive)
      for (int j = 0; j < ds.sensitive->p(); ++j) {
        out << ",";
        emit(ds.sensitive->values.at(i, j));
      }
    if (ds.split_dependent) out << "," << static_cast<int>(ds.split_tags[i]);
    out << "\n";
  }
}

namespace {

void standardize_columns(const Mat& src, Mat& dst, const std::vector<std::string>& names,
                         const std::vector<int>& train, std::vector<std::string>* warnings) {
  for (int j = 0; j < src.cols; ++j) {
    double mean = 0.0;
    for (int i : train) mean += src.at(i, j);
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (int i : train) {
      const double d = src.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(train.size());
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      if (warnings)
        warnings->push_back("column " + names[j] + " has zero train variance; left unscaled");
      continue;
    }
    for (int i = 0; i < src.rows; ++i) dst.at(i, j) = (src.at(i, j) - mean) / sd;
  }
}

}  // namespace

Dataset standardize(const Dataset& ds, std::vector<std::string>* warnings) {
  const std::vector<int> train = ds.indices_of(Split::kTrain);
  if (train.empty()) throw InvalidArgument("standardize: train split is empty");

  Dataset out = ds;
  standardize_columns(ds.X.values, out.X.values, ds.X.column_names, train, warnings);
  if (ds.sensitive)
    standardize_columns(ds.sensitive->values, out.sensitive->values,
                        ds.sensitive->column_names, train, warnings);
  return out;
}

}  // namespace diffoci
