#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "diffoci/datasets.hpp"
#include "diffoci/errors.hpp"
#include "diffoci/foci.hpp"
#include "diffoci/rng.hpp"

using namespace diffoci;

namespace {

DataMatrix gaussian_dm(int n, int p, uint64_t seed) {
  Rng rng(seed);
  Mat m(n, p);
  for (double& v : m.a) v = rng.normal();
  return DataMatrix(std::move(m), default_column_names(p));
}

}  // namespace

TEST_CASE("foci_select finds a noiseless single predictor") {
  int hits = 0;
  for (int s = 0; s < 20; ++s) {
    const DataMatrix x = gaussian_dm(500, 3, 100 + s);
    std::vector<double> y(500);
    for (int i = 0; i < 500; ++i) y[i] = x.values.at(i, 0);
    const SelectionResult sel = foci_select(y, x, std::nullopt, static_cast<uint64_t>(s));
    REQUIRE(!sel.selected.empty());
    if (sel.selected[0] == 0 && sel.selected.size() <= 2) ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("foci_select propagates the degenerate-response error") {
  const DataMatrix x = gaussian_dm(50, 3, 7);
  CHECK_THROWS_AS(foci_select(std::vector<double>(50, 2.0), x, std::nullopt, 0),
                  DegenerateResponse);
}

TEST_CASE("foci_order covers all columns at k=p and matches select at k=1") {
  const DataMatrix x = gaussian_dm(120, 6, 17);
  std::vector<double> y(120);
  for (int i = 0; i < 120; ++i)
    y[i] = x.values.at(i, 1) + 0.3 * x.values.at(i, 4);

  const SelectionResult full = foci_order(y, x, 6, 3);
  std::vector<int> sorted = full.selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});

  const SelectionResult one = foci_order(y, x, 1, 3);
  const SelectionResult sel = foci_select(y, x, std::nullopt, 3);
  REQUIRE(!sel.selected.empty());
  CHECK(one.selected[0] == sel.selected[0]);

  CHECK_THROWS_AS(foci_order(y, x, 7, 3), InvalidArgument);
}

TEST_CASE("foci_select output is a prefix of foci_order under one seed") {
  const DataMatrix x = gaussian_dm(200, 8, 23);
  std::vector<double> y(200);
  for (int i = 0; i < 200; ++i)
    y[i] = std::sin(x.values.at(i, 2)) + 0.5 * x.values.at(i, 5);

  const SelectionResult sel = foci_select(y, x, std::nullopt, 9);
  const SelectionResult ord = foci_order(y, x, static_cast<int>(sel.selected.size()), 9);
  CHECK(sel.selected == ord.selected);
  for (size_t k = 0; k < sel.scores.size(); ++k)
    CHECK(sel.scores[k] == ord.scores[k]);
}

TEST_CASE("foci_select performs at most p(k+1) candidate evaluations") {
  const DataMatrix x = gaussian_dm(150, 10, 29);
  std::vector<double> y(150);
  for (int i = 0; i < 150; ++i) y[i] = x.values.at(i, 0) + x.values.at(i, 3);
  const SelectionResult sel = foci_select(y, x, std::nullopt, 2);
  const int64_t k = static_cast<int64_t>(sel.selected.size());
  CHECK(sel.t_n_calls <= 10 * (k + 1));
}

TEST_CASE("column permutation permutes the selection") {
  const DataMatrix x = gaussian_dm(200, 5, 37);
  std::vector<double> y(200);
  for (int i = 0; i < 200; ++i)
    y[i] = 2.0 * x.values.at(i, 1) + std::sin(x.values.at(i, 3));

  const SelectionResult base = foci_select(y, x, std::nullopt, 11);

  const std::vector<int> perm = {4, 2, 0, 1, 3};  // old index of each new column
  const DataMatrix xp = x.select_columns(perm);
  const SelectionResult permuted = foci_select(y, xp, std::nullopt, 11);

  REQUIRE(base.selected.size() == permuted.selected.size());
  for (size_t k = 0; k < base.selected.size(); ++k)
    CHECK(perm[permuted.selected[k]] == base.selected[k]);
}

TEST_CASE("foci toy run selects the interacting columns (small instance)") {
  // Scaled-down smoke check of the product/interaction toy; the full-size
  // reproduction lives in the acceptance suite.
  int hits = 0;
  for (int s = 0; s < 5; ++s) {
    const Dataset ds = gen_toy(ToyKind::kFociToy, 500 + s);
    // A 600-row, 30-column slice keeps this quick.
    std::vector<int> rows(600);
    for (int i = 0; i < 600; ++i) rows[i] = i;
    std::vector<int> cols(30);
    for (int j = 0; j < 30; ++j) cols[j] = j;
    Dataset small = ds.subset(rows);
    const DataMatrix xs = small.X.select_columns(cols);
    const SelectionResult sel = foci_select(small.y, xs, std::nullopt, 42 + s);
    std::vector<int> got = sel.selected;
    std::sort(got.begin(), got.end());
    if (got == std::vector<int>{0, 1, 2}) ++hits;
  }
  CHECK(hits >= 2);
}
