#include <doctest.h>

#include <random>

#include "gcmt/transforms.hpp"

using gcmt::build_d;
using gcmt::build_dm;
using gcmt::build_m;
using gcmt::Matrix;
using gcmt::MCache;
using gcmt::normalized_rows;
using gcmt::OutcomeLayout;
using gcmt::reparam_cholesky;

namespace {

OutcomeLayout random_layout(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> h_dist(0, 3);
  std::uniform_int_distribution<int> i_dist(1, 3);
  std::uniform_int_distribution<int> k_dist(2, 5);
  OutcomeLayout layout;
  layout.H = h_dist(eng);
  const int n = i_dist(eng);
  for (int i = 0; i < n; ++i) layout.alt_counts.push_back(k_dist(eng));
  return layout;
}

}  // namespace

TEST_CASE("two-outcome fixture: D") {
  const OutcomeLayout layout{2, {3, 4}};
  Matrix expected(7, 5);
  expected << 0, 0, 0, 0, 0,
      1, 0, 0, 0, 0,
      0, 1, 0, 0, 0,
      0, 0, 0, 0, 0,
      0, 0, 1, 0, 0,
      0, 0, 0, 1, 0,
      0, 0, 0, 0, 1;
  CHECK((build_d(layout) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-outcome fixture: D_m") {
  const OutcomeLayout layout{2, {3, 4}};
  Matrix expected(9, 7);
  expected << 1, 0, 0, 0, 0, 0, 0,
      0, 1, 0, 0, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0,
      0, 0, 1, 0, 0, 0, 0,
      0, 0, 0, 1, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0,
      0, 0, 0, 0, 1, 0, 0,
      0, 0, 0, 0, 0, 1, 0,
      0, 0, 0, 0, 0, 0, 1;
  CHECK((build_dm(layout) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-outcome fixture: M for chosen (2,3)") {
  const OutcomeLayout layout{2, {3, 4}};
  Matrix expected(7, 9);
  expected << 1, 0, 0, 0, 0, 0, 0, 0, 0,
      0, 1, 0, 0, 0, 0, 0, 0, 0,
      0, 0, 1, -1, 0, 0, 0, 0, 0,
      0, 0, 0, -1, 1, 0, 0, 0, 0,
      0, 0, 0, 0, 0, 1, 0, -1, 0,
      0, 0, 0, 0, 0, 0, 1, -1, 0,
      0, 0, 0, 0, 0, 0, 0, -1, 1;
  CHECK((build_m(layout, {2, 3}) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("three binary outcomes: D is block diagonal with zero rows 1,3,5") {
  const OutcomeLayout layout{0, {2, 2, 2}};
  const Matrix d = build_d(layout);
  REQUIRE(d.rows() == 6);
  REQUIRE(d.cols() == 3);
  for (int r : {0, 2, 4}) CHECK(d.row(r).cwiseAbs().sum() == 0.0);
  for (int c = 0; c < 3; ++c) {
    CHECK(d.col(c).sum() == 1.0);
    CHECK(d(2 * c + 1, c) == 1.0);
  }
}

TEST_CASE("D structural properties on random layouts") {
  std::mt19937_64 eng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const OutcomeLayout layout = random_layout(eng);
    const Matrix d = build_d(layout);
    REQUIRE(d.rows() == layout.total_alternatives());
    REQUIRE(d.cols() == layout.total_alternatives() - layout.num_nominal());
    for (int c = 0; c < d.cols(); ++c) CHECK(d.col(c).sum() == 1.0);
    int row = 0;
    for (int k : layout.alt_counts) {
      CHECK(d.row(row).cwiseAbs().sum() == 0.0);
      row += k;
    }
    // pushing a PD matrix through D zeroes exactly the base rows/columns
    Matrix bar = Matrix::Random(d.cols(), d.cols());
    bar = bar * bar.transpose();
    const Matrix lam = d * bar * d.transpose();
    row = 0;
    for (int k : layout.alt_counts) {
      CHECK(lam.row(row).cwiseAbs().sum() == 0.0);
      CHECK(lam.col(row).cwiseAbs().sum() == 0.0);
      row += k;
    }
  }
}

TEST_CASE("M structural properties on random layouts") {
  std::mt19937_64 eng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const OutcomeLayout layout = random_layout(eng);
    std::vector<int> chosen;
    for (int k : layout.alt_counts)
      chosen.push_back(std::uniform_int_distribution<int>(1, k)(eng));
    const Matrix m = build_m(layout, chosen);
    REQUIRE(m.rows() == layout.diff_dim());
    REQUIRE(m.cols() == layout.joint_dim());
    const int h = layout.H;
    if (h > 0)
      CHECK((m.topLeftCorner(h, h) - Matrix::Identity(h, h))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    // every utility-difference row: +1 at one non-chosen alternative, -1 at
    // the chosen one, zero elsewhere, so rows sum to zero
    for (int r = h; r < m.rows(); ++r) {
      CHECK(m.row(r).sum() == 0.0);
      CHECK(m.row(r).cwiseAbs().sum() == 2.0);
      CHECK(m.row(r).maxCoeff() == 1.0);
      CHECK(m.row(r).minCoeff() == -1.0);
    }
    int row = h, col = h;
    for (size_t n = 0; n < layout.alt_counts.size(); ++n) {
      const int k = layout.alt_counts[n];
      for (int r = row; r < row + k - 1; ++r)
        CHECK(m(r, col + chosen[n] - 1) == -1.0);
      row += k - 1;
      col += k;
    }
  }
}

TEST_CASE("chosen index validation") {
  const OutcomeLayout layout{1, {3}};
  CHECK_THROWS_AS(build_m(layout, {0}), std::out_of_range);
  CHECK_THROWS_AS(build_m(layout, {4}), std::out_of_range);
  CHECK_THROWS_AS(build_m(layout, {1, 1}), std::out_of_range);
}

TEST_CASE("layout validation") {
  CHECK_THROWS_AS(OutcomeLayout({-1, {2}}).validate(), gcmt::layout_error);
  CHECK_THROWS_AS(OutcomeLayout({0, {1}}).validate(), gcmt::layout_error);
}

TEST_CASE("reparametrized rows give unit diagonals in Sigmabar") {
  std::mt19937_64 eng(43);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const OutcomeLayout layout = random_layout(eng);
    const int d = layout.diff_dim();
    if (d == 0) continue;
    Matrix l_raw = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j)
        l_raw(i, j) = (i == j) ? std::abs(normal(eng)) + 0.2 : normal(eng);
    const auto rows = normalized_rows(layout);
    const Matrix l = reparam_cholesky(l_raw, rows);
    const Matrix sigma = l * l.transpose();
    for (int r : rows) CHECK(sigma(r, r) == doctest::Approx(1.0).epsilon(1e-12));
    // rows not named stay exactly as given
    for (int i = 0; i < d; ++i) {
      if (std::find(rows.begin(), rows.end(), i) != rows.end()) continue;
      for (int j = 0; j <= i; ++j) CHECK(l(i, j) == l_raw(i, j));
    }
  }
}

TEST_CASE("reparametrization preserves the row direction") {
  Matrix l_raw = Matrix::Identity(3, 3);
  l_raw(2, 0) = 0.8;
  l_raw(2, 1) = -0.6;
  const Matrix l = reparam_cholesky(l_raw, {2});
  const double a = std::sqrt(1.0 + 0.8 * 0.8 + 0.6 * 0.6);
  CHECK(l(2, 0) == doctest::Approx(0.8 / a));
  CHECK(l(2, 1) == doctest::Approx(-0.6 / a));
  CHECK(l(2, 2) == doctest::Approx(1.0 / a));
}

TEST_CASE("M cache returns identical matrices per chosen tuple") {
  const OutcomeLayout layout{1, {3, 2}};
  MCache cache(layout);
  const Matrix& a = cache.get({2, 1});
  const Matrix& b = cache.get({2, 1});
  CHECK(&a == &b);
  CHECK((cache.get({1, 2}) - build_m(layout, {1, 2})).cwiseAbs().maxCoeff() ==
        0.0);
}
