#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "asymkit/encoding.hpp"
#include "asymkit/error.hpp"
#include "asymkit/ridge.hpp"
#include "asymkit/rng.hpp"
#include "oracles.hpp"

using namespace asymkit;
using namespace asymkit::encoding;

namespace {

Matrix randn(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

Matrix normal_equations(const Matrix& x, const Matrix& y, double lambda) {
  return oracle::ridge_normal_equations(x, y, lambda);
}

double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Drift removal written out directly: least squares on the raw regressors.
Matrix detrend_oracle(const Matrix& y, double tr, double cutoff) {
  const auto n = y.rows();
  const double nd = static_cast<double>(n);
  const auto n_cos = static_cast<Eigen::Index>(std::floor(2.0 * nd * tr / cutoff));
  const Eigen::Index cols = std::min<Eigen::Index>(n, 2 + n_cos);
  Matrix raw(n, cols);
  for (Eigen::Index t = 0; t < n; ++t) {
    raw(t, 0) = 1.0;
    raw(t, 1) = static_cast<double>(t);
    for (Eigen::Index k = 1; k + 1 < cols; ++k)
      raw(t, k + 1) = std::cos(std::numbers::pi * (static_cast<double>(t) + 0.5) * static_cast<double>(k) / nd);
  }
  const Matrix coef = raw.colPivHouseholderQr().solve(y);
  Matrix r = y - raw * coef;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    const double mean = r.col(j).mean();
    const double sd = std::sqrt((r.col(j).array() - mean).square().mean());
    r.col(j) = (r.col(j).array() - mean) / sd;
  }
  return r;
}

std::vector<std::size_t> sort_oracle(const Vector& v, double fraction) { return oracle::top_fraction(v, fraction); }

}  // namespace

TEST_SUITE("ridge") {

TEST_CASE("5x3 instance matches the normal equations; primal and dual agree") {
  Rng rng(5);
  const Matrix x = randn(5, 3, rng);
  const Matrix y = randn(5, 2, rng);
  for (const double lambda : {1e-3, 1.0, 1e3}) {
    const Matrix w = normal_equations(x, y, lambda);
    CHECK(rel_err(ridge::fit_primal(x, y, lambda), w) < 1e-8);
    CHECK(rel_err(ridge::fit_dual(x, y, lambda), w) < 1e-8);
    CHECK(rel_err(ridge::fit(x, y, lambda), w) < 1e-8);
    CHECK(rel_err(ridge::Solver(x, y).weights(lambda), w) < 1e-8);
  }
}

TEST_CASE("solver on wide and tall shapes") {
  Rng rng(6);
  for (const auto& [n, p] : {std::pair<int, int>{20, 100}, {50, 5}, {30, 30}}) {
    const Matrix x = randn(n, p, rng);
    const Matrix y = randn(n, 3, rng);
    const Matrix xn = randn(7, p, rng);
    const ridge::Solver solver(x, y);
    CHECK(solver.form() == ridge::preferred_form(n, p));
    for (const double lambda : {1.0, 1e3, 1e6}) {
      const Matrix w = normal_equations(x, y, lambda);
      CHECK(rel_err(solver.weights(lambda), w) < 1e-8);
      CHECK(rel_err(solver.predict(xn, lambda), xn * w) < 1e-8);
    }
  }
}

TEST_CASE("ridge validation") {
  const Matrix x = Matrix::Ones(4, 2), y = Matrix::Ones(3, 1);
  CHECK_THROWS_AS(ridge::fit(x, y, 1.0), ValidationError);
  CHECK_THROWS_AS(ridge::fit(x, Matrix::Ones(4, 1), 0.0), ValidationError);
  CHECK_THROWS_AS(ridge::fit(x, Matrix::Ones(4, 1), NAN), ValidationError);
}

TEST_CASE("property: predictions shrink as lambda grows") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = randn(40, 15, rng), y = randn(40, 4, rng), xn = randn(40, 15, rng);
    const ridge::Solver s(x, y);
    double prev = INFINITY;
    for (int i = 0; i <= 12; ++i) {
      const double m = s.predict(x, std::pow(10.0, i * 0.5)).cwiseAbs().mean();
      CHECK(m <= prev + 1e-12);
      prev = m;
    }
  }
}

}  // TEST_SUITE

TEST_SUITE("encoding") {

TEST_CASE("drift basis is orthonormal") {
  for (const int n : {10, 64, 200}) {
    const Matrix b = drift_basis(n, 2.0, 128.0);
    CHECK((b.transpose() * b - Matrix::Identity(b.cols(), b.cols())).norm() < 1e-10);
  }
  CHECK_THROWS_AS(drift_basis(1, 2.0, 128.0), ValidationError);
  CHECK_THROWS_AS(drift_basis(10, 2.0, 0.0), ValidationError);
}

TEST_CASE("constant voxel is zeroed and flagged") {
  BoldRun run{Matrix::Constant(100, 3, 4.0), 2.0, 0};
  Rng rng(1);
  run.data.col(1) = randn(100, 1, rng);
  const auto r = preprocess_run(run);
  CHECK(r.flat == std::vector<bool>{true, false, true});
  CHECK(r.run.data.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.run.data.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pure linear drift is removed") {
  BoldRun run{Matrix(150, 1), 2.0, 0};
  for (int t = 0; t < 150; ++t) run.data(t, 0) = 3.0 + 0.25 * t;
  const auto r = preprocess_run(run);
  CHECK(r.run.data.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(r.flat[0]);
}

TEST_CASE("preprocessing matches an explicit least-squares detrend") {
  Rng rng(11);
  for (const int n : {50, 120, 200}) {
    const Matrix y = randn(n, 8, rng);
    const Matrix got = highpass_standardize(y, 2.0, 128.0);
    CHECK((got - detrend_oracle(y, 2.0, 128.0)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("preprocessed voxels are standardized and idempotent") {
  Rng rng(12);
  BoldRun run{randn(200, 20, rng), 2.0, 0};
  for (int t = 0; t < 200; ++t) run.data.row(t).array() += 0.05 * t + std::sin(t * 0.01);
  const auto once = preprocess_run(run);
  for (Eigen::Index v = 0; v < 20; ++v) {
    const auto col = once.run.data.col(v);
    CHECK(std::abs(col.mean()) < 1e-10);
    CHECK(std::abs(std::sqrt(col.squaredNorm() / 200.0) - 1.0) < 1e-10);
  }
  const auto twice = preprocess_run(once.run);
  CHECK((twice.run.data - once.run.data).cwiseAbs().maxCoeff() < 1e-8);
  BoldRun bad = run;
  bad.data(3, 3) = NAN;
  CHECK_THROWS_AS(preprocess_run(bad), ValidationError);
}

TEST_CASE("average_subjects") {
  Rng rng(13);
  const BoldRun a{randn(30, 4, rng), 2.0, 0};
  const BoldRun one[] = {a};
  CHECK(average_subjects(one).data == a.data);
  const BoldRun pm[] = {a, BoldRun{-a.data, 2.0, 0}};
  CHECK(average_subjects(pm).data.cwiseAbs().maxCoeff() == 0.0);

  std::vector<BoldRun> five;
  for (int s = 0; s < 5; ++s) five.push_back({randn(30, 4, rng), 2.0, 0});
  const auto avg = average_subjects(std::span<const BoldRun>(five));
  for (int i = 0; i < 30; ++i)
    for (int v = 0; v < 4; ++v) {
      double sum = 0.0;
      for (const auto& s : five) sum += s.data(i, v);
      CHECK(std::abs(avg.data(i, v) - sum / 5.0) < 1e-12);
    }
  five[2].data = Matrix::Zero(31, 4);
  CHECK_THROWS_AS(average_subjects(std::span<const BoldRun>(five)), ValidationError);
}

TEST_CASE("pearson edge cases") {
  Vector a(4), b(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, -b) == doctest::Approx(-1.0));
  CHECK(pearson(a, Vector::Constant(4, 3.0)) == 0.0);
}

TEST_CASE("ISC of identical and negated subjects") {
  Rng rng(14);
  std::vector<BoldRun> runs;
  for (int r = 0; r < 3; ++r) runs.push_back({randn(50, 10, rng), 2.0, r});
  const std::vector<std::vector<BoldRun>> same(4, runs);
  const Vector isc = isc_reliability(same);
  for (Eigen::Index v = 0; v < isc.size(); ++v) CHECK(std::abs(isc(v) - 1.0) < 1e-12);

  std::vector<BoldRun> neg = runs;
  for (auto& r : neg) r.data = -r.data;
  const Vector anti = isc_reliability({runs, neg});
  for (Eigen::Index v = 0; v < anti.size(); ++v) CHECK(std::abs(anti(v) + 1.0) < 1e-12);
  CHECK_THROWS_AS(isc_reliability({runs}), ValidationError);
}

TEST_CASE("ISC of independent noise is near zero") {
  Rng rng(15);
  std::vector<std::vector<BoldRun>> subjects;
  for (int s = 0; s < 4; ++s) subjects.push_back({BoldRun{randn(1000, 200, rng), 2.0, 0}});
  const Vector isc = isc_reliability(subjects);
  int small = 0;
  for (Eigen::Index v = 0; v < isc.size(); ++v) small += std::abs(isc(v)) < 0.1;
  CHECK(small >= 190);
}

TEST_CASE("top_fraction_mask") {
  Vector r(4);
  r << 0.9, 0.1, 0.5, 0.7;
  CHECK(top_fraction_mask(r, 0.5) == std::vector<std::size_t>{0, 3});
  CHECK(top_fraction_mask(r, 1.0) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(top_fraction_mask(r, 0.25) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(top_fraction_mask(r, 0.0), ValidationError);
  CHECK_THROWS_AS(top_fraction_mask(r, 1.5), ValidationError);

  Vector ties(5);
  ties << 0.3, 0.5, 0.5, 0.5, 0.1;
  CHECK(top_fraction_mask(ties, 0.4) == std::vector<std::size_t>{1, 2});
  Vector with_nan(3);
  with_nan << NAN, 0.2, 0.1;
  CHECK(top_fraction_mask(with_nan, 0.5) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("top_fraction_mask matches a full sort on random vectors") {
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(300));
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = trial % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.normal();
    for (const double f : {0.25, 0.1, 0.5, 1.0}) CHECK(top_fraction_mask(v, f) == sort_oracle(v, f));
  }
}

TEST_CASE("canonical HRF shape") {
  const auto h = canonical_hrf(2.0);
  CHECK(h.size() == 17);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto peak = std::max_element(h.begin(), h.end()) - h.begin();
  CHECK(peak == 3);  // 6 s at TR 2 s
  CHECK(*std::min_element(h.begin(), h.end()) < 0.0);
}

TEST_CASE("build_design: no events, identity kernel, naive convolution") {
  const double one[] = {1.0};
  FeatureMatrix empty{Matrix(0, 3), {}, 0, 1, 0};
  CHECK(build_design(empty, 20, 2.0, one, false).cwiseAbs().maxCoeff() == 0.0);
  CHECK(build_design(empty, 20, 2.0, one, true).cwiseAbs().maxCoeff() == 0.0);

  FeatureMatrix impulse{Matrix::Ones(1, 1), {0.0}, 0, 1, 0};
  const Matrix d = build_design(impulse, 10, 2.0, one, false);
  CHECK(d(0, 0) == 1.0);
  CHECK(d.col(0).tail(9).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(17);
  const auto kernel = canonical_hrf(2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n_scans = 60;
    const auto n_events = static_cast<Eigen::Index>(rng.below(150));
    FeatureMatrix f{randn(n_events, 4, rng), {}, 0, 1, 0};
    for (Eigen::Index e = 0; e < n_events; ++e) f.onsets.push_back(rng.uniform() * 120.0);
    std::sort(f.onsets.begin(), f.onsets.end());
    const Matrix got = build_design(f, n_scans, 2.0, kernel, false);

    Matrix binned = Matrix::Zero(n_scans, 4);
    for (Eigen::Index e = 0; e < n_events; ++e)
      binned.row(static_cast<Eigen::Index>(f.onsets[static_cast<std::size_t>(e)] / 2.0)) += f.values.row(e);
    Matrix want = Matrix::Zero(n_scans, 4);
    for (Eigen::Index t = 0; t < n_scans; ++t)
      for (Eigen::Index s = 0; s <= t; ++s) {
        const auto lag = static_cast<std::size_t>(t - s);
        if (lag < kernel.size()) want.row(t) += kernel[lag] * binned.row(s);
      }
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("build_design validates onsets") {
  const double one[] = {1.0};
  FeatureMatrix f{Matrix::Ones(2, 1), {3.0, 1.0}, 0, 1, 0};
  CHECK_THROWS_AS(build_design(f, 10, 2.0, one), ValidationError);
  f.onsets = {1.0, 25.0};
  CHECK_THROWS_AS(build_design(f, 10, 2.0, one), ValidationError);
  f.onsets = {-1.0, 2.0};
  CHECK_THROWS_AS(build_design(f, 10, 2.0, one), ValidationError);
  f.onsets = {1.0};
  CHECK_THROWS_AS(build_design(f, 10, 2.0, one), ValidationError);
}

TEST_CASE("default lambda grid") {
  const auto g = default_lambda_grid();
  REQUIRE(g.size() == 10);
  CHECK(g.front() == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e6));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e6, 1.0 / 9.0)));
}

TEST_CASE("ridge_cv recovers a noiseless linear model") {
  Rng rng(18);
  const Matrix w = randn(10, 6, rng);
  std::vector<Matrix> x, y;
  for (int r = 0; r < 4; ++r) {
    x.push_back(randn(80, 10, rng));
    y.push_back(x.back() * w);
  }
  const double grid[] = {1e-8, 1e-4, 1.0};
  const auto res = ridge_cv(x, y, grid);
  CHECK(res.scores.minCoeff() >= 0.999);
  CHECK(res.folds.size() == 4);
  for (const auto& f : res.folds) CHECK(f.lambda == 1e-8);
}

TEST_CASE("ridge_cv on pure noise scores near zero") {
  Rng rng(19);
  std::vector<Matrix> x, y;
  for (int r = 0; r < 4; ++r) {
    x.push_back(randn(200, 10, rng));
    y.push_back(randn(200, 50, rng));
  }
  const auto s = ridge_cv_scores(x, y, default_lambda_grid());
  CHECK(std::abs(s.mean()) < 0.05);
  for (Eigen::Index v = 0; v < s.size(); ++v) {
    CHECK(s(v) >= -1.0);
    CHECK(s(v) <= 1.0);
  }
}

TEST_CASE("property: ridge_cv is equivariant to voxel permutations") {
  Rng rng(20);
  const Matrix w = randn(5, 12, rng);
  std::vector<Matrix> x, y, yp;
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  for (int i = 11; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[static_cast<Eigen::Index>(rng.below(i + 1))]);
  for (int r = 0; r < 3; ++r) {
    x.push_back(randn(60, 5, rng));
    y.push_back(x.back() * w + 2.0 * randn(60, 12, rng));
    yp.push_back(y.back() * perm);
  }
  const auto grid = default_lambda_grid();
  const Vector a = ridge_cv_scores(x, y, grid);
  const Vector b = ridge_cv_scores(x, yp, grid);
  CHECK((perm * b - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ridge_cv validation") {
  const std::vector<Matrix> x(2, Matrix::Ones(10, 2)), y(2, Matrix::Ones(10, 3));
  const double grid[] = {1.0};
  CHECK_THROWS_AS(ridge_cv(x, y, grid), ValidationError);
  const std::vector<Matrix> x3(3, Matrix::Ones(10, 2)), y3(3, Matrix::Ones(10, 3));
  CHECK_THROWS_AS(ridge_cv(x3, y3, std::span<const double>{}), ValidationError);
  const double bad[] = {-1.0};
  CHECK_THROWS_AS(ridge_cv(x3, y3, bad), ValidationError);
}

TEST_CASE("best_layer_map") {
  Vector a(1), b(1), c(1);
  a << 0.1;
  b << 0.3;
  c << 0.2;
  const Vector layers[] = {a, b, c};
  const auto m = best_layer_map(layers, 7);
  CHECK(m.scores(0) == 0.3);
  CHECK(m.layer_of_max[0] == 1);
  CHECK(m.checkpoint_tokens == 7);
  const Vector only[] = {c};
  CHECK(best_layer_map(only).scores == c);

  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> stack;
    for (int l = 0; l < 5; ++l) {
      Vector v(30);
      for (auto& e : v) e = static_cast<double>(rng.below(6)) / 5.0;
      stack.push_back(v);
    }
    const auto got = best_layer_map(stack);
    for (Eigen::Index i = 0; i < 30; ++i) {
      double best = stack[0](i);
      int arg = 0;
      for (int l = 1; l < 5; ++l)
        if (stack[static_cast<std::size_t>(l)](i) > best) best = stack[static_cast<std::size_t>(l)](i), arg = l;
      CHECK(got.scores(i) == best);
      CHECK(got.layer_of_max[static_cast<std::size_t>(i)] == arg);
      for (const auto& s : stack) CHECK(got.scores(i) >= s(i));
    }
  }
}

TEST_CASE("region_asymmetry") {
  RegionMask mask{"m", {Hemisphere::left, Hemisphere::left, Hemisphere::right, Hemisphere::right, Hemisphere::other}};
  Vector s(5);
  s << 0.2, 0.2, 0.1, 0.1, 9.0;
  const auto lr = region_asymmetry(s, mask, std::nullopt, AsymmetrySign::left_minus_right);
  CHECK(lr.value == doctest::Approx(0.1));
  CHECK(lr.n_left == 2);
  CHECK(lr.n_right == 2);
  const auto rl = region_asymmetry(s, mask, std::nullopt, AsymmetrySign::right_minus_left);
  CHECK(rl.value == -lr.value);

  Vector same(5);
  same << 0.4, 0.4, 0.4, 0.4, 0.0;
  CHECK(region_asymmetry(same, mask, std::nullopt, AsymmetrySign::left_minus_right).value == 0.0);

  const auto sub = region_asymmetry(s, mask, std::vector<std::size_t>{0, 2, 4}, AsymmetrySign::left_minus_right);
  CHECK(sub.n_left == 1);
  CHECK(sub.n_right == 1);
  CHECK_THROWS_AS(region_asymmetry(s, mask, std::vector<std::size_t>{0, 1}, AsymmetrySign::left_minus_right),
                  ValidationError);
  CHECK_THROWS_AS(region_asymmetry(s, mask, std::vector<std::size_t>{9}, AsymmetrySign::left_minus_right),
                  ValidationError);
  CHECK_THROWS_AS(region_asymmetry(Vector::Zero(3), mask, std::nullopt, AsymmetrySign::left_minus_right),
                  ValidationError);

  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    Vector v(5);
    for (auto& e : v) e = rng.normal();
    CHECK(region_asymmetry(v, mask, std::nullopt, AsymmetrySign::left_minus_right).value ==
          -region_asymmetry(v, mask, std::nullopt, AsymmetrySign::right_minus_left).value);
  }
}

}  // TEST_SUITE
