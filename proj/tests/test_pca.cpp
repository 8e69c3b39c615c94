#include "choicekit/learn/pca.hpp"

#include <cmath>

#include <doctest.h>

#include "choicekit/rng.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;
using choicekit::test::scratch_dir;

namespace {

Eigen::MatrixXd sample_matrix(int n, int d, std::uint64_t seed, double spread = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      X(i, j) = uniform_range(rng, -spread * (j + 1), spread * (j + 1));
  return X;
}

}  // namespace

TEST_CASE("output dimensionality is floor-based with a floor of one") {
  CHECK(learn::pca_output_dim(3072, 0.05) == 153);
  CHECK(learn::pca_output_dim(3072, 1.0) == 3072);
  CHECK(learn::pca_output_dim(10, 0.05) == 1);
  CHECK(learn::pca_output_dim(7, 0.33) == 2);
  CHECK(error_code_of([] { learn::pca_output_dim(10, 0.0); }) == Errc::invalid_hyperparameter);
  CHECK(error_code_of([] { learn::pca_output_dim(10, 1.1); }) == Errc::invalid_hyperparameter);
}

TEST_CASE("components are orthonormal and decorrelate the data") {
  Eigen::MatrixXd X = sample_matrix(120, 8, 1);
  auto t = learn::pca_fit(X, 0.5);
  CHECK(t.output_dim() == 4);

  Eigen::MatrixXd gram = t.components.transpose() * t.components;
  CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).lpNorm<Eigen::Infinity>() < 1e-10);

  Eigen::MatrixXd Z = learn::pca_apply(t, X);
  Eigen::MatrixXd centered = Z.rowwise() - Z.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(Z.rows() - 1);
  double scale = cov.diagonal().maxCoeff();
  for (int i = 0; i < cov.rows(); ++i)
    for (int j = 0; j < cov.cols(); ++j)
      if (i != j) CHECK(std::abs(cov(i, j)) <= 1e-8 * scale);

  // eigenvalues descending, each matching the transformed variance
  for (int j = 0; j + 1 < t.explained_variance.size(); ++j)
    CHECK(t.explained_variance(j) >= t.explained_variance(j + 1));
  for (int j = 0; j < cov.rows(); ++j)
    CHECK(cov(j, j) == doctest::Approx(t.explained_variance(j)).epsilon(1e-8));
}

TEST_CASE("retained variance grows with the fraction up to the trace") {
  Eigen::MatrixXd X = sample_matrix(100, 12, 2);
  double previous = 0.0;
  for (double frac : {0.05, 0.10, 0.25, 0.33, 1.0}) {
    auto t = learn::pca_fit(X, frac);
    CHECK(t.retained_variance() >= previous - 1e-12);
    CHECK(t.retained_variance() <= t.total_variance + 1e-9);
    previous = t.retained_variance();
  }
  auto full = learn::pca_fit(X, 1.0);
  CHECK(full.retained_variance() == doctest::Approx(full.total_variance).epsilon(1e-9));
}

TEST_CASE("wide data goes through the Gram path with a zero-variance complement") {
  Eigen::MatrixXd X = sample_matrix(15, 40, 3);
  auto t = learn::pca_fit(X, 1.0);
  CHECK(t.output_dim() == 40);
  Eigen::MatrixXd gram = t.components.transpose() * t.components;
  CHECK((gram - Eigen::MatrixXd::Identity(40, 40)).lpNorm<Eigen::Infinity>() < 1e-9);
  // at most rank(X_centered) <= 14 informative directions
  for (int j = 14; j < 40; ++j) CHECK(t.explained_variance(j) <= 1e-9);
}

TEST_CASE("projection recovers a planted low-rank structure") {
  Rng rng(4);
  const int n = 200, d = 10;
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(d);
  direction(3) = 1.0;
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    double t = uniform_range(rng, -10.0, 10.0);
    for (int j = 0; j < d; ++j) X(i, j) = t * direction(j) + uniform_range(rng, -0.01, 0.01);
  }
  auto t = learn::pca_fit(X, 0.1);  // one component
  CHECK(t.output_dim() == 1);
  CHECK(std::abs(t.components.col(0)(3)) > 0.999);
  CHECK(t.explained_variance(0) / t.total_variance > 0.999);

  Eigen::MatrixXd Z = learn::pca_apply(t, X);
  Eigen::MatrixXd back = learn::pca_inverse(t, Z);
  CHECK(((back - X).rowwise().norm().maxCoeff()) < 0.1);
}

TEST_CASE("degenerate inputs are rejected") {
  Eigen::MatrixXd one_row(1, 4);
  one_row.setRandom();
  CHECK(error_code_of([&] { learn::pca_fit(one_row, 0.5); }) == Errc::degenerate_data);

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(10, 4, 2.5);
  CHECK(error_code_of([&] { learn::pca_fit(flat, 0.5); }) == Errc::degenerate_data);
}

TEST_CASE("apply checks the input width") {
  Eigen::MatrixXd X = sample_matrix(30, 6, 5);
  auto t = learn::pca_fit(X, 0.5);
  Eigen::MatrixXd wrong(4, 7);
  wrong.setRandom();
  CHECK(error_code_of([&] { learn::pca_apply(t, wrong); }) == Errc::dimension_mismatch);
}

TEST_CASE("persistence round-trips exactly") {
  Eigen::MatrixXd X = sample_matrix(50, 9, 6);
  auto t = learn::pca_fit(X, 0.33);
  auto dir = scratch_dir("pca");
  auto path = (dir / "pca.json").string();
  learn::pca_save(t, path);
  auto loaded = learn::pca_load(path);
  CHECK(loaded.output_dim() == t.output_dim());
  CHECK((loaded.mean - t.mean).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((loaded.components - t.components).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((loaded.explained_variance - t.explained_variance).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(loaded.total_variance == t.total_variance);

  CHECK(error_code_of([&] { learn::pca_load((dir / "nope.json").string()); }) ==
        Errc::file_unreadable);
}
