#include <doctest.h>

#include <cmath>
#include <limits>

#include "impute/errors.hpp"
#include "impute/pca.hpp"
#include "impute/rng.hpp"

using namespace impute;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform();
  return out;
}

Eigen::MatrixXd rank_k_data(Eigen::Index rows, Eigen::Index cols, int k, Rng& rng) {
  Eigen::MatrixXd factors(rows, k);
  Eigen::MatrixXd basis(k, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int j = 0; j < k; ++j) factors(r, j) = rng.normal() * (k - j);
  for (int j = 0; j < k; ++j)
    for (Eigen::Index c = 0; c < cols; ++c) basis(j, c) = rng.normal();
  return factors * basis;
}

}  // namespace

TEST_CASE("rank-1 data has a single nonzero eigenvalue") {
  Rng rng(1);
  Eigen::MatrixXd data(40, 2);
  for (int r = 0; r < 40; ++r) {
    const double t = rng.uniform(-2.0, 2.0);
    data(r, 0) = 3.0 * t + 1.0;
    data(r, 1) = -2.0 * t + 0.5;
  }
  const PcaModel m = fit_pca(data, 2);
  CHECK(m.eigenvalues(0) > 0.0);
  CHECK(std::abs(m.eigenvalues(1)) < 1e-9);

  const PcaModel one = fit_pca(data, 1);
  CHECK(reconstruction_rmse(one, data) < 1e-9);
}

TEST_CASE("isotropic data has near-unit eigenvalues") {
  Rng rng(2);
  Eigen::MatrixXd data(5000, 4);
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (int c = 0; c < 4; ++c) data(r, c) = rng.normal();
  const PcaModel m = fit_pca(data, 4);
  for (int j = 0; j < 4; ++j) CHECK(m.eigenvalues(j) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("full-rank fit gives an orthonormal square basis") {
  Rng rng(3);
  const Eigen::MatrixXd data = random_matrix(50, 8, rng);
  const PcaModel m = fit_pca(data, 8);
  const Eigen::MatrixXd utu = m.eigenvectors.transpose() * m.eigenvectors;
  CHECK((utu - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);
  const Eigen::MatrixXd uut = m.eigenvectors * m.eigenvectors.transpose();
  CHECK((uut - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);

  // lossless round trip at K = N
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x(i) = rng.uniform();
    const Eigen::VectorXd back = reconstruct(m, project(m, x));
    CHECK((back - x).norm() < 1e-9);
  }
}

TEST_CASE("projection geometry") {
  Rng rng(4);
  const Eigen::MatrixXd data = random_matrix(60, 5, rng);
  const PcaModel m = fit_pca(data, 5);

  const Eigen::VectorXd at_mean = project(m, m.mean);
  CHECK(at_mean.norm() < 1e-12);

  const Eigen::VectorXd shifted = project(m, m.mean + m.eigenvectors.col(0));
  CHECK(shifted(0) == doctest::Approx(1.0));
  for (int j = 1; j < 5; ++j) CHECK(std::abs(shifted(j)) < 1e-9);

  CHECK(reconstruct(m, Eigen::VectorXd::Zero(5)) == m.mean);
  CHECK_THROWS_AS(project(m, Eigen::VectorXd::Zero(3)), InputError);
  CHECK_THROWS_AS(reconstruct(m, Eigen::VectorXd::Zero(3)), InputError);
}

TEST_CASE("reconstruction error drops monotonically with K") {
  Rng rng(5);
  const Eigen::MatrixXd data = random_matrix(80, 6, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    const PcaModel m = fit_pca(data, k);
    const double e = reconstruction_rmse(m, data);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("eigenvalue sum equals the covariance trace") {
  Rng rng(6);
  const Eigen::MatrixXd data = random_matrix(50, 8, rng);
  const PcaModel m = fit_pca(data, 8);
  const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / 49.0;
  CHECK(m.eigenvalues.sum() == doctest::Approx(cov.trace()).epsilon(1e-9));
}

TEST_CASE("reconstruction SSE equals (M-1) times the discarded eigenvalue mass") {
  Rng rng(7);
  const Eigen::MatrixXd data = rank_k_data(70, 6, 6, rng);
  const PcaModel full = fit_pca(data, 6);
  for (int k = 1; k < 6; ++k) {
    const PcaModel m = fit_pca(data, k);
    const double rmse_k = reconstruction_rmse(m, data);
    const double sse = rmse_k * rmse_k * 70.0 * 6.0;
    const double discarded = full.eigenvalues.tail(6 - k).sum() * 69.0;
    CHECK(sse == doctest::Approx(discarded).epsilon(1e-6));
  }
}

TEST_CASE("eigenvector sign convention is stable") {
  Rng rng(8);
  const Eigen::MatrixXd data = random_matrix(40, 5, rng);
  const PcaModel m = fit_pca(data, 5);
  for (int j = 0; j < 5; ++j) {
    Eigen::Index at = 0;
    m.eigenvectors.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(m.eigenvectors(at, j) > 0.0);
  }
}

TEST_CASE("degenerate all-identical data is allowed") {
  Eigen::MatrixXd data = Eigen::MatrixXd::Constant(10, 3, 0.4);
  const PcaModel m = fit_pca(data, 3);
  for (int j = 0; j < 3; ++j) CHECK(m.eigenvalues(j) == doctest::Approx(0.0));
}

TEST_CASE("choose_dimension finds constructed rank") {
  Rng rng(9);
  const Eigen::MatrixXd data = rank_k_data(100, 7, 3, rng);
  const DimensionSweep sweep = choose_dimension(data, 1e-6);
  CHECK(sweep.chosen == 3);
  REQUIRE(sweep.rmse_by_k.size() == 7);
  CHECK(sweep.rmse_by_k[2] < 1e-9);

  const DimensionSweep everything =
      choose_dimension(data, std::numeric_limits<double>::infinity());
  CHECK(everything.chosen == 1);

  Eigen::MatrixXd iso(300, 4);
  for (Eigen::Index r = 0; r < 300; ++r)
    for (int c = 0; c < 4; ++c) iso(r, c) = rng.normal();
  CHECK(choose_dimension(iso, 0.0).chosen == 4);
}

TEST_CASE("fit_pca validates its arguments") {
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS_AS(fit_pca(data, 1), InputError);
  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(5, 3);
  CHECK_THROWS_AS(fit_pca(ok, 0), InputError);
  CHECK_THROWS_AS(fit_pca(ok, 4), InputError);
}

TEST_CASE("pca text serialization round trips bitwise") {
  Rng rng(10);
  const Eigen::MatrixXd data = random_matrix(30, 4, rng);
  const PcaModel m = fit_pca(data, 3);
  const std::string text = pca_to_text(m);
  const PcaModel back = pca_from_text(text);
  CHECK(back.mean == m.mean);
  CHECK(back.eigenvalues == m.eigenvalues);
  CHECK(back.eigenvectors == m.eigenvectors);
  CHECK(pca_to_text(back) == text);
}
