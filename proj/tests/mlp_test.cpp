#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "impute/errors.hpp"
#include "impute/mlp.hpp"
#include "impute/rng.hpp"

using namespace impute;

namespace {

/// Plain-loop forward pass, independent of the Eigen implementation.
std::vector<double> reference_forward(const MlpModel& m, const std::vector<double>& x) {
  std::vector<double> h(static_cast<std::size_t>(m.hidden));
  for (int j = 0; j < m.hidden; ++j) {
    double z = m.b1(j);
    for (int i = 0; i < m.input; ++i) z += m.w1(i, j) * x[static_cast<std::size_t>(i)];
    h[static_cast<std::size_t>(j)] = std::tanh(z);
  }
  std::vector<double> y(static_cast<std::size_t>(m.output));
  for (int k = 0; k < m.output; ++k) {
    double z = m.b2(k);
    for (int j = 0; j < m.hidden; ++j) z += m.w2(j, k) * h[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(k)] =
        m.out_act == OutputActivation::sigmoid ? 1.0 / (1.0 + std::exp(-z)) : z;
  }
  return y;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Max relative error between the analytic gradient and central differences.
double gradient_check(MlpModel m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                      double h = 1e-5) {
  MlpGradient grad;
  loss_and_gradient(m, x, t, grad);

  double worst = 0.0;
  const auto check = [&](double& w, double g) {
    const double saved = w;
    w = saved + h;
    const double up = loss(m, x, t);
    w = saved - h;
    const double down = loss(m, x, t);
    w = saved;
    worst = std::max(worst, rel_err(g, (up - down) / (2.0 * h)));
  };
  for (int i = 0; i < m.input; ++i)
    for (int j = 0; j < m.hidden; ++j) check(m.w1(i, j), grad.w1(i, j));
  for (int j = 0; j < m.hidden; ++j) check(m.b1(j), grad.b1(j));
  for (int j = 0; j < m.hidden; ++j)
    for (int k = 0; k < m.output; ++k) check(m.w2(j, k), grad.w2(j, k));
  for (int k = 0; k < m.output; ++k) check(m.b2(k), grad.b2(k));
  return worst;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform();
  return out;
}

/// Data on a 2-plane inside [0,1]^cols, reproducible by a small autoencoder.
Eigen::MatrixXd planar_data(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd basis(2, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    basis(0, c) = rng.uniform(-1.0, 1.0);
    basis(1, c) = rng.uniform(-1.0, 1.0);
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    for (Eigen::Index c = 0; c < cols; ++c)
      out(r, c) = 0.5 + 0.2 * (u * basis(0, c) + v * basis(1, c));
  }
  return out;
}

}  // namespace

TEST_CASE("init is deterministic and shaped like the paper networks") {
  const MlpModel a = init_mlp(13, 11, 13, 42);
  const MlpModel b = init_mlp(13, 11, 13, 42);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);
  CHECK(a.w1.rows() == 13);
  CHECK(a.w1.cols() == 11);
  CHECK(a.b1.size() == 11);
  CHECK(a.w2.rows() == 11);
  CHECK(a.w2.cols() == 13);
  CHECK(a.b2.size() == 13);

  const MlpModel c = init_mlp(13, 17, 7, 1, OutputActivation::linear);
  CHECK(c.w1.rows() == 13);
  CHECK(c.w1.cols() == 17);
  CHECK(c.w2.rows() == 17);
  CHECK(c.w2.cols() == 7);
  CHECK(c.b2.size() == 7);

  const MlpModel d = init_mlp(13, 11, 13, 43);
  CHECK(a.w1 != d.w1);
  CHECK_THROWS_AS(init_mlp(0, 3, 2, 1), InputError);
}

TEST_CASE("forward saturations") {
  MlpModel m = init_mlp(4, 3, 4, 7);
  m.w1.setZero();
  m.b1.setZero();
  m.w2.setZero();
  m.b2.setZero();
  const Eigen::VectorXd y = forward(m, Eigen::VectorXd::Constant(4, 0.3));
  for (int k = 0; k < 4; ++k) CHECK(y(k) == doctest::Approx(0.5));

  m.b2.setConstant(50.0);
  const Eigen::VectorXd y2 = forward(m, Eigen::VectorXd::Constant(4, 0.3));
  for (int k = 0; k < 4; ++k) CHECK(y2(k) == doctest::Approx(1.0));

  CHECK_THROWS_AS(forward(m, Eigen::VectorXd::Zero(3)), InputError);
}

TEST_CASE("forward matches an independent reference evaluation") {
  Rng rng(31);
  for (OutputActivation act : {OutputActivation::sigmoid, OutputActivation::linear}) {
    const MlpModel m = init_mlp(6, 4, 5, 123, act);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform();
    const Eigen::VectorXd got =
        forward(m, Eigen::Map<const Eigen::VectorXd>(x.data(), 6));
    const std::vector<double> want = reference_forward(m, x);
    for (int k = 0; k < 5; ++k) CHECK(got(k) == doctest::Approx(want[static_cast<std::size_t>(k)]));
  }
}

TEST_CASE("forward outputs stay in (0,1) for sigmoid nets") {
  Rng rng(5);
  const MlpModel m = init_mlp(5, 4, 5, 17);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = rng.uniform();
    const Eigen::VectorXd y = forward(m, x);
    for (int k = 0; k < 5; ++k) {
      CHECK(y(k) > 0.0);
      CHECK(y(k) < 1.0);
    }
  }
}

TEST_CASE("loss is zero with gradient zero at a perfect fit") {
  Rng rng(11);
  const MlpModel m = init_mlp(4, 3, 2, 9);
  const Eigen::MatrixXd x = random_matrix(6, 4, rng);
  const Eigen::MatrixXd t = forward_batch(m, x);
  MlpGradient grad;
  const double sse = loss_and_gradient(m, x, t, grad);
  CHECK(sse == doctest::Approx(0.0));
  CHECK(grad.w1.norm() == doctest::Approx(0.0));
  CHECK(grad.w2.norm() == doctest::Approx(0.0));
  CHECK(grad.b1.norm() == doctest::Approx(0.0));
  CHECK(grad.b2.norm() == doctest::Approx(0.0));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const int in = 2 + static_cast<int>(rng.index(5));
    const int hid = 1 + static_cast<int>(rng.index(4));
    const int out = 2 + static_cast<int>(rng.index(5));
    const auto act = trial % 2 == 0 ? OutputActivation::sigmoid : OutputActivation::linear;
    const MlpModel m = init_mlp(in, hid, out, 100 + static_cast<std::uint64_t>(trial), act);
    const Eigen::MatrixXd x = random_matrix(5, in, rng);
    const Eigen::MatrixXd t = random_matrix(5, out, rng);
    CHECK(gradient_check(m, x, t) < 1e-6);
  }
}

TEST_CASE("gradient of k identical rows is k times the single-row gradient") {
  Rng rng(3);
  const MlpModel m = init_mlp(4, 3, 4, 55);
  const Eigen::MatrixXd row = random_matrix(1, 4, rng);
  const Eigen::MatrixXd target = random_matrix(1, 4, rng);

  MlpGradient one, many;
  const double sse1 = loss_and_gradient(m, row, target, one);
  Eigen::MatrixXd rows(7, 4), targets(7, 4);
  for (int r = 0; r < 7; ++r) {
    rows.row(r) = row.row(0);
    targets.row(r) = target.row(0);
  }
  const double sse7 = loss_and_gradient(m, rows, targets, many);
  CHECK(sse7 == doctest::Approx(7.0 * sse1));
  CHECK((many.w1 - 7.0 * one.w1).norm() == doctest::Approx(0.0));
  CHECK((many.b2 - 7.0 * one.b2).norm() == doctest::Approx(0.0));
}

TEST_CASE("train_scg learns a planar autoencoder task") {
  Rng rng(8);
  const Eigen::MatrixXd data = planar_data(200, 6, rng);
  const Eigen::MatrixXd val = planar_data(50, 6, rng);

  const MlpModel m = init_mlp(6, 4, 6, 77);
  TrainConfig cfg;
  cfg.max_cycles = 200;
  cfg.early_stop_patience = 200;
  const TrainResult result = train_scg(m, data, data, val, val, cfg);

  REQUIRE(result.report.train_rmse.size() >= 10);
  for (int i = 1; i < 10; ++i)
    CHECK(result.report.train_rmse[i] < result.report.train_rmse[i - 1]);
  CHECK(result.report.train_rmse.back() < 0.05);
  CHECK(result.report.best_validation ==
        doctest::Approx(*std::min_element(result.report.validation_rmse.begin(),
                                          result.report.validation_rmse.end())));
}

TEST_CASE("train_scg stops early when validation worsens") {
  Rng rng(9);
  const Eigen::MatrixXd data = planar_data(100, 5, rng);
  const Eigen::MatrixXd val_x = planar_data(30, 5, rng);
  const Eigen::MatrixXd val_t = (1.0 - val_x.array()).matrix();  // forced upward

  const MlpModel m = init_mlp(5, 3, 5, 13);
  TrainConfig cfg;
  cfg.max_cycles = 100;
  cfg.early_stop_patience = 1;
  const TrainResult result = train_scg(m, data, data, val_x, val_t, cfg);
  CHECK(result.report.stopped_at < cfg.max_cycles);
}

TEST_CASE("train_scg is deterministic") {
  Rng rng(10);
  const Eigen::MatrixXd data = planar_data(80, 5, rng);
  const Eigen::MatrixXd val = planar_data(20, 5, rng);
  const MlpModel m = init_mlp(5, 3, 5, 4);
  TrainConfig cfg;
  cfg.max_cycles = 30;
  const TrainResult a = train_scg(m, data, data, val, val, cfg);
  const TrainResult b = train_scg(m, data, data, val, val, cfg);
  CHECK(a.report.train_rmse == b.report.train_rmse);
  CHECK(a.report.validation_rmse == b.report.validation_rmse);
  CHECK(a.model.w1 == b.model.w1);
  CHECK(a.model.w2 == b.model.w2);
}

TEST_CASE("train_scg never returns weights worse than the initial validation RMSE") {
  Rng rng(12);
  const Eigen::MatrixXd data = planar_data(60, 4, rng);
  const Eigen::MatrixXd val_x = planar_data(20, 4, rng);
  const Eigen::MatrixXd val_t = (1.0 - val_x.array()).matrix();

  const MlpModel m = init_mlp(4, 3, 4, 21);
  const double initial = rmse(m, val_x, val_t);
  TrainConfig cfg;
  cfg.max_cycles = 40;
  cfg.early_stop_patience = 40;
  const TrainResult result = train_scg(m, data, data, val_x, val_t, cfg);
  CHECK(rmse(result.model, val_x, val_t) <= initial + 1e-12);
}

TEST_CASE("hidden-node sweep recovers the intrinsic rank") {
  // rank-3 data with well separated factor scales
  Rng rng(14);
  const Eigen::Index cols = 8;
  Eigen::MatrixXd basis(3, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    basis(0, c) = rng.uniform(-1.0, 1.0);
    basis(1, c) = rng.uniform(-1.0, 1.0);
    basis(2, c) = rng.uniform(-1.0, 1.0);
  }
  const double scale[3] = {0.28, 0.18, 0.10};
  Eigen::MatrixXd data(300, cols);
  for (Eigen::Index r = 0; r < 300; ++r) {
    const double f[3] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                         rng.uniform(-1.0, 1.0)};
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.5;
      for (int k = 0; k < 3; ++k) v += scale[k] * f[k] * basis(k, c) * 0.5;
      data(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  const Eigen::MatrixXd val = data.topRows(60);

  const SweepResult sweep = sweep_hidden_nodes(data, data, val, val, {1, 2, 3, 4, 5, 6},
                                               250, 33);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.rows[0].train_rmse > sweep.rows[1].train_rmse);
  CHECK(sweep.rows[1].train_rmse > sweep.rows[2].train_rmse);
  for (std::size_t i = 3; i < 6; ++i)
    CHECK(sweep.rows[i].train_rmse < sweep.rows[2].train_rmse + 0.01);
}

TEST_CASE("sweep handles single and duplicate candidates") {
  Rng rng(15);
  const Eigen::MatrixXd data = planar_data(60, 5, rng);
  const SweepResult one = sweep_hidden_nodes(data, data, data, data, {3}, 20, 1);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.chosen_hidden == 3);

  const SweepResult dup = sweep_hidden_nodes(data, data, data, data, {4, 4}, 20, 1);
  REQUIRE(dup.rows.size() == 2);
  CHECK(dup.rows[0].train_rmse == dup.rows[1].train_rmse);
  CHECK(dup.chosen_hidden == 4);

  CHECK_THROWS_AS(sweep_hidden_nodes(data, data, data, data, {}, 20, 1), InputError);
}

TEST_CASE("model text serialization round trips bitwise") {
  const MlpModel m = init_mlp(7, 5, 3, 91, OutputActivation::linear);
  const std::string text = mlp_to_text(m);
  const MlpModel back = mlp_from_text(text);
  CHECK(back.w1 == m.w1);
  CHECK(back.b1 == m.b1);
  CHECK(back.w2 == m.w2);
  CHECK(back.b2 == m.b2);
  CHECK(back.out_act == m.out_act);
  CHECK(mlp_to_text(back) == text);
}

TEST_CASE("train_scg reports divergence as a numeric error") {
  // weights far outside float range blow the loss up immediately
  MlpModel m = init_mlp(3, 2, 3, 1);
  m.w1.setConstant(1e300);
  m.b2.setConstant(1e308);
  m.out_act = OutputActivation::linear;
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 3, 0.5);
  TrainConfig cfg;
  cfg.max_cycles = 5;
  CHECK_THROWS_AS(train_scg(m, x, x, x, x, cfg), NumericError);
}
