#ifndef IMPUTE_MLP_HPP
#define IMPUTE_MLP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace impute {

enum class OutputActivation { sigmoid, linear };

/// One-hidden-layer perceptron, tanh hidden units. The output layer is
/// logistic for data in [0,1] and linear when the targets are unbounded
/// (the PCA regression head).
struct MlpModel {
  int input = 0;
  int hidden = 0;
  int output = 0;
  Eigen::MatrixXd w1;  // input x hidden
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // hidden x output
  Eigen::VectorXd b2;  // output
  OutputActivation out_act = OutputActivation::sigmoid;

  int parameter_count() const {
    return input * hidden + hidden + hidden * output + output;
  }
};

struct TrainConfig {
  int max_cycles = 110;
  int early_stop_patience = 20;
  std::uint64_t seed = 0;
  double scg_sigma = 1e-4;
  double scg_lambda = 1e-6;
};

struct TrainReport {
  std::vector<double> train_rmse;       // one entry per cycle
  std::vector<double> validation_rmse;  // same length
  int stopped_at = 0;
  double best_validation = 0.0;
};

/// Weight-shaped gradient container.
struct MlpGradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Fan-in-scaled random initialization, deterministic under seed.
MlpModel init_mlp(int input, int hidden, int output, std::uint64_t seed,
                  OutputActivation out_act = OutputActivation::sigmoid);

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& batch);

/// Summed squared error over the batch and its analytic gradient.
double loss_and_gradient(const MlpModel& m, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, MlpGradient& grad);
double loss(const MlpModel& m, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets);

double rmse(const MlpModel& m, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets);

/// Scaled conjugate gradient batch training with early stopping on the
/// validation curve; returns the weights snapshot with the best validation
/// RMSE seen.
struct TrainResult {
  MlpModel model;
  TrainReport report;
};
TrainResult train_scg(const MlpModel& m, const Eigen::MatrixXd& train_x,
                      const Eigen::MatrixXd& train_t, const Eigen::MatrixXd& val_x,
                      const Eigen::MatrixXd& val_t, const TrainConfig& cfg);

/// Hidden-node sweep at a fixed cycle budget, identical seed per candidate.
struct SweepRow {
  int hidden = 0;
  double train_rmse = 0.0;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  int chosen_hidden = 0;  // argmin train RMSE, ties to the smaller candidate
};
SweepResult sweep_hidden_nodes(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_t,
                               const Eigen::MatrixXd& val_x, const Eigen::MatrixXd& val_t,
                               const std::vector<int>& candidates, int cycles,
                               std::uint64_t seed,
                               OutputActivation out_act = OutputActivation::sigmoid);

/// Flat text serialization, 17 significant digits.
std::string mlp_to_text(const MlpModel& m);
MlpModel mlp_from_text(const std::string& text);
void save_mlp(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_mlp(const std::filesystem::path& path);

}  // namespace impute

#endif
