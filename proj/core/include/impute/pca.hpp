#ifndef IMPUTE_PCA_HPP
#define IMPUTE_PCA_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace impute {

/// Principal axes of the sample covariance, descending eigenvalue order.
/// Column signs are fixed so the largest-magnitude component is positive,
/// which keeps serialized models stable.
struct PcaModel {
  Eigen::VectorXd mean;         // N
  Eigen::MatrixXd eigenvectors; // N x K
  Eigen::VectorXd eigenvalues;  // K, non-increasing
  int dimension() const { return static_cast<int>(eigenvectors.cols()); }
  int input_size() const { return static_cast<int>(eigenvectors.rows()); }
};

/// Centers the data and keeps the top-K eigenvectors of the 1/(M-1)
/// covariance matrix.
PcaModel fit_pca(const Eigen::MatrixXd& data, int k);

/// y = U^T (x - mean)
Eigen::VectorXd project(const PcaModel& m, const Eigen::VectorXd& x);
Eigen::MatrixXd project_batch(const PcaModel& m, const Eigen::MatrixXd& data);

/// x_hat = U y + mean
Eigen::VectorXd reconstruct(const PcaModel& m, const Eigen::VectorXd& y);

/// Reconstruction RMSE of the dataset through a K-dimensional model.
double reconstruction_rmse(const PcaModel& m, const Eigen::MatrixXd& data);

/// Per-K reconstruction RMSE table and the smallest K whose RMSE is within
/// tolerance of the K=N floor.
struct DimensionSweep {
  std::vector<double> rmse_by_k;  // index 0 is K=1
  int chosen = 0;
};
DimensionSweep choose_dimension(const Eigen::MatrixXd& data, double tolerance);

std::string pca_to_text(const PcaModel& m);
PcaModel pca_from_text(const std::string& text);
void save_pca(const PcaModel& m, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace impute

#endif
