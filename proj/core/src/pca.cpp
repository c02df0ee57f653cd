#include "impute/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

#include "impute/errors.hpp"

namespace impute {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& data, int k) {
  const Eigen::Index m = data.rows();
  const Eigen::Index n = data.cols();
  if (m < 2) throw InputError("fit_pca: need at least 2 records");
  if (k < 1 || k > n) throw InputError("fit_pca: K out of range");

  PcaModel model;
  model.mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(m - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericError("fit_pca: eigendecomposition failed");

  // Eigen returns ascending order; keep the top K, descending.
  model.eigenvectors.resize(n, k);
  model.eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {
    const Eigen::Index src = n - 1 - j;
    Eigen::VectorXd col = solver.eigenvectors().col(src);
    Eigen::Index max_at = 0;
    col.cwiseAbs().maxCoeff(&max_at);
    if (col(max_at) < 0.0) col = -col;
    model.eigenvectors.col(j) = col;
    model.eigenvalues(j) = std::max(0.0, solver.eigenvalues()(src));
  }
  return model;
}

Eigen::VectorXd project(const PcaModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.mean.size())
    throw InputError("project: vector length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(m.mean.size()));
  return m.eigenvectors.transpose() * (x - m.mean);
}

Eigen::MatrixXd project_batch(const PcaModel& m, const Eigen::MatrixXd& data) {
  if (data.cols() != m.mean.size()) throw InputError("project_batch: column count mismatch");
  return (data.rowwise() - m.mean.transpose()) * m.eigenvectors;
}

Eigen::VectorXd reconstruct(const PcaModel& m, const Eigen::VectorXd& y) {
  if (y.size() != m.dimension())
    throw InputError("reconstruct: vector length " + std::to_string(y.size()) +
                     ", expected " + std::to_string(m.dimension()));
  return m.eigenvectors * y + m.mean;
}

double reconstruction_rmse(const PcaModel& m, const Eigen::MatrixXd& data) {
  const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd recon = (centered * m.eigenvectors) * m.eigenvectors.transpose();
  const double sse = (recon - centered).squaredNorm();
  return std::sqrt(sse / static_cast<double>(data.rows() * data.cols()));
}

DimensionSweep choose_dimension(const Eigen::MatrixXd& data, double tolerance) {
  const int n = static_cast<int>(data.cols());
  if (n < 2) throw InputError("choose_dimension: need at least 2 columns");

  DimensionSweep sweep;
  const PcaModel full = fit_pca(data, n);
  for (int k = 1; k <= n; ++k) {
    PcaModel truncated;
    truncated.mean = full.mean;
    truncated.eigenvectors = full.eigenvectors.leftCols(k);
    truncated.eigenvalues = full.eigenvalues.head(k);
    sweep.rmse_by_k.push_back(reconstruction_rmse(truncated, data));
  }
  const double floor = sweep.rmse_by_k.back();
  sweep.chosen = n;
  for (int k = 1; k <= n; ++k) {
    if (sweep.rmse_by_k[static_cast<std::size_t>(k) - 1] <= floor + tolerance) {
      sweep.chosen = k;
      break;
    }
  }
  return sweep;
}

std::string pca_to_text(const PcaModel& m) {
  std::ostringstream out;
  out << "pca 1\n";
  out << "dims " << m.input_size() << ' ' << m.dimension() << '\n';
  for (Eigen::Index i = 0; i < m.mean.size(); ++i) {
    if (i) out << ' ';
    out << fmt(m.mean(i));
  }
  out << '\n';
  for (Eigen::Index j = 0; j < m.eigenvalues.size(); ++j) {
    if (j) out << ' ';
    out << fmt(m.eigenvalues(j));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.eigenvectors.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.eigenvectors.cols(); ++j) {
      if (j) out << ' ';
      out << fmt(m.eigenvectors(i, j));
    }
    out << '\n';
  }
  return out.str();
}

PcaModel pca_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "pca 1") throw InputError("pca text: bad magic line");
  if (!std::getline(in, line) || line.rfind("dims ", 0) != 0)
    throw InputError("pca text: missing dims line");
  int n = 0, k = 0;
  {
    std::istringstream s(line.substr(5));
    if (!(s >> n >> k) || n < 1 || k < 1 || k > n)
      throw InputError("pca text: malformed dims line");
  }
  PcaModel m;
  m.mean.resize(n);
  m.eigenvalues.resize(k);
  m.eigenvectors.resize(n, k);
  for (int i = 0; i < n; ++i)
    if (!(in >> m.mean(i))) throw InputError("pca text: truncated mean");
  for (int j = 0; j < k; ++j)
    if (!(in >> m.eigenvalues(j))) throw InputError("pca text: truncated eigenvalues");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      if (!(in >> m.eigenvectors(i, j))) throw InputError("pca text: truncated eigenvectors");
  return m;
}

void save_pca(const PcaModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write pca file " + path.string());
  out << pca_to_text(m);
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pca file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return pca_from_text(buf.str());
}

}  // namespace impute
