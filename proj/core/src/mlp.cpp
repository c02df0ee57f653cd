#include "impute/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "impute/errors.hpp"
#include "impute/rng.hpp"

namespace impute {

namespace {

Eigen::MatrixXd activate_output(const MlpModel& m, const Eigen::MatrixXd& z) {
  if (m.out_act == OutputActivation::linear) return z;
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

Eigen::VectorXd pack(const MlpModel& m) {
  Eigen::VectorXd v(m.parameter_count());
  int at = 0;
  v.segment(at, m.w1.size()) = Eigen::Map<const Eigen::VectorXd>(m.w1.data(), m.w1.size());
  at += static_cast<int>(m.w1.size());
  v.segment(at, m.b1.size()) = m.b1;
  at += static_cast<int>(m.b1.size());
  v.segment(at, m.w2.size()) = Eigen::Map<const Eigen::VectorXd>(m.w2.data(), m.w2.size());
  at += static_cast<int>(m.w2.size());
  v.segment(at, m.b2.size()) = m.b2;
  return v;
}

void unpack(const Eigen::VectorXd& v, MlpModel& m) {
  int at = 0;
  Eigen::Map<Eigen::VectorXd>(m.w1.data(), m.w1.size()) = v.segment(at, m.w1.size());
  at += static_cast<int>(m.w1.size());
  m.b1 = v.segment(at, m.b1.size());
  at += static_cast<int>(m.b1.size());
  Eigen::Map<Eigen::VectorXd>(m.w2.data(), m.w2.size()) = v.segment(at, m.w2.size());
  at += static_cast<int>(m.w2.size());
  m.b2 = v.segment(at, m.b2.size());
}

Eigen::VectorXd pack_grad(const MlpGradient& g, int n) {
  Eigen::VectorXd v(n);
  int at = 0;
  v.segment(at, g.w1.size()) = Eigen::Map<const Eigen::VectorXd>(g.w1.data(), g.w1.size());
  at += static_cast<int>(g.w1.size());
  v.segment(at, g.b1.size()) = g.b1;
  at += static_cast<int>(g.b1.size());
  v.segment(at, g.w2.size()) = Eigen::Map<const Eigen::VectorXd>(g.w2.data(), g.w2.size());
  at += static_cast<int>(g.w2.size());
  v.segment(at, g.b2.size()) = g.b2;
  return v;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

MlpModel init_mlp(int input, int hidden, int output, std::uint64_t seed,
                  OutputActivation out_act) {
  if (input < 1 || hidden < 1 || output < 1)
    throw InputError("init_mlp: layer sizes must be >= 1");
  MlpModel m;
  m.input = input;
  m.hidden = hidden;
  m.output = output;
  m.out_act = out_act;
  m.w1.resize(input, hidden);
  m.b1.resize(hidden);
  m.w2.resize(hidden, output);
  m.b2.resize(output);

  Rng rng = Rng::stream(seed, "init");
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int j = 0; j < hidden; ++j)
    for (int i = 0; i < input; ++i) m.w1(i, j) = rng.uniform(-1.0, 1.0) * s1;
  for (int j = 0; j < hidden; ++j) m.b1(j) = rng.uniform(-1.0, 1.0) * s1;
  for (int k = 0; k < output; ++k)
    for (int j = 0; j < hidden; ++j) m.w2(j, k) = rng.uniform(-1.0, 1.0) * s2;
  for (int k = 0; k < output; ++k) m.b2(k) = rng.uniform(-1.0, 1.0) * s2;
  return m;
}

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.input)
    throw InputError("forward: input has " + std::to_string(x.size()) + " components, expected " +
                     std::to_string(m.input));
  const Eigen::VectorXd h = (m.w1.transpose() * x + m.b1).array().tanh();
  const Eigen::VectorXd z = m.w2.transpose() * h + m.b2;
  if (m.out_act == OutputActivation::linear) return z;
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& batch) {
  if (batch.cols() != m.input) throw InputError("forward_batch: column count mismatch");
  const Eigen::MatrixXd h =
      ((batch * m.w1).rowwise() + m.b1.transpose()).array().tanh();
  const Eigen::MatrixXd z = (h * m.w2).rowwise() + m.b2.transpose();
  return activate_output(m, z);
}

double loss_and_gradient(const MlpModel& m, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, MlpGradient& grad) {
  if (batch.rows() != targets.rows())
    throw InputError("loss_and_gradient: batch/target row mismatch");
  if (batch.cols() != m.input || targets.cols() != m.output)
    throw InputError("loss_and_gradient: shape mismatch");

  const Eigen::MatrixXd h =
      ((batch * m.w1).rowwise() + m.b1.transpose()).array().tanh();
  const Eigen::MatrixXd z = (h * m.w2).rowwise() + m.b2.transpose();
  const Eigen::MatrixXd y = activate_output(m, z);

  const Eigen::MatrixXd err = y - targets;
  const double sse = err.squaredNorm();

  Eigen::MatrixXd delta2;
  if (m.out_act == OutputActivation::sigmoid)
    delta2 = (2.0 * err.array() * y.array() * (1.0 - y.array())).matrix();
  else
    delta2 = 2.0 * err;

  grad.w2 = h.transpose() * delta2;
  grad.b2 = delta2.colwise().sum().transpose();
  const Eigen::MatrixXd delta1 =
      ((delta2 * m.w2.transpose()).array() * (1.0 - h.array().square())).matrix();
  grad.w1 = batch.transpose() * delta1;
  grad.b1 = delta1.colwise().sum().transpose();
  return sse;
}

double loss(const MlpModel& m, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets) {
  return (forward_batch(m, batch) - targets).squaredNorm();
}

double rmse(const MlpModel& m, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& targets) {
  const double sse = loss(m, batch, targets);
  return std::sqrt(sse / (static_cast<double>(batch.rows()) * static_cast<double>(m.output)));
}

TrainResult train_scg(const MlpModel& m, const Eigen::MatrixXd& train_x,
                      const Eigen::MatrixXd& train_t, const Eigen::MatrixXd& val_x,
                      const Eigen::MatrixXd& val_t, const TrainConfig& cfg) {
  if (cfg.max_cycles < 1) throw InputError("train_scg: max_cycles must be >= 1");
  if (cfg.early_stop_patience < 1) throw InputError("train_scg: patience must be >= 1");

  MlpModel work = m;
  const int n_params = m.parameter_count();
  MlpGradient gbuf;

  auto eval_loss = [&](const Eigen::VectorXd& wv) {
    unpack(wv, work);
    const double f = loss(work, train_x, train_t);
    if (!std::isfinite(f))
      throw NumericError("train_scg: non-finite loss, training diverged");
    return f;
  };
  auto eval_grad = [&](const Eigen::VectorXd& wv) {
    unpack(wv, work);
    loss_and_gradient(work, train_x, train_t, gbuf);
    return pack_grad(gbuf, n_params);
  };

  Eigen::VectorXd w = pack(m);
  double f = eval_loss(w);
  Eigen::VectorXd r = -eval_grad(w);
  Eigen::VectorXd p = r;
  bool success = true;
  double delta = 0.0;
  double lambda = cfg.scg_lambda;
  double lambda_bar = 0.0;

  const auto val_rmse_of = [&](const Eigen::VectorXd& wv) {
    unpack(wv, work);
    return rmse(work, val_x, val_t);
  };
  const double denom =
      static_cast<double>(train_x.rows()) * static_cast<double>(m.output);

  // best snapshot starts at the initial weights so training can only help
  Eigen::VectorXd best_w = w;
  double best_val = val_rmse_of(w);
  int since_improved = 0;

  TrainReport report;
  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    // one cycle = one weight update; a failed step attempt only raises
    // lambda and retries, it does not consume a cycle
    bool stepped = false;
    for (int attempt = 0; attempt < 64 && !stepped; ++attempt) {
      const double pnorm2 = p.squaredNorm();
      if (pnorm2 < 1e-300 || r.squaredNorm() < 1e-300) break;  // converged

      if (success) {
        const double sigma = cfg.scg_sigma / std::sqrt(pnorm2);
        const Eigen::VectorXd grad_here = -r;
        const Eigen::VectorXd grad_shift = eval_grad(w + sigma * p);
        delta = p.dot((grad_shift - grad_here) / sigma);
      }
      delta += (lambda - lambda_bar) * pnorm2;
      if (delta <= 0.0) {
        lambda_bar = 2.0 * (lambda - delta / pnorm2);
        delta = -delta + lambda * pnorm2;
        lambda = lambda_bar;
      }
      const double mu = p.dot(r);
      const double alpha = mu / delta;
      const double f_step = eval_loss(w + alpha * p);
      const double comparison = 2.0 * delta * (f - f_step) / (mu * mu);

      if (comparison >= 0.0) {
        w += alpha * p;
        f = f_step;
        const Eigen::VectorXd r_new = -eval_grad(w);
        lambda_bar = 0.0;
        success = true;
        if (cycle % n_params == 0) {
          p = r_new;  // restart in the steepest-descent direction
        } else {
          const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
          p = r_new + beta * p;
        }
        r = r_new;
        if (comparison >= 0.75) lambda *= 0.25;
        stepped = true;
      } else {
        lambda_bar = lambda;
        success = false;
      }
      if (comparison < 0.25) lambda += delta * (1.0 - comparison) / pnorm2;
      if (!std::isfinite(lambda) || lambda > 1e100) break;  // no usable step size left
    }
    if (!stepped) break;  // converged or wedged, weights unchanged this cycle

    report.train_rmse.push_back(std::sqrt(f / denom));
    const double vr = val_rmse_of(w);
    report.validation_rmse.push_back(vr);
    report.stopped_at = cycle;

    if (vr < best_val - 1e-15) {
      best_val = vr;
      best_w = w;
      since_improved = 0;
    } else {
      ++since_improved;
    }
    if (since_improved >= cfg.early_stop_patience) break;
  }

  if (report.validation_rmse.empty()) {
    report.best_validation = best_val;
  } else {
    report.best_validation = *std::min_element(report.validation_rmse.begin(),
                                               report.validation_rmse.end());
  }

  TrainResult out;
  out.model = m;
  unpack(best_w, out.model);
  out.report = std::move(report);
  return out;
}

SweepResult sweep_hidden_nodes(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_t,
                               const Eigen::MatrixXd& val_x, const Eigen::MatrixXd& val_t,
                               const std::vector<int>& candidates, int cycles,
                               std::uint64_t seed, OutputActivation out_act) {
  if (candidates.empty()) throw InputError("sweep_hidden_nodes: no candidates");
  SweepResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int h : candidates) {
    MlpModel m = init_mlp(static_cast<int>(train_x.cols()), h,
                          static_cast<int>(train_t.cols()), seed, out_act);
    TrainConfig cfg;
    cfg.max_cycles = cycles;
    cfg.early_stop_patience = cycles + 1;  // fixed budget, no early stop
    cfg.seed = seed;
    auto trained = train_scg(m, train_x, train_t, val_x, val_t, cfg);
    const double tr = trained.report.train_rmse.empty()
                          ? rmse(m, train_x, train_t)
                          : trained.report.train_rmse.back();
    result.rows.push_back(SweepRow{h, tr});
    if (tr < best || (tr == best && h < result.chosen_hidden)) {
      best = tr;
      result.chosen_hidden = h;
    }
  }
  return result;
}

std::string mlp_to_text(const MlpModel& m) {
  std::ostringstream out;
  out << "mlp 1\n";
  out << "layers " << m.input << ' ' << m.hidden << ' ' << m.output << '\n';
  out << "output " << (m.out_act == OutputActivation::sigmoid ? "sigmoid" : "linear") << '\n';
  auto write_matrix = [&out](const Eigen::MatrixXd& w) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        out << fmt(w(r, c));
      }
      out << '\n';
    }
  };
  write_matrix(m.w1);
  write_matrix(m.b1.transpose());
  write_matrix(m.w2);
  write_matrix(m.b2.transpose());
  return out.str();
}

MlpModel mlp_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "mlp 1") throw InputError("mlp text: bad magic line");
  if (!std::getline(in, line) || line.rfind("layers ", 0) != 0)
    throw InputError("mlp text: missing layers line");
  MlpModel m;
  {
    std::istringstream s(line.substr(7));
    if (!(s >> m.input >> m.hidden >> m.output))
      throw InputError("mlp text: malformed layers line");
  }
  if (!std::getline(in, line) || line.rfind("output ", 0) != 0)
    throw InputError("mlp text: missing output line");
  const std::string act = line.substr(7);
  if (act == "sigmoid") m.out_act = OutputActivation::sigmoid;
  else if (act == "linear") m.out_act = OutputActivation::linear;
  else throw InputError("mlp text: unknown output activation '" + act + "'");

  m.w1.resize(m.input, m.hidden);
  m.b1.resize(m.hidden);
  m.w2.resize(m.hidden, m.output);
  m.b2.resize(m.output);
  auto read_all = [&in](double* dst, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(in >> dst[i])) throw InputError("mlp text: truncated weight data");
  };
  // row-major order to match the writer
  Eigen::MatrixXd w1t(m.hidden, m.input), w2t(m.output, m.hidden);
  read_all(w1t.data(), w1t.size());
  m.w1 = w1t.transpose();
  read_all(m.b1.data(), m.b1.size());
  read_all(w2t.data(), w2t.size());
  m.w2 = w2t.transpose();
  read_all(m.b2.data(), m.b2.size());
  return m;
}

void save_mlp(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file " + path.string());
  out << mlp_to_text(m);
}

MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return mlp_from_text(buf.str());
}

}  // namespace impute
