#include "choicekit/learn/regressors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "choicekit/csv.hpp"
#include "choicekit/errors.hpp"
#include "choicekit/rng.hpp"

namespace choicekit::learn {

using nlohmann::json;

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double parse_number(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(Errc::invalid_hyperparameter, "bad value '" + value + "' for " + key);
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  return static_cast<int>(parse_number(key, value));
}

}  // namespace

void RegressorSpec::validate() const {
  switch (kind) {
    case RegressorKind::ridge: {
      const auto& p = std::get<RidgeParams>(params);
      if (!(p.alpha >= 0.0)) throw Error(Errc::invalid_hyperparameter, "ridge alpha must be >= 0");
      break;
    }
    case RegressorKind::lasso: {
      const auto& p = std::get<LassoParams>(params);
      if (!(p.alpha >= 0.0)) throw Error(Errc::invalid_hyperparameter, "lasso alpha must be >= 0");
      if (p.max_iter < 1) throw Error(Errc::invalid_hyperparameter, "lasso max_iter must be >= 1");
      break;
    }
    case RegressorKind::linear:
      break;
    case RegressorKind::knn: {
      if (std::get<KnnParams>(params).k < 1)
        throw Error(Errc::invalid_hyperparameter, "knn k must be >= 1");
      break;
    }
    case RegressorKind::svr_like: {
      if (!(std::get<SvrLikeParams>(params).c > 0.0))
        throw Error(Errc::invalid_hyperparameter, "svr c must be > 0");
      break;
    }
    case RegressorKind::mlp: {
      const auto& p = std::get<MlpParams>(params);
      if (p.hidden.empty()) throw Error(Errc::invalid_hyperparameter, "mlp needs hidden layers");
      for (int h : p.hidden)
        if (h < 1) throw Error(Errc::invalid_hyperparameter, "mlp hidden sizes must be >= 1");
      if (!(p.learning_rate > 0.0))
        throw Error(Errc::invalid_hyperparameter, "mlp learning_rate must be > 0");
      if (!(p.dropout >= 0.0 && p.dropout < 1.0))
        throw Error(Errc::invalid_hyperparameter, "mlp dropout must be in [0, 1)");
      if (p.batch_size < 1) throw Error(Errc::invalid_hyperparameter, "mlp batch_size must be >= 1");
      if (p.epochs < 1) throw Error(Errc::invalid_hyperparameter, "mlp epochs must be >= 1");
      break;
    }
    case RegressorKind::gbt: {
      const auto& p = std::get<GbtParams>(params);
      if (p.n_estimators < 1)
        throw Error(Errc::invalid_hyperparameter, "gbt n_estimators must be >= 1");
      if (p.max_depth < 1) throw Error(Errc::invalid_hyperparameter, "gbt max_depth must be >= 1");
      if (!(p.learning_rate > 0.0))
        throw Error(Errc::invalid_hyperparameter, "gbt learning_rate must be > 0");
      if (!(p.subsample > 0.0 && p.subsample <= 1.0))
        throw Error(Errc::invalid_hyperparameter, "gbt subsample must be in (0, 1]");
      if (!(p.colsample_bytree > 0.0 && p.colsample_bytree <= 1.0) ||
          !(p.colsample_bylevel > 0.0 && p.colsample_bylevel <= 1.0))
        throw Error(Errc::invalid_hyperparameter, "gbt colsample fractions must be in (0, 1]");
      if (!(p.min_child_weight >= 0.0))
        throw Error(Errc::invalid_hyperparameter, "gbt min_child_weight must be >= 0");
      break;
    }
    case RegressorKind::constant_baseline:
      break;
  }
}

std::string RegressorSpec::display_name() const {
  switch (kind) {
    case RegressorKind::ridge:
      return "ridge(alpha=" + csv::format_double(std::get<RidgeParams>(params).alpha) + ")";
    case RegressorKind::lasso:
      return "lasso(alpha=" + csv::format_double(std::get<LassoParams>(params).alpha) + ")";
    case RegressorKind::linear:
      return "linear";
    case RegressorKind::knn:
      return "knn(k=" + std::to_string(std::get<KnnParams>(params).k) + ")";
    case RegressorKind::svr_like:
      // kernel-ridge substitution is part of the name so reports carry it
      return "svr-like[kernel-ridge](c=" + csv::format_double(std::get<SvrLikeParams>(params).c) +
             ")";
    case RegressorKind::mlp: {
      const auto& p = std::get<MlpParams>(params);
      std::string dims;
      for (std::size_t i = 0; i < p.hidden.size(); ++i)
        dims += (i ? "-" : "") + std::to_string(p.hidden[i]);
      return "mlp(" + dims + ")";
    }
    case RegressorKind::gbt: {
      const auto& p = std::get<GbtParams>(params);
      return "gbt(trees=" + std::to_string(p.n_estimators) +
             ",depth=" + std::to_string(p.max_depth) + ")";
    }
    case RegressorKind::constant_baseline:
      return "constant-baseline";
  }
  return "unknown";
}

RegressorSpec RegressorSpec::ridge(double alpha, bool fit_intercept) {
  return {RegressorKind::ridge, RidgeParams{alpha, fit_intercept}};
}
RegressorSpec RegressorSpec::lasso(double alpha) {
  return {RegressorKind::lasso, LassoParams{.alpha = alpha}};
}
RegressorSpec RegressorSpec::linear() { return {RegressorKind::linear, LinearParams{}}; }
RegressorSpec RegressorSpec::knn(int k) { return {RegressorKind::knn, KnnParams{k}}; }
RegressorSpec RegressorSpec::svr_like(double c, double gamma) {
  return {RegressorKind::svr_like, SvrLikeParams{c, gamma}};
}
RegressorSpec RegressorSpec::mlp() { return {RegressorKind::mlp, MlpParams{}}; }
RegressorSpec RegressorSpec::gbt() { return {RegressorKind::gbt, GbtParams{}}; }
RegressorSpec RegressorSpec::constant() {
  return {RegressorKind::constant_baseline, ConstantParams{}};
}

RegressorSpec RegressorSpec::parse(const std::string& text) {
  std::string kind_name = text;
  std::string args;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    kind_name = text.substr(0, colon);
    args = text.substr(colon + 1);
  }

  RegressorSpec spec;
  if (kind_name == "ridge") spec = ridge();
  else if (kind_name == "lasso") spec = lasso();
  else if (kind_name == "linear") spec = linear();
  else if (kind_name == "knn") spec = knn();
  else if (kind_name == "svr" || kind_name == "svr-like") spec = svr_like();
  else if (kind_name == "mlp") spec = mlp();
  else if (kind_name == "gbt") spec = gbt();
  else if (kind_name == "constant" || kind_name == "constant-baseline") spec = constant();
  else throw Error(Errc::invalid_hyperparameter, "unknown regressor '" + kind_name + "'");

  std::stringstream ss(args);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::invalid_hyperparameter, "expected key=value, got '" + pair + "'");
    std::string key = pair.substr(0, eq);
    std::string value = pair.substr(eq + 1);
    bool ok = true;
    switch (spec.kind) {
      case RegressorKind::ridge: {
        auto& p = std::get<RidgeParams>(spec.params);
        if (key == "alpha") p.alpha = parse_number(key, value);
        else if (key == "fit_intercept") p.fit_intercept = parse_number(key, value) != 0.0;
        else ok = false;
        break;
      }
      case RegressorKind::lasso: {
        auto& p = std::get<LassoParams>(spec.params);
        if (key == "alpha") p.alpha = parse_number(key, value);
        else if (key == "max_iter") p.max_iter = parse_int(key, value);
        else ok = false;
        break;
      }
      case RegressorKind::linear:
        ok = false;
        break;
      case RegressorKind::knn: {
        if (key == "k") std::get<KnnParams>(spec.params).k = parse_int(key, value);
        else ok = false;
        break;
      }
      case RegressorKind::svr_like: {
        auto& p = std::get<SvrLikeParams>(spec.params);
        if (key == "c") p.c = parse_number(key, value);
        else if (key == "gamma") p.gamma = parse_number(key, value);
        else ok = false;
        break;
      }
      case RegressorKind::mlp: {
        auto& p = std::get<MlpParams>(spec.params);
        if (key == "lr") p.learning_rate = parse_number(key, value);
        else if (key == "weight_decay") p.weight_decay = parse_number(key, value);
        else if (key == "dropout") p.dropout = parse_number(key, value);
        else if (key == "batch_size") p.batch_size = parse_int(key, value);
        else if (key == "epochs") p.epochs = parse_int(key, value);
        else if (key == "hidden") {
          p.hidden.clear();
          std::stringstream hs(value);
          std::string dim;
          while (std::getline(hs, dim, '-')) p.hidden.push_back(parse_int(key, dim));
        } else ok = false;
        break;
      }
      case RegressorKind::gbt: {
        auto& p = std::get<GbtParams>(spec.params);
        if (key == "n_estimators") p.n_estimators = parse_int(key, value);
        else if (key == "max_depth") p.max_depth = parse_int(key, value);
        else if (key == "learning_rate") p.learning_rate = parse_number(key, value);
        else if (key == "min_child_weight") p.min_child_weight = parse_number(key, value);
        else if (key == "subsample") p.subsample = parse_number(key, value);
        else if (key == "colsample_bytree") p.colsample_bytree = parse_number(key, value);
        else if (key == "colsample_bylevel") p.colsample_bylevel = parse_number(key, value);
        else if (key == "reg_lambda") p.reg_lambda = parse_number(key, value);
        else if (key == "reg_alpha") p.reg_alpha = parse_number(key, value);
        else if (key == "gamma") p.gamma = parse_number(key, value);
        else if (key == "scale_pos_weight") p.scale_pos_weight = parse_number(key, value);
        else if (key == "max_delta_step") p.max_delta_step = parse_number(key, value);
        else ok = false;
        break;
      }
      case RegressorKind::constant_baseline:
        ok = false;
        break;
    }
    if (!ok)
      throw Error(Errc::invalid_hyperparameter,
                  "unknown key '" + key + "' for " + kind_name);
  }
  spec.validate();
  return spec;
}

FittedModel::FittedModel(RegressorSpec spec, int input_dim, std::uint64_t seed, State state)
    : spec_(std::move(spec)), input_dim_(input_dim), seed_(seed), state_(std::move(state)) {}

const LinearSolution* FittedModel::linear_solution() const {
  return std::get_if<LinearSolution>(&state_);
}

namespace {

// ---- linear family ---------------------------------------------------------

LinearSolution solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   bool fit_intercept, bool reject_singular) {
  Eigen::MatrixXd design;
  if (fit_intercept) {
    design.resize(X.rows(), X.cols() + 1);
    design << X, Eigen::VectorXd::Ones(X.rows());
  } else {
    design = X;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (reject_singular && qr.rank() < design.cols())
    throw Error(Errc::singular_system, "design matrix is rank deficient (rank " +
                                           std::to_string(qr.rank()) + " of " +
                                           std::to_string(design.cols()) + ")");
  Eigen::VectorXd sol = qr.solve(y);
  LinearSolution out;
  if (fit_intercept) {
    out.weights = sol.head(X.cols());
    out.intercept = sol(X.cols());
  } else {
    out.weights = sol;
  }
  return out;
}

LinearSolution fit_ridge(const RidgeParams& p, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y) {
  if (p.alpha == 0.0) return solve_least_squares(X, y, p.fit_intercept, false);
  LinearSolution out;
  if (p.fit_intercept) {
    Eigen::RowVectorXd x_mean = X.colwise().mean();
    double y_mean = y.mean();
    Eigen::MatrixXd xc = X.rowwise() - x_mean;
    Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::MatrixXd normal = xc.transpose() * xc;
    normal.diagonal().array() += p.alpha;
    out.weights = normal.ldlt().solve(xc.transpose() * yc);
    out.intercept = y_mean - x_mean * out.weights;
  } else {
    Eigen::MatrixXd normal = X.transpose() * X;
    normal.diagonal().array() += p.alpha;
    out.weights = normal.ldlt().solve(X.transpose() * y);
  }
  return out;
}

LinearSolution fit_lasso(const LassoParams& p, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y) {
  // Coordinate descent on (1/2n)||y - Xw - b||^2 + alpha*||w||_1.
  const auto n = X.rows();
  const auto d = X.cols();
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(d);
  double y_mean = 0.0;
  if (p.fit_intercept) {
    x_mean = X.colwise().mean();
    y_mean = y.mean();
  }
  Eigen::MatrixXd xc = X.rowwise() - x_mean;
  Eigen::VectorXd r = y.array() - y_mean;
  Eigen::VectorXd col_sq(d);
  for (Eigen::Index j = 0; j < d; ++j) col_sq(j) = xc.col(j).squaredNorm() / static_cast<double>(n);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int iter = 0; iter < p.max_iter; ++iter) {
    double max_step = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (col_sq(j) == 0.0) continue;
      double rho = xc.col(j).dot(r) / static_cast<double>(n) + col_sq(j) * w(j);
      double w_new = 0.0;
      if (rho > p.alpha)
        w_new = (rho - p.alpha) / col_sq(j);
      else if (rho < -p.alpha)
        w_new = (rho + p.alpha) / col_sq(j);
      double step = w_new - w(j);
      if (step != 0.0) {
        r -= xc.col(j) * step;
        w(j) = w_new;
        max_step = std::max(max_step, std::abs(step));
      }
    }
    if (max_step < p.tol) break;
  }
  LinearSolution out;
  out.weights = w;
  out.intercept = p.fit_intercept ? y_mean - x_mean * w : 0.0;
  return out;
}

// ---- kernel ridge -----------------------------------------------------------

double rbf_kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

FittedModel::KernelRidgeState fit_kernel_ridge(const SvrLikeParams& p, const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y) {
  FittedModel::KernelRidgeState state;
  state.gamma = p.gamma > 0.0 ? p.gamma : 1.0 / static_cast<double>(X.cols());
  state.y_mean = y.mean();
  state.train_x = X;
  const auto n = X.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
      k(i, j) = k(j, i) = rbf_kernel(X.row(i), X.row(j), state.gamma);
  }
  double lambda = 1.0 / (2.0 * p.c);
  k.diagonal().array() += lambda;
  state.dual_coef = k.ldlt().solve(Eigen::VectorXd(y.array() - state.y_mean));
  return state;
}

// ---- mlp --------------------------------------------------------------------

FittedModel::MlpState fit_mlp(const MlpParams& p, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, std::uint64_t seed) {
  Rng rng(mix_seed(seed, fnv1a64("mlp")));
  const auto n = X.rows();
  std::vector<Eigen::Index> dims;
  dims.push_back(X.cols());
  for (int h : p.hidden) dims.push_back(h);
  dims.push_back(1);
  const std::size_t layers = dims.size() - 1;

  FittedModel::MlpState state;
  state.weights.resize(layers);
  state.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    state.weights[l].resize(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < state.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < state.weights[l].cols(); ++j)
        state.weights[l](i, j) = uniform_range(rng, -limit, limit);
    state.biases[l] = Eigen::VectorXd::Zero(dims[l + 1]);
  }

  std::vector<Eigen::MatrixXd> m_w(layers), v_w(layers);
  std::vector<Eigen::VectorXd> m_b(layers), v_b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    m_w[l] = Eigen::MatrixXd::Zero(state.weights[l].rows(), state.weights[l].cols());
    v_w[l] = m_w[l];
    m_b[l] = Eigen::VectorXd::Zero(state.biases[l].size());
    v_b[l] = m_b[l];
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
      std::swap(order[i - 1], order[j]);
    }
    for (Eigen::Index start = 0; start < n; start += p.batch_size) {
      Eigen::Index count = std::min<Eigen::Index>(p.batch_size, n - start);
      Eigen::MatrixXd batch(count, X.cols());
      Eigen::VectorXd target(count);
      for (Eigen::Index b = 0; b < count; ++b) {
        batch.row(b) = X.row(order[static_cast<std::size_t>(start + b)]);
        target(b) = y(order[static_cast<std::size_t>(start + b)]);
      }

      // forward with inverted dropout on hidden activations
      std::vector<Eigen::MatrixXd> activations;  // activations[l]: input to layer l
      activations.push_back(batch);
      std::vector<Eigen::MatrixXd> masks(layers);
      for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z =
            (activations[l] * state.weights[l].transpose()).rowwise() +
            state.biases[l].transpose();
        if (l + 1 < layers) {
          z = z.cwiseMax(0.0);
          if (p.dropout > 0.0) {
            masks[l].resize(z.rows(), z.cols());
            double keep = 1.0 - p.dropout;
            for (Eigen::Index r = 0; r < z.rows(); ++r)
              for (Eigen::Index c = 0; c < z.cols(); ++c)
                masks[l](r, c) = uniform_double(rng) < keep ? 1.0 / keep : 0.0;
            z = z.cwiseProduct(masks[l]);
          }
        }
        activations.push_back(std::move(z));
      }

      Eigen::MatrixXd delta =
          2.0 * (activations.back() - target) / static_cast<double>(count);
      ++step;
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t l = layers; l-- > 0;) {
        Eigen::MatrixXd grad_w =
            delta.transpose() * activations[l] + p.weight_decay * state.weights[l];
        Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
        if (l > 0) {
          Eigen::MatrixXd back = delta * state.weights[l];
          Eigen::MatrixXd pre = activations[l];  // post-ReLU/dropout input of layer l
          back = back.cwiseProduct(
              (pre.array() > 0.0).cast<double>().matrix());
          if (p.dropout > 0.0) back = back.cwiseProduct(masks[l - 1]);
          delta = std::move(back);
        }
        m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grad_w;
        v_w[l] = beta2 * v_w[l] + (1.0 - beta2) * grad_w.cwiseProduct(grad_w);
        m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grad_b;
        v_b[l] = beta2 * v_b[l] + (1.0 - beta2) * grad_b.cwiseProduct(grad_b);
        state.weights[l].array() -=
            p.learning_rate * (m_w[l] / bc1).array() /
            ((v_w[l] / bc2).array().sqrt() + eps);
        state.biases[l].array() -=
            p.learning_rate * (m_b[l] / bc1).array() /
            ((v_b[l] / bc2).array().sqrt() + eps);
      }
    }
  }
  return state;
}

// ---- gradient boosted trees -------------------------------------------------

struct GbtWork {
  const Eigen::MatrixXd& x;
  const GbtParams& p;
  const Eigen::VectorXd& grad;  // g_i = pred_i - y_i, hessian 1 per row
  std::vector<FittedModel::GbtNode>& nodes;
  Rng& rng;
};

double gbt_thresholded(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double gbt_score(double g, double h, const GbtParams& p) {
  double t = gbt_thresholded(g, p.reg_alpha);
  return t * t / (h + p.reg_lambda);
}

double gbt_leaf_value(double g, double h, const GbtParams& p) {
  return -gbt_thresholded(g, p.reg_alpha) / (h + p.reg_lambda);
}

std::vector<int> sample_without_replacement(std::vector<int> pool, std::size_t want, Rng& rng) {
  for (std::size_t i = 0; i < want; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(want);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void gbt_build_tree(GbtWork& work, const std::vector<int>& rows,
                    const std::vector<int>& tree_features) {
  struct Pending {
    std::vector<int> rows;
    int node = 0;
  };
  work.nodes.clear();
  work.nodes.push_back({});
  std::vector<Pending> level{{rows, 0}};
  for (int depth = 0; depth < work.p.max_depth && !level.empty(); ++depth) {
    std::size_t want = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(work.p.colsample_bylevel * static_cast<double>(tree_features.size()))));
    std::vector<int> level_features = sample_without_replacement(tree_features, want, work.rng);

    std::vector<Pending> next;
    for (auto& item : level) {
      double g_total = 0.0;
      for (int r : item.rows) g_total += work.grad(r);
      double h_total = static_cast<double>(item.rows.size());

      double best_gain = 1e-12;
      int best_feature = -1;
      double best_threshold = 0.0;
      double parent_score = gbt_score(g_total, h_total, work.p);

      if (h_total >= 2.0 * work.p.min_child_weight) {
        std::vector<std::pair<double, int>> sorted;
        sorted.reserve(item.rows.size());
        for (int f : level_features) {
          sorted.clear();
          for (int r : item.rows) sorted.push_back({work.x(r, f), r});
          std::sort(sorted.begin(), sorted.end());
          double g_left = 0.0, h_left = 0.0;
          for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            g_left += work.grad(sorted[i].second);
            h_left += 1.0;
            if (sorted[i].first == sorted[i + 1].first) continue;
            double h_right = h_total - h_left;
            if (h_left < work.p.min_child_weight || h_right < work.p.min_child_weight) continue;
            double gain = 0.5 * (gbt_score(g_left, h_left, work.p) +
                                 gbt_score(g_total - g_left, h_right, work.p) - parent_score) -
                          work.p.gamma;
            if (gain > best_gain) {
              best_gain = gain;
              best_feature = f;
              best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
            }
          }
        }
      }

      if (best_feature < 0) {
        work.nodes[static_cast<std::size_t>(item.node)].value =
            gbt_leaf_value(g_total, h_total, work.p);
        continue;
      }

      Pending left, right;
      for (int r : item.rows)
        (work.x(r, best_feature) < best_threshold ? left.rows : right.rows).push_back(r);
      auto& node = work.nodes[static_cast<std::size_t>(item.node)];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = static_cast<int>(work.nodes.size());
      node.right = node.left + 1;
      left.node = node.left;
      right.node = node.right;
      work.nodes.push_back({});
      work.nodes.push_back({});
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    level = std::move(next);
  }
  // depth limit reached with splits still pending: close them as leaves
  for (auto& item : level) {
    double g_total = 0.0;
    for (int r : item.rows) g_total += work.grad(r);
    work.nodes[static_cast<std::size_t>(item.node)].value =
        gbt_leaf_value(g_total, static_cast<double>(item.rows.size()), work.p);
  }
}

double gbt_tree_predict(const std::vector<FittedModel::GbtNode>& nodes,
                        const Eigen::RowVectorXd& x) {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = x(node.feature) < node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

FittedModel::GbtState fit_gbt(const GbtParams& p, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, std::uint64_t seed) {
  if (p.scale_pos_weight)
    std::fprintf(stderr,
                 "warning: gbt scale_pos_weight has no effect on a regression tree; ignored\n");
  if (p.max_delta_step)
    std::fprintf(stderr,
                 "warning: gbt max_delta_step has no effect on a regression tree; ignored\n");

  const auto n = X.rows();
  const int d = static_cast<int>(X.cols());
  FittedModel::GbtState state;
  state.base = y.mean();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, state.base);

  std::vector<int> all_rows(static_cast<std::size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<int> all_features(static_cast<std::size_t>(d));
  std::iota(all_features.begin(), all_features.end(), 0);

  for (int t = 0; t < p.n_estimators; ++t) {
    Rng rng(mix_seed(seed, fnv1a64("gbt"), static_cast<std::uint64_t>(t)));
    std::size_t row_want = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(p.subsample * static_cast<double>(n))));
    std::vector<int> rows = sample_without_replacement(all_rows, row_want, rng);
    std::size_t col_want = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(p.colsample_bytree * static_cast<double>(d))));
    std::vector<int> features = sample_without_replacement(all_features, col_want, rng);

    Eigen::VectorXd grad = pred - y;
    std::vector<FittedModel::GbtNode> nodes;
    GbtWork work{X, p, grad, nodes, rng};
    gbt_build_tree(work, rows, features);

    for (Eigen::Index i = 0; i < n; ++i)
      pred(i) += p.learning_rate * gbt_tree_predict(nodes, X.row(i));
    state.trees.push_back(std::move(nodes));
  }
  return state;
}

}  // namespace

FittedModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, std::uint64_t seed) {
  spec.validate();
  if (X.rows() != y.size())
    throw Error(Errc::length_mismatch, "X has " + std::to_string(X.rows()) + " rows, y has " +
                                           std::to_string(y.size()));
  if (X.rows() < 1) throw Error(Errc::length_mismatch, "no training rows");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y(i) >= 0.0 && y(i) <= 1.0))
      throw Error(Errc::range_violation, "target outside [0, 1] at row " + std::to_string(i));

  switch (spec.kind) {
    case RegressorKind::ridge:
      return {spec, static_cast<int>(X.cols()), seed,
              fit_ridge(std::get<RidgeParams>(spec.params), X, y)};
    case RegressorKind::lasso:
      return {spec, static_cast<int>(X.cols()), seed,
              fit_lasso(std::get<LassoParams>(spec.params), X, y)};
    case RegressorKind::linear:
      return {spec, static_cast<int>(X.cols()), seed,
              solve_least_squares(X, y, std::get<LinearParams>(spec.params).fit_intercept, true)};
    case RegressorKind::knn: {
      FittedModel::KnnState state{X, y};
      return {spec, static_cast<int>(X.cols()), seed, std::move(state)};
    }
    case RegressorKind::svr_like:
      return {spec, static_cast<int>(X.cols()), seed,
              fit_kernel_ridge(std::get<SvrLikeParams>(spec.params), X, y)};
    case RegressorKind::mlp:
      return {spec, static_cast<int>(X.cols()), seed,
              fit_mlp(std::get<MlpParams>(spec.params), X, y, seed)};
    case RegressorKind::gbt:
      return {spec, static_cast<int>(X.cols()), seed,
              fit_gbt(std::get<GbtParams>(spec.params), X, y, seed)};
    case RegressorKind::constant_baseline:
      return {spec, static_cast<int>(X.cols()), seed, FittedModel::ConstantState{y.mean()}};
  }
  throw Error(Errc::invalid_hyperparameter, "unhandled regressor kind");
}

double FittedModel::predict_one(const Eigen::VectorXd& x) const {
  if (static_cast<int>(x.size()) != input_dim_)
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(input_dim_) +
                                              " features, got " + std::to_string(x.size()));
  double raw = 0.0;
  if (const auto* lin = std::get_if<LinearSolution>(&state_)) {
    raw = lin->weights.dot(x) + lin->intercept;
  } else if (const auto* knn = std::get_if<KnnState>(&state_)) {
    const auto& p = std::get<KnnParams>(spec_.params);
    const auto n = knn->train_x.rows();
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      dist[static_cast<std::size_t>(i)] = {(knn->train_x.row(i).transpose() - x).squaredNorm(), i};
    auto k = std::min<Eigen::Index>(p.k, n);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) sum += knn->train_y(dist[static_cast<std::size_t>(i)].second);
    raw = sum / static_cast<double>(k);
  } else if (const auto* kr = std::get_if<KernelRidgeState>(&state_)) {
    double sum = kr->y_mean;
    for (Eigen::Index i = 0; i < kr->train_x.rows(); ++i)
      sum += kr->dual_coef(i) * rbf_kernel(kr->train_x.row(i), x.transpose(), kr->gamma);
    raw = sum;
  } else if (const auto* mlp = std::get_if<MlpState>(&state_)) {
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < mlp->weights.size(); ++l) {
      Eigen::VectorXd z = mlp->weights[l] * a + mlp->biases[l];
      if (l + 1 < mlp->weights.size()) z = z.cwiseMax(0.0);
      a = std::move(z);
    }
    raw = a(0);
  } else if (const auto* gbt = std::get_if<GbtState>(&state_)) {
    const auto& p = std::get<GbtParams>(spec_.params);
    double sum = gbt->base;
    for (const auto& tree : gbt->trees)
      sum += p.learning_rate * gbt_tree_predict(tree, x.transpose());
    raw = sum;
  } else if (const auto* c = std::get_if<ConstantState>(&state_)) {
    raw = c->value;
  }
  return clamp01(raw);
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<int>(X.cols()) != input_dim_)
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(input_dim_) +
                                              " features, got " + std::to_string(X.cols()));
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_one(X.row(i).transpose());
  return out;
}

GridSearchResult grid_search(const std::vector<RegressorSpec>& specs,
                             const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                             const Eigen::MatrixXd& val_x, const Eigen::VectorXd& val_y,
                             std::uint64_t seed) {
  if (specs.empty()) throw Error(Errc::no_viable_model, "no specs to search");
  if (val_x.rows() != val_y.size() || val_x.rows() < 1)
    throw Error(Errc::length_mismatch, "validation split is empty or inconsistent");

  GridSearchResult result;
  std::optional<FittedModel> best;
  double best_mse = 0.0;
  std::string failures;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    LeaderboardEntry entry;
    entry.spec = specs[i];
    try {
      FittedModel model = fit_regressor(specs[i], train_x, train_y, seed);
      Eigen::VectorXd pred = model.predict(val_x);
      double mse = (pred - val_y).squaredNorm() / static_cast<double>(val_y.size());
      entry.val_mse = mse;
      if (!best || mse < best_mse) {
        best = std::move(model);
        best_mse = mse;
        result.best_index = i;
      }
    } catch (const Error& e) {
      entry.error = e.what();
      failures += "\n  " + specs[i].display_name() + ": " + e.what();
    }
    result.leaderboard.push_back(std::move(entry));
  }
  if (!best) throw Error(Errc::no_viable_model, "every spec failed:" + failures);
  result.best = std::move(*best);
  return result;
}

// ---- persistence ------------------------------------------------------------

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

const char* kind_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::ridge: return "ridge";
    case RegressorKind::lasso: return "lasso";
    case RegressorKind::linear: return "linear";
    case RegressorKind::knn: return "knn";
    case RegressorKind::svr_like: return "svr-like";
    case RegressorKind::mlp: return "mlp";
    case RegressorKind::gbt: return "gbt";
    case RegressorKind::constant_baseline: return "constant-baseline";
  }
  return "unknown";
}

json spec_to_json(const RegressorSpec& spec) {
  json out;
  out["kind"] = kind_name(spec.kind);
  json p;
  switch (spec.kind) {
    case RegressorKind::ridge: {
      const auto& r = std::get<RidgeParams>(spec.params);
      p["alpha"] = r.alpha;
      p["fit_intercept"] = r.fit_intercept;
      break;
    }
    case RegressorKind::lasso: {
      const auto& r = std::get<LassoParams>(spec.params);
      p["alpha"] = r.alpha;
      p["max_iter"] = r.max_iter;
      break;
    }
    case RegressorKind::linear:
      break;
    case RegressorKind::knn:
      p["k"] = std::get<KnnParams>(spec.params).k;
      break;
    case RegressorKind::svr_like: {
      const auto& r = std::get<SvrLikeParams>(spec.params);
      p["c"] = r.c;
      p["gamma"] = r.gamma;
      break;
    }
    case RegressorKind::mlp: {
      const auto& r = std::get<MlpParams>(spec.params);
      p["hidden"] = r.hidden;
      p["lr"] = r.learning_rate;
      p["weight_decay"] = r.weight_decay;
      p["dropout"] = r.dropout;
      p["batch_size"] = r.batch_size;
      p["epochs"] = r.epochs;
      break;
    }
    case RegressorKind::gbt: {
      const auto& r = std::get<GbtParams>(spec.params);
      p["n_estimators"] = r.n_estimators;
      p["max_depth"] = r.max_depth;
      p["learning_rate"] = r.learning_rate;
      p["min_child_weight"] = r.min_child_weight;
      p["subsample"] = r.subsample;
      p["colsample_bytree"] = r.colsample_bytree;
      p["colsample_bylevel"] = r.colsample_bylevel;
      p["reg_lambda"] = r.reg_lambda;
      p["reg_alpha"] = r.reg_alpha;
      p["gamma"] = r.gamma;
      break;
    }
    case RegressorKind::constant_baseline:
      break;
  }
  out["params"] = std::move(p);
  return out;
}

RegressorSpec spec_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  const json& p = j.at("params");
  if (kind == "ridge")
    return RegressorSpec::ridge(p.at("alpha").get<double>(), p.at("fit_intercept").get<bool>());
  if (kind == "lasso") {
    RegressorSpec s = RegressorSpec::lasso(p.at("alpha").get<double>());
    std::get<LassoParams>(s.params).max_iter = p.at("max_iter").get<int>();
    return s;
  }
  if (kind == "linear") return RegressorSpec::linear();
  if (kind == "knn") return RegressorSpec::knn(p.at("k").get<int>());
  if (kind == "svr-like")
    return RegressorSpec::svr_like(p.at("c").get<double>(), p.at("gamma").get<double>());
  if (kind == "mlp") {
    RegressorSpec s = RegressorSpec::mlp();
    auto& m = std::get<MlpParams>(s.params);
    m.hidden = p.at("hidden").get<std::vector<int>>();
    m.learning_rate = p.at("lr").get<double>();
    m.weight_decay = p.at("weight_decay").get<double>();
    m.dropout = p.at("dropout").get<double>();
    m.batch_size = p.at("batch_size").get<int>();
    m.epochs = p.at("epochs").get<int>();
    return s;
  }
  if (kind == "gbt") {
    RegressorSpec s = RegressorSpec::gbt();
    auto& g = std::get<GbtParams>(s.params);
    g.n_estimators = p.at("n_estimators").get<int>();
    g.max_depth = p.at("max_depth").get<int>();
    g.learning_rate = p.at("learning_rate").get<double>();
    g.min_child_weight = p.at("min_child_weight").get<double>();
    g.subsample = p.at("subsample").get<double>();
    g.colsample_bytree = p.at("colsample_bytree").get<double>();
    g.colsample_bylevel = p.at("colsample_bylevel").get<double>();
    g.reg_lambda = p.at("reg_lambda").get<double>();
    g.reg_alpha = p.at("reg_alpha").get<double>();
    g.gamma = p.at("gamma").get<double>();
    return s;
  }
  if (kind == "constant-baseline") return RegressorSpec::constant();
  throw Error(Errc::schema_violation, "unknown model kind '" + kind + "'");
}

}  // namespace

std::string FittedModel::to_json() const {
  json out;
  out["format"] = "choicekit-model";
  out["version"] = 1;
  out["spec"] = spec_to_json(spec_);
  out["input_dim"] = input_dim_;
  out["seed"] = seed_;

  json state;
  if (const auto* lin = std::get_if<LinearSolution>(&state_)) {
    state["type"] = "linear";
    state["weights"] = vector_to_json(lin->weights);
    state["intercept"] = lin->intercept;
  } else if (const auto* knn = std::get_if<KnnState>(&state_)) {
    state["type"] = "knn";
    state["train_x"] = matrix_to_json(knn->train_x);
    state["train_y"] = vector_to_json(knn->train_y);
  } else if (const auto* kr = std::get_if<KernelRidgeState>(&state_)) {
    state["type"] = "kernel-ridge";
    state["train_x"] = matrix_to_json(kr->train_x);
    state["dual_coef"] = vector_to_json(kr->dual_coef);
    state["gamma"] = kr->gamma;
    state["y_mean"] = kr->y_mean;
  } else if (const auto* mlp = std::get_if<MlpState>(&state_)) {
    state["type"] = "mlp";
    json ws = json::array(), bs = json::array();
    for (const auto& w : mlp->weights) ws.push_back(matrix_to_json(w));
    for (const auto& b : mlp->biases) bs.push_back(vector_to_json(b));
    state["weights"] = std::move(ws);
    state["biases"] = std::move(bs);
  } else if (const auto* gbt = std::get_if<GbtState>(&state_)) {
    state["type"] = "gbt";
    state["base"] = gbt->base;
    json trees = json::array();
    for (const auto& tree : gbt->trees) {
      json nodes = json::array();
      for (const auto& n : tree)
        nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right},
                         {"v", n.value}});
      trees.push_back(std::move(nodes));
    }
    state["trees"] = std::move(trees);
  } else if (const auto* c = std::get_if<ConstantState>(&state_)) {
    state["type"] = "constant";
    state["value"] = c->value;
  }
  out["state"] = std::move(state);
  return out.dump(2);
}

FittedModel FittedModel::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("model file: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "choicekit-model" ||
        doc.at("version").get<int>() != 1)
      throw Error(Errc::schema_violation, "unsupported model format or version");
    RegressorSpec spec = spec_from_json(doc.at("spec"));
    int input_dim = doc.at("input_dim").get<int>();
    std::uint64_t seed = doc.at("seed").get<std::uint64_t>();
    const json& state = doc.at("state");
    std::string type = state.at("type").get<std::string>();
    State s = ConstantState{};
    if (type == "linear") {
      LinearSolution lin;
      lin.weights = vector_from_json(state.at("weights"));
      lin.intercept = state.at("intercept").get<double>();
      s = std::move(lin);
    } else if (type == "knn") {
      s = KnnState{matrix_from_json(state.at("train_x")), vector_from_json(state.at("train_y"))};
    } else if (type == "kernel-ridge") {
      KernelRidgeState kr;
      kr.train_x = matrix_from_json(state.at("train_x"));
      kr.dual_coef = vector_from_json(state.at("dual_coef"));
      kr.gamma = state.at("gamma").get<double>();
      kr.y_mean = state.at("y_mean").get<double>();
      s = std::move(kr);
    } else if (type == "mlp") {
      MlpState mlp;
      for (const auto& w : state.at("weights")) mlp.weights.push_back(matrix_from_json(w));
      for (const auto& b : state.at("biases")) mlp.biases.push_back(vector_from_json(b));
      s = std::move(mlp);
    } else if (type == "gbt") {
      GbtState gbt;
      gbt.base = state.at("base").get<double>();
      for (const auto& tree : state.at("trees")) {
        std::vector<GbtNode> nodes;
        for (const auto& n : tree)
          nodes.push_back({n.at("f").get<int>(), n.at("t").get<double>(), n.at("l").get<int>(),
                           n.at("r").get<int>(), n.at("v").get<double>()});
        gbt.trees.push_back(std::move(nodes));
      }
      s = std::move(gbt);
    } else if (type == "constant") {
      s = ConstantState{state.at("value").get<double>()};
    } else {
      throw Error(Errc::schema_violation, "unknown model state type '" + type + "'");
    }
    return {std::move(spec), input_dim, seed, std::move(s)};
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("model file: ") + e.what());
  }
}

void FittedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << to_json() << '\n';
}

FittedModel FittedModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace choicekit::learn
