#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace choicekit::learn {

// Targets are choice rates, so every model's predictions are clamped to
// [0, 1] after the raw regression output.

struct RidgeParams {
  double alpha = 1.0;
  bool fit_intercept = true;
};

struct LassoParams {
  double alpha = 0.01;
  bool fit_intercept = true;
  int max_iter = 2000;
  double tol = 1e-10;
};

struct LinearParams {
  bool fit_intercept = true;
};

struct KnnParams {
  int k = 5;
};

// Stands in for an epsilon-SVR: kernel ridge with an RBF kernel, ridge
// penalty 1 / (2C), and gamma defaulting to 1 / input_dim when <= 0. The
// squared loss replaces the epsilon-insensitive loss; reports flag the
// substitution through the display name.
struct SvrLikeParams {
  double c = 0.1;
  double gamma = 0.0;
};

struct MlpParams {
  std::vector<int> hidden{64, 128};
  double learning_rate = 0.01;
  double weight_decay = 0.001;
  double dropout = 0.6;
  int batch_size = 64;
  int epochs = 200;
};

// Least-squares gradient boosting with the usual tree knobs. Knobs with no
// meaning for single-output regression trees (scale_pos_weight,
// max_delta_step) are accepted and ignored with a warning on stderr.
struct GbtParams {
  int n_estimators = 100;
  int max_depth = 10;
  double learning_rate = 0.05;
  double min_child_weight = 5.0;
  double subsample = 0.6;
  double colsample_bytree = 0.7;
  double colsample_bylevel = 0.4;
  double reg_lambda = 0.01;
  double reg_alpha = 0.01;
  double gamma = 0.0;
  std::optional<double> scale_pos_weight;
  std::optional<double> max_delta_step;
};

struct ConstantParams {};

enum class RegressorKind { ridge, lasso, linear, knn, svr_like, mlp, gbt, constant_baseline };

struct RegressorSpec {
  RegressorKind kind = RegressorKind::constant_baseline;
  std::variant<RidgeParams, LassoParams, LinearParams, KnnParams, SvrLikeParams, MlpParams,
               GbtParams, ConstantParams>
      params = ConstantParams{};

  void validate() const;  // Errc::invalid_hyperparameter
  std::string display_name() const;

  // "ridge", "knn:k=7", "gbt:n_estimators=50,max_depth=4", "svr:c=0.5", ...
  static RegressorSpec parse(const std::string& text);

  static RegressorSpec ridge(double alpha = 1.0, bool fit_intercept = true);
  static RegressorSpec lasso(double alpha = 0.01);
  static RegressorSpec linear();
  static RegressorSpec knn(int k = 5);
  static RegressorSpec svr_like(double c = 0.1, double gamma = 0.0);
  static RegressorSpec mlp();
  static RegressorSpec gbt();
  static RegressorSpec constant();
};

// Weights of a fitted linear-family model (ridge, lasso, linear).
struct LinearSolution {
  Eigen::VectorXd weights;
  double intercept = 0.0;
};

class FittedModel {
 public:
  struct KnnState {
    Eigen::MatrixXd train_x;
    Eigen::VectorXd train_y;
  };
  struct KernelRidgeState {
    Eigen::MatrixXd train_x;
    Eigen::VectorXd dual_coef;
    double gamma = 0.0;
    double y_mean = 0.0;
  };
  struct MlpState {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
  };
  struct GbtNode {
    int feature = -1;  // < 0 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct GbtState {
    double base = 0.0;
    std::vector<std::vector<GbtNode>> trees;
  };
  struct ConstantState {
    double value = 0.0;
  };

  using State =
      std::variant<LinearSolution, KnnState, KernelRidgeState, MlpState, GbtState, ConstantState>;

  FittedModel() = default;
  FittedModel(RegressorSpec spec, int input_dim, std::uint64_t seed, State state);

  const RegressorSpec& spec() const { return spec_; }
  int input_dim() const { return input_dim_; }
  std::uint64_t seed() const { return seed_; }

  // Errc::dimension_mismatch if X has the wrong width. Output in [0, 1].
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  double predict_one(const Eigen::VectorXd& x) const;

  // Present for the linear family, null otherwise.
  const LinearSolution* linear_solution() const;

  // Versioned JSON persistence; a reloaded model predicts identically.
  std::string to_json() const;
  static FittedModel from_json(const std::string& text);
  void save(const std::string& path) const;            // Errc::file_unwritable
  static FittedModel load(const std::string& path);    // Errc::file_unreadable

 private:
  RegressorSpec spec_;
  int input_dim_ = 0;
  std::uint64_t seed_ = 0;
  State state_ = ConstantState{};
};

// X rows are observations; y in [0, 1] (Errc::range_violation) with one
// entry per row (Errc::length_mismatch). Deterministic for a fixed seed.
FittedModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, std::uint64_t seed);

struct LeaderboardEntry {
  RegressorSpec spec;
  std::optional<double> val_mse;  // empty when the fit failed
  std::string error;
};

struct GridSearchResult {
  FittedModel best;
  std::size_t best_index = 0;
  std::vector<LeaderboardEntry> leaderboard;  // in spec order
};

// Fits every spec on the train split and scores it on the validation split.
// Lowest validation MSE wins; exact ties keep the earliest spec. A failing
// spec is recorded on the leaderboard and skipped; if every spec fails the
// error summarizes all failures (Errc::no_viable_model).
GridSearchResult grid_search(const std::vector<RegressorSpec>& specs,
                             const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                             const Eigen::MatrixXd& val_x, const Eigen::VectorXd& val_y,
                             std::uint64_t seed);

}  // namespace choicekit::learn
