#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "choicekit/harness/dataset.hpp"
#include "choicekit/harness/split.hpp"

namespace choicekit::harness {

// (1/n) sum (p_i - y_i)^2. Lengths must match and be non-zero
// (Errc::length_mismatch); every value must lie in [0, 1]
// (Errc::range_violation).
double mse(const std::vector<double>& predictions, const std::vector<double>& labels);

struct TaskPrediction {
  std::string task_id;
  double prediction = 0.0;

  bool operator==(const TaskPrediction&) const = default;
};

// Prediction CSV: header `task_id,prediction`.
std::vector<TaskPrediction> load_predictions(const std::string& path);
void save_predictions(const std::vector<TaskPrediction>& predictions, const std::string& path);

// One evaluated model on one test set. MSE is recomputable from the stored
// rows to 1e-12; the report round-trips through JSON.
struct PredictionReport {
  struct Row {
    std::string task_id;
    double prediction = 0.0;
    double label = 0.0;
  };

  std::string model_name;
  std::string training_data;
  std::vector<Row> rows;            // test tasks, dataset order
  double test_mse = 0.0;
  std::uint64_t split_seed = 0;
  std::string config_fingerprint;
  std::vector<double> member_mses;  // per-member MSEs for ensemble reports

  std::string to_json() const;
  static PredictionReport from_json(const std::string& text);  // Errc::schema_violation
  void save(const std::string& path) const;                    // Errc::file_unwritable
  static PredictionReport load(const std::string& path);       // Errc::file_unreadable
};

// Scores predictions against the split's test tasks. Predictions must cover
// every test id (Errc::missing_predictions names the absent ones); every test
// task must be labeled (Errc::missing_label). Extra predictions for
// non-test tasks are ignored.
PredictionReport evaluate_predictions(const std::string& model_name,
                                      const std::string& training_data,
                                      const std::vector<TaskPrediction>& predictions,
                                      const Dataset& ds, const Split& split,
                                      const std::string& config_fingerprint = "");

// Averages k member prediction sets (learn::ensemble_average) and scores the
// mean; the report records each member's individual MSE.
PredictionReport evaluate_ensemble(const std::string& model_name,
                                   const std::string& training_data,
                                   const std::vector<std::vector<TaskPrediction>>& members,
                                   const Dataset& ds, const Split& split,
                                   const std::string& config_fingerprint = "");

}  // namespace choicekit::harness
