#include "choicekit/harness/evaluate.hpp"

#include <cassert>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "choicekit/csv.hpp"
#include "choicekit/errors.hpp"
#include "choicekit/learn/ensemble.hpp"

namespace choicekit::harness {

using nlohmann::json;

double mse(const std::vector<double>& predictions, const std::vector<double>& labels) {
  if (predictions.size() != labels.size())
    throw Error(Errc::length_mismatch, std::to_string(predictions.size()) + " predictions vs " +
                                           std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw Error(Errc::length_mismatch, "nothing to score");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!(predictions[i] >= 0.0 && predictions[i] <= 1.0))
      throw Error(Errc::range_violation,
                  "prediction " + csv::format_double(predictions[i]) + " outside [0, 1]");
    if (!(labels[i] >= 0.0 && labels[i] <= 1.0))
      throw Error(Errc::range_violation,
                  "label " + csv::format_double(labels[i]) + " outside [0, 1]");
    double diff = predictions[i] - labels[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(predictions.size());
}

std::vector<TaskPrediction> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::vector<csv::Record> records = csv::read_records(in);
  if (records.empty() || records[0].fields != std::vector<std::string>{"task_id", "prediction"})
    throw Error(Errc::schema_violation, path + ": expected header 'task_id,prediction'");
  std::vector<TaskPrediction> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const csv::Record& row = records[i];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != 2)
      throw Error(Errc::schema_violation,
                  path + ":" + std::to_string(row.line) + ": expected 2 fields");
    out.push_back({row.fields[0], csv::parse_double(row.fields[1], row.line)});
  }
  return out;
}

void save_predictions(const std::vector<TaskPrediction>& predictions, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << "task_id,prediction\n";
  for (const auto& p : predictions)
    out << csv::join_record({p.task_id, csv::format_double(p.prediction)}) << '\n';
}

namespace {

// Test-task labels and the prediction each id maps to, in dataset order.
std::vector<PredictionReport::Row> collect_rows(const std::vector<TaskPrediction>& predictions,
                                                const Dataset& ds, const Split& split) {
  std::unordered_map<std::string, double> by_id;
  for (const auto& p : predictions) by_id.emplace(p.task_id, p.prediction);

  std::vector<PredictionReport::Row> rows;
  std::string missing;
  for (const auto& task : ds.tasks) {
    if (!split.in_test(task.task_id)) continue;
    auto it = by_id.find(task.task_id);
    if (it == by_id.end()) {
      missing += missing.empty() ? task.task_id : ", " + task.task_id;
      continue;
    }
    if (!task.observed_rate_a)
      throw Error(Errc::missing_label, "test task " + task.task_id + " has no observed rate");
    rows.push_back({task.task_id, it->second, *task.observed_rate_a});
  }
  if (!missing.empty())
    throw Error(Errc::missing_predictions, "no predictions for test tasks: " + missing);
  if (rows.empty()) throw Error(Errc::empty_group, "split has no test tasks in this dataset");
  return rows;
}

double rows_mse(const std::vector<PredictionReport::Row>& rows) {
  std::vector<double> preds, labels;
  preds.reserve(rows.size());
  labels.reserve(rows.size());
  for (const auto& row : rows) {
    preds.push_back(row.prediction);
    labels.push_back(row.label);
  }
  return mse(preds, labels);
}

}  // namespace

PredictionReport evaluate_predictions(const std::string& model_name,
                                      const std::string& training_data,
                                      const std::vector<TaskPrediction>& predictions,
                                      const Dataset& ds, const Split& split,
                                      const std::string& config_fingerprint) {
  PredictionReport report;
  report.model_name = model_name;
  report.training_data = training_data;
  report.rows = collect_rows(predictions, ds, split);
  report.test_mse = rows_mse(report.rows);
  report.split_seed = split.seed;
  report.config_fingerprint = config_fingerprint;
  return report;
}

PredictionReport evaluate_ensemble(const std::string& model_name,
                                   const std::string& training_data,
                                   const std::vector<std::vector<TaskPrediction>>& members,
                                   const Dataset& ds, const Split& split,
                                   const std::string& config_fingerprint) {
  if (members.empty()) throw Error(Errc::empty_group, "ensemble of zero members");

  std::vector<std::vector<PredictionReport::Row>> member_rows;
  member_rows.reserve(members.size());
  for (const auto& member : members) member_rows.push_back(collect_rows(member, ds, split));

  PredictionReport report;
  report.model_name = model_name;
  report.training_data = training_data;
  report.split_seed = split.seed;
  report.config_fingerprint = config_fingerprint;

  std::vector<Eigen::VectorXd> stacked;
  stacked.reserve(members.size());
  for (const auto& rows : member_rows) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = rows[i].prediction;
    stacked.push_back(std::move(v));
    report.member_mses.push_back(rows_mse(rows));
  }
  Eigen::VectorXd averaged = learn::ensemble_average(stacked);

  report.rows = member_rows.front();
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    report.rows[i].prediction = averaged(static_cast<Eigen::Index>(i));
  report.test_mse = rows_mse(report.rows);

#ifndef NDEBUG
  double mean_member = 0.0;
  for (double m : report.member_mses) mean_member += m;
  mean_member /= static_cast<double>(report.member_mses.size());
  assert(report.test_mse <= mean_member + 1e-12);
#endif
  return report;
}

std::string PredictionReport::to_json() const {
  json doc;
  doc["format"] = "choicekit-report";
  doc["version"] = 1;
  doc["model_name"] = model_name;
  doc["training_data"] = training_data;
  doc["test_mse"] = test_mse;
  doc["split_seed"] = split_seed;
  doc["config_fingerprint"] = config_fingerprint;
  doc["member_mses"] = member_mses;
  json rows_out = json::array();
  for (const auto& row : rows)
    rows_out.push_back(
        {{"task_id", row.task_id}, {"prediction", row.prediction}, {"label", row.label}});
  doc["rows"] = std::move(rows_out);
  return doc.dump(2);
}

PredictionReport PredictionReport::from_json(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "choicekit-report" ||
        doc.at("version").get<int>() != 1)
      throw Error(Errc::schema_violation, "unsupported report format or version");
    PredictionReport report;
    report.model_name = doc.at("model_name").get<std::string>();
    report.training_data = doc.at("training_data").get<std::string>();
    report.test_mse = doc.at("test_mse").get<double>();
    report.split_seed = doc.at("split_seed").get<std::uint64_t>();
    report.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
    report.member_mses = doc.at("member_mses").get<std::vector<double>>();
    for (const auto& row : doc.at("rows"))
      report.rows.push_back({row.at("task_id").get<std::string>(),
                             row.at("prediction").get<double>(), row.at("label").get<double>()});
    return report;
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("report file: ") + e.what());
  }
}

void PredictionReport::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << to_json() << '\n';
}

PredictionReport PredictionReport::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace choicekit::harness
