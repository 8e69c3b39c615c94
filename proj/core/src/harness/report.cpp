#include "choicekit/harness/report.hpp"

#include <algorithm>
#include <cstdio>

#include "choicekit/csv.hpp"
#include "choicekit/errors.hpp"

namespace choicekit::harness {

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "plain") return ReportFormat::plain;
  if (name == "markdown") return ReportFormat::markdown;
  if (name == "csv") return ReportFormat::csv;
  throw Error(Errc::config_invalid,
              "unknown report format '" + name + "' (expected plain, markdown, or csv)");
}

namespace {

struct TableRow {
  std::string model;
  std::string training_data;
  std::string mse;  // already 4-decimal
};

std::string format_mse(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

}  // namespace

std::string report_table(const std::vector<PredictionReport>& reports, ReportFormat format,
                         bool include_references) {
  if (reports.empty() && !include_references)
    throw Error(Errc::empty_group, "nothing to report");

  std::vector<TableRow> rows;
  for (const auto& report : reports)
    rows.push_back({report.model_name, report.training_data, format_mse(report.test_mse)});
  if (include_references) {
    rows.push_back({"RoBERTa (published reference)", "TextualChoices-1K", format_mse(0.0095)});
    rows.push_back({"BEAST-GB (published reference)", "Choices13k", format_mse(0.0092)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    if (a.mse != b.mse) return a.mse < b.mse;
    return a.model < b.model;
  });

  const std::string kModel = "Model", kTraining = "Training Data", kMse = "Test MSE";
  std::string out;
  switch (format) {
    case ReportFormat::plain: {
      std::size_t w_model = kModel.size(), w_training = kTraining.size();
      for (const auto& row : rows) {
        w_model = std::max(w_model, row.model.size());
        w_training = std::max(w_training, row.training_data.size());
      }
      out += pad(kModel, w_model) + "  " + pad(kTraining, w_training) + "  " + kMse + "\n";
      out += std::string(w_model, '-') + "  " + std::string(w_training, '-') + "  " +
             std::string(kMse.size(), '-') + "\n";
      for (const auto& row : rows)
        out += pad(row.model, w_model) + "  " + pad(row.training_data, w_training) + "  " +
               row.mse + "\n";
      break;
    }
    case ReportFormat::markdown: {
      out += "| " + kModel + " | " + kTraining + " | " + kMse + " |\n";
      out += "| --- | --- | --- |\n";
      for (const auto& row : rows)
        out += "| " + row.model + " | " + row.training_data + " | " + row.mse + " |\n";
      break;
    }
    case ReportFormat::csv: {
      out += "model,training_data,test_mse\n";
      for (const auto& row : rows)
        out += csv::join_record({row.model, row.training_data, row.mse}) + "\n";
      break;
    }
  }
  return out;
}

}  // namespace choicekit::harness
