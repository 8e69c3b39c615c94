#pragma once

#include <string>
#include <vector>

#include "choicekit/harness/evaluate.hpp"

namespace choicekit::harness {

enum class ReportFormat { plain, markdown, csv };

ReportFormat report_format_from_name(const std::string& name);  // Errc::config_invalid

// Renders reports as a Model / Training Data / Test MSE table. MSE prints
// with 4 decimals; rows sort by that rounded value, ties by model name.
// include_references appends the published baselines (RoBERTa 0.0095,
// BEAST-GB 0.0092) as ordinary rows for side-by-side reading.
std::string report_table(const std::vector<PredictionReport>& reports, ReportFormat format,
                         bool include_references = false);  // Errc::empty_group

}  // namespace choicekit::harness
