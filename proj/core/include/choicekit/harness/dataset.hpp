#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "choicekit/beast.hpp"
#include "choicekit/task.hpp"

namespace choicekit::harness {

enum class Modality { textual, numeric, both };

const char* modality_name(Modality m);

struct Dataset {
  std::string name;
  std::vector<ChoiceTask> tasks;
  Modality modality = Modality::textual;

  const ChoiceTask* find(const std::string& task_id) const;

  // Unique ids, every task valid, every task carrying the declared modality.
  void validate() const;  // Errc::duplicate_task_id, schema_violation
};

enum class DatasetFormat { textual_csv, numeric_csv, synthetic };

DatasetFormat dataset_format_from_name(const std::string& name);  // Errc::config_invalid
const char* dataset_format_name(DatasetFormat f);

// Lottery grammar used by the numeric CSV schema: payoff:prob(;payoff:prob)*
// with decimal literals, e.g. "5:0.23;2:0.77".
Lottery parse_lottery(const std::string& text);          // Errc::schema_violation + lottery errors
std::string format_lottery(const Lottery& lottery);

// Plain-language rendering of a lottery: "1 for sure" when degenerate, else
// "5 with probability 0.23, 2 otherwise" (every outcome but the last carries
// its probability).
std::string lottery_text(const Lottery& lottery);

// Fills missing option texts from the lotteries via lottery_text; modality
// becomes `both`. Tasks without lotteries are Errc::schema_violation.
void fill_texts_from_lotteries(Dataset& ds);

// CSV schemas (UTF-8, headers exact):
//   textual-csv  task_id,text_a,text_b,rate_a,n_participants
//   numeric-csv  task_id,lottery_a,lottery_b,rate_a,n_participants
// rate_a and n_participants may be empty (prediction-only files). The
// synthetic format is numeric-csv plus the sidecar metadata file below.
// Malformed rows are reported as "path:line: ...".
Dataset load_dataset(const std::string& path, DatasetFormat format);
void save_dataset(const Dataset& ds, const std::string& path, DatasetFormat format);

// Generation provenance for a synthetic dataset, stored as JSON next to the
// CSV (at synthetic_meta_path).
struct SyntheticMeta {
  beast::BeastParams params;
  beast::SyntheticSpace space;
  std::uint64_t seed = 0;
  std::int64_t n_tasks = 0;
};

std::string synthetic_meta_path(const std::string& csv_path);
void save_synthetic_meta(const SyntheticMeta& meta, const std::string& path);
SyntheticMeta load_synthetic_meta(const std::string& path);

}  // namespace choicekit::harness
