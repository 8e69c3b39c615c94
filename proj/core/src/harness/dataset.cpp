#include "choicekit/harness/dataset.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "choicekit/csv.hpp"
#include "choicekit/errors.hpp"

namespace choicekit::harness {

using nlohmann::json;

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::textual: return "textual";
    case Modality::numeric: return "numeric";
    case Modality::both: return "both";
  }
  return "unknown";
}

const ChoiceTask* Dataset::find(const std::string& task_id) const {
  for (const auto& task : tasks)
    if (task.task_id == task_id) return &task;
  return nullptr;
}

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& task : tasks) {
    task.validate();
    if (!seen.insert(task.task_id).second)
      throw Error(Errc::duplicate_task_id, "duplicate task id '" + task.task_id + "'");
    bool need_text = modality == Modality::textual || modality == Modality::both;
    bool need_lotteries = modality == Modality::numeric || modality == Modality::both;
    if (need_text && !task.has_text())
      throw Error(Errc::schema_violation,
                  "task " + task.task_id + " lacks texts in a " + modality_name(modality) +
                      " dataset");
    if (need_lotteries && !task.has_lotteries())
      throw Error(Errc::schema_violation,
                  "task " + task.task_id + " lacks lotteries in a " + modality_name(modality) +
                      " dataset");
  }
}

DatasetFormat dataset_format_from_name(const std::string& name) {
  if (name == "textual-csv") return DatasetFormat::textual_csv;
  if (name == "numeric-csv") return DatasetFormat::numeric_csv;
  if (name == "synthetic") return DatasetFormat::synthetic;
  throw Error(Errc::config_invalid, "unknown dataset format '" + name +
                                        "' (expected textual-csv, numeric-csv, or synthetic)");
}

const char* dataset_format_name(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::textual_csv: return "textual-csv";
    case DatasetFormat::numeric_csv: return "numeric-csv";
    case DatasetFormat::synthetic: return "synthetic";
  }
  return "unknown";
}

namespace {

double parse_lottery_number(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(Errc::schema_violation, "bad number '" + std::string(text) + "' in lottery");
  return v;
}

}  // namespace

Lottery parse_lottery(const std::string& text) {
  if (text.empty()) throw Error(Errc::schema_violation, "empty lottery");
  std::vector<Outcome> outcomes;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(';', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view part(text.data() + pos, end - pos);
    std::size_t colon = part.find(':');
    if (colon == std::string_view::npos)
      throw Error(Errc::schema_violation,
                  "expected payoff:prob, got '" + std::string(part) + "'");
    outcomes.push_back(
        {parse_lottery_number(part.substr(0, colon)), parse_lottery_number(part.substr(colon + 1))});
    pos = end + 1;
  }
  return make_lottery(outcomes);
}

// Both renderings list outcomes from highest payoff down, the order lotteries
// are usually written for people; storage order is ascending.
std::string format_lottery(const Lottery& lottery) {
  const auto& outcomes = lottery.outcomes();
  std::string out;
  for (auto it = outcomes.rbegin(); it != outcomes.rend(); ++it) {
    if (!out.empty()) out.push_back(';');
    out += csv::format_double(it->payoff);
    out.push_back(':');
    out += csv::format_double(it->probability);
  }
  return out;
}

std::string lottery_text(const Lottery& lottery) {
  const auto& outcomes = lottery.outcomes();
  if (outcomes.size() == 1) return csv::format_double(outcomes[0].payoff) + " for sure";
  std::string out;
  for (std::size_t i = outcomes.size() - 1; i > 0; --i) {
    out += csv::format_double(outcomes[i].payoff) + " with probability " +
           csv::format_double(outcomes[i].probability) + ", ";
  }
  out += csv::format_double(outcomes.front().payoff) + " otherwise";
  return out;
}

void fill_texts_from_lotteries(Dataset& ds) {
  for (auto& task : ds.tasks) {
    if (!task.has_lotteries())
      throw Error(Errc::schema_violation, "task " + task.task_id + " has no lotteries to render");
    if (!task.option_a_text) task.option_a_text = lottery_text(*task.option_a_lottery);
    if (!task.option_b_text) task.option_b_text = lottery_text(*task.option_b_lottery);
  }
  ds.modality = Modality::both;
}

namespace {

std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

const std::vector<std::string> kTextualHeader{"task_id", "text_a", "text_b", "rate_a",
                                              "n_participants"};
const std::vector<std::string> kNumericHeader{"task_id", "lottery_a", "lottery_b", "rate_a",
                                              "n_participants"};

Dataset load_csv(const std::string& path, bool textual) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::vector<csv::Record> records = csv::read_records(in);
  if (records.empty()) throw Error(Errc::schema_violation, path + ": empty file");

  const auto& header = textual ? kTextualHeader : kNumericHeader;
  if (records[0].fields != header) {
    std::string want = csv::join_record(header);
    throw Error(Errc::schema_violation,
                location(path, records[0].line) + "expected header '" + want + "'");
  }

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.modality = textual ? Modality::textual : Modality::numeric;
  std::unordered_set<std::string> seen;

  for (std::size_t i = 1; i < records.size(); ++i) {
    const csv::Record& row = records[i];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // trailing blank line
    if (row.fields.size() != header.size())
      throw Error(Errc::schema_violation,
                  location(path, row.line) + "expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(row.fields.size()));

    ChoiceTask task;
    task.task_id = row.fields[0];
    try {
      if (textual) {
        task.option_a_text = row.fields[1];
        task.option_b_text = row.fields[2];
      } else {
        task.option_a_lottery = parse_lottery(row.fields[1]);
        task.option_b_lottery = parse_lottery(row.fields[2]);
      }
      if (!row.fields[3].empty()) task.observed_rate_a = csv::parse_double(row.fields[3], row.line);
      if (!row.fields[4].empty())
        task.n_participants = csv::parse_integer(row.fields[4], row.line);
      task.validate();
    } catch (const Error& e) {
      if (e.code() == Errc::duplicate_task_id) throw;
      throw Error(Errc::schema_violation, location(path, row.line) + e.what());
    }
    if (!seen.insert(task.task_id).second)
      throw Error(Errc::duplicate_task_id,
                  location(path, row.line) + "duplicate task id '" + task.task_id + "'");
    ds.tasks.push_back(std::move(task));
  }
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  switch (format) {
    case DatasetFormat::textual_csv:
      return load_csv(path, true);
    case DatasetFormat::numeric_csv:
      return load_csv(path, false);
    case DatasetFormat::synthetic: {
      Dataset ds = load_csv(path, false);
      load_synthetic_meta(synthetic_meta_path(path));  // presence + shape check
      return ds;
    }
  }
  throw Error(Errc::config_invalid, "unhandled dataset format");
}

void save_dataset(const Dataset& ds, const std::string& path, DatasetFormat format) {
  ds.validate();
  bool textual = format == DatasetFormat::textual_csv;
  if (textual && ds.modality == Modality::numeric)
    throw Error(Errc::schema_violation, "numeric dataset cannot be saved as textual-csv");
  if (!textual && ds.modality == Modality::textual)
    throw Error(Errc::schema_violation, "textual dataset cannot be saved as numeric-csv");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << csv::join_record(textual ? kTextualHeader : kNumericHeader) << '\n';
  for (const auto& task : ds.tasks) {
    std::vector<std::string> fields{task.task_id,
                                    textual ? *task.option_a_text
                                            : format_lottery(*task.option_a_lottery),
                                    textual ? *task.option_b_text
                                            : format_lottery(*task.option_b_lottery),
                                    task.observed_rate_a
                                        ? csv::format_double(*task.observed_rate_a)
                                        : std::string(),
                                    task.n_participants ? std::to_string(*task.n_participants)
                                                        : std::string()};
    out << csv::join_record(fields) << '\n';
  }
}

std::string synthetic_meta_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

void save_synthetic_meta(const SyntheticMeta& meta, const std::string& path) {
  json doc;
  doc["format"] = "choicekit-synthetic-meta";
  doc["version"] = 1;
  doc["seed"] = meta.seed;
  doc["n_tasks"] = meta.n_tasks;
  doc["params"] = {{"n_agents", meta.params.n_agents},
                   {"kappa_max", meta.params.kappa_max},
                   {"ev_error_sigma", meta.params.ev_error_sigma},
                   {"tool_weights", meta.params.tool_weights},
                   {"sample_weight_min", meta.params.sample_weight_min},
                   {"sample_weight_max", meta.params.sample_weight_max}};
  doc["space"] = {{"payoff_min", meta.space.payoff_min},
                  {"payoff_max", meta.space.payoff_max},
                  {"max_support_size", meta.space.max_support_size},
                  {"probability_resolution", meta.space.probability_resolution},
                  {"sure_thing_rate", meta.space.sure_thing_rate}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

SyntheticMeta load_synthetic_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    json doc = json::parse(buffer.str());
    if (doc.at("format").get<std::string>() != "choicekit-synthetic-meta" ||
        doc.at("version").get<int>() != 1)
      throw Error(Errc::schema_violation, path + ": unsupported metadata format or version");
    SyntheticMeta meta;
    meta.seed = doc.at("seed").get<std::uint64_t>();
    meta.n_tasks = doc.at("n_tasks").get<std::int64_t>();
    const json& p = doc.at("params");
    meta.params.n_agents = p.at("n_agents").get<int>();
    meta.params.kappa_max = p.at("kappa_max").get<int>();
    meta.params.ev_error_sigma = p.at("ev_error_sigma").get<double>();
    meta.params.tool_weights = p.at("tool_weights").get<std::array<double, 4>>();
    meta.params.sample_weight_min = p.at("sample_weight_min").get<double>();
    meta.params.sample_weight_max = p.at("sample_weight_max").get<double>();
    const json& s = doc.at("space");
    meta.space.payoff_min = s.at("payoff_min").get<double>();
    meta.space.payoff_max = s.at("payoff_max").get<double>();
    meta.space.max_support_size = s.at("max_support_size").get<int>();
    meta.space.probability_resolution = s.at("probability_resolution").get<double>();
    meta.space.sure_thing_rate = s.at("sure_thing_rate").get<double>();
    meta.params.validate();
    meta.space.validate();
    return meta;
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, path + ": " + e.what());
  }
}

}  // namespace choicekit::harness
