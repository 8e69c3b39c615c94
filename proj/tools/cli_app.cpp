#include "cli_app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "choicekit/beast.hpp"
#include "choicekit/csv.hpp"
#include "choicekit/features.hpp"
#include "choicekit/features_textual.hpp"
#include "choicekit/harness/dataset.hpp"
#include "choicekit/harness/evaluate.hpp"
#include "choicekit/harness/finetune.hpp"
#include "choicekit/harness/report.hpp"
#include "choicekit/harness/split.hpp"
#include "choicekit/learn/embedding.hpp"
#include "choicekit/learn/pca.hpp"
#include "choicekit/learn/regressors.hpp"
#include "choicekit/llm/cache.hpp"
#include "choicekit/llm/prompts.hpp"
#include "choicekit/llm/provider.hpp"
#include "choicekit/llm/rate_limiter.hpp"
#include "choicekit/llm/subjects.hpp"
#include "choicekit/rng.hpp"
#include "choicekit/version.hpp"

namespace choicekit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- run context ------------------------------------------------------------

// Option values of one parsed invocation (globals plus the active
// subcommand), keyed by long option name. Deterministic, so its hash can
// fingerprint the run.
json collect_options(const CLI::App* app) {
  json out = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    std::string name = opt->get_single_name();
    if (name == "help" || name == "version" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) {
        if (!value.empty()) value += ",";
        value += r;
      }
    } else {
      value = opt->get_default_str();
    }
    out[name] = value;
  }
  return out;
}

struct RunContext {
  fs::path out_dir;
  json manifest;
  std::string fingerprint;

  void add_artifact(const fs::path& path) { manifest["artifacts"].push_back(path.filename().string()); }

  void write() const {
    std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::file_unwritable, "cannot write " + (out_dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
};

RunContext make_context(const CliState& state, const CLI::App& root, const CLI::App& sub) {
  RunContext ctx;
  ctx.out_dir = state.out_dir;
  fs::create_directories(ctx.out_dir);

  json options = collect_options(&root);
  options.update(collect_options(&sub));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(options.dump())));
  ctx.fingerprint = hex;
  ctx.manifest["tool"] = "choicekit";
  ctx.manifest["version"] = kVersion;
  ctx.manifest["subcommand"] = sub.get_name();
  ctx.manifest["options"] = std::move(options);
  ctx.manifest["fingerprint"] = ctx.fingerprint;
  ctx.manifest["artifacts"] = json::array();
  return ctx;
}

// ---- shared pieces ----------------------------------------------------------

harness::Dataset load_cli_dataset(const CliState& state) {
  if (state.dataset_path.empty()) throw Error(Errc::config_invalid, "--dataset is required");
  harness::Dataset ds = harness::load_dataset(
      state.dataset_path, harness::dataset_format_from_name(state.dataset_format));
  if (state.render_texts) harness::fill_texts_from_lotteries(ds);
  return ds;
}

std::unique_ptr<llm::Provider> make_provider(const CliState& state) {
  if (state.provider == "mock") return std::make_unique<llm::DeterministicMockProvider>(state.seed);
  if (state.provider == "http") {
    llm::HttpProviderConfig config;
    config.endpoint_url = state.endpoint_url;
    config.credential_env = state.credential_env;
    if (config.endpoint_url.empty())
      throw Error(Errc::config_invalid, "--endpoint is required with --provider http");
    if (state.model_id.empty())
      throw Error(Errc::config_invalid, "--model is required with --provider http");
    return std::make_unique<llm::HttpProvider>(config);
  }
  throw Error(Errc::config_invalid,
              "unknown provider '" + state.provider + "' (expected mock or http)");
}

std::unique_ptr<llm::CompletionCache> make_cache(const CliState& state) {
  if (state.cache_dir.empty()) return nullptr;
  return std::make_unique<llm::CompletionCache>(state.cache_dir);
}

// Matrix CSV: header `task_id,<col>,...`, one row per task.
struct NamedMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd x;
};

NamedMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::vector<csv::Record> records = csv::read_records(in);
  if (records.empty() || records[0].fields.empty() || records[0].fields[0] != "task_id")
    throw Error(Errc::schema_violation, path + ": expected a 'task_id,...' header");

  NamedMatrix m;
  m.columns.assign(records[0].fields.begin() + 1, records[0].fields.end());
  if (m.columns.empty()) throw Error(Errc::schema_violation, path + ": no feature columns");

  std::vector<csv::Record*> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].fields.size() == 1 && records[i].fields[0].empty()) continue;
    if (records[i].fields.size() != records[0].fields.size())
      throw Error(Errc::schema_violation, path + ":" + std::to_string(records[i].line) +
                                              ": expected " +
                                              std::to_string(records[0].fields.size()) + " fields");
    rows.push_back(&records[i]);
  }
  m.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.ids.push_back(rows[r]->fields[0]);
    for (std::size_t c = 0; c < m.columns.size(); ++c)
      m.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          csv::parse_double(rows[r]->fields[c + 1], rows[r]->line);
  }
  return m;
}

void save_matrix(const NamedMatrix& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path.string());
  std::vector<std::string> header{"task_id"};
  header.insert(header.end(), m.columns.begin(), m.columns.end());
  out << csv::join_record(header) << '\n';
  for (std::size_t r = 0; r < m.ids.size(); ++r) {
    std::vector<std::string> fields{m.ids[r]};
    for (Eigen::Index c = 0; c < m.x.cols(); ++c)
      fields.push_back(csv::format_double(m.x(static_cast<Eigen::Index>(r), c)));
    out << csv::join_record(fields) << '\n';
  }
}

std::unordered_map<std::string, const ChoiceTask*> index_tasks(const harness::Dataset& ds) {
  std::unordered_map<std::string, const ChoiceTask*> by_id;
  for (const auto& task : ds.tasks) by_id.emplace(task.task_id, &task);
  return by_id;
}

// Rows of the matrix for the given ids, in the ids' order.
Eigen::MatrixXd rows_for(const NamedMatrix& m,
                         const std::unordered_map<std::string, Eigen::Index>& row_of,
                         const std::vector<std::string>& ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), m.x.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_of.find(ids[i]);
    if (it == row_of.end())
      throw Error(Errc::missing_predictions, "matrix has no row for task " + ids[i]);
    out.row(static_cast<Eigen::Index>(i)) = m.x.row(it->second);
  }
  return out;
}

Eigen::VectorXd labels_for(const harness::Dataset& ds, const std::vector<std::string>& ids) {
  auto by_id = index_tasks(ds);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = by_id.find(ids[i]);
    if (it == by_id.end())
      throw Error(Errc::schema_violation, "task " + ids[i] + " is not in the dataset");
    if (!it->second->observed_rate_a)
      throw Error(Errc::missing_label, "task " + ids[i] + " has no observed rate");
    y(static_cast<Eigen::Index>(i)) = *it->second->observed_rate_a;
  }
  return y;
}

// ---- subcommands ------------------------------------------------------------

int cmd_gen_synthetic(const CliState& state, RunContext& ctx) {
  beast::BeastParams params;
  params.n_agents = state.synth_agents;
  params.kappa_max = state.synth_kappa_max;
  params.ev_error_sigma = state.synth_ev_sigma;
  if (state.synth_tool_weights.size() != 4)
    throw Error(Errc::config_invalid, "--tool-weights takes exactly 4 values");
  for (std::size_t i = 0; i < 4; ++i) params.tool_weights[i] = state.synth_tool_weights[i];
  beast::SyntheticSpace space;
  space.payoff_min = state.synth_payoff_min;
  space.payoff_max = state.synth_payoff_max;
  space.max_support_size = state.synth_max_support;
  space.probability_resolution = state.synth_prob_resolution;
  space.sure_thing_rate = state.synth_sure_thing_rate;

  harness::Dataset ds;
  ds.name = "synthetic";
  ds.modality = harness::Modality::numeric;
  ds.tasks = beast::generate_synthetic_dataset(state.synth_n, space, params, state.seed);

  fs::path csv_path = ctx.out_dir / "synthetic.csv";
  harness::save_dataset(ds, csv_path.string(), harness::DatasetFormat::numeric_csv);
  harness::SyntheticMeta meta{params, space, state.seed, state.synth_n};
  harness::save_synthetic_meta(meta, harness::synthetic_meta_path(csv_path.string()));
  ctx.add_artifact(csv_path);
  ctx.add_artifact(harness::synthetic_meta_path(csv_path.string()));
  ctx.write();
  std::printf("wrote %d tasks to %s\n", state.synth_n, csv_path.string().c_str());
  return 0;
}

int cmd_features(const CliState& state, RunContext& ctx) {
  harness::Dataset ds = load_cli_dataset(state);

  NamedMatrix m;
  for (const char* name : features::FeatureVector::names()) m.columns.push_back(name);
  m.x.resize(static_cast<Eigen::Index>(ds.tasks.size()), 7);

  int imputed_total = 0;
  if (state.features_textual) {
    auto provider = make_provider(state);
    auto cache = make_cache(state);
    llm::RateLimiter limiter(state.requests_per_minute);
    features::TextualFeatureOptions options;
    options.calls_per_feature = state.calls_per_feature;
    options.model_id = state.model_id.empty() ? "mock-feature" : state.model_id;
    options.seed = state.seed;
    options.parallelism = state.parallelism;
    options.cache = cache.get();
    options.limiter = &limiter;
    options.retry.max_attempts = state.max_attempts;
    for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
      features::TextualFeatureResult result =
          features::textual_feature_vector(ds.tasks[i], *provider, options);
      auto values = result.vector.values();
      for (int c = 0; c < 7; ++c) m.x(static_cast<Eigen::Index>(i), c) = values[static_cast<std::size_t>(c)];
      m.ids.push_back(ds.tasks[i].task_id);
      imputed_total += result.total_imputed();
    }
  } else {
    for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
      auto values = features::numeric_feature_vector(ds.tasks[i]).values();
      for (int c = 0; c < 7; ++c) m.x(static_cast<Eigen::Index>(i), c) = values[static_cast<std::size_t>(c)];
      m.ids.push_back(ds.tasks[i].task_id);
    }
  }

  fs::path out_path = ctx.out_dir / "features.csv";
  save_matrix(m, out_path);
  ctx.add_artifact(out_path);
  ctx.manifest["imputed_calls"] = imputed_total;
  ctx.write();
  if (imputed_total > 0)
    std::fprintf(stderr, "note: %d feature calls stayed unparsable and scored neutral\n",
                 imputed_total);
  std::printf("wrote %zu feature rows to %s\n", m.ids.size(), out_path.string().c_str());
  return 0;
}

int cmd_subjects(const CliState& state, RunContext& ctx) {
  harness::Dataset ds = load_cli_dataset(state);
  auto provider = make_provider(state);
  auto cache = make_cache(state);
  llm::RateLimiter limiter(state.requests_per_minute);

  llm::SubjectsConfig config;
  config.conditions.clear();
  for (const auto& name : state.conditions)
    config.conditions.push_back(llm::condition_from_name(name));
  if (!state.baseline_only) {
    config.personalities = state.personalities_path.empty()
                               ? llm::builtin_personalities()
                               : llm::load_personalities(state.personalities_path);
  }
  config.agents_per_task = state.agents_per_task;
  config.seed = state.seed;
  config.parallelism = state.parallelism;
  config.session.model_id = state.model_id.empty() ? "mock-subject" : state.model_id;
  config.session.temperature = state.temperature;
  config.session.batch_size = state.batch_size;
  config.session.cache = cache.get();
  config.session.limiter = &limiter;
  config.session.retry.max_attempts = state.max_attempts;

  llm::SubjectsRun run = llm::run_subjects_experiment(*provider, ds.tasks, config);

  fs::path responses_path = ctx.out_dir / "subjects_responses.csv";
  {
    std::ofstream out(responses_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::file_unwritable, "cannot write " + responses_path.string());
    out << "condition,personality,agent,task_id,p_choose_a,imputed\n";
    for (const auto& row : run.responses)
      out << csv::join_record({llm::condition_name(row.condition), row.personality,
                               std::to_string(row.agent), row.response.task_id,
                               csv::format_double(row.response.p_choose_a),
                               row.response.imputed ? "1" : "0"})
          << '\n';
  }
  ctx.add_artifact(responses_path);

  NamedMatrix m;
  for (const auto& task : ds.tasks) m.ids.push_back(task.task_id);
  for (const auto& [condition, by_persona] : run.aggregated)
    for (const auto& [persona, by_task] : by_persona) m.columns.push_back(condition + "/" + persona);
  m.x.resize(static_cast<Eigen::Index>(m.ids.size()), static_cast<Eigen::Index>(m.columns.size()));
  Eigen::Index col = 0;
  for (const auto& [condition, by_persona] : run.aggregated) {
    for (const auto& [persona, by_task] : by_persona) {
      for (std::size_t r = 0; r < m.ids.size(); ++r) {
        auto it = by_task.find(m.ids[r]);
        if (it == by_task.end())
          throw Error(Errc::missing_predictions, "no aggregated prediction for " + m.ids[r]);
        m.x(static_cast<Eigen::Index>(r), col) = it->second;
      }
      ++col;
    }
  }
  fs::path matrix_path = ctx.out_dir / "subjects_matrix.csv";
  save_matrix(m, matrix_path);
  ctx.add_artifact(matrix_path);
  ctx.write();
  std::printf("wrote %zu responses and a %zux%zu score matrix to %s\n", run.responses.size(),
              m.ids.size(), m.columns.size(), ctx.out_dir.string().c_str());
  return 0;
}

int cmd_embed(const CliState& state, RunContext& ctx) {
  harness::Dataset ds = load_cli_dataset(state);
  auto cache = make_cache(state);

  std::unique_ptr<learn::EmbeddingProvider> provider;
  if (state.provider == "mock") {
    provider = std::make_unique<learn::MockEmbeddingProvider>(state.embed_dim, state.seed);
  } else if (state.provider == "http") {
    learn::HttpEmbeddingConfig config;
    config.endpoint_url = state.endpoint_url;
    config.model_id = state.model_id;
    config.credential_env = state.credential_env;
    if (config.endpoint_url.empty() || config.model_id.empty())
      throw Error(Errc::config_invalid, "--provider http needs --endpoint and --model");
    provider = std::make_unique<learn::HttpEmbeddingProvider>(config);
  } else if (state.provider == "store") {
    if (state.store_path.empty())
      throw Error(Errc::config_invalid, "--provider store needs --store");
    provider =
        std::make_unique<learn::StoreEmbeddingProvider>(learn::EmbeddingStore::load(state.store_path));
  } else {
    throw Error(Errc::config_invalid,
                "unknown provider '" + state.provider + "' (expected mock, http, or store)");
  }

  learn::EmbeddingStore computed;
  NamedMatrix m;
  for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
    const ChoiceTask& task = ds.tasks[i];
    if (!task.has_text())
      throw Error(Errc::missing_text, "task " + task.task_id + " has no option texts");
    Eigen::VectorXd va = learn::embed_text(*task.option_a_text, *provider, cache.get());
    Eigen::VectorXd vb = learn::embed_text(*task.option_b_text, *provider, cache.get());
    if (!state.save_store_path.empty()) {
      computed.put(*task.option_a_text, va);
      computed.put(*task.option_b_text, vb);
    }
    Eigen::VectorXd d = learn::task_representation(va, vb);
    if (i == 0) {
      m.x.resize(static_cast<Eigen::Index>(ds.tasks.size()), d.size());
      for (Eigen::Index c = 0; c < d.size(); ++c) m.columns.push_back("d" + std::to_string(c));
    }
    if (d.size() != m.x.cols())
      throw Error(Errc::dimension_mismatch, "task " + task.task_id + " embeds to " +
                                                std::to_string(d.size()) + " dims, dataset uses " +
                                                std::to_string(m.x.cols()));
    m.x.row(static_cast<Eigen::Index>(i)) = d.transpose();
    m.ids.push_back(task.task_id);
  }

  fs::path out_path = ctx.out_dir / "representations.csv";
  save_matrix(m, out_path);
  ctx.add_artifact(out_path);
  if (!state.save_store_path.empty()) {
    computed.save(state.save_store_path);
    ctx.manifest["saved_store"] = state.save_store_path;
  }
  ctx.write();
  std::printf("wrote %zu representations (%zu dims) to %s\n", m.ids.size(),
              static_cast<std::size_t>(m.x.cols()), out_path.string().c_str());
  return 0;
}

int cmd_train(const CliState& state, RunContext& ctx) {
  if (state.matrix_path.empty()) throw Error(Errc::config_invalid, "--matrix is required");
  NamedMatrix m = load_matrix(state.matrix_path);
  harness::Dataset ds = load_cli_dataset(state);
  harness::Split split =
      harness::split_dataset(ds, state.test_fraction, state.val_fraction, state.split_seed);

  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < m.ids.size(); ++i)
    row_of.emplace(m.ids[i], static_cast<Eigen::Index>(i));

  std::vector<std::string> trainval_ids = split.train_ids;
  trainval_ids.insert(trainval_ids.end(), split.val_ids.begin(), split.val_ids.end());

  Eigen::MatrixXd x_train = rows_for(m, row_of, split.train_ids);
  Eigen::MatrixXd x_val = rows_for(m, row_of, split.val_ids);
  Eigen::MatrixXd x_test = rows_for(m, row_of, split.test_ids);
  Eigen::MatrixXd x_trainval = rows_for(m, row_of, trainval_ids);
  Eigen::VectorXd y_train = labels_for(ds, split.train_ids);
  Eigen::VectorXd y_val = labels_for(ds, split.val_ids);
  Eigen::VectorXd y_trainval = labels_for(ds, trainval_ids);

  if (state.pca_fraction > 0.0) {
    learn::PcaTransform pca = learn::pca_fit(x_trainval, state.pca_fraction);
    x_train = learn::pca_apply(pca, x_train);
    x_val = learn::pca_apply(pca, x_val);
    x_test = learn::pca_apply(pca, x_test);
    x_trainval = learn::pca_apply(pca, x_trainval);
    fs::path pca_path = ctx.out_dir / "pca.json";
    learn::pca_save(pca, pca_path.string());
    ctx.add_artifact(pca_path);
    std::printf("pca: %d -> %d dims\n", pca.input_dim(), pca.output_dim());
  }

  std::vector<std::string> spec_names =
      state.model_specs.empty()
          ? std::vector<std::string>{"ridge", "lasso", "linear", "knn", "svr-like",
                                     "mlp", "gbt", "constant"}
          : state.model_specs;
  std::vector<learn::RegressorSpec> specs;
  for (const auto& name : spec_names) specs.push_back(learn::RegressorSpec::parse(name));

  learn::GridSearchResult searched =
      learn::grid_search(specs, x_train, y_train, x_val, y_val, state.seed);

  fs::path leaderboard_path = ctx.out_dir / "leaderboard.csv";
  {
    std::ofstream out(leaderboard_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::file_unwritable, "cannot write " + leaderboard_path.string());
    out << "model,val_mse,error\n";
    for (const auto& entry : searched.leaderboard)
      out << csv::join_record({entry.spec.display_name(),
                               entry.val_mse ? csv::format_double(*entry.val_mse) : "",
                               entry.error})
          << '\n';
  }
  ctx.add_artifact(leaderboard_path);

  // Refit the winning spec on train+val before scoring the held-out test set.
  learn::FittedModel best =
      learn::fit_regressor(searched.best.spec(), x_trainval, y_trainval, state.seed);
  fs::path model_path = ctx.out_dir / "model.json";
  best.save(model_path.string());
  ctx.add_artifact(model_path);

  Eigen::VectorXd test_pred = best.predict(x_test);
  std::vector<harness::TaskPrediction> predictions;
  for (std::size_t i = 0; i < split.test_ids.size(); ++i)
    predictions.push_back({split.test_ids[i], test_pred(static_cast<Eigen::Index>(i))});
  fs::path pred_path = ctx.out_dir / "predictions.csv";
  harness::save_predictions(predictions, pred_path.string());
  ctx.add_artifact(pred_path);

  harness::PredictionReport report = harness::evaluate_predictions(
      best.spec().display_name(), ds.name, predictions, ds, split, ctx.fingerprint);
  fs::path report_path = ctx.out_dir / "report.json";
  report.save(report_path.string());
  ctx.add_artifact(report_path);
  ctx.write();

  for (const auto& entry : searched.leaderboard) {
    if (entry.val_mse)
      std::printf("  %-34s val MSE %.4f\n", entry.spec.display_name().c_str(), *entry.val_mse);
    else
      std::printf("  %-34s failed: %s\n", entry.spec.display_name().c_str(),
                  entry.error.c_str());
  }
  std::printf("best: %s  test MSE %.4f\n", best.spec().display_name().c_str(), report.test_mse);
  return 0;
}

int cmd_predict(const CliState& state, RunContext& ctx) {
  if (state.model_path.empty() || state.matrix_path.empty())
    throw Error(Errc::config_invalid, "--model-file and --matrix are required");
  learn::FittedModel model = learn::FittedModel::load(state.model_path);
  NamedMatrix m = load_matrix(state.matrix_path);
  Eigen::MatrixXd x = m.x;
  if (!state.pca_path.empty()) x = learn::pca_apply(learn::pca_load(state.pca_path), x);

  Eigen::VectorXd pred = model.predict(x);
  std::vector<harness::TaskPrediction> predictions;
  for (std::size_t i = 0; i < m.ids.size(); ++i)
    predictions.push_back({m.ids[i], pred(static_cast<Eigen::Index>(i))});
  fs::path pred_path = ctx.out_dir / "predictions.csv";
  harness::save_predictions(predictions, pred_path.string());
  ctx.add_artifact(pred_path);
  ctx.write();
  std::printf("wrote %zu predictions to %s\n", predictions.size(), pred_path.string().c_str());
  return 0;
}

int cmd_evaluate(const CliState& state, RunContext& ctx) {
  if (state.prediction_paths.empty())
    throw Error(Errc::config_invalid, "--predictions is required");
  harness::Dataset ds = load_cli_dataset(state);
  harness::Split split =
      harness::split_dataset(ds, state.test_fraction, state.val_fraction, state.split_seed);
  std::string tag = state.training_tag.empty() ? ds.name : state.training_tag;

  harness::PredictionReport report;
  if (state.prediction_paths.size() == 1) {
    report = harness::evaluate_predictions(
        state.report_name, tag, harness::load_predictions(state.prediction_paths[0]), ds, split,
        ctx.fingerprint);
  } else {
    std::vector<std::vector<harness::TaskPrediction>> members;
    for (const auto& path : state.prediction_paths)
      members.push_back(harness::load_predictions(path));
    report =
        harness::evaluate_ensemble(state.report_name, tag, members, ds, split, ctx.fingerprint);
  }

  fs::path report_path = ctx.out_dir / "report.json";
  report.save(report_path.string());
  ctx.add_artifact(report_path);
  ctx.write();
  for (std::size_t i = 0; i < report.member_mses.size(); ++i)
    std::printf("  member %zu MSE %.4f\n", i, report.member_mses[i]);
  std::printf("%s  test MSE %.4f over %zu tasks\n", report.model_name.c_str(), report.test_mse,
              report.rows.size());
  return 0;
}

int cmd_export_finetune(const CliState& state, RunContext& ctx) {
  harness::Dataset ds = load_cli_dataset(state);
  harness::Split split =
      harness::split_dataset(ds, state.test_fraction, state.val_fraction, state.split_seed);
  fs::path out_path = ctx.out_dir / "finetune.jsonl";
  std::size_t count = harness::export_finetune_file(
      ds, split, harness::partition_from_name(state.partition), out_path.string());
  ctx.add_artifact(out_path);
  ctx.manifest["records"] = count;
  ctx.write();
  std::printf("wrote %zu records to %s\n", count, out_path.string().c_str());
  return 0;
}

int cmd_report(const CliState& state, RunContext& ctx) {
  if (state.report_paths.empty()) throw Error(Errc::config_invalid, "--report is required");
  std::vector<harness::PredictionReport> reports;
  for (const auto& path : state.report_paths)
    reports.push_back(harness::PredictionReport::load(path));
  harness::ReportFormat format = harness::report_format_from_name(state.report_format);
  std::string table = harness::report_table(reports, format, state.report_references);

  const char* ext = format == harness::ReportFormat::markdown
                        ? "md"
                        : format == harness::ReportFormat::csv ? "csv" : "txt";
  fs::path out_path = ctx.out_dir / (std::string("report.") + ext);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + out_path.string());
  out << table;
  ctx.add_artifact(out_path);
  ctx.write();
  std::fputs(table.c_str(), stdout);
  return 0;
}

// ---- option wiring ----------------------------------------------------------

void add_provider_options(CLI::App* sub, CliState& state) {
  sub->add_option("--provider", state.provider, "Completion provider: mock or http")
      ->default_str("mock");
  sub->add_option("--model", state.model_id, "Provider model id (required for http)");
  sub->add_option("--endpoint", state.endpoint_url,
                  "Chat-completion endpoint URL (required for http)");
  sub->add_option("--credential-env", state.credential_env,
                  "Environment variable holding the bearer credential")
      ->default_str("CHOICEKIT_API_KEY");
  sub->add_option("--max-attempts", state.max_attempts,
                  "Retry budget for transient provider failures")
      ->default_str("5");
}

void add_dataset_options(CLI::App* sub, CliState& state, bool with_render) {
  sub->add_option("--dataset", state.dataset_path, "Dataset CSV path")->required();
  sub->add_option("--format", state.dataset_format,
                  "Dataset format: textual-csv, numeric-csv, or synthetic")
      ->default_str("numeric-csv");
  if (with_render)
    sub->add_flag("--render-texts", state.render_texts,
                  "Fill missing option texts from the lotteries");
}

void add_split_options(CLI::App* sub, CliState& state) {
  sub->add_option("--test-fraction", state.test_fraction, "Held-out test fraction")
      ->default_str("0.1");
  sub->add_option("--val-fraction", state.val_fraction,
                  "Validation fraction of the non-test remainder")
      ->default_str("0.1");
  sub->add_option("--split-seed", state.split_seed, "Seed for the split shuffle")
      ->default_str("0");
}

}  // namespace

std::unique_ptr<CLI::App> build_app(CliState& state) {
  auto app = std::make_unique<CLI::App>(
      "choicekit: predicting binary risky-choice rates from lotteries, text, and "
      "simulated subjects");
  app->require_subcommand(1);
  app->set_version_flag("--version", std::string(kVersion), "Print the tool version and exit");
  app->set_config("--config", "", "Read options from an INI/TOML file (sections per subcommand)");
  app->add_option("-o,--out", state.out_dir, "Output directory for artifacts and the manifest")
      ->default_str("out");
  app->add_option("--seed", state.seed, "Master seed for generation, mock providers, and fits")
      ->default_str("0");
  app->add_option("--parallelism", state.parallelism, "Maximum concurrent provider calls")
      ->default_str("4");
  app->add_option("--rpm", state.requests_per_minute,
                  "Provider rate limit in requests per minute (0 = unlimited)")
      ->default_str("0");
  app->add_option("--cache-dir", state.cache_dir,
                  "Directory for the completion/embedding disk cache (empty = no cache)");

  CLI::App* gen = app->add_subcommand("gen-synthetic",
                                      "Generate a BEAST-labeled synthetic numeric dataset");
  gen->add_option("--n", state.synth_n, "Number of tasks to generate")->default_str("20000");
  gen->add_option("--agents", state.synth_agents, "Simulated agents per task label")
      ->default_str("4000");
  gen->add_option("--kappa-max", state.synth_kappa_max, "Maximum mental sample count per agent")
      ->default_str("3");
  gen->add_option("--ev-sigma", state.synth_ev_sigma,
                  "Standard deviation of the expected-value estimation error")
      ->default_str("0.35");
  gen->add_option("--tool-weights", state.synth_tool_weights,
                  "Sampling-tool weights: unbiased, uniform, pessimism, sign")
      ->expected(4)
      ->delimiter(',');
  gen->add_option("--payoff-min", state.synth_payoff_min, "Lowest payoff in the task space")
      ->default_str("-10");
  gen->add_option("--payoff-max", state.synth_payoff_max, "Highest payoff in the task space")
      ->default_str("30");
  gen->add_option("--max-support", state.synth_max_support, "Maximum outcomes per lottery")
      ->default_str("3");
  gen->add_option("--prob-resolution", state.synth_prob_resolution,
                  "Grid resolution for outcome probabilities")
      ->default_str("0.01");
  gen->add_option("--sure-thing-rate", state.synth_sure_thing_rate,
                  "Chance that option A is degenerate")
      ->default_str("0.4");

  CLI::App* features = app->add_subcommand(
      "features", "Extract the seven pairwise features, exactly or via an LLM");
  add_dataset_options(features, state, true);
  features->add_flag("--textual", state.features_textual,
                     "Judge features from option texts with the provider instead of exact math");
  features->add_option("--calls-per-feature", state.calls_per_feature,
                       "Provider calls averaged per feature in textual mode")
      ->default_str("3");
  add_provider_options(features, state);

  CLI::App* subjects = app->add_subcommand(
      "subjects", "Run simulated subjects over the dataset and aggregate their choices");
  add_dataset_options(subjects, state, true);
  subjects->add_option("--conditions", state.conditions,
                       "Prompting conditions to run: binary, confidence, percentage")
      ->delimiter(',');
  subjects->add_option("--personalities", state.personalities_path,
                       "Persona catalog JSON (default: the ten built-in personas)");
  subjects->add_flag("--baseline-only", state.baseline_only,
                     "Run only the no-persona baseline");
  subjects->add_option("--agents", state.agents_per_task, "Agents per task and condition")
      ->default_str("31");
  subjects->add_option("--batch-size", state.batch_size, "Problems per subject session")
      ->default_str("50");
  subjects->add_option("--temperature", state.temperature, "Sampling temperature for subjects")
      ->default_str("1");
  add_provider_options(subjects, state);

  CLI::App* embed = app->add_subcommand(
      "embed", "Embed option texts and write difference representations");
  add_dataset_options(embed, state, true);
  embed->add_option("--provider", state.provider, "Embedding provider: mock, http, or store")
      ->default_str("mock");
  embed->add_option("--dim", state.embed_dim, "Mock embedding dimensionality")
      ->default_str("3072");
  embed->add_option("--model", state.model_id, "Embedding model id (required for http)");
  embed->add_option("--endpoint", state.endpoint_url, "Embedding endpoint URL (required for http)");
  embed->add_option("--credential-env", state.credential_env,
                    "Environment variable holding the bearer credential")
      ->default_str("CHOICEKIT_API_KEY");
  embed->add_option("--store", state.store_path, "Precomputed-embedding store to read");
  embed->add_option("--save-store", state.save_store_path,
                    "Write every computed text vector to this store file");

  CLI::App* train = app->add_subcommand(
      "train", "Grid-search regressors on a feature matrix against dataset labels");
  train->add_option("--matrix", state.matrix_path, "Feature/representation matrix CSV")
      ->required();
  add_dataset_options(train, state, false);
  add_split_options(train, state);
  train->add_option("--regressor", state.model_specs,
                    "Regressor spec, repeatable (e.g. ridge:alpha=1, knn:k=5, gbt); default: "
                    "the full zoo")
      ->delimiter(',');
  train->add_option("--pca-frac", state.pca_fraction,
                    "Retain this fraction of dimensions via PCA before fitting (0 = off)")
      ->default_str("0");

  CLI::App* predict =
      app->add_subcommand("predict", "Apply a saved model to a matrix and write predictions");
  predict->add_option("--model-file", state.model_path, "Saved model JSON")->required();
  predict->add_option("--matrix", state.matrix_path, "Feature/representation matrix CSV")
      ->required();
  predict->add_option("--pca", state.pca_path, "Saved PCA transform to apply first");

  CLI::App* evaluate = app->add_subcommand(
      "evaluate", "Score prediction files against a dataset's held-out test labels");
  add_dataset_options(evaluate, state, false);
  add_split_options(evaluate, state);
  evaluate->add_option("--predictions", state.prediction_paths,
                       "Prediction CSV, repeatable; several files evaluate as an ensemble")
      ->required()
      ->delimiter(',');
  evaluate->add_option("--name", state.report_name, "Model name recorded in the report")
      ->default_str("model");
  evaluate->add_option("--training-tag", state.training_tag,
                       "Training-data tag recorded in the report (default: dataset name)");

  CLI::App* finetune = app->add_subcommand(
      "export-finetune", "Export a partition as fine-tuning JSON lines");
  add_dataset_options(finetune, state, true);
  add_split_options(finetune, state);
  finetune->add_option("--partition", state.partition,
                       "Partition to export: train, val, test, trainval, or all")
      ->default_str("trainval");

  CLI::App* report = app->add_subcommand("report", "Render evaluation reports as one table");
  report->add_option("--report", state.report_paths, "Report JSON path, repeatable")
      ->required()
      ->delimiter(',');
  report->add_option("--table-format", state.report_format,
                     "Table format: plain, markdown, or csv")
      ->default_str("plain");
  report->add_flag("--references", state.report_references,
                   "Include the published reference rows");

  return app;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::config_invalid:
    case Errc::invalid_hyperparameter:
      return 2;
    case Errc::provider_failure:
    case Errc::provider_transient:
    case Errc::auth_missing:
    case Errc::cache_corrupt:
    case Errc::unparsable_response:
      return 4;
    default:
      return 3;
  }
}

int run(int argc, const char* const* argv) {
  CliState state;
  auto app = build_app(state);

  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app->exit(e);
  }

  try {
    CLI::App* sub = app->get_subcommands().front();
    RunContext ctx = make_context(state, *app, *sub);
    const std::string& name = sub->get_name();
    if (name == "gen-synthetic") return cmd_gen_synthetic(state, ctx);
    if (name == "features") return cmd_features(state, ctx);
    if (name == "subjects") return cmd_subjects(state, ctx);
    if (name == "embed") return cmd_embed(state, ctx);
    if (name == "train") return cmd_train(state, ctx);
    if (name == "predict") return cmd_predict(state, ctx);
    if (name == "evaluate") return cmd_evaluate(state, ctx);
    if (name == "export-finetune") return cmd_export_finetune(state, ctx);
    if (name == "report") return cmd_report(state, ctx);
    throw Error(Errc::config_invalid, "unhandled subcommand " + name);
  } catch (const Error& e) {
    std::fprintf(stderr, "choicekit: error [%s]: %s\n", errc_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "choicekit: unexpected error: %s\n", e.what());
    return 1;
  }
}

}  // namespace choicekit::cli
