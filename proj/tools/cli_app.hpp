#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "choicekit/errors.hpp"

namespace CLI {
class App;
}

namespace choicekit::cli {

// Everything the command tree binds to. Defaults here are the documented
// defaults; the config file and flags override them in that order.
struct CliState {
  // global
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int parallelism = 4;
  double requests_per_minute = 0.0;
  std::string cache_dir;

  // shared provider settings (features --textual, subjects)
  std::string provider = "mock";
  std::string model_id;
  std::string endpoint_url;
  std::string credential_env = "CHOICEKIT_API_KEY";
  int max_attempts = 5;

  // shared dataset settings
  std::string dataset_path;
  std::string dataset_format = "numeric-csv";
  bool render_texts = false;

  // shared split settings
  double test_fraction = 0.1;
  double val_fraction = 0.1;
  std::uint64_t split_seed = 0;

  // gen-synthetic
  int synth_n = 20000;
  int synth_agents = 4000;
  int synth_kappa_max = 3;
  double synth_ev_sigma = 0.35;
  std::vector<double> synth_tool_weights{0.4, 0.25, 0.15, 0.2};
  double synth_payoff_min = -10.0;
  double synth_payoff_max = 30.0;
  int synth_max_support = 3;
  double synth_prob_resolution = 0.01;
  double synth_sure_thing_rate = 0.4;

  // features
  bool features_textual = false;
  int calls_per_feature = 3;

  // subjects
  std::vector<std::string> conditions{"binary", "confidence", "percentage"};
  std::string personalities_path;
  bool baseline_only = false;
  int agents_per_task = 31;
  int batch_size = 50;
  double temperature = 1.0;

  // embed
  int embed_dim = 3072;
  std::string store_path;
  std::string save_store_path;

  // train
  std::string matrix_path;
  std::vector<std::string> model_specs;
  double pca_fraction = 0.0;

  // export-finetune
  std::string partition = "trainval";

  // predict / evaluate / report
  std::string model_path;
  std::string pca_path;
  std::vector<std::string> prediction_paths;
  std::string report_name = "model";
  std::string training_tag;
  std::vector<std::string> report_paths;
  std::string report_format = "plain";
  bool report_references = false;
};

// Builds the full command tree bound to `state`. Exposed so tests can walk
// the options without spawning a process.
std::unique_ptr<CLI::App> build_app(CliState& state);

// Exit code categories: 0 success, 2 bad config or flags, 3 data errors,
// 4 provider errors, 1 anything unexpected.
int exit_code_for(Errc code);

// Parses argv, runs the selected subcommand, maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace choicekit::cli
