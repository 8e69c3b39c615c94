#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "choicekit/harness/dataset.hpp"
#include "choicekit/harness/evaluate.hpp"
#include "choicekit/harness/finetune.hpp"
#include "choicekit/harness/report.hpp"
#include "choicekit/harness/split.hpp"
#include "choicekit/rng.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;
using choicekit::test::scratch_dir;
using choicekit::test::slurp;
using choicekit::test::spit;

namespace {

harness::Dataset numeric_dataset(int n, std::uint64_t seed = 11) {
  Rng rng(seed);
  harness::Dataset ds;
  ds.name = "unit";
  ds.modality = harness::Modality::numeric;
  for (int i = 0; i < n; ++i) {
    ChoiceTask task;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%05d", i);
    task.task_id = buf;
    task.option_a_lottery = make_lottery({{uniform_range(rng, -5.0, 5.0), 1.0}});
    task.option_b_lottery =
        make_lottery({{uniform_range(rng, -5.0, 10.0), 0.4}, {uniform_range(rng, -5.0, 0.0), 0.6}});
    task.observed_rate_a = uniform_double(rng);
    task.n_participants = 100;
    ds.tasks.push_back(task);
  }
  return ds;
}

}  // namespace

TEST_CASE("lottery grammar round-trips and rejects junk") {
  auto lot = harness::parse_lottery("5:0.23;2:0.77");
  CHECK(lot.outcomes().size() == 2);
  CHECK(harness::format_lottery(lot) == "5:0.23;2:0.77");

  auto negative = harness::parse_lottery("-4:0.9;2:0.1");
  CHECK(harness::format_lottery(negative) == "2:0.1;-4:0.9");

  CHECK(error_code_of([] { harness::parse_lottery(""); }) == Errc::schema_violation);
  CHECK(error_code_of([] { harness::parse_lottery("5:0.23;2"); }) == Errc::schema_violation);
  CHECK(error_code_of([] { harness::parse_lottery("a:b"); }) == Errc::schema_violation);
  CHECK(error_code_of([] { harness::parse_lottery("5:0.5;2:0.1"); }) ==
        Errc::probability_sum_out_of_tolerance);
}

TEST_CASE("plain-language lottery rendering") {
  CHECK(harness::lottery_text(make_lottery({{1.0, 1.0}})) == "1 for sure");
  CHECK(harness::lottery_text(make_lottery({{5.0, 0.23}, {2.0, 0.77}})) ==
        "5 with probability 0.23, 2 otherwise");
  CHECK(harness::lottery_text(make_lottery({{10.0, 0.1}, {4.0, 0.3}, {0.0, 0.6}})) ==
        "10 with probability 0.1, 4 with probability 0.3, 0 otherwise");
}

TEST_CASE("fill_texts_from_lotteries renders both options and upgrades modality") {
  auto ds = numeric_dataset(3);
  harness::fill_texts_from_lotteries(ds);
  CHECK(ds.modality == harness::Modality::both);
  for (const auto& task : ds.tasks) {
    REQUIRE(task.has_text());
    CHECK(*task.option_a_text == harness::lottery_text(*task.option_a_lottery));
    CHECK(*task.option_b_text == harness::lottery_text(*task.option_b_lottery));
  }

  harness::Dataset text_only;
  text_only.name = "texts";
  text_only.modality = harness::Modality::textual;
  ChoiceTask t;
  t.task_id = "x";
  t.option_a_text = "a";
  t.option_b_text = "b";
  text_only.tasks.push_back(t);
  CHECK(error_code_of([&] { harness::fill_texts_from_lotteries(text_only); }) ==
        Errc::schema_violation);
}

TEST_CASE("dataset validation catches duplicates and modality gaps") {
  auto ds = numeric_dataset(4);
  ds.validate();

  auto dup = ds;
  dup.tasks[2].task_id = dup.tasks[0].task_id;
  CHECK(error_code_of([&] { dup.validate(); }) == Errc::duplicate_task_id);

  auto gap = ds;
  gap.tasks[1].option_b_lottery.reset();
  CHECK(error_code_of([&] { gap.validate(); }) == Errc::schema_violation);
}

TEST_CASE("dataset CSVs round-trip in both schemas") {
  auto dir = scratch_dir("dataset");
  auto ds = numeric_dataset(12);
  ds.tasks[3].observed_rate_a.reset();   // prediction-only row
  ds.tasks[3].n_participants.reset();

  auto numeric_path = (dir / "numeric.csv").string();
  harness::save_dataset(ds, numeric_path, harness::DatasetFormat::numeric_csv);
  auto numeric_back = harness::load_dataset(numeric_path, harness::DatasetFormat::numeric_csv);
  REQUIRE(numeric_back.tasks.size() == ds.tasks.size());
  for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
    CHECK(numeric_back.tasks[i].task_id == ds.tasks[i].task_id);
    CHECK(harness::format_lottery(*numeric_back.tasks[i].option_a_lottery) ==
          harness::format_lottery(*ds.tasks[i].option_a_lottery));
    CHECK(numeric_back.tasks[i].observed_rate_a.has_value() ==
          ds.tasks[i].observed_rate_a.has_value());
    if (ds.tasks[i].observed_rate_a)
      CHECK(*numeric_back.tasks[i].observed_rate_a == *ds.tasks[i].observed_rate_a);
  }

  harness::fill_texts_from_lotteries(ds);
  auto textual_path = (dir / "textual.csv").string();
  harness::save_dataset(ds, textual_path, harness::DatasetFormat::textual_csv);
  auto textual_back = harness::load_dataset(textual_path, harness::DatasetFormat::textual_csv);
  REQUIRE(textual_back.tasks.size() == ds.tasks.size());
  CHECK(*textual_back.tasks[0].option_a_text == *ds.tasks[0].option_a_text);
  CHECK(textual_back.modality == harness::Modality::textual);

  // header must match the schema exactly, and errors carry path:line
  spit((dir / "bad.csv").string(), "task_id,text_a,text_b,rate_a,n_participants\nx,a,b,0.5,10\n");
  CHECK(error_code_of([&] {
          harness::load_dataset((dir / "bad.csv").string(),
                                harness::DatasetFormat::numeric_csv);
        }) == Errc::schema_violation);
  spit((dir / "badrow.csv").string(),
       "task_id,lottery_a,lottery_b,rate_a,n_participants\nx,1:1.0,2:1.0,1.7,10\n");
  try {
    harness::load_dataset((dir / "badrow.csv").string(), harness::DatasetFormat::numeric_csv);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("badrow.csv:2") != std::string::npos);
  }

  CHECK(error_code_of([&] {
          harness::load_dataset((dir / "absent.csv").string(),
                                harness::DatasetFormat::numeric_csv);
        }) == Errc::file_unreadable);
}

TEST_CASE("dataset format names round-trip") {
  CHECK(harness::dataset_format_from_name("numeric-csv") == harness::DatasetFormat::numeric_csv);
  CHECK(harness::dataset_format_from_name("textual-csv") == harness::DatasetFormat::textual_csv);
  CHECK(harness::dataset_format_from_name("synthetic") == harness::DatasetFormat::synthetic);
  CHECK(std::string(harness::dataset_format_name(harness::DatasetFormat::numeric_csv)) ==
        "numeric-csv");
  CHECK(error_code_of([] { harness::dataset_format_from_name("parquet"); }) ==
        Errc::config_invalid);
}

TEST_CASE("synthetic metadata rides next to the CSV") {
  CHECK(harness::synthetic_meta_path("out/tasks.csv") == "out/tasks.meta.json");

  harness::SyntheticMeta meta;
  meta.params.n_agents = 1234;
  meta.params.kappa_max = 2;
  meta.space.payoff_min = -3.5;
  meta.space.max_support_size = 2;
  meta.seed = 99;
  meta.n_tasks = 42;

  auto dir = scratch_dir("synmeta");
  auto path = (dir / "tasks.meta.json").string();
  harness::save_synthetic_meta(meta, path);
  auto back = harness::load_synthetic_meta(path);
  CHECK(back.params.n_agents == 1234);
  CHECK(back.params.kappa_max == 2);
  CHECK(back.space.payoff_min == -3.5);
  CHECK(back.space.max_support_size == 2);
  CHECK(back.seed == 99);
  CHECK(back.n_tasks == 42);
}

TEST_CASE("split carves test then val with llround sizes") {
  auto thousand = numeric_dataset(1000);
  auto split = harness::split_dataset(thousand, 0.1, 0.1, 0);
  CHECK(split.test_ids.size() == 100);
  CHECK(split.val_ids.size() == 90);
  CHECK(split.train_ids.size() == 810);
  CHECK(split.train_ids.size() + split.val_ids.size() == 900);

  auto odd = numeric_dataset(1039);
  auto odd_split = harness::split_dataset(odd, 0.1, 0.1, 0);
  CHECK(odd_split.test_ids.size() == 104);
  CHECK(odd_split.train_ids.size() + odd_split.val_ids.size() == 935);
}

TEST_CASE("split partitions are sorted, disjoint, and complete") {
  auto ds = numeric_dataset(137);
  auto split = harness::split_dataset(ds, 0.2, 0.15, 5);
  CHECK(std::is_sorted(split.train_ids.begin(), split.train_ids.end()));
  CHECK(std::is_sorted(split.val_ids.begin(), split.val_ids.end()));
  CHECK(std::is_sorted(split.test_ids.begin(), split.test_ids.end()));

  std::set<std::string> all;
  for (const auto& id : split.train_ids) all.insert(id);
  for (const auto& id : split.val_ids) all.insert(id);
  for (const auto& id : split.test_ids) all.insert(id);
  CHECK(all.size() == ds.tasks.size());
  CHECK(all.size() ==
        split.train_ids.size() + split.val_ids.size() + split.test_ids.size());

  for (const auto& task : ds.tasks) {
    int hits = int(split.in_train(task.task_id)) + int(split.in_val(task.task_id)) +
               int(split.in_test(task.task_id));
    CHECK(hits == 1);
  }
}

TEST_CASE("split ignores input order and repeats bit-for-bit") {
  auto ds = numeric_dataset(200);
  auto reference = harness::split_dataset(ds, 0.1, 0.1, 0);

  auto shuffled = ds;
  Rng rng(3);
  for (std::size_t i = shuffled.tasks.size() - 1; i > 0; --i)
    std::swap(shuffled.tasks[i], shuffled.tasks[uniform_below(rng, i + 1)]);
  auto from_shuffled = harness::split_dataset(shuffled, 0.1, 0.1, 0);
  CHECK(from_shuffled.train_ids == reference.train_ids);
  CHECK(from_shuffled.val_ids == reference.val_ids);
  CHECK(from_shuffled.test_ids == reference.test_ids);

  for (int rerun = 0; rerun < 100; ++rerun) {
    auto again = harness::split_dataset(ds, 0.1, 0.1, 0);
    REQUIRE(again.train_ids == reference.train_ids);
    REQUIRE(again.val_ids == reference.val_ids);
    REQUIRE(again.test_ids == reference.test_ids);
  }

  auto other_seed = harness::split_dataset(ds, 0.1, 0.1, 1);
  CHECK(other_seed.test_ids != reference.test_ids);
}

TEST_CASE("split guards sizes and fractions") {
  CHECK(error_code_of([&] { harness::split_dataset(numeric_dataset(9), 0.1, 0.1, 0); }) ==
        Errc::too_small);
  CHECK(error_code_of([&] { harness::split_dataset(numeric_dataset(10), 0.01, 0.1, 0); }) ==
        Errc::too_small);
  CHECK(error_code_of([&] { harness::split_dataset(numeric_dataset(10), 0.5, 0.99, 0); }) ==
        Errc::too_small);
  CHECK(error_code_of([&] { harness::split_dataset(numeric_dataset(100), 0.0, 0.1, 0); }) ==
        Errc::invalid_hyperparameter);
  CHECK(error_code_of([&] { harness::split_dataset(numeric_dataset(100), 0.1, 1.0, 0); }) ==
        Errc::invalid_hyperparameter);
}

TEST_CASE("mse matches the hand-computed average of squared gaps") {
  CHECK(harness::mse({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(harness::mse({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(harness::mse({0.2, 0.6, 1.0}, {0.0, 0.6, 0.5}) ==
        doctest::Approx((0.04 + 0.0 + 0.25) / 3.0));

  CHECK(error_code_of([] { harness::mse({0.5}, {0.5, 0.5}); }) == Errc::length_mismatch);
  CHECK(error_code_of([] { harness::mse({}, {}); }) == Errc::length_mismatch);
  CHECK(error_code_of([] { harness::mse({1.5}, {0.5}); }) == Errc::range_violation);
  CHECK(error_code_of([] { harness::mse({0.5}, {-0.1}); }) == Errc::range_violation);
}

TEST_CASE("prediction CSVs round-trip") {
  auto dir = scratch_dir("preds");
  std::vector<harness::TaskPrediction> preds = {{"a", 0.25}, {"b", 0.75}, {"c", 1.0}};
  auto path = (dir / "predictions.csv").string();
  harness::save_predictions(preds, path);
  CHECK(slurp(path).rfind("task_id,prediction\n", 0) == 0);
  CHECK(harness::load_predictions(path) == preds);
}

TEST_CASE("evaluate_predictions scores the test partition only") {
  auto ds = numeric_dataset(40);
  auto split = harness::split_dataset(ds, 0.25, 0.2, 2);
  REQUIRE(split.test_ids.size() == 10);

  std::vector<harness::TaskPrediction> preds;
  for (const auto& task : ds.tasks)  // covers every task; non-test rows must be ignored
    preds.push_back({task.task_id, 0.5});
  auto report =
      harness::evaluate_predictions("flat", "unit", preds, ds, split, "fingerprint-1");

  CHECK(report.model_name == "flat");
  CHECK(report.training_data == "unit");
  CHECK(report.split_seed == 2);
  CHECK(report.config_fingerprint == "fingerprint-1");
  CHECK(report.rows.size() == 10);
  CHECK(report.member_mses.empty());

  double direct = 0.0;
  std::size_t row_index = 0;
  for (const auto& task : ds.tasks) {
    if (!split.in_test(task.task_id)) continue;
    CHECK(report.rows[row_index].task_id == task.task_id);  // dataset order
    CHECK(report.rows[row_index].label == *task.observed_rate_a);
    direct += (0.5 - *task.observed_rate_a) * (0.5 - *task.observed_rate_a);
    ++row_index;
  }
  CHECK(report.test_mse == doctest::Approx(direct / 10.0).epsilon(1e-12));
}

TEST_CASE("evaluate_predictions names missing ids and rejects unlabeled tests") {
  auto ds = numeric_dataset(40);
  auto split = harness::split_dataset(ds, 0.25, 0.2, 2);

  std::vector<harness::TaskPrediction> partial;
  for (const auto& id : split.test_ids)
    if (id != split.test_ids.front()) partial.push_back({id, 0.5});
  try {
    harness::evaluate_predictions("m", "d", partial, ds, split);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_predictions);
    CHECK(std::string(e.what()).find(split.test_ids.front()) != std::string::npos);
  }

  auto unlabeled = ds;
  for (auto& task : unlabeled.tasks)
    if (task.task_id == split.test_ids.front()) task.observed_rate_a.reset();
  std::vector<harness::TaskPrediction> full;
  for (const auto& id : split.test_ids) full.push_back({id, 0.5});
  CHECK(error_code_of([&] {
          harness::evaluate_predictions("m", "d", full, unlabeled, split);
        }) == Errc::missing_label);
}

TEST_CASE("prediction reports round-trip through JSON") {
  auto ds = numeric_dataset(40);
  auto split = harness::split_dataset(ds, 0.25, 0.2, 2);
  std::vector<harness::TaskPrediction> preds;
  for (const auto& id : split.test_ids) preds.push_back({id, 0.25});
  auto report = harness::evaluate_predictions("rt", "unit", preds, ds, split, "fp");

  auto back = harness::PredictionReport::from_json(report.to_json());
  CHECK(back.model_name == report.model_name);
  CHECK(back.test_mse == report.test_mse);
  CHECK(back.rows.size() == report.rows.size());
  CHECK(back.rows[3].task_id == report.rows[3].task_id);
  CHECK(back.rows[3].prediction == report.rows[3].prediction);
  CHECK(back.rows[3].label == report.rows[3].label);
  CHECK(back.split_seed == report.split_seed);
  CHECK(back.config_fingerprint == report.config_fingerprint);

  auto dir = scratch_dir("report");
  auto path = (dir / "report.json").string();
  report.save(path);
  auto loaded = harness::PredictionReport::load(path);
  CHECK(loaded.to_json() == report.to_json());

  CHECK(error_code_of([] { harness::PredictionReport::from_json("{}"); }) ==
        Errc::schema_violation);
  CHECK(error_code_of([&] { harness::PredictionReport::load((dir / "gone.json").string()); }) ==
        Errc::file_unreadable);

  double recomputed = 0.0;
  for (const auto& row : loaded.rows)
    recomputed += (row.prediction - row.label) * (row.prediction - row.label);
  recomputed /= double(loaded.rows.size());
  CHECK(std::abs(recomputed - loaded.test_mse) <= 1e-12);
}

TEST_CASE("ensembles average members and log per-member quality") {
  auto ds = numeric_dataset(60, 21);
  auto split = harness::split_dataset(ds, 0.2, 0.2, 7);

  Rng rng(77);
  std::vector<std::vector<harness::TaskPrediction>> members;
  for (int m = 0; m < 4; ++m) {
    std::vector<harness::TaskPrediction> preds;
    for (const auto& id : split.test_ids) preds.push_back({id, uniform_double(rng)});
    members.push_back(preds);
  }

  auto report = harness::evaluate_ensemble("blend", "unit", members, ds, split);
  REQUIRE(report.member_mses.size() == 4);
  double mean_member = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    auto solo = harness::evaluate_predictions("solo", "unit", members[m], ds, split);
    CHECK(report.member_mses[m] == doctest::Approx(solo.test_mse).epsilon(1e-12));
    mean_member += solo.test_mse;
  }
  mean_member /= double(members.size());
  CHECK(report.test_mse <= mean_member + 1e-12);

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    double direct = 0.0;
    for (const auto& member : members)
      for (const auto& p : member)
        if (p.task_id == report.rows[i].task_id) direct += p.prediction;
    CHECK(report.rows[i].prediction == doctest::Approx(direct / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("report tables sort by rounded MSE and render three formats") {
  harness::PredictionReport a;
  a.model_name = "zeta";
  a.training_data = "d1";
  a.test_mse = 0.0123;
  harness::PredictionReport b;
  b.model_name = "alpha";
  b.training_data = "d2";
  b.test_mse = 0.01231;  // same at 4 decimals; ties break by name
  harness::PredictionReport c;
  c.model_name = "worst";
  c.training_data = "d3";
  c.test_mse = 0.9;

  auto plain = harness::report_table({a, b, c}, harness::ReportFormat::plain);
  auto pos_alpha = plain.find("alpha");
  auto pos_zeta = plain.find("zeta");
  auto pos_worst = plain.find("worst");
  REQUIRE(pos_alpha != std::string::npos);
  REQUIRE(pos_zeta != std::string::npos);
  REQUIRE(pos_worst != std::string::npos);
  CHECK(pos_alpha < pos_zeta);
  CHECK(pos_zeta < pos_worst);
  CHECK(plain.find("0.0123") != std::string::npos);
  CHECK(plain.find("0.9000") != std::string::npos);

  auto md = harness::report_table({a}, harness::ReportFormat::markdown);
  CHECK(md.find("| zeta") != std::string::npos);
  CHECK(md.find("---") != std::string::npos);

  auto csv_table = harness::report_table({a}, harness::ReportFormat::csv);
  CHECK(csv_table.rfind("model,training_data,test_mse", 0) == 0);
  CHECK(csv_table.find("zeta,d1,0.0123") != std::string::npos);

  auto with_refs = harness::report_table({c}, harness::ReportFormat::plain, true);
  CHECK(with_refs.find("0.0095") != std::string::npos);
  CHECK(with_refs.find("0.0092") != std::string::npos);
  CHECK(with_refs.find("0.0092") < with_refs.find("0.0095"));

  CHECK(error_code_of([] { harness::report_table({}, harness::ReportFormat::plain); }) ==
        Errc::empty_group);
  CHECK(harness::report_format_from_name("markdown") == harness::ReportFormat::markdown);
  CHECK(error_code_of([] { harness::report_format_from_name("pdf"); }) == Errc::config_invalid);
}

TEST_CASE("fine-tune export writes one JSON line per partition task") {
  auto ds = numeric_dataset(1000);
  harness::fill_texts_from_lotteries(ds);
  auto split = harness::split_dataset(ds, 0.1, 0.1, 0);

  auto dir = scratch_dir("finetune");
  auto path = (dir / "train.jsonl").string();
  auto count = harness::export_finetune_file(ds, split, harness::Partition::trainval, path);
  CHECK(count == 900);

  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  const std::string prefix =
      "Estimate the percentage of the population choosing Option A over Option B:";
  while (std::getline(in, line)) {
    ++lines;
    auto record = nlohmann::json::parse(line);
    REQUIRE(record.contains("prompt"));
    REQUIRE(record.contains("completion"));
    auto prompt = record["prompt"].get<std::string>();
    REQUIRE(prompt.rfind(prefix, 0) == 0);
    auto completion = record["completion"].get<std::string>();
    auto value = std::stoi(completion);
    CHECK(value >= 0);
    CHECK(value <= 100);
  }
  CHECK(lines == 900);

  // completion is the rounded percentage of the task's observed rate
  auto tiny = numeric_dataset(10, 5);
  harness::fill_texts_from_lotteries(tiny);
  tiny.tasks[0].observed_rate_a = 0.237;
  auto tiny_split = harness::split_dataset(tiny, 0.1, 0.2, 0);
  auto all_path = (dir / "all.jsonl").string();
  CHECK(harness::export_finetune_file(tiny, tiny_split, harness::Partition::all, all_path) == 10);
  std::ifstream all_in(all_path);
  bool found = false;
  while (std::getline(all_in, line)) {
    auto record = nlohmann::json::parse(line);
    if (record["prompt"].get<std::string>().find(
            harness::lottery_text(*tiny.tasks[0].option_a_lottery)) != std::string::npos &&
        record["completion"] == "24")
      found = true;
  }
  CHECK(found);

  auto unlabeled = tiny;
  unlabeled.tasks[3].observed_rate_a.reset();
  CHECK(error_code_of([&] {
          harness::export_finetune_file(unlabeled, tiny_split, harness::Partition::all,
                                        (dir / "x.jsonl").string());
        }) == Errc::missing_label);

  auto textless = tiny;
  textless.tasks[2].option_a_text.reset();
  textless.tasks[2].option_b_text.reset();
  CHECK(error_code_of([&] {
          harness::export_finetune_file(textless, tiny_split, harness::Partition::all,
                                        (dir / "y.jsonl").string());
        }) == Errc::missing_text);
}

TEST_CASE("partition names round-trip") {
  using harness::Partition;
  for (auto p : {Partition::train, Partition::val, Partition::test, Partition::trainval,
                 Partition::all})
    CHECK(harness::partition_from_name(harness::partition_name(p)) == p);
  CHECK(error_code_of([] { harness::partition_from_name("holdout"); }) == Errc::config_invalid);
}
