#include "choicekit/harness/finetune.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "choicekit/errors.hpp"
#include "choicekit/llm/prompts.hpp"

namespace choicekit::harness {

using nlohmann::json;

Partition partition_from_name(const std::string& name) {
  if (name == "train") return Partition::train;
  if (name == "val") return Partition::val;
  if (name == "test") return Partition::test;
  if (name == "trainval") return Partition::trainval;
  if (name == "all") return Partition::all;
  throw Error(Errc::config_invalid,
              "unknown partition '" + name + "' (expected train, val, test, trainval, or all)");
}

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::val: return "val";
    case Partition::test: return "test";
    case Partition::trainval: return "trainval";
    case Partition::all: return "all";
  }
  return "unknown";
}

namespace {

bool in_partition(const Split& split, Partition partition, const std::string& id) {
  switch (partition) {
    case Partition::train: return split.in_train(id);
    case Partition::val: return split.in_val(id);
    case Partition::test: return split.in_test(id);
    case Partition::trainval: return split.in_train(id) || split.in_val(id);
    case Partition::all: return true;
  }
  return false;
}

}  // namespace

std::size_t export_finetune_file(const Dataset& ds, const Split& split, Partition partition,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);

  std::size_t count = 0;
  for (const auto& task : ds.tasks) {
    if (!in_partition(split, partition, task.task_id)) continue;
    if (!task.observed_rate_a)
      throw Error(Errc::missing_label, "task " + task.task_id + " has no observed rate");
    json record;
    record["prompt"] = llm::render_finetune_prompt(task);
    record["completion"] = std::to_string(std::llround(*task.observed_rate_a * 100.0));
    out << record.dump() << '\n';
    ++count;
  }
  return count;
}

}  // namespace choicekit::harness
