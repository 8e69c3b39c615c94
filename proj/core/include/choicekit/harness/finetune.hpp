#pragma once

#include <cstddef>
#include <string>

#include "choicekit/harness/dataset.hpp"
#include "choicekit/harness/split.hpp"

namespace choicekit::harness {

enum class Partition { train, val, test, trainval, all };

Partition partition_from_name(const std::string& name);  // Errc::config_invalid
const char* partition_name(Partition p);

// Writes one JSON line per task in the partition (dataset order):
//   {"prompt": <fine-tune prompt>, "completion": "<round(rate_a * 100)>"}
// Tasks must carry texts and observed rates (Errc::missing_text /
// Errc::missing_label). Returns the record count.
std::size_t export_finetune_file(const Dataset& ds, const Split& split, Partition partition,
                                 const std::string& path);

}  // namespace choicekit::harness
