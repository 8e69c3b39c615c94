#pragma once

#include <string>
#include <vector>

#include "choicekit/llm/prompts.hpp"

namespace choicekit::llm {

// One simulated subject's answer to one task, mapped onto [0, 1] as the
// probability of choosing option A. `imputed` marks values substituted after
// parsing failed (p = 0.5), so downstream aggregation can see them.
struct SubjectResponse {
  std::string task_id;
  Condition condition = Condition::binary;
  std::string raw_text;
  double p_choose_a = 0.5;
  bool imputed = false;
};

// Result of a tolerant parse: whatever resolved, plus what did not. The
// strict entry point below converts an incomplete outcome into a ParseError,
// so nothing is ever dropped silently.
struct SubjectParseOutcome {
  std::vector<SubjectResponse> parsed;           // in expected-id order
  std::vector<std::string> missing_ids;          // expected but never resolved
  std::vector<std::string> malformed_fragments;  // fragments that failed to parse
  bool complete() const { return missing_ids.empty() && malformed_fragments.empty(); }
};

// Parses a pipe-separated tuple response:
//   binary      "(12, A) | (13, B)"        A -> 1.0, B -> 0.0
//   confidence  "(7, B, 80)"               A -> k/100, B -> 1 - k/100
//   percentage  "(3, 75)"                  value / 100, clamped to [0, 1]
// Whitespace around tuples and separators is tolerated. Ids must match the
// expected ids exactly; a duplicate keeps the first occurrence.
SubjectParseOutcome parse_subject_response_lenient(Condition condition, const std::string& raw,
                                                   const std::vector<std::string>& expected_ids);

// Same, but throws ParseError (with fragment and missing ids) unless every
// expected id resolved cleanly.
std::vector<SubjectResponse> parse_subject_response(Condition condition, const std::string& raw,
                                                    const std::vector<std::string>& expected_ids);

// Maps a pairwise-feature judgment to {+1, -1, 0}: an answer naming option A
// is +1, option B is -1, and "No" / "too hard to tell" style neutrals are 0.
// Throws ParseError when the answer names both options or neither.
int parse_feature_response(const std::string& raw);

}  // namespace choicekit::llm
