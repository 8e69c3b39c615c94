#include "choicekit/llm/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>

#include "choicekit/errors.hpp"

namespace choicekit::llm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

// "A" / "B", with or without an "Option" prefix.
std::optional<bool> parse_choice_token(const std::string& token) {
  std::string t = lower(trim(token));
  if (t.rfind("option", 0) == 0) t = trim(t.substr(6));
  if (t == "a") return true;
  if (t == "b") return false;
  return std::nullopt;
}

std::optional<double> parse_number_token(std::string token) {
  token = trim(token);
  if (!token.empty() && token.back() == '%') token = trim(token.substr(0, token.size() - 1));
  if (token.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// nullopt when the fragment is malformed for the condition.
std::optional<double> parse_tuple(Condition condition, const std::string& fragment,
                                  std::string& id_out) {
  std::size_t open = fragment.find('(');
  std::size_t close = fragment.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close <= open) return std::nullopt;
  std::vector<std::string> parts = split(fragment.substr(open + 1, close - open - 1), ',');
  for (auto& p : parts) p = trim(p);

  switch (condition) {
    case Condition::binary: {
      if (parts.size() != 2 || parts[0].empty()) return std::nullopt;
      auto choice = parse_choice_token(parts[1]);
      if (!choice) return std::nullopt;
      id_out = parts[0];
      return *choice ? 1.0 : 0.0;
    }
    case Condition::confidence: {
      if (parts.size() != 3 || parts[0].empty()) return std::nullopt;
      auto choice = parse_choice_token(parts[1]);
      auto k = parse_number_token(parts[2]);
      if (!choice || !k) return std::nullopt;
      double conf = std::min(100.0, std::max(0.0, *k)) / 100.0;
      id_out = parts[0];
      return *choice ? conf : 1.0 - conf;
    }
    case Condition::percentage: {
      if (parts.size() != 2 || parts[0].empty()) return std::nullopt;
      auto v = parse_number_token(parts[1]);
      if (!v) return std::nullopt;
      id_out = parts[0];
      return clamp01(*v / 100.0);
    }
  }
  return std::nullopt;
}

}  // namespace

SubjectParseOutcome parse_subject_response_lenient(Condition condition, const std::string& raw,
                                                   const std::vector<std::string>& expected_ids) {
  std::map<std::string, SubjectResponse> resolved;
  SubjectParseOutcome outcome;

  for (const std::string& piece : split(raw, '|')) {
    std::string fragment = trim(piece);
    if (fragment.empty()) continue;
    std::string id;
    std::optional<double> p = parse_tuple(condition, fragment, id);
    bool expected =
        p && std::find(expected_ids.begin(), expected_ids.end(), id) != expected_ids.end();
    if (!expected) {
      outcome.malformed_fragments.push_back(fragment);
      continue;
    }
    if (resolved.contains(id)) continue;  // duplicate keeps the first occurrence
    SubjectResponse r;
    r.task_id = id;
    r.condition = condition;
    r.raw_text = fragment;
    r.p_choose_a = *p;
    resolved.emplace(id, std::move(r));
  }

  for (const std::string& id : expected_ids) {
    auto it = resolved.find(id);
    if (it == resolved.end())
      outcome.missing_ids.push_back(id);
    else
      outcome.parsed.push_back(it->second);
  }
  return outcome;
}

std::vector<SubjectResponse> parse_subject_response(Condition condition, const std::string& raw,
                                                    const std::vector<std::string>& expected_ids) {
  SubjectParseOutcome outcome = parse_subject_response_lenient(condition, raw, expected_ids);
  if (!outcome.complete()) {
    std::string fragment =
        outcome.malformed_fragments.empty() ? std::string{} : outcome.malformed_fragments.front();
    throw ParseError("response resolved " + std::to_string(outcome.parsed.size()) + " of " +
                         std::to_string(expected_ids.size()) + " expected ids",
                     fragment, outcome.missing_ids);
  }
  return std::move(outcome.parsed);
}

int parse_feature_response(const std::string& raw) {
  std::string t = trim(raw);
  if (t.empty()) throw ParseError("empty feature response", raw, {});
  std::string lo = lower(t);

  for (const char* neutral : {"too hard", "hard to tell", "cannot tell", "can't tell", "neither",
                              "neutral", "no clear", "equally", "the same", "tie"})
    if (lo.find(neutral) != std::string::npos) return 0;

  bool has_a = lo.find("option a") != std::string::npos;
  bool has_b = lo.find("option b") != std::string::npos;
  if (has_a && has_b) throw ParseError("response names both options", t, {});
  if (has_a) return 1;
  if (has_b) return -1;

  while (!lo.empty() && (lo.back() == '.' || lo.back() == '!')) lo.pop_back();
  if (lo == "a") return 1;
  if (lo == "b") return -1;
  if (lo == "no" || lo == "none") return 0;

  throw ParseError("cannot map feature response", t, {});
}

}  // namespace choicekit::llm
