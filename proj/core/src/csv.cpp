#include "choicekit/csv.hpp"

#include <charconv>
#include <system_error>

#include "choicekit/errors.hpp"

namespace choicekit::csv {

std::vector<Record> read_records(std::istream& in) {
  std::vector<Record> records;
  std::string field;
  Record current;
  std::size_t line = 1;
  current.line = 1;
  bool in_quotes = false;
  bool any_content = false;

  auto end_field = [&] {
    current.fields.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Record{};
    current.line = line;
    any_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      any_content = true;
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_content = true;
        break;
      case ',':
        end_field();
        any_content = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        [[fallthrough]];
      case '\n':
        ++line;
        if (any_content || !current.fields.empty() || !field.empty()) end_record();
        current.line = line;
        break;
      default:
        field.push_back(c);
        any_content = true;
        break;
    }
  }
  if (in_quotes)
    throw Error(Errc::schema_violation,
                "unterminated quoted field starting near line " + std::to_string(current.line));
  if (any_content || !current.fields.empty() || !field.empty()) end_record();
  return records;
}

std::string escape_field(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_record(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::schema_violation, "bad number '" + s + "' at line " + std::to_string(line));
  return v;
}

long long parse_integer(const std::string& s, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::schema_violation, "bad integer '" + s + "' at line " + std::to_string(line));
  return v;
}

}  // namespace choicekit::csv
