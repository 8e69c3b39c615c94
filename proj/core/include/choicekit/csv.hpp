#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace choicekit::csv {

// Minimal RFC 4180 reader/writer: quoted fields may contain commas, doubled
// quotes, and newlines. Quoting on output happens only when needed.

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line the record starts on
};

// Reads the whole stream; throws Errc::schema_violation on an unterminated
// quoted field.
std::vector<Record> read_records(std::istream& in);

std::string escape_field(const std::string& field);
std::string join_record(const std::vector<std::string>& fields);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(const std::string& s, std::size_t line);       // Errc::schema_violation
long long parse_integer(const std::string& s, std::size_t line);   // Errc::schema_violation

}  // namespace choicekit::csv
