#include "choicekit/csv.hpp"

#include <sstream>

#include <doctest.h>

#include "choicekit/rng.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;

TEST_CASE("read_records splits plain rows") {
  std::istringstream in("a,b,c\n1,2,3\n");
  auto records = csv::read_records(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].fields == std::vector<std::string>{"a", "b", "c"});
  CHECK(records[1].fields == std::vector<std::string>{"1", "2", "3"});
  CHECK(records[0].line == 1);
  CHECK(records[1].line == 2);
}

TEST_CASE("quoted fields carry commas, quotes, and newlines") {
  std::istringstream in("\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\"\nplain,,last\n");
  auto records = csv::read_records(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].fields == std::vector<std::string>{"a,b", "say \"hi\"", "two\nlines"});
  CHECK(records[1].fields == std::vector<std::string>{"plain", "", "last"});
  CHECK(records[1].line == 3);  // the embedded newline shifts the count
}

TEST_CASE("unterminated quote is a schema violation") {
  std::istringstream in("\"open,1\n");
  CHECK(error_code_of([&] { csv::read_records(in); }) == Errc::schema_violation);
}

TEST_CASE("escape_field quotes only when needed") {
  CHECK(csv::escape_field("plain") == "plain");
  CHECK(csv::escape_field("a,b") == "\"a,b\"");
  CHECK(csv::escape_field("q\"q") == "\"q\"\"q\"");
  CHECK(csv::escape_field("nl\n") == "\"nl\n\"");
}

TEST_CASE("join then read round-trips arbitrary fields") {
  std::vector<std::string> fields{"x", "a,b", "\"", "line\nbreak", ""};
  std::istringstream in(csv::join_record(fields) + "\n");
  auto records = csv::read_records(in);
  REQUIRE(records.size() == 1);
  CHECK(records[0].fields == fields);
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    double v = uniform_range(rng, -1e6, 1e6);
    CHECK(csv::parse_double(csv::format_double(v), 1) == v);
  }
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(-0.0) == csv::format_double(-0.0));
  CHECK(csv::parse_double(csv::format_double(1e-300), 1) == 1e-300);
}

TEST_CASE("parse_double rejects junk with the line number") {
  try {
    csv::parse_double("12x", 17);
    FAIL("expected a parse failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema_violation);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
  CHECK(error_code_of([] { csv::parse_double("", 1); }) == Errc::schema_violation);
}

TEST_CASE("parse_integer accepts integers only") {
  CHECK(csv::parse_integer("42", 1) == 42);
  CHECK(csv::parse_integer("-7", 1) == -7);
  CHECK(error_code_of([] { csv::parse_integer("4.2", 1); }) == Errc::schema_violation);
  CHECK(error_code_of([] { csv::parse_integer("", 1); }) == Errc::schema_violation);
}
