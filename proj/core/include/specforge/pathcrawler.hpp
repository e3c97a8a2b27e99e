#pragma once

// Structural test-case CSVs as emitted by Pathcrawler: a header of input_*
// columns followed by output and verdict, one row per generated test case.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/model.hpp"

namespace specforge::pathcrawler {

class CsvError : public Error {
public:
    using Error::Error;
};

class MalformedHeader : public CsvError {
public:
    using CsvError::CsvError;
};

/// A data row whose field count differs from the header arity (or which uses
/// quoting). row_index is zero-based over data rows.
class RowArity : public CsvError {
public:
    RowArity(std::size_t row_index, std::size_t expected, std::size_t actual);

    std::size_t row_index() const { return row_index_; }

private:
    std::size_t row_index_;
};

struct TestCase {
    std::vector<std::pair<std::string, std::string>> inputs;
    std::string output;
    std::string verdict;

    bool operator==(const TestCase&) const = default;
};

struct TestSuite {
    std::vector<std::string> columns;
    std::vector<TestCase> cases;
    std::string raw;
    /// Line terminator detected in raw ("\n" or "\r\n").
    std::string line_ending = "\n";
    bool trailing_newline = false;

    std::vector<std::string> input_columns() const;

    bool operator==(const TestSuite&) const = default;
};

struct TestSuiteSummary {
    std::size_t case_count = 0;
    std::vector<std::string> input_columns;
    std::set<std::string> distinct_verdicts;
    bool has_output = false;
    std::map<std::string, std::set<std::string>> distinct_values_per_input;

    bool operator==(const TestSuiteSummary&) const = default;
};

TestSuite parse_test_csv(std::string_view raw);

TestSuiteSummary summarize(const TestSuite& suite);

/// Canonical comma-joined text; byte-identical to the parsed input.
std::string render_csv(const TestSuite& suite);

void to_json(nlohmann::json& j, const TestCase& value);
void from_json(const nlohmann::json& j, TestCase& value);
void to_json(nlohmann::json& j, const TestSuite& value);
void from_json(const nlohmann::json& j, TestSuite& value);
void to_json(nlohmann::json& j, const TestSuiteSummary& value);
void from_json(const nlohmann::json& j, TestSuiteSummary& value);

}  // namespace specforge::pathcrawler
