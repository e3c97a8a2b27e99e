#include "specforge/pathcrawler.hpp"

#include <algorithm>

namespace specforge::pathcrawler {

namespace {

std::vector<std::string> split_fields(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::vector<std::string_view> split_lines(std::string_view raw, std::string_view ending,
                                          bool& trailing_newline)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < raw.size()) {
        auto at = raw.find(ending, start);
        if (at == std::string_view::npos) {
            lines.push_back(raw.substr(start));
            trailing_newline = false;
            return lines;
        }
        lines.push_back(raw.substr(start, at - start));
        start = at + ending.size();
    }
    trailing_newline = !raw.empty();
    return lines;
}

}  // namespace

RowArity::RowArity(std::size_t row_index, std::size_t expected, std::size_t actual)
    : CsvError("row " + std::to_string(row_index) + " has " + std::to_string(actual) +
               " fields, header has " + std::to_string(expected)),
      row_index_(row_index)
{
}

std::vector<std::string> TestSuite::input_columns() const
{
    if (columns.size() < 2) return {};
    return {columns.begin(), columns.end() - 2};
}

TestSuite parse_test_csv(std::string_view raw)
{
    TestSuite suite;
    suite.raw = std::string(raw);
    suite.line_ending = raw.find("\r\n") != std::string_view::npos ? "\r\n" : "\n";

    auto lines = split_lines(raw, suite.line_ending, suite.trailing_newline);
    if (lines.empty() || lines.front().empty()) {
        throw MalformedHeader("missing CSV header line");
    }
    if (lines.front().find('"') != std::string_view::npos) {
        throw MalformedHeader("quoted header fields are not supported");
    }
    suite.columns = split_fields(lines.front());
    const auto& cols = suite.columns;
    if (cols.size() < 2 || cols[cols.size() - 2] != "output" || cols.back() != "verdict") {
        throw MalformedHeader("header must end with output,verdict");
    }
    for (std::size_t i = 0; i + 2 < cols.size(); ++i) {
        if (!cols[i].starts_with("input_")) {
            throw MalformedHeader("column '" + cols[i] + "' is not an input_* column");
        }
    }

    const std::size_t arity = cols.size();
    for (std::size_t row = 1; row < lines.size(); ++row) {
        auto fields = split_fields(lines[row]);
        if (fields.size() != arity || lines[row].find('"') != std::string_view::npos) {
            throw RowArity(row - 1, arity, fields.size());
        }
        TestCase tc;
        for (std::size_t i = 0; i + 2 < arity; ++i) {
            tc.inputs.emplace_back(cols[i], std::move(fields[i]));
        }
        tc.output = std::move(fields[arity - 2]);
        tc.verdict = std::move(fields[arity - 1]);
        suite.cases.push_back(std::move(tc));
    }
    return suite;
}

TestSuiteSummary summarize(const TestSuite& suite)
{
    TestSuiteSummary summary;
    summary.case_count = suite.cases.size();
    summary.input_columns = suite.input_columns();
    for (const auto& column : summary.input_columns) {
        summary.distinct_values_per_input[column];
    }
    for (const auto& tc : suite.cases) {
        summary.distinct_verdicts.insert(tc.verdict);
        if (!tc.output.empty()) {
            summary.has_output = true;
        }
        for (const auto& [column, value] : tc.inputs) {
            summary.distinct_values_per_input[column].insert(value);
        }
    }
    return summary;
}

std::string render_csv(const TestSuite& suite)
{
    auto join = [](const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ',';
            line += fields[i];
        }
        return line;
    };

    std::string out = join(suite.columns);
    for (const auto& tc : suite.cases) {
        std::vector<std::string> fields;
        fields.reserve(tc.inputs.size() + 2);
        for (const auto& input : tc.inputs) fields.push_back(input.second);
        fields.push_back(tc.output);
        fields.push_back(tc.verdict);
        out += suite.line_ending;
        out += join(fields);
    }
    if (suite.trailing_newline) {
        out += suite.line_ending;
    }
    return out;
}

void to_json(nlohmann::json& j, const TestCase& value)
{
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [column, field] : value.inputs) {
        inputs.push_back(nlohmann::json{{"column", column}, {"value", field}});
    }
    j = nlohmann::json{{"inputs", inputs}, {"output", value.output}, {"verdict", value.verdict}};
}

void from_json(const nlohmann::json& j, TestCase& value)
{
    value.inputs.clear();
    for (const auto& input : j.at("inputs")) {
        value.inputs.emplace_back(input.at("column").get<std::string>(),
                                  input.at("value").get<std::string>());
    }
    j.at("output").get_to(value.output);
    j.at("verdict").get_to(value.verdict);
}

void to_json(nlohmann::json& j, const TestSuite& value)
{
    j = nlohmann::json{{"columns", value.columns},
                       {"cases", value.cases},
                       {"raw", value.raw},
                       {"line_ending", value.line_ending},
                       {"trailing_newline", value.trailing_newline}};
}

void from_json(const nlohmann::json& j, TestSuite& value)
{
    j.at("columns").get_to(value.columns);
    j.at("cases").get_to(value.cases);
    j.at("raw").get_to(value.raw);
    value.line_ending = j.value("line_ending", std::string("\n"));
    value.trailing_newline = j.value("trailing_newline", false);
}

void to_json(nlohmann::json& j, const TestSuiteSummary& value)
{
    j = nlohmann::json{{"case_count", value.case_count},
                       {"input_columns", value.input_columns},
                       {"distinct_verdicts", value.distinct_verdicts},
                       {"has_output", value.has_output},
                       {"distinct_values_per_input", value.distinct_values_per_input}};
}

void from_json(const nlohmann::json& j, TestSuiteSummary& value)
{
    j.at("case_count").get_to(value.case_count);
    j.at("input_columns").get_to(value.input_columns);
    j.at("distinct_verdicts").get_to(value.distinct_verdicts);
    j.at("has_output").get_to(value.has_output);
    j.at("distinct_values_per_input").get_to(value.distinct_values_per_input);
}

}  // namespace specforge::pathcrawler
