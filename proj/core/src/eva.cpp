#include "specforge/eva.hpp"

#include <regex>

namespace specforge::eva {

namespace {

std::string_view trim(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    return text;
}

std::vector<std::string_view> lines_of(std::string_view raw)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= raw.size()) {
        auto nl = raw.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < raw.size()) lines.push_back(raw.substr(start));
            break;
        }
        lines.push_back(raw.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

// "signed overflow. assert x + y <= 2147483647;" -> kind text + assertion.
void split_alarm_message(std::string_view message, EvaAlarm& alarm)
{
    message = trim(message);
    auto at = message.find(". assert ");
    std::string_view kind_text = message;
    std::string_view assertion;
    if (at != std::string_view::npos) {
        kind_text = message.substr(0, at);
        assertion = message.substr(at + 9);
    } else if (message.starts_with("assert ")) {
        kind_text = {};
        assertion = message.substr(7);
    } else if (!kind_text.empty() && kind_text.back() == '.') {
        kind_text.remove_suffix(1);
    }
    assertion = trim(assertion);
    if (!assertion.empty() && assertion.back() == ';') {
        assertion.remove_suffix(1);
        assertion = trim(assertion);
    }
    alarm.kind_text = std::string(trim(kind_text));
    alarm.kind = classify_alarm(alarm.kind_text);
    alarm.assertion = std::string(assertion);
}

}  // namespace

std::string_view to_string(AlarmKind kind)
{
    switch (kind) {
    case AlarmKind::SignedOverflow:
        return "signed_overflow";
    case AlarmKind::OutOfBoundsWrite:
        return "out_of_bounds_write";
    case AlarmKind::OutOfBoundsRead:
        return "out_of_bounds_read";
    case AlarmKind::DivisionByZero:
        return "division_by_zero";
    case AlarmKind::Other:
        return "other";
    }
    return "other";
}

AlarmKind classify_alarm(std::string_view kind_text)
{
    if (kind_text == "signed overflow") return AlarmKind::SignedOverflow;
    if (kind_text == "out of bounds write") return AlarmKind::OutOfBoundsWrite;
    if (kind_text == "out of bounds read") return AlarmKind::OutOfBoundsRead;
    if (kind_text == "division by zero") return AlarmKind::DivisionByZero;
    return AlarmKind::Other;
}

EvaReport parse_eva_report(std::string_view raw)
{
    static const std::regex alarm_re(R"(^\[eva:alarm\]\s+(.+?):(\d+):\s*Warning:?\s*(.*)$)");
    static const std::regex domain_re(R"(^\s+(\S+)\s+(?:in|∈|=)\s+(.*\S)\s*$)");
    static const std::regex function_re(R"(Values at end of function\s+([A-Za-z_]\w*))");
    static const std::regex summary_re(R"(^\s*(\d+)\s+alarms?\s+generated by the analysis)");
    static const std::regex kernel_re(R"(by the Frama-C kernel:\s+(\d+)\s+errors?\s+(\d+)\s+warnings?)");

    EvaReport report;
    report.raw = std::string(raw);
    const auto lines = lines_of(raw);

    bool in_values = false;
    std::string current_function;
    std::match_results<std::string_view::const_iterator> m;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        const auto trimmed = trim(line);

        if (line.starts_with("[")) {
            in_values = false;
            if (line.starts_with("[kernel") && line.find("Warning") != std::string_view::npos) {
                ++report.kernel_warning_lines;
            }
            if (line.starts_with("[eva:alarm]")) {
                EvaAlarm alarm;
                alarm.line = 0;
                std::string_view message;
                if (std::regex_search(line.begin(), line.end(), m, alarm_re)) {
                    alarm.file = m[1].str();
                    alarm.line = std::stoi(m[2].str());
                    message = line.substr(static_cast<std::size_t>(m.position(3)),
                                          static_cast<std::size_t>(m.length(3)));
                }
                if (trim(message).empty() && i + 1 < lines.size() &&
                    !lines[i + 1].starts_with("[")) {
                    message = lines[++i];
                }
                split_alarm_message(message, alarm);
                report.alarms.push_back(std::move(alarm));
                continue;
            }
            if (line.find("VALUES COMPUTED") != std::string_view::npos) {
                in_values = true;
            }
            if (std::regex_search(line.begin(), line.end(), m, function_re)) {
                in_values = true;
                current_function = m[1].str();
            }
            continue;
        }

        if (std::regex_search(line.begin(), line.end(), m, summary_re)) {
            report.summary_alarm_count = std::stoi(m[1].str());
            continue;
        }
        if (std::regex_search(line.begin(), line.end(), m, kernel_re)) {
            report.warnings_kernel = std::stoi(m[2].str());
            continue;
        }
        if (in_values && !trimmed.empty() &&
            std::regex_match(line.begin(), line.end(), m, domain_re)) {
            report.domains.push_back(ValueDomain{m[1].str(), m[2].str(), current_function});
        }
    }
    return report;
}

std::vector<Discrepancy> consistency_check(const EvaReport& report)
{
    if (!report.summary_alarm_count) {
        return {};
    }
    const int parsed = static_cast<int>(report.alarms.size());
    if (*report.summary_alarm_count == parsed) {
        return {};
    }
    return {Discrepancy{*report.summary_alarm_count, parsed,
                        "summary reports " + std::to_string(*report.summary_alarm_count) +
                            " alarms but " + std::to_string(parsed) + " alarm lines were parsed"}};
}

void to_json(nlohmann::json& j, const EvaAlarm& value)
{
    j = nlohmann::json{{"file", value.file},
                       {"line", value.line},
                       {"kind", to_string(value.kind)},
                       {"kind_text", value.kind_text},
                       {"assertion", value.assertion}};
}

void from_json(const nlohmann::json& j, EvaAlarm& value)
{
    j.at("file").get_to(value.file);
    j.at("line").get_to(value.line);
    j.at("kind_text").get_to(value.kind_text);
    j.at("assertion").get_to(value.assertion);
    value.kind = classify_alarm(value.kind_text);
}

void to_json(nlohmann::json& j, const ValueDomain& value)
{
    j = nlohmann::json{
        {"variable", value.variable}, {"domain", value.domain}, {"function", value.function}};
}

void from_json(const nlohmann::json& j, ValueDomain& value)
{
    j.at("variable").get_to(value.variable);
    j.at("domain").get_to(value.domain);
    value.function = j.value("function", std::string());
}

void to_json(nlohmann::json& j, const EvaReport& value)
{
    j = nlohmann::json{{"alarms", value.alarms},
                       {"domains", value.domains},
                       {"kernel_warning_lines", value.kernel_warning_lines},
                       {"raw", value.raw}};
    j["summary_alarm_count"] =
        value.summary_alarm_count ? nlohmann::json(*value.summary_alarm_count) : nlohmann::json();
    j["warnings_kernel"] =
        value.warnings_kernel ? nlohmann::json(*value.warnings_kernel) : nlohmann::json();
}

void from_json(const nlohmann::json& j, EvaReport& value)
{
    j.at("alarms").get_to(value.alarms);
    j.at("domains").get_to(value.domains);
    j.at("raw").get_to(value.raw);
    value.kernel_warning_lines = j.value("kernel_warning_lines", 0);
    value.summary_alarm_count.reset();
    value.warnings_kernel.reset();
    if (auto it = j.find("summary_alarm_count"); it != j.end() && !it->is_null())
        value.summary_alarm_count = it->get<int>();
    if (auto it = j.find("warnings_kernel"); it != j.end() && !it->is_null())
        value.warnings_kernel = it->get<int>();
}

void to_json(nlohmann::json& j, const Discrepancy& value)
{
    j = nlohmann::json{
        {"expected", value.expected}, {"parsed", value.parsed}, {"message", value.message}};
}

}  // namespace specforge::eva
