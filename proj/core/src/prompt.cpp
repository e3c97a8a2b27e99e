#include "specforge/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "specforge/digest.hpp"

namespace specforge::prompt {

namespace {

constexpr std::string_view kProgram = "program";
constexpr std::string_view kCsv = "csv";
constexpr std::string_view kEva = "eva";
constexpr std::string_view kValidAssigns = "valid_assigns";
constexpr std::string_view kInvalidAssigns = "invalid_assigns";

bool is_known(std::string_view name)
{
    return name == kProgram || name == kCsv || name == kEva || name == kValidAssigns ||
           name == kInvalidAssigns;
}

struct Slot {
    std::size_t begin;
    std::size_t end;
    std::string name;
};

// `{lowercase_name}` with no whitespace inside.
std::vector<Slot> find_slots(std::string_view text)
{
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) ||
                                   text[j] == '_' ||
                                   std::isdigit(static_cast<unsigned char>(text[j]))))
            ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            slots.push_back({i, j + 1, std::string(text.substr(i + 1, j - i - 1))});
            i = j;
        }
    }
    return slots;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string strip_final_newline(std::string text)
{
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
}

std::string braced(std::string_view name)
{
    return "{" + std::string(name) + "}";
}

}  // namespace

MissingTemplate::MissingTemplate(PromptVariant variant)
    : PromptError("missing prompt template for variant '" + std::string(to_string(variant)) +
                  "'"),
      variant_(variant)
{
}

PlaceholderMismatch::PlaceholderMismatch(PromptVariant variant, std::string placeholder,
                                         std::string reason)
    : PromptError(std::string(to_string(variant)) + " template: " + placeholder + " " + reason),
      variant_(variant),
      placeholder_(std::move(placeholder))
{
}

MissingContext::MissingContext(PromptVariant variant)
    : PromptError("variant '" + std::string(to_string(variant)) +
                  "' requires symbolic context that is absent"),
      variant_(variant)
{
}

UnresolvedPlaceholder::UnresolvedPlaceholder(std::string name)
    : PromptError("placeholder {" + name + "} has no value"), name_(std::move(name))
{
}

std::string_view to_string(PromptWarning warning)
{
    switch (warning) {
    case PromptWarning::StateMutation:
        return "state_mutation";
    }
    return "state_mutation";
}

std::vector<std::string> placeholders_in(std::string_view text)
{
    std::vector<std::string> names;
    for (auto& slot : find_slots(text)) names.push_back(std::move(slot.name));
    return names;
}

void PromptTemplate::validate() const
{
    const auto names = placeholders_in(body);
    auto has = [&](std::string_view n) {
        return std::find(names.begin(), names.end(), n) != names.end();
    };
    for (const auto& name : names) {
        if (!is_known(name)) {
            throw PlaceholderMismatch(variant, braced(name), "is not a known placeholder");
        }
    }
    if (!has(kProgram)) {
        throw PlaceholderMismatch(variant, braced(kProgram), "is required");
    }
    const bool wants_csv = variant == PromptVariant::Pathcrawler;
    const bool wants_eva = variant == PromptVariant::Eva;
    if (has(kCsv) != wants_csv) {
        throw PlaceholderMismatch(variant, braced(kCsv), wants_csv ? "is required" : "is not allowed");
    }
    if (has(kEva) != wants_eva) {
        throw PlaceholderMismatch(variant, braced(kEva), wants_eva ? "is required" : "is not allowed");
    }
    if (body.find("START OF INPUT") == std::string::npos) {
        throw PlaceholderMismatch(variant, braced(kProgram),
                                  "must sit in a START OF INPUT section");
    }
}

std::map<PromptVariant, PromptTemplate> load_templates(const std::filesystem::path& directory)
{
    std::map<std::string, std::string> snippets;
    for (auto name : {kValidAssigns, kInvalidAssigns}) {
        auto path = directory / "snippets" / (std::string(name) + ".c");
        if (std::filesystem::is_regular_file(path)) {
            snippets[std::string(name)] = strip_final_newline(read_file(path));
        }
    }

    std::map<PromptVariant, PromptTemplate> templates;
    for (auto variant : kAllVariants) {
        auto path = directory / (std::string(to_string(variant)) + ".txt");
        if (!std::filesystem::is_regular_file(path)) {
            throw MissingTemplate(variant);
        }
        PromptTemplate tmpl;
        tmpl.variant = variant;
        tmpl.body = read_file(path);
        tmpl.snippets = snippets;
        tmpl.validate();
        templates.emplace(variant, std::move(tmpl));
    }
    return templates;
}

BuiltPrompt build_prompt(const PromptTemplate& tmpl, const SourceProgram& program,
                         const pathcrawler::TestSuite* suite, const eva::EvaReport* report)
{
    BuiltPrompt built;
    built.variant = tmpl.variant;
    built.program_name = program.name;

    std::map<std::string, std::string, std::less<>> values = {{std::string(kProgram), program.source}};
    for (const auto& [name, text] : tmpl.snippets) values[name] = text;

    std::string context;
    if (tmpl.variant == PromptVariant::Pathcrawler) {
        if (!suite) throw MissingContext(tmpl.variant);
        context = pathcrawler::render_csv(*suite);
        values[std::string(kCsv)] = context;
        if (!pathcrawler::summarize(*suite).has_output) {
            built.warnings.push_back(PromptWarning::StateMutation);
        }
    } else if (tmpl.variant == PromptVariant::Eva) {
        if (!report) throw MissingContext(tmpl.variant);
        context = report->raw;
        values[std::string(kEva)] = context;
    }

    // Single left-to-right pass: substituted text is never rescanned.
    std::string text;
    text.reserve(tmpl.body.size() + program.source.size() + context.size());
    std::size_t copied = 0;
    for (const auto& slot : find_slots(tmpl.body)) {
        auto it = values.find(slot.name);
        if (it == values.end()) {
            throw UnresolvedPlaceholder(slot.name);
        }
        text.append(tmpl.body, copied, slot.begin - copied);
        text.append(it->second);
        copied = slot.end;
    }
    text.append(tmpl.body, copied, std::string::npos);

    built.text = std::move(text);
    if (tmpl.variant != PromptVariant::Baseline) {
        built.context_digest = sha256_hex(context);
    }
    return built;
}

void to_json(nlohmann::json& j, const BuiltPrompt& value)
{
    std::vector<std::string> warnings;
    for (auto w : value.warnings) warnings.emplace_back(to_string(w));
    j = nlohmann::json{{"variant", value.variant},
                       {"text", value.text},
                       {"program_name", value.program_name},
                       {"context_digest", value.context_digest},
                       {"warnings", warnings}};
}

void from_json(const nlohmann::json& j, BuiltPrompt& value)
{
    j.at("variant").get_to(value.variant);
    j.at("text").get_to(value.text);
    j.at("program_name").get_to(value.program_name);
    j.at("context_digest").get_to(value.context_digest);
    value.warnings.clear();
    for (const auto& w : j.value("warnings", nlohmann::json::array())) {
        if (w.get<std::string>() == to_string(PromptWarning::StateMutation)) {
            value.warnings.push_back(PromptWarning::StateMutation);
        }
    }
}

}  // namespace specforge::prompt
