#include "specforge/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace specforge {

namespace {

struct KindName {
    AnnotationKind::Tag tag;
    std::string_view keyword;
};

constexpr std::array<KindName, 11> kKindNames = {{
    {AnnotationKind::Tag::Requires, "requires"},
    {AnnotationKind::Tag::Ensures, "ensures"},
    {AnnotationKind::Tag::Assigns, "assigns"},
    {AnnotationKind::Tag::Assert, "assert"},
    {AnnotationKind::Tag::LoopInvariant, "loop invariant"},
    {AnnotationKind::Tag::LoopAssigns, "loop assigns"},
    {AnnotationKind::Tag::LoopVariant, "loop variant"},
    {AnnotationKind::Tag::Behavior, "behavior"},
    {AnnotationKind::Tag::Assumes, "assumes"},
    {AnnotationKind::Tag::Predicate, "predicate"},
    {AnnotationKind::Tag::Ghost, "ghost"},
}};

constexpr std::string_view kOtherPrefix = "other:";

}  // namespace

std::string_view to_string(PromptVariant variant)
{
    switch (variant) {
    case PromptVariant::Baseline:
        return "baseline";
    case PromptVariant::Pathcrawler:
        return "pathcrawler";
    case PromptVariant::Eva:
        return "eva";
    }
    return "baseline";
}

PromptVariant parse_variant(std::string_view text)
{
    for (auto variant : kAllVariants) {
        if (to_string(variant) == text) {
            return variant;
        }
    }
    throw ConfigError("unknown prompt variant '" + std::string(text) + "'");
}

std::vector<PromptVariant> parse_variant_list(std::string_view text)
{
    std::vector<PromptVariant> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            auto variant = parse_variant(item);
            if (std::find(out.begin(), out.end(), variant) == out.end()) {
                out.push_back(variant);
            }
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (out.empty()) {
        throw ConfigError("empty prompt variant list");
    }
    std::sort(out.begin(), out.end());
    return out;
}

AnnotationKind AnnotationKind::other(std::string raw_keyword)
{
    AnnotationKind kind(Tag::Other);
    kind.raw_ = std::move(raw_keyword);
    return kind;
}

AnnotationKind AnnotationKind::from_keyword(std::string_view keyword)
{
    for (const auto& entry : kKindNames) {
        if (entry.keyword == keyword) {
            return AnnotationKind(entry.tag);
        }
    }
    return other(std::string(keyword));
}

bool AnnotationKind::is_loop_kind() const
{
    return tag_ == Tag::LoopInvariant || tag_ == Tag::LoopAssigns || tag_ == Tag::LoopVariant;
}

std::string AnnotationKind::keyword() const
{
    if (tag_ == Tag::Other) {
        return raw_;
    }
    for (const auto& entry : kKindNames) {
        if (entry.tag == tag_) {
            return std::string(entry.keyword);
        }
    }
    return raw_;
}

std::string AnnotationKind::id() const
{
    if (tag_ == Tag::Other) {
        return std::string(kOtherPrefix) + raw_;
    }
    return keyword();
}

AnnotationKind AnnotationKind::from_id(std::string_view id)
{
    if (id.starts_with(kOtherPrefix)) {
        return other(std::string(id.substr(kOtherPrefix.size())));
    }
    for (const auto& entry : kKindNames) {
        if (entry.keyword == id) {
            return AnnotationKind(entry.tag);
        }
    }
    throw Error("unknown annotation kind id '" + std::string(id) + "'");
}

const std::vector<AnnotationKind>& known_annotation_kinds()
{
    static const std::vector<AnnotationKind> kinds = [] {
        std::vector<AnnotationKind> out;
        for (const auto& entry : kKindNames) {
            out.emplace_back(entry.tag);
        }
        return out;
    }();
    return kinds;
}

void GenerationConfig::validate() const
{
    if (model_id.empty()) {
        throw ConfigError("model_id must not be empty");
    }
    if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
        throw ConfigError("temperature must lie in [0, 2]");
    }
    if (samples_per_program < 1) {
        throw ConfigError("samples_per_program must be positive");
    }
    if (max_output_tokens < 1) {
        throw ConfigError("max_output_tokens must be positive");
    }
}

std::string canonical_dump(const nlohmann::json& value)
{
    return value.dump(2) + "\n";
}

void to_json(nlohmann::json& j, const MutantOrigin& value)
{
    j = nlohmann::json{{"parent_name", value.parent_name}, {"mutation_id", value.mutation_id}};
}

void from_json(const nlohmann::json& j, MutantOrigin& value)
{
    j.at("parent_name").get_to(value.parent_name);
    j.at("mutation_id").get_to(value.mutation_id);
}

void to_json(nlohmann::json& j, const SourceProgram& value)
{
    j = nlohmann::json{{"name", value.name}, {"source", value.source}};
    j["entry_function"] = value.entry_function ? nlohmann::json(*value.entry_function)
                                               : nlohmann::json(nullptr);
    if (value.mutant_of) {
        j["origin"] = nlohmann::json{{"kind", "mutant"}, {"mutant", *value.mutant_of}};
    } else {
        j["origin"] = nlohmann::json{{"kind", "original"}};
    }
}

void from_json(const nlohmann::json& j, SourceProgram& value)
{
    j.at("name").get_to(value.name);
    j.at("source").get_to(value.source);
    value.entry_function.reset();
    if (auto it = j.find("entry_function"); it != j.end() && !it->is_null()) {
        value.entry_function = it->get<std::string>();
    }
    value.mutant_of.reset();
    if (auto it = j.find("origin"); it != j.end() && it->value("kind", "original") == "mutant") {
        value.mutant_of = it->at("mutant").get<MutantOrigin>();
    }
}

void to_json(nlohmann::json& j, PromptVariant value)
{
    j = std::string(to_string(value));
}

void from_json(const nlohmann::json& j, PromptVariant& value)
{
    value = parse_variant(j.get<std::string>());
}

void to_json(nlohmann::json& j, const AnnotationKind& value)
{
    j = value.id();
}

void from_json(const nlohmann::json& j, AnnotationKind& value)
{
    value = AnnotationKind::from_id(j.get<std::string>());
}

void to_json(nlohmann::json& j, const GenerationConfig& value)
{
    j = nlohmann::json{{"model_id", value.model_id},
                       {"temperature", value.temperature},
                       {"samples_per_program", value.samples_per_program},
                       {"max_output_tokens", value.max_output_tokens}};
}

void from_json(const nlohmann::json& j, GenerationConfig& value)
{
    GenerationConfig defaults;
    value.model_id = j.value("model_id", defaults.model_id);
    value.temperature = j.value("temperature", defaults.temperature);
    value.samples_per_program = j.value("samples_per_program", defaults.samples_per_program);
    value.max_output_tokens = j.value("max_output_tokens", defaults.max_output_tokens);
}

}  // namespace specforge
