#pragma once

// Shared domain vocabulary: programs, prompt variants, annotation kinds and
// generation settings. Every type has a canonical JSON encoding.

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace specforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad flag values, missing backend or templates).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct MutantOrigin {
    std::string parent_name;
    std::string mutation_id;

    bool operator==(const MutantOrigin&) const = default;
};

struct SourceProgram {
    std::string name;
    std::string source;
    std::optional<std::string> entry_function;
    /// Empty for original programs.
    std::optional<MutantOrigin> mutant_of;

    bool is_mutant() const { return mutant_of.has_value(); }

    bool operator==(const SourceProgram&) const = default;
};

enum class PromptVariant { Baseline, Pathcrawler, Eva };

inline constexpr PromptVariant kAllVariants[] = {
    PromptVariant::Baseline, PromptVariant::Pathcrawler, PromptVariant::Eva};

std::string_view to_string(PromptVariant variant);
/// Accepts the lowercase names used on the command line and in file paths.
PromptVariant parse_variant(std::string_view text);
/// Parses a comma separated list such as "baseline,eva". Duplicates collapse.
std::vector<PromptVariant> parse_variant_list(std::string_view text);

/// Classification of one ACSL clause by its leading keyword.
class AnnotationKind {
public:
    enum class Tag {
        Requires,
        Ensures,
        Assigns,
        Assert,
        LoopInvariant,
        LoopAssigns,
        LoopVariant,
        Behavior,
        Assumes,
        Predicate,
        Ghost,
        Other,
    };

    AnnotationKind() = default;
    explicit AnnotationKind(Tag tag) : tag_(tag) {}

    static AnnotationKind other(std::string raw_keyword);
    /// Total classification of a clause keyword ("loop invariant", "requires",
    /// ...). Unknown keywords become Other carrying the keyword verbatim.
    static AnnotationKind from_keyword(std::string_view keyword);

    Tag tag() const { return tag_; }
    const std::string& raw() const { return raw_; }
    bool is_loop_kind() const;

    /// ACSL spelling of the kind; Other yields its raw keyword.
    std::string keyword() const;
    /// Stable identifier used in JSON and CSV ("loop invariant", "other:decreases").
    std::string id() const;
    static AnnotationKind from_id(std::string_view id);

    auto operator<=>(const AnnotationKind&) const = default;

private:
    Tag tag_ = Tag::Other;
    std::string raw_;
};

/// The eleven named kinds in census order (Other excluded).
const std::vector<AnnotationKind>& known_annotation_kinds();

struct GenerationConfig {
    std::string model_id = "gpt-4-0125-preview";
    double temperature = 0.7;
    int samples_per_program = 3;
    int max_output_tokens = 4096;

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    bool operator==(const GenerationConfig&) const = default;
};

/// Two-space indented dump with a trailing newline. nlohmann::json keeps
/// object keys sorted, so equal values always serialize to equal bytes.
std::string canonical_dump(const nlohmann::json& value);

void to_json(nlohmann::json& j, const MutantOrigin& value);
void from_json(const nlohmann::json& j, MutantOrigin& value);
void to_json(nlohmann::json& j, const SourceProgram& value);
void from_json(const nlohmann::json& j, SourceProgram& value);
void to_json(nlohmann::json& j, PromptVariant value);
void from_json(const nlohmann::json& j, PromptVariant& value);
void to_json(nlohmann::json& j, const AnnotationKind& value);
void from_json(const nlohmann::json& j, AnnotationKind& value);
void to_json(nlohmann::json& j, const GenerationConfig& value);
void from_json(const nlohmann::json& j, GenerationConfig& value);

}  // namespace specforge
