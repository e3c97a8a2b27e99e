#pragma once

// Prompt templates are plain text files with {placeholder} slots:
//
//   templates/baseline.txt     {program} {valid_assigns} {invalid_assigns}
//   templates/pathcrawler.txt  ... plus {csv}
//   templates/eva.txt          ... plus {eva}
//   templates/snippets/valid_assigns.c, templates/snippets/invalid_assigns.c

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/eva.hpp"
#include "specforge/model.hpp"
#include "specforge/pathcrawler.hpp"

namespace specforge::prompt {

class PromptError : public Error {
public:
    using Error::Error;
};

class MissingTemplate : public PromptError {
public:
    explicit MissingTemplate(PromptVariant variant);
    PromptVariant variant() const { return variant_; }

private:
    PromptVariant variant_;
};

class PlaceholderMismatch : public PromptError {
public:
    PlaceholderMismatch(PromptVariant variant, std::string placeholder, std::string reason);
    PromptVariant variant() const { return variant_; }
    const std::string& placeholder() const { return placeholder_; }

private:
    PromptVariant variant_;
    std::string placeholder_;
};

class MissingContext : public PromptError {
public:
    explicit MissingContext(PromptVariant variant);
    PromptVariant variant() const { return variant_; }

private:
    PromptVariant variant_;
};

class UnresolvedPlaceholder : public PromptError {
public:
    explicit UnresolvedPlaceholder(std::string name);
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

struct PromptTemplate {
    PromptVariant variant = PromptVariant::Baseline;
    std::string body;
    /// Few-shot snippet texts keyed by placeholder name ("valid_assigns").
    std::map<std::string, std::string> snippets;

    /// Verifies the per-variant placeholder rules; throws PlaceholderMismatch.
    void validate() const;
};

enum class PromptWarning { StateMutation };

std::string_view to_string(PromptWarning warning);

struct BuiltPrompt {
    PromptVariant variant = PromptVariant::Baseline;
    std::string text;
    std::string program_name;
    /// SHA-256 of the substituted symbolic context; empty for Baseline.
    std::string context_digest;
    std::vector<PromptWarning> warnings;

    bool operator==(const BuiltPrompt&) const = default;
};

/// `{name}` tokens in order of appearance.
std::vector<std::string> placeholders_in(std::string_view text);

std::map<PromptVariant, PromptTemplate> load_templates(const std::filesystem::path& directory);

/// suite is required for Pathcrawler, report for Eva; both are ignored by the
/// variants that do not use them.
BuiltPrompt build_prompt(const PromptTemplate& tmpl, const SourceProgram& program,
                         const pathcrawler::TestSuite* suite, const eva::EvaReport* report);

void to_json(nlohmann::json& j, const BuiltPrompt& value);
void from_json(const nlohmann::json& j, BuiltPrompt& value);

}  // namespace specforge::prompt
