#pragma once

// Working with LLM responses and ACSL-annotated C: pick the code fence out of
// a response, classify annotation clauses, strip them again, check that the
// C tokens survived untouched, lint a few placement rules and compare specs.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/model.hpp"

namespace specforge::acsl {

class NoCodeFence : public Error {
public:
    NoCodeFence() : Error("response contains no fenced code block") {}
};

struct SplitResponse {
    /// Response text with every fenced block removed.
    std::string reasoning;
    /// Content of the selected fence, without the fence lines.
    std::string code;
    /// Info string of the selected fence ("c" or empty).
    std::string fence_tag;

    bool operator==(const SplitResponse&) const = default;
};

/// Picks the longest ```c fence (ties: last one wins), else the longest
/// untagged fence. Throws NoCodeFence when neither exists.
SplitResponse split_response(std::string_view response_text);

enum class EnclosingKind { FunctionContract, LoopAnnotation, Statement, BehaviorBody };

struct Enclosing {
    EnclosingKind kind = EnclosingKind::FunctionContract;
    /// Behavior name when kind is BehaviorBody.
    std::string behavior;

    bool operator==(const Enclosing&) const = default;
};

struct Annotation {
    AnnotationKind kind;
    /// Clause body after the keyword, trimmed, whitespace runs collapsed.
    std::string clause_text;
    bool block_style = true;
    int line = 1;
    Enclosing enclosing;

    bool operator==(const Annotation&) const = default;
};

/// One Annotation per clause keyword of every `/*@ */` block and `//@` line,
/// in source order. Behavior headers count once; the clauses nested in a
/// behavior are reported under their own kinds with a BehaviorBody enclosing.
/// Throws lex::LexError on an unterminated comment or literal.
std::vector<Annotation> parse_annotations(std::string_view code);

/// Kind -> count. Absent kinds read as zero.
class Histogram {
public:
    void add(const AnnotationKind& kind, long count = 1);
    long count(const AnnotationKind& kind) const;
    long total() const;
    bool empty() const { return total() == 0; }

    Histogram& operator+=(const Histogram& other);
    friend Histogram operator+(Histogram lhs, const Histogram& rhs) { return lhs += rhs; }

    /// Copy with loop assigns folded into assigns.
    Histogram merged_loop_assigns() const;

    /// Non-zero entries in census order (named kinds first, then Other by keyword).
    const std::map<AnnotationKind, long>& entries() const { return counts_; }

    /// "kind,count" rows with a header line; every named kind is listed.
    std::string to_csv() const;

    bool operator==(const Histogram&) const = default;

private:
    std::map<AnnotationKind, long> counts_;
};

Histogram count_by_kind(std::span<const Annotation> annotations);

/// Removes every ACSL comment. Lines holding nothing but an annotation are
/// dropped entirely; whitespace left trailing on a line is trimmed; all other
/// text is kept.
std::string strip_annotations(std::string_view code);

struct DiffHunk {
    /// Line in the original program (for pure insertions: the line of the
    /// next original token).
    int line = 1;
    /// Line of the first modified token in the annotated code.
    int modified_line = 1;
    std::string original;
    std::string modified;

    bool operator==(const DiffHunk&) const = default;
};

struct PreservationVerdict {
    bool preserved = true;
    std::vector<DiffHunk> diff;

    bool operator==(const PreservationVerdict&) const = default;
};

/// Compares the non-comment token streams of the original program and the
/// annotated code. At most max_hunks mismatching runs are reported.
PreservationVerdict check_code_preserved(const SourceProgram& original,
                                         std::string_view annotated_code,
                                         std::size_t max_hunks = 10);

enum class LintRule { VariantBeforeAssigns, AssignsOutOfScope, BlockStyleInBody };

struct LintIssue {
    LintRule rule = LintRule::VariantBeforeAssigns;
    int line = 1;
    std::string detail;

    bool operator==(const LintIssue&) const = default;
};

std::string_view to_string(LintRule rule);

std::vector<LintIssue> lint(std::string_view code);

/// "keyword clause text" with whitespace collapsed.
std::string normalized_clause(const Annotation& annotation);

/// Multiset Jaccard index over normalized clauses; 1.0 when both are empty.
double spec_similarity(std::span<const Annotation> a, std::span<const Annotation> b);

void to_json(nlohmann::json& j, const SplitResponse& value);
void from_json(const nlohmann::json& j, SplitResponse& value);
void to_json(nlohmann::json& j, const Enclosing& value);
void from_json(const nlohmann::json& j, Enclosing& value);
void to_json(nlohmann::json& j, const Annotation& value);
void from_json(const nlohmann::json& j, Annotation& value);
void to_json(nlohmann::json& j, const Histogram& value);
void from_json(const nlohmann::json& j, Histogram& value);
void to_json(nlohmann::json& j, const DiffHunk& value);
void from_json(const nlohmann::json& j, DiffHunk& value);
void to_json(nlohmann::json& j, const PreservationVerdict& value);
void from_json(const nlohmann::json& j, PreservationVerdict& value);
void to_json(nlohmann::json& j, const LintIssue& value);
void from_json(const nlohmann::json& j, LintIssue& value);

}  // namespace specforge::acsl
