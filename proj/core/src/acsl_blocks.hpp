#pragma once

// Internal: annotation comments located in their surrounding code.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/acsl.hpp"
#include "specforge/c_lexer.hpp"

namespace specforge::acsl::detail {

struct AnnotationBlock {
    lex::Token comment;
    std::vector<Annotation> clauses;
    /// Brace depth of the code at the comment.
    int brace_depth = 0;
    /// First code token after the comment, if any.
    std::optional<lex::Token> next_code;
    /// Index of next_code in the code-token vector (size() when absent).
    std::size_t next_code_index = 0;
};

struct AnalyzedCode {
    std::vector<lex::Token> tokens;
    std::vector<lex::Token> code;
    std::vector<AnnotationBlock> blocks;
};

AnalyzedCode analyze(std::string_view code);

/// Comment text with delimiters, `@` decoration and nested `//` comments
/// blanked out; byte offsets and line breaks are preserved.
std::string clean_annotation_body(std::string_view comment_text, bool block);

std::string collapse_whitespace(std::string_view text);

}  // namespace specforge::acsl::detail
