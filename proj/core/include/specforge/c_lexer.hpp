#pragma once

// Comment-preserving lexer for C sources and ACSL clause bodies. It recognizes
// enough of the lexical grammar to compare token streams; it is not a parser.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/model.hpp"

namespace specforge::lex {

enum class TokenKind { Identifier, Keyword, Number, String, Char, Punct, Comment, Directive };

struct Token {
    TokenKind kind = TokenKind::Punct;
    std::string text;
    int line = 1;
    std::size_t offset = 0;
    /// Comments only: `/*@ ... */` or `//@ ...`.
    bool annotation = false;
    /// Comments only: block (`/* */`) rather than line (`//`) comment.
    bool block = false;

    std::size_t end() const { return offset + text.size(); }
    bool is_code() const { return kind != TokenKind::Comment; }
    bool is(std::string_view spelling) const { return is_code() && text == spelling; }

    bool operator==(const Token&) const = default;
};

class LexError : public Error {
public:
    enum class Kind { UnterminatedComment, UnterminatedLiteral };

    LexError(Kind kind, int line);

    Kind kind() const { return kind_; }
    int line() const { return line_; }

private:
    Kind kind_;
    int line_;
};

struct LexOptions {
    /// ACSL mode: `\ident` builtins, `==>`, `<==>`, `..` and `^^` punctuators.
    bool acsl = false;
    /// First line number reported for the input.
    int first_line = 1;
};

std::vector<Token> tokenize(std::string_view source, const LexOptions& options = {});

/// tokenize() with comments dropped.
std::vector<Token> code_tokens(std::string_view source, const LexOptions& options = {});

bool is_c_keyword(std::string_view word);

}  // namespace specforge::lex
