#include "specforge/c_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace specforge::lex {

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "auto",     "break",    "case",          "char",         "const",    "continue",
    "default",  "do",       "double",        "else",         "enum",     "extern",
    "float",    "for",      "goto",          "if",           "inline",   "int",
    "long",     "register", "restrict",      "return",       "short",    "signed",
    "sizeof",   "static",   "struct",        "switch",       "typedef",  "union",
    "unsigned", "void",     "volatile",      "while",        "_Alignas", "_Alignof",
    "_Atomic",  "_Bool",    "_Complex",      "_Generic",     "_Imaginary", "_Noreturn",
    "_Static_assert", "_Thread_local",
};

// Longest match first within each length class.
constexpr std::array<std::string_view, 23> kCPunct = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##",
};

constexpr std::array<std::string_view, 4> kAcslPunct = {"<==>", "==>", "..", "^^"};

bool is_ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
    Lexer(std::string_view src, const LexOptions& options)
        : src_(src), options_(options), line_(options.first_line)
    {
    }

    std::vector<Token> run()
    {
        std::vector<Token> out;
        bool line_start = true;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                line_start = true;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
                pos_ += 2;
                ++line_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                out.push_back(line_comment());
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                out.push_back(block_comment());
                continue;
            }
            if (c == '#' && line_start && !options_.acsl) {
                out.push_back(directive());
                continue;
            }
            line_start = false;
            if (is_ident_start(c) ||
                (options_.acsl && c == '\\' && is_ident_start(peek(1)))) {
                out.push_back(identifier());
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                out.push_back(number());
            } else if (c == '"' || c == '\'') {
                out.push_back(literal(c));
            } else {
                out.push_back(punct());
            }
        }
        return out;
    }

private:
    char peek(std::size_t ahead) const
    {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    Token make(TokenKind kind, std::size_t start, int line) const
    {
        Token token;
        token.kind = kind;
        token.offset = start;
        token.line = line;
        token.text = std::string(src_.substr(start, pos_ - start));
        return token;
    }

    Token line_comment()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        Token token = make(TokenKind::Comment, start, line_);
        token.annotation = token.text.size() > 2 && token.text[2] == '@';
        return token;
    }

    Token block_comment()
    {
        std::size_t start = pos_;
        int start_line = line_;
        auto close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
            throw LexError(LexError::Kind::UnterminatedComment, start_line);
        }
        line_ += static_cast<int>(std::count(src_.begin() + static_cast<long>(pos_),
                                             src_.begin() + static_cast<long>(close), '\n'));
        pos_ = close + 2;
        Token token = make(TokenKind::Comment, start, start_line);
        token.block = true;
        token.annotation = token.text.size() > 4 && token.text[2] == '@';
        return token;
    }

    // A directive runs to the end of the (continued) line; a trailing comment
    // is left for the comment scanner.
    Token directive()
    {
        std::size_t start = pos_;
        int start_line = line_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') break;
            if (c == '\\' && peek(1) == '\n') {
                pos_ += 2;
                ++line_;
                continue;
            }
            if (c == '/' && (peek(1) == '/' || peek(1) == '*')) break;
            if (c == '"') {
                skip_quoted(c, start_line);
                continue;
            }
            ++pos_;
        }
        std::size_t end = pos_;
        while (end > start && std::isspace(static_cast<unsigned char>(src_[end - 1]))) --end;
        Token token;
        token.kind = TokenKind::Directive;
        token.offset = start;
        token.line = start_line;
        token.text = std::string(src_.substr(start, end - start));
        return token;
    }

    Token identifier()
    {
        std::size_t start = pos_;
        if (src_[pos_] == '\\') ++pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        Token token = make(TokenKind::Identifier, start, line_);
        if (is_c_keyword(token.text)) {
            token.kind = TokenKind::Keyword;
        }
        return token;
    }

    Token number()
    {
        std::size_t start = pos_;
        ++pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            char prev = src_[pos_ - 1];
            if ((c == '+' || c == '-') &&
                (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
                ++pos_;
            } else if (c == '.') {
                if (options_.acsl && peek(1) == '.') break;
                ++pos_;
            } else if (is_ident_char(c)) {
                ++pos_;
            } else {
                break;
            }
        }
        return make(TokenKind::Number, start, line_);
    }

    void skip_quoted(char quote, int start_line)
    {
        ++pos_;
        while (pos_ < src_.size() && src_[pos_] != quote) {
            if (src_[pos_] == '\n') {
                throw LexError(LexError::Kind::UnterminatedLiteral, start_line);
            }
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                if (src_[pos_ + 1] == '\n') ++line_;
                ++pos_;
            }
            ++pos_;
        }
        if (pos_ >= src_.size()) {
            throw LexError(LexError::Kind::UnterminatedLiteral, start_line);
        }
        ++pos_;
    }

    Token literal(char quote)
    {
        std::size_t start = pos_;
        int start_line = line_;
        skip_quoted(quote, start_line);
        return make(quote == '"' ? TokenKind::String : TokenKind::Char, start, start_line);
    }

    Token punct()
    {
        std::size_t start = pos_;
        auto rest = src_.substr(pos_);
        if (options_.acsl) {
            for (auto p : kAcslPunct) {
                if (rest.starts_with(p)) {
                    pos_ += p.size();
                    return make(TokenKind::Punct, start, line_);
                }
            }
        }
        for (auto p : kCPunct) {
            if (rest.starts_with(p)) {
                pos_ += p.size();
                return make(TokenKind::Punct, start, line_);
            }
        }
        ++pos_;
        return make(TokenKind::Punct, start, line_);
    }

    std::string_view src_;
    LexOptions options_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

std::string lex_error_message(LexError::Kind kind, int line)
{
    std::string what = kind == LexError::Kind::UnterminatedComment ? "unterminated comment"
                                                                   : "unterminated literal";
    return what + " starting at line " + std::to_string(line);
}

}  // namespace

LexError::LexError(Kind kind, int line)
    : Error(lex_error_message(kind, line)), kind_(kind), line_(line)
{
}

std::vector<Token> tokenize(std::string_view source, const LexOptions& options)
{
    return Lexer(source, options).run();
}

std::vector<Token> code_tokens(std::string_view source, const LexOptions& options)
{
    auto tokens = tokenize(source, options);
    std::erase_if(tokens, [](const Token& t) { return !t.is_code(); });
    return tokens;
}

bool is_c_keyword(std::string_view word)
{
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

}  // namespace specforge::lex
