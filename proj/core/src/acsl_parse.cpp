#include <algorithm>
#include <cctype>

#include "acsl_blocks.hpp"

namespace specforge::acsl {

namespace detail {

std::string collapse_whitespace(std::string_view text)
{
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

std::string clean_annotation_body(std::string_view comment_text, bool block)
{
    std::string body(comment_text);
    auto blank = [&](std::size_t from, std::size_t to) {
        for (std::size_t i = from; i < to && i < body.size(); ++i) {
            if (body[i] != '\n') body[i] = ' ';
        }
    };
    blank(0, 3);
    if (block && body.size() >= 5) {
        blank(body.size() - 2, body.size());
    }

    // `@` decoration at the start of each line.
    bool at_line_start = true;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '\n') {
            at_line_start = true;
        } else if (at_line_start && (c == ' ' || c == '\t')) {
        } else if (at_line_start && c == '@') {
            body[i] = ' ';
        } else {
            at_line_start = false;
        }
    }
    // `@` decoration right before the closing `*/`.
    std::size_t end = body.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(body[end - 1]))) --end;
    while (end > 0 && body[end - 1] == '@') body[--end] = ' ';

    // Nested `//` comments, outside literals.
    char quote = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (quote) {
            if (c == '\\') {
                ++i;
            } else if (c == quote || c == '\n') {
                quote = 0;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '/' && i + 1 < body.size() && body[i + 1] == '/') {
            while (i < body.size() && body[i] != '\n') body[i++] = ' ';
        }
    }
    return body;
}

namespace {

bool is_word(const lex::Token& t)
{
    return t.kind == lex::TokenKind::Identifier || t.kind == lex::TokenKind::Keyword;
}

EnclosingKind block_enclosing(int brace_depth, const std::optional<lex::Token>& next)
{
    if (brace_depth <= 0) {
        return EnclosingKind::FunctionContract;
    }
    if (next && (next->is("for") || next->is("while") || next->is("do"))) {
        return EnclosingKind::LoopAnnotation;
    }
    return EnclosingKind::Statement;
}

bool is_binder(const lex::Token& t)
{
    return t.is("\\forall") || t.is("\\exists") || t.is("\\let") || t.is("\\lambda");
}

// Index of the `;` closing the clause that starts at `from`, or tokens.size().
// The `;` ending a quantifier or \let binder belongs to the clause.
std::size_t clause_end(const std::vector<lex::Token>& tokens, std::size_t from)
{
    int depth = 0;
    std::vector<int> binders;
    for (std::size_t i = from; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (is_binder(t)) {
            binders.push_back(depth);
        } else if (t.is("(") || t.is("[") || t.is("{")) {
            ++depth;
        } else if (t.is(")") || t.is("]") || t.is("}")) {
            if (depth == 0 && t.is("}")) return i;
            --depth;
            while (!binders.empty() && binders.back() > depth) binders.pop_back();
        } else if (t.is(";")) {
            if (!binders.empty() && binders.back() == depth) {
                binders.pop_back();
            } else if (depth <= 0) {
                return i;
            }
        }
    }
    return tokens.size();
}

std::vector<Annotation> parse_block(const lex::Token& comment, EnclosingKind block_kind)
{
    const std::string body = clean_annotation_body(comment.text, comment.block);
    lex::LexOptions options;
    options.acsl = true;
    options.first_line = comment.line;
    const auto toks = lex::code_tokens(body, options);

    auto text_between = [&](std::size_t first, std::size_t last) -> std::string {
        if (first >= last || first >= toks.size()) return {};
        auto begin = toks[first].offset;
        auto end = toks[last - 1].end();
        return collapse_whitespace(std::string_view(body).substr(begin, end - begin));
    };

    std::vector<Annotation> out;
    std::string behavior;
    auto push = [&](AnnotationKind kind, std::string text, int line) {
        Annotation a;
        a.kind = std::move(kind);
        a.clause_text = std::move(text);
        a.block_style = comment.block;
        a.line = line;
        if (a.kind.is_loop_kind()) {
            a.enclosing.kind = EnclosingKind::LoopAnnotation;
        } else if (!behavior.empty() && a.kind.tag() != AnnotationKind::Tag::Behavior) {
            a.enclosing.kind = EnclosingKind::BehaviorBody;
            a.enclosing.behavior = behavior;
        } else {
            a.enclosing.kind = block_kind;
        }
        out.push_back(std::move(a));
    };

    std::size_t i = 0;
    while (i < toks.size()) {
        const auto& t = toks[i];
        if (t.is(";") || t.is("{") || t.is("}")) {
            ++i;
            continue;
        }
        const int line = t.line;
        if (!is_word(t)) {
            auto end = clause_end(toks, i + 1);
            push(AnnotationKind::other(t.text), text_between(i + 1, end), line);
            i = end + 1;
            continue;
        }

        std::string keyword = t.text;
        std::size_t next = i + 1;
        if ((keyword == "loop" || keyword == "complete" || keyword == "disjoint") &&
            next < toks.size() && is_word(toks[next])) {
            keyword += " " + toks[next].text;
            ++next;
        }

        if (keyword == "behavior") {
            std::string name;
            if (next < toks.size() && is_word(toks[next])) {
                name = toks[next].text;
                ++next;
            }
            if (next < toks.size() && toks[next].is(":")) ++next;
            behavior.clear();
            push(AnnotationKind(AnnotationKind::Tag::Behavior), name, line);
            behavior = name;
            i = next;
            continue;
        }
        if (keyword == "ghost") {
            push(AnnotationKind(AnnotationKind::Tag::Ghost), text_between(next, toks.size()), line);
            break;
        }
        if (keyword == "axiomatic") {
            std::string name = next < toks.size() && is_word(toks[next]) ? toks[next].text : "";
            if (!name.empty()) ++next;
            push(AnnotationKind::other("axiomatic"), name, line);
            i = next;
            continue;
        }
        if (keyword == "for") {
            // `for b1, b2: <clause>` -- the clause keyword follows the colon.
            while (next < toks.size() && !toks[next].is(":")) ++next;
            i = next + 1;
            continue;
        }
        if (keyword.starts_with("complete ") || keyword.starts_with("disjoint ")) {
            behavior.clear();
        }

        auto end = clause_end(toks, next);
        push(AnnotationKind::from_keyword(keyword), text_between(next, end), line);
        i = end + 1;
    }
    return out;
}

}  // namespace

AnalyzedCode analyze(std::string_view code)
{
    AnalyzedCode result;
    result.tokens = lex::tokenize(code);

    int depth = 0;
    std::size_t code_index = 0;
    std::vector<std::size_t> pending;
    for (const auto& t : result.tokens) {
        if (!t.is_code()) {
            if (t.annotation) {
                AnnotationBlock block;
                block.comment = t;
                block.brace_depth = depth;
                result.blocks.push_back(std::move(block));
                pending.push_back(result.blocks.size() - 1);
            }
            continue;
        }
        for (auto b : pending) {
            result.blocks[b].next_code = t;
            result.blocks[b].next_code_index = code_index;
        }
        pending.clear();
        if (t.is("{")) ++depth;
        if (t.is("}")) --depth;
        result.code.push_back(t);
        ++code_index;
    }
    for (auto b : pending) {
        result.blocks[b].next_code_index = result.code.size();
    }
    for (auto& block : result.blocks) {
        block.clauses =
            parse_block(block.comment, block_enclosing(block.brace_depth, block.next_code));
    }
    return result;
}

}  // namespace detail

std::vector<Annotation> parse_annotations(std::string_view code)
{
    auto analyzed = detail::analyze(code);
    std::vector<Annotation> out;
    for (auto& block : analyzed.blocks) {
        for (auto& clause : block.clauses) {
            out.push_back(std::move(clause));
        }
    }
    return out;
}

}  // namespace specforge::acsl
