#include "specforge/acsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "acsl_blocks.hpp"

namespace specforge::acsl {

namespace {

std::string_view trim_view(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    return text;
}

struct Fence {
    std::string tag;
    std::string content;
    std::size_t first_line = 0;
    std::size_t last_line = 0;  // exclusive
};

bool is_c_tag(std::string_view tag)
{
    std::string lower;
    for (char c : tag) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower == "c";
}

}  // namespace

SplitResponse split_response(std::string_view response_text)
{
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= response_text.size()) {
            auto nl = response_text.find('\n', start);
            if (nl == std::string_view::npos) {
                lines.push_back(response_text.substr(start));
                break;
            }
            lines.push_back(response_text.substr(start, nl - start));
            start = nl + 1;
        }
    }

    std::vector<Fence> fences;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto opener = trim_view(lines[i]);
        if (!opener.starts_with("```")) continue;
        Fence fence;
        fence.tag = std::string(trim_view(opener.substr(3)));
        fence.first_line = i;
        std::size_t j = i + 1;
        std::string content;
        for (; j < lines.size(); ++j) {
            auto t = trim_view(lines[j]);
            if (t.starts_with("```") && trim_view(t.substr(3)).empty()) break;
            content.append(lines[j]);
            content.push_back('\n');
        }
        fence.content = std::move(content);
        fence.last_line = std::min(j + 1, lines.size());
        fences.push_back(std::move(fence));
        i = j;
    }

    auto pick = [&](auto predicate) -> const Fence* {
        const Fence* best = nullptr;
        for (const auto& f : fences) {
            if (!predicate(f)) continue;
            if (!best || f.content.size() >= best->content.size()) best = &f;
        }
        return best;
    };
    const Fence* chosen = pick([](const Fence& f) { return is_c_tag(f.tag); });
    if (!chosen) chosen = pick([](const Fence& f) { return f.tag.empty(); });
    if (!chosen) throw NoCodeFence();

    std::string reasoning;
    std::size_t next_fence = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (next_fence < fences.size() && i == fences[next_fence].first_line) {
            i = fences[next_fence].last_line - 1;
            ++next_fence;
            continue;
        }
        reasoning.append(lines[i]);
        reasoning.push_back('\n');
    }

    SplitResponse out;
    out.reasoning = std::string(trim_view(reasoning));
    out.code = chosen->content;
    out.fence_tag = chosen->tag;
    return out;
}

void Histogram::add(const AnnotationKind& kind, long count)
{
    if (count == 0) return;
    auto& slot = counts_[kind];
    slot += count;
    if (slot == 0) counts_.erase(kind);
}

long Histogram::count(const AnnotationKind& kind) const
{
    auto it = counts_.find(kind);
    return it == counts_.end() ? 0 : it->second;
}

long Histogram::total() const
{
    long sum = 0;
    for (const auto& [kind, n] : counts_) sum += n;
    return sum;
}

Histogram& Histogram::operator+=(const Histogram& other)
{
    for (const auto& [kind, n] : other.counts_) add(kind, n);
    return *this;
}

Histogram Histogram::merged_loop_assigns() const
{
    Histogram out = *this;
    const AnnotationKind loop_assigns(AnnotationKind::Tag::LoopAssigns);
    long moved = out.count(loop_assigns);
    out.add(loop_assigns, -moved);
    out.add(AnnotationKind(AnnotationKind::Tag::Assigns), moved);
    return out;
}

std::string Histogram::to_csv() const
{
    std::string out = "kind,count\n";
    for (const auto& kind : known_annotation_kinds()) {
        out += kind.id() + "," + std::to_string(count(kind)) + "\n";
    }
    for (const auto& [kind, n] : counts_) {
        if (kind.tag() == AnnotationKind::Tag::Other) {
            out += kind.id() + "," + std::to_string(n) + "\n";
        }
    }
    return out;
}

Histogram count_by_kind(std::span<const Annotation> annotations)
{
    Histogram h;
    for (const auto& a : annotations) h.add(a.kind);
    return h;
}

std::string strip_annotations(std::string_view code)
{
    const auto tokens = lex::tokenize(code);
    std::string out;
    out.reserve(code.size());
    std::size_t copied = 0;

    auto is_hspace = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };

    for (const auto& t : tokens) {
        if (t.is_code() || !t.annotation) continue;
        std::size_t begin = t.offset;
        std::size_t end = t.end();

        std::size_t line_begin = begin;
        while (line_begin > copied && is_hspace(code[line_begin - 1])) --line_begin;
        bool alone_before = line_begin == 0 || code[line_begin - 1] == '\n';
        if (line_begin < copied) alone_before = false;

        std::size_t line_end = end;
        while (line_end < code.size() && is_hspace(code[line_end])) ++line_end;
        bool alone_after = line_end == code.size() || code[line_end] == '\n';

        out.append(code.substr(copied, (alone_before || alone_after ? line_begin : begin) - copied));
        if (alone_before && alone_after) {
            copied = line_end < code.size() ? line_end + 1 : line_end;
        } else if (alone_after) {
            copied = line_end;
        } else if (alone_before) {
            out.append(code.substr(line_begin, begin - line_begin));
            copied = line_end;
        } else {
            out.push_back(' ');
            copied = end;
        }
    }
    out.append(code.substr(copied));
    return out;
}

namespace {

std::string token_key(const lex::Token& t)
{
    if (t.kind == lex::TokenKind::Directive) return detail::collapse_whitespace(t.text);
    return t.text;
}

std::string join_tokens(const std::vector<lex::Token>& tokens, std::size_t from, std::size_t to)
{
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += token_key(tokens[i]);
    }
    return out;
}

// Alignment of a[lo_a, hi_a) against b[lo_b, hi_b): pairs of matched indices.
std::vector<std::pair<std::size_t, std::size_t>> lcs_matches(const std::vector<std::string>& a,
                                                             std::size_t lo_a, std::size_t hi_a,
                                                             const std::vector<std::string>& b,
                                                             std::size_t lo_b, std::size_t hi_b)
{
    const std::size_t n = hi_a - lo_a;
    const std::size_t m = hi_b - lo_b;
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    if (n == 0 || m == 0 || n * m > 16'000'000) return matches;
    std::vector<std::vector<unsigned>> dp(n + 1, std::vector<unsigned>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            dp[i][j] = a[lo_a + i] == b[lo_b + j] ? dp[i + 1][j + 1] + 1
                                                  : std::max(dp[i + 1][j], dp[i][j + 1]);
        }
    }
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[lo_a + i] == b[lo_b + j]) {
            matches.emplace_back(lo_a + i, lo_b + j);
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            ++i;
        } else {
            ++j;
        }
    }
    return matches;
}

}  // namespace

PreservationVerdict check_code_preserved(const SourceProgram& original,
                                         std::string_view annotated_code, std::size_t max_hunks)
{
    const auto before = lex::code_tokens(original.source);
    const auto after = lex::code_tokens(annotated_code);

    std::vector<std::string> a, b;
    a.reserve(before.size());
    b.reserve(after.size());
    for (const auto& t : before) a.push_back(token_key(t));
    for (const auto& t : after) b.push_back(token_key(t));

    PreservationVerdict verdict;
    if (a == b) return verdict;

    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;

    auto matches = lcs_matches(a, prefix, a.size() - suffix, b, prefix, b.size() - suffix);
    matches.emplace_back(a.size() - suffix, b.size() - suffix);

    auto line_at = [](const std::vector<lex::Token>& ts, std::size_t i) {
        if (ts.empty()) return 1;
        return i < ts.size() ? ts[i].line : ts.back().line;
    };

    std::size_t ia = prefix, ib = prefix;
    for (const auto& [ma, mb] : matches) {
        if (ma > ia || mb > ib) {
            if (verdict.diff.size() < max_hunks) {
                DiffHunk hunk;
                hunk.line = line_at(before, ia);
                hunk.modified_line = line_at(after, ib);
                hunk.original = join_tokens(before, ia, ma);
                hunk.modified = join_tokens(after, ib, mb);
                verdict.diff.push_back(std::move(hunk));
            }
        }
        ia = ma + 1;
        ib = mb + 1;
    }
    verdict.preserved = verdict.diff.empty();
    return verdict;
}

std::string_view to_string(LintRule rule)
{
    switch (rule) {
    case LintRule::VariantBeforeAssigns:
        return "variant_before_assigns";
    case LintRule::AssignsOutOfScope:
        return "assigns_out_of_scope";
    case LintRule::BlockStyleInBody:
        return "block_style_in_body";
    }
    return "variant_before_assigns";
}

namespace {

LintRule parse_lint_rule(std::string_view text)
{
    for (auto rule : {LintRule::VariantBeforeAssigns, LintRule::AssignsOutOfScope,
                      LintRule::BlockStyleInBody}) {
        if (to_string(rule) == text) return rule;
    }
    throw Error("unknown lint rule '" + std::string(text) + "'");
}

bool is_word(const lex::Token& t)
{
    return t.kind == lex::TokenKind::Identifier || t.kind == lex::TokenKind::Keyword;
}

// Identifiers visible to a contract at file scope: names at brace and paren
// depth zero plus #define'd macro names.
std::set<std::string> file_scope_names(const detail::AnalyzedCode& analyzed)
{
    std::set<std::string> names;
    int braces = 0;
    int parens = 0;
    for (const auto& t : analyzed.code) {
        if (t.kind == lex::TokenKind::Directive) {
            auto toks = lex::code_tokens(std::string_view(t.text).substr(1));
            if (toks.size() >= 2 && toks[0].text == "define" && is_word(toks[1])) {
                names.insert(toks[1].text);
            }
            continue;
        }
        if (t.is("{")) ++braces;
        else if (t.is("}")) --braces;
        else if (t.is("(")) ++parens;
        else if (t.is(")")) --parens;
        else if (braces == 0 && parens == 0 && t.kind == lex::TokenKind::Identifier)
            names.insert(t.text);
    }
    return names;
}

// Parameter names of the function declared right after code[start].
std::set<std::string> formal_names(const std::vector<lex::Token>& code, std::size_t start)
{
    std::set<std::string> names;
    std::size_t i = start;
    for (; i < code.size(); ++i) {
        if (code[i].is(";") || code[i].is("{")) return names;
        if (code[i].is("(") && i > start && code[i - 1].kind == lex::TokenKind::Identifier) break;
    }
    int depth = 0;
    for (; i < code.size(); ++i) {
        if (code[i].is("(")) ++depth;
        else if (code[i].is(")")) {
            if (--depth == 0) break;
        } else if (code[i].kind == lex::TokenKind::Identifier) {
            names.insert(code[i].text);
        }
    }
    return names;
}

// Base identifier of each location in an assigns clause.
std::vector<std::string> assigned_bases(std::string_view clause)
{
    lex::LexOptions options;
    options.acsl = true;
    std::vector<std::string> bases;
    std::vector<lex::Token> toks;
    try {
        toks = lex::code_tokens(clause, options);
    } catch (const lex::LexError&) {
        return bases;
    }
    int depth = 0;
    bool need_base = true;
    for (const auto& t : toks) {
        if (t.is("(") || t.is("[") || t.is("{")) ++depth;
        else if (t.is(")") || t.is("]") || t.is("}")) --depth;
        else if (t.is(",") && depth == 0) need_base = true;
        else if (need_base && is_word(t)) {
            bases.push_back(t.text);
            need_base = false;
        }
    }
    return bases;
}

}  // namespace

std::vector<LintIssue> lint(std::string_view code)
{
    const auto analyzed = detail::analyze(code);
    std::vector<LintIssue> issues;
    const auto globals = file_scope_names(analyzed);

    for (const auto& block : analyzed.blocks) {
        if (block.clauses.empty()) continue;

        const Annotation* variant = nullptr;
        for (const auto& clause : block.clauses) {
            if (clause.kind.tag() == AnnotationKind::Tag::LoopVariant && !variant) {
                variant = &clause;
            }
            if (clause.kind.tag() == AnnotationKind::Tag::LoopAssigns && variant) {
                issues.push_back({LintRule::VariantBeforeAssigns, variant->line,
                                  "loop variant at line " + std::to_string(variant->line) +
                                      " precedes loop assigns at line " +
                                      std::to_string(clause.line)});
                break;
            }
        }

        if (block.brace_depth == 0) {
            const auto formals = formal_names(analyzed.code, block.next_code_index);
            for (const auto& clause : block.clauses) {
                if (clause.kind.tag() != AnnotationKind::Tag::Assigns) continue;
                for (const auto& base : assigned_bases(clause.clause_text)) {
                    if (base.starts_with("\\") || formals.count(base) || globals.count(base)) {
                        continue;
                    }
                    issues.push_back({LintRule::AssignsOutOfScope, clause.line,
                                      "'" + base +
                                          "' is neither a parameter nor a file-scope name"});
                }
            }
        }

        const bool in_body_statement =
            block.brace_depth > 0 && block.comment.block && block.clauses.size() >= 2 &&
            block.clauses.front().enclosing.kind != EnclosingKind::LoopAnnotation &&
            std::none_of(block.clauses.begin(), block.clauses.end(),
                         [](const Annotation& a) { return a.kind.is_loop_kind(); }) &&
            !(block.next_code && (block.next_code->is("for") || block.next_code->is("while") ||
                                  block.next_code->is("do")));
        if (in_body_statement) {
            issues.push_back({LintRule::BlockStyleInBody, block.clauses.front().line,
                              std::to_string(block.clauses.size()) +
                                  " clauses in one block inside a function body"});
        }
    }
    std::stable_sort(issues.begin(), issues.end(),
                     [](const LintIssue& x, const LintIssue& y) { return x.line < y.line; });
    return issues;
}

std::string normalized_clause(const Annotation& annotation)
{
    auto text = detail::collapse_whitespace(annotation.clause_text);
    return text.empty() ? annotation.kind.keyword() : annotation.kind.keyword() + " " + text;
}

double spec_similarity(std::span<const Annotation> a, std::span<const Annotation> b)
{
    if (a.empty() && b.empty()) return 1.0;
    std::map<std::string, std::pair<long, long>> counts;
    for (const auto& x : a) ++counts[normalized_clause(x)].first;
    for (const auto& x : b) ++counts[normalized_clause(x)].second;
    long shared = 0, total = 0;
    for (const auto& [clause, c] : counts) {
        shared += std::min(c.first, c.second);
        total += std::max(c.first, c.second);
    }
    return static_cast<double>(shared) / static_cast<double>(total);
}

void to_json(nlohmann::json& j, const SplitResponse& value)
{
    j = nlohmann::json{
        {"reasoning", value.reasoning}, {"code", value.code}, {"fence_tag", value.fence_tag}};
}

void from_json(const nlohmann::json& j, SplitResponse& value)
{
    j.at("reasoning").get_to(value.reasoning);
    j.at("code").get_to(value.code);
    value.fence_tag = j.value("fence_tag", std::string());
}

namespace {

constexpr std::string_view enclosing_name(EnclosingKind kind)
{
    switch (kind) {
    case EnclosingKind::FunctionContract:
        return "function_contract";
    case EnclosingKind::LoopAnnotation:
        return "loop_annotation";
    case EnclosingKind::Statement:
        return "statement";
    case EnclosingKind::BehaviorBody:
        return "behavior_body";
    }
    return "function_contract";
}

}  // namespace

void to_json(nlohmann::json& j, const Enclosing& value)
{
    j = nlohmann::json{{"kind", enclosing_name(value.kind)}};
    if (value.kind == EnclosingKind::BehaviorBody) j["behavior"] = value.behavior;
}

void from_json(const nlohmann::json& j, Enclosing& value)
{
    auto name = j.at("kind").get<std::string>();
    value.behavior.clear();
    for (auto kind : {EnclosingKind::FunctionContract, EnclosingKind::LoopAnnotation,
                      EnclosingKind::Statement, EnclosingKind::BehaviorBody}) {
        if (enclosing_name(kind) == name) {
            value.kind = kind;
            if (kind == EnclosingKind::BehaviorBody) value.behavior = j.at("behavior");
            return;
        }
    }
    throw Error("unknown enclosing kind '" + name + "'");
}

void to_json(nlohmann::json& j, const Annotation& value)
{
    j = nlohmann::json{{"kind", value.kind},
                       {"clause_text", value.clause_text},
                       {"block_style", value.block_style},
                       {"line", value.line},
                       {"enclosing", value.enclosing}};
}

void from_json(const nlohmann::json& j, Annotation& value)
{
    j.at("kind").get_to(value.kind);
    j.at("clause_text").get_to(value.clause_text);
    j.at("block_style").get_to(value.block_style);
    j.at("line").get_to(value.line);
    j.at("enclosing").get_to(value.enclosing);
}

void to_json(nlohmann::json& j, const Histogram& value)
{
    j = nlohmann::json::object();
    for (const auto& kind : known_annotation_kinds()) j[kind.id()] = value.count(kind);
    for (const auto& [kind, n] : value.entries()) j[kind.id()] = n;
}

void from_json(const nlohmann::json& j, Histogram& value)
{
    value = Histogram{};
    for (const auto& [key, n] : j.items()) value.add(AnnotationKind::from_id(key), n.get<long>());
}

void to_json(nlohmann::json& j, const DiffHunk& value)
{
    j = nlohmann::json{{"line", value.line},
                       {"modified_line", value.modified_line},
                       {"original", value.original},
                       {"modified", value.modified}};
}

void from_json(const nlohmann::json& j, DiffHunk& value)
{
    j.at("line").get_to(value.line);
    j.at("modified_line").get_to(value.modified_line);
    j.at("original").get_to(value.original);
    j.at("modified").get_to(value.modified);
}

void to_json(nlohmann::json& j, const PreservationVerdict& value)
{
    j = nlohmann::json{{"preserved", value.preserved}, {"diff", value.diff}};
}

void from_json(const nlohmann::json& j, PreservationVerdict& value)
{
    j.at("preserved").get_to(value.preserved);
    j.at("diff").get_to(value.diff);
}

void to_json(nlohmann::json& j, const LintIssue& value)
{
    j = nlohmann::json{
        {"rule", to_string(value.rule)}, {"line", value.line}, {"detail", value.detail}};
}

void from_json(const nlohmann::json& j, LintIssue& value)
{
    value.rule = parse_lint_rule(j.at("rule").get<std::string>());
    j.at("line").get_to(value.line);
    j.at("detail").get_to(value.detail);
}

}  // namespace specforge::acsl
