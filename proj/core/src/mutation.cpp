#include "specforge/mutation.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>

#include "specforge/c_lexer.hpp"

namespace specforge::mutation {

namespace {

using lex::Token;
using lex::TokenKind;

bool is_operand(const Token& t)
{
    return t.kind == TokenKind::Identifier || t.kind == TokenKind::Number;
}

bool is_member_access(const std::vector<Token>& code, std::size_t i)
{
    return i > 0 && (code[i - 1].is(".") || code[i - 1].is("->"));
}

bool is_plain_variable(const std::vector<Token>& code, std::size_t i)
{
    return code[i].kind == TokenKind::Identifier && !is_member_access(code, i) &&
           !(i + 1 < code.size() && code[i + 1].is("("));
}

std::size_t matching_paren(const std::vector<Token>& code, std::size_t open)
{
    int depth = 0;
    for (std::size_t i = open; i < code.size(); ++i) {
        if (code[i].is("(")) ++depth;
        else if (code[i].is(")") && --depth == 0) return i;
    }
    return code.size();
}

// Token index ranges [first, last) holding if/while/for conditions.
std::vector<std::pair<std::size_t, std::size_t>> condition_spans(const std::vector<Token>& code)
{
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i + 1 < code.size(); ++i) {
        if (!code[i + 1].is("(")) continue;
        if (code[i].is("if") || code[i].is("while")) {
            auto close = matching_paren(code, i + 1);
            spans.emplace_back(i + 2, close);
        } else if (code[i].is("for")) {
            auto close = matching_paren(code, i + 1);
            std::size_t first = close, second = close;
            int depth = 0;
            for (std::size_t k = i + 2; k < close; ++k) {
                if (code[k].is("(")) ++depth;
                else if (code[k].is(")")) --depth;
                else if (code[k].is(";") && depth == 0) {
                    if (first == close) first = k;
                    else if (second == close) second = k;
                }
            }
            if (first < close && second < close) spans.emplace_back(first + 1, second);
        }
    }
    return spans;
}

std::string flipped_relational(std::string_view op)
{
    if (op == "<") return "<=";
    if (op == "<=") return "<";
    if (op == ">") return ">=";
    if (op == ">=") return ">";
    return {};
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t floor = (0 - bound) % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x < floor);
    return x % bound;
}

}  // namespace

std::string_view to_string(Operator op)
{
    switch (op) {
    case Operator::IndexSwap:
        return "index_swap";
    case Operator::VariableSubstitution:
        return "variable_substitution";
    case Operator::RelationalFlip:
        return "relational_flip";
    case Operator::ArithmeticOperatorSwap:
        return "arithmetic_operator_swap";
    }
    return "relational_flip";
}

Operator parse_operator(std::string_view text)
{
    for (auto op : {Operator::IndexSwap, Operator::VariableSubstitution, Operator::RelationalFlip,
                    Operator::ArithmeticOperatorSwap}) {
        if (to_string(op) == text) return op;
    }
    throw Error("unknown mutation operator '" + std::string(text) + "'");
}

std::vector<MutationSite> enumerate_sites(const SourceProgram& program)
{
    const auto code = lex::code_tokens(program.source);
    std::vector<MutationSite> sites;

    std::vector<bool> in_condition(code.size(), false);
    for (auto [first, last] : condition_spans(code)) {
        for (auto k = first; k < last && k < code.size(); ++k) in_condition[k] = true;
    }

    for (std::size_t i = 0; i < code.size(); ++i) {
        const auto& t = code[i];

        if (t.is("[") && i > 0 && (code[i - 1].kind == TokenKind::Identifier || code[i - 1].is("]")) &&
            i + 5 < code.size() && is_operand(code[i + 1]) && code[i + 2].is("]") &&
            code[i + 3].is("[") && is_operand(code[i + 4]) && code[i + 5].is("]") &&
            code[i + 1].text != code[i + 4].text) {
            sites.push_back({Operator::IndexSwap, code[i + 1].line,
                             code[i + 1].text + "][" + code[i + 4].text,
                             code[i + 4].text + "][" + code[i + 1].text, {i + 1, i + 4}});
        }

        if (in_condition[i] && is_plain_variable(code, i)) {
            std::vector<std::string> seen;
            for (std::size_t k = 0; k < code.size(); ++k) {
                if (code[k].line != t.line || !is_plain_variable(code, k)) continue;
                const auto& candidate = code[k].text;
                if (candidate == t.text ||
                    std::find(seen.begin(), seen.end(), candidate) != seen.end())
                    continue;
                seen.push_back(candidate);
                sites.push_back({Operator::VariableSubstitution, t.line, t.text, candidate, {i}});
            }
        }

        if (t.kind == TokenKind::Punct) {
            if (auto flipped = flipped_relational(t.text); !flipped.empty()) {
                sites.push_back({Operator::RelationalFlip, t.line, t.text, flipped, {i}});
            }
            if ((t.text == "+" || t.text == "-") && i > 0 &&
                (is_operand(code[i - 1]) || code[i - 1].is(")") || code[i - 1].is("]") ||
                 code[i - 1].kind == TokenKind::Char)) {
                sites.push_back({Operator::ArithmeticOperatorSwap, t.line, t.text,
                                 t.text == "+" ? "-" : "+", {i}});
            }
        }
    }
    return sites;
}

std::string apply_site(const SourceProgram& program, const MutationSite& site)
{
    const auto code = lex::code_tokens(program.source);
    std::vector<std::pair<const Token*, std::string>> edits;
    if (site.op == Operator::IndexSwap) {
        const auto& a = code.at(site.token_indices.at(0));
        const auto& b = code.at(site.token_indices.at(1));
        edits = {{&a, b.text}, {&b, a.text}};
    } else {
        edits = {{&code.at(site.token_indices.at(0)), site.replacement}};
    }
    std::string out;
    std::size_t copied = 0;
    for (const auto& [token, text] : edits) {
        out.append(program.source, copied, token->offset - copied);
        out.append(text);
        copied = token->end();
    }
    out.append(program.source, copied, std::string::npos);
    return out;
}

std::pair<SourceProgram, MutationRecord> mutate(const SourceProgram& program, std::uint64_t seed,
                                                bool include_index_swap)
{
    const auto sites = enumerate_sites(program);
    std::vector<std::size_t> eligible;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        if (include_index_swap || sites[k].op != Operator::IndexSwap) eligible.push_back(k);
    }
    if (eligible.empty()) {
        throw NoMutationSite(program.name);
    }
    std::mt19937_64 rng(seed);
    // The id is the position in the full site list, whichever subset was drawn from.
    const auto index = eligible[static_cast<std::size_t>(bounded_draw(rng, eligible.size()))];
    const auto& site = sites[index];

    MutationRecord record;
    record.mutation_id = std::to_string(index);
    record.op = site.op;
    record.line = site.line;
    record.original_token = site.token;
    record.mutated_token = site.replacement;
    record.seed = seed;

    SourceProgram mutant;
    mutant.name = program.name + ".mut" + record.mutation_id;
    mutant.source = apply_site(program, site);
    mutant.entry_function = program.entry_function;
    mutant.mutant_of = MutantOrigin{program.name, record.mutation_id};
    return {std::move(mutant), std::move(record)};
}

std::filesystem::path write_mutant(const SourceProgram& parent, const SourceProgram& mutant,
                                   const MutationRecord& record,
                                   const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    auto c_path = directory / (mutant.name + ".c");
    auto json_path = directory / (mutant.name + ".json");
    {
        std::ofstream out(c_path, std::ios::binary | std::ios::trunc);
        out << mutant.source;
        if (!out) throw Error("cannot write " + c_path.string());
    }
    nlohmann::json meta = record;
    meta["parent_name"] = parent.name;
    meta["mutant_name"] = mutant.name;
    std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
    out << canonical_dump(meta);
    if (!out) throw Error("cannot write " + json_path.string());
    return c_path;
}

void to_json(nlohmann::json& j, const MutationSite& value)
{
    j = nlohmann::json{{"operator", to_string(value.op)},
                       {"line", value.line},
                       {"token", value.token},
                       {"replacement", value.replacement}};
}

void to_json(nlohmann::json& j, const MutationRecord& value)
{
    j = nlohmann::json{{"mutation_id", value.mutation_id},
                       {"operator", to_string(value.op)},
                       {"line", value.line},
                       {"original_token", value.original_token},
                       {"mutated_token", value.mutated_token},
                       {"seed", value.seed}};
}

void from_json(const nlohmann::json& j, MutationRecord& value)
{
    j.at("mutation_id").get_to(value.mutation_id);
    value.op = parse_operator(j.at("operator").get<std::string>());
    j.at("line").get_to(value.line);
    j.at("original_token").get_to(value.original_token);
    j.at("mutated_token").get_to(value.mutated_token);
    j.at("seed").get_to(value.seed);
}

}  // namespace specforge::mutation
