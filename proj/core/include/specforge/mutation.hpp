#pragma once

// Seeded "typo" mutants of C programs. Four operator classes:
//
//   IndexSwap               matrix[x][0]  -> matrix[0][x]
//   VariableSubstitution    (j+k <= i)    -> (i+k <= i)   (same-line identifier)
//   RelationalFlip          <  <-> <=,  > <-> >=
//   ArithmeticOperatorSwap  binary +  <-> -
//
// All operators except IndexSwap rewrite exactly one token; IndexSwap
// transposes the two single-token subscripts of one `a[i][j]` access and so
// touches two. Random mutants keep to one token unless index swaps are asked
// for explicitly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/model.hpp"

namespace specforge::mutation {

enum class Operator { IndexSwap, VariableSubstitution, RelationalFlip, ArithmeticOperatorSwap };

std::string_view to_string(Operator op);
Operator parse_operator(std::string_view text);

class NoMutationSite : public Error {
public:
    explicit NoMutationSite(const std::string& program)
        : Error("program '" + program + "' has no mutation site")
    {
    }
};

struct MutationSite {
    Operator op = Operator::RelationalFlip;
    int line = 1;
    /// Text being replaced ("<", "j", or "x][0" for IndexSwap).
    std::string token;
    std::string replacement;
    /// Code-token indices rewritten by this site (one, or two for IndexSwap).
    std::vector<std::size_t> token_indices;

    bool operator==(const MutationSite&) const = default;
};

struct MutationRecord {
    std::string mutation_id;
    Operator op = Operator::RelationalFlip;
    int line = 1;
    std::string original_token;
    std::string mutated_token;
    std::uint64_t seed = 0;

    bool operator==(const MutationRecord&) const = default;
};

/// Sites in deterministic source order. Throws lex::LexError for code that
/// does not tokenize.
std::vector<MutationSite> enumerate_sites(const SourceProgram& program);

/// Applies one site to the program text (everything outside the rewritten
/// tokens is kept byte for byte).
std::string apply_site(const SourceProgram& program, const MutationSite& site);

/// Picks one site uniformly with a seeded 64-bit Mersenne Twister and an
/// unbiased bounded draw, so the choice is identical on every platform.
/// IndexSwap sites join the draw only with include_index_swap.
std::pair<SourceProgram, MutationRecord> mutate(const SourceProgram& program, std::uint64_t seed,
                                                bool include_index_swap = false);

/// `<dir>/<name>.mut<id>.c` and `<dir>/<name>.mut<id>.json`; returns the .c path.
std::filesystem::path write_mutant(const SourceProgram& parent, const SourceProgram& mutant,
                                   const MutationRecord& record,
                                   const std::filesystem::path& directory);

void to_json(nlohmann::json& j, const MutationSite& value);
void to_json(nlohmann::json& j, const MutationRecord& value);
void from_json(const nlohmann::json& j, MutationRecord& value);

}  // namespace specforge::mutation
