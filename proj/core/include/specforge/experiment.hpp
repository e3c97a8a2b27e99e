#pragma once

// Corpus x variant x sample study: load a corpus directory, generate specs
// through a gateway, census/lint/preservation-check every response, compare
// parent and mutant specs, and write the result files.
//
// Corpus layout, one directory per program:
//   <corpus>/<name>/program.c    required
//   <corpus>/<name>/tests.csv    optional test-generator output
//   <corpus>/<name>/eva.txt      optional value-analysis report
//   <corpus>/<name>/meta.json    optional {entry_function, mutant_of, provenance, tags...}

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/acsl.hpp"
#include "specforge/eva.hpp"
#include "specforge/gateway.hpp"
#include "specforge/model.hpp"
#include "specforge/pathcrawler.hpp"
#include "specforge/prompt.hpp"

namespace specforge::experiment {

class EmptyCorpus : public Error {
public:
    explicit EmptyCorpus(const std::filesystem::path& directory)
        : Error("corpus directory " + directory.string() + " holds no programs")
    {
    }
};

struct LoadIssue {
    std::string program;
    std::string file;
    std::string message;

    bool operator==(const LoadIssue&) const = default;
};

struct CorpusEntry {
    SourceProgram program;
    std::optional<pathcrawler::TestSuite> suite;
    std::optional<eva::EvaReport> report;
    /// Free-form metadata (clarity/complexity tags and the like).
    nlohmann::json meta = nlohmann::json::object();
    std::string provenance = "unlabelled";
};

struct Corpus {
    /// Sorted by program name.
    std::vector<CorpusEntry> entries;
    std::vector<LoadIssue> issues;
    /// SHA-256 over every loaded file, independent of directory order.
    std::string digest;

    const CorpusEntry* find(std::string_view name) const;
};

struct LoadOptions {
    /// Shell commands run as `<cmd> <program.c>`; their stdout replaces the
    /// corresponding context file.
    std::optional<std::string> pathcrawler_command;
    std::optional<std::string> eva_command;
};

/// Throws EmptyCorpus when no `<name>/program.c` exists. Malformed context
/// files leave that context absent and are listed in Corpus::issues.
Corpus load_corpus(const std::filesystem::path& directory, const LoadOptions& options = {});

enum class Status { Ok, NoCodeFence, ParseFailed, BackendFailed };

std::string_view to_string(Status status);
Status parse_status(std::string_view text);

struct GenerationResult {
    std::string program_name;
    PromptVariant variant = PromptVariant::Baseline;
    int sample_index = 0;
    std::string context_digest;
    std::vector<std::string> prompt_warnings;
    std::optional<gateway::CompletionResponse> response;
    std::optional<acsl::SplitResponse> split;
    std::vector<acsl::Annotation> annotations;
    acsl::Histogram histogram;
    std::vector<acsl::LintIssue> lint_issues;
    acsl::PreservationVerdict preservation;
    Status status = Status::Ok;
    /// Failure detail; empty for Ok.
    std::string reason;

    bool operator==(const GenerationResult&) const = default;
};

struct SkipRecord {
    std::string program_name;
    PromptVariant variant = PromptVariant::Baseline;
    std::string reason;

    bool operator==(const SkipRecord&) const = default;
};

struct MutantPair {
    std::string parent;
    std::string mutant;

    bool operator==(const MutantPair&) const = default;
};

struct RobustnessRow {
    std::string parent;
    std::string mutant;
    PromptVariant variant = PromptVariant::Baseline;
    /// Absent when no sample index produced Ok results on both sides.
    std::optional<double> mean_similarity;
    int compared_samples = 0;

    bool operator==(const RobustnessRow&) const = default;
};

enum class Normalization { Total, PerSample };

struct ExperimentReport {
    GenerationConfig config;
    std::string corpus_digest;
    std::vector<PromptVariant> variants;
    Normalization normalization = Normalization::Total;
    /// program -> provenance label of its corpus entry.
    std::map<std::string, std::string> provenance;
    /// Sorted by (program, variant, sample).
    std::vector<GenerationResult> results;
    std::vector<SkipRecord> skipped;
    std::vector<LoadIssue> load_issues;
    /// Sum of histograms of Ok results, per variant.
    std::map<PromptVariant, acsl::Histogram> aggregate_histograms;
    /// Same sum restricted to clauses nested inside named behaviors.
    std::map<PromptVariant, acsl::Histogram> behavior_histograms;
    std::vector<RobustnessRow> robustness;
    /// Non-Ok status name -> count (every failure status listed).
    std::map<std::string, long> failures;

    bool operator==(const ExperimentReport&) const = default;
};

struct RunOptions {
    Normalization normalization = Normalization::Total;
};

/// Runs every program x requested variant x sample. Variants whose context
/// is missing for a program are skipped; per-result failures are captured.
/// Throws ConfigError for invalid config or a missing template.
ExperimentReport run(const Corpus& corpus, std::span<const PromptVariant> variants,
                     const GenerationConfig& config,
                     const std::map<PromptVariant, prompt::PromptTemplate>& templates,
                     gateway::Gateway& gateway, const RunOptions& options = {});

/// Mutant/parent pairs declared by the corpus (both ends present).
std::vector<MutantPair> mutant_pairs(const Corpus& corpus);

/// Mean same-index spec similarity per pair x variant, from existing results.
/// Rows sorted by (variant, parent, mutant).
std::vector<RobustnessRow> robustness_from_results(std::span<const GenerationResult> results,
                                                   std::span<const MutantPair> pairs,
                                                   std::span<const PromptVariant> variants);

/// Generates both ends of every pair and scores them.
std::vector<RobustnessRow> robustness_study(const Corpus& corpus, std::span<const MutantPair> pairs,
                                            std::span<const PromptVariant> variants,
                                            const GenerationConfig& config,
                                            const std::map<PromptVariant, prompt::PromptTemplate>& templates,
                                            gateway::Gateway& gateway);

/// Rebuilds aggregates and failure counts from report.results.
void aggregate(ExperimentReport& report);

/// "kind,baseline_count,pathcrawler_count,eva_count", one row per observed kind.
std::string histogram_csv(const ExperimentReport& report);
/// "variant,parent,mutant,mean_similarity,compared_samples"; empty cell when unavailable.
std::string robustness_csv(const ExperimentReport& report);

/// Writes report.json, histogram.csv, robustness.csv and
/// generated/<program>/<variant>/<sample>.c for every Ok result.
/// Throws gateway::IoError when a file cannot be written.
void emit(const ExperimentReport& report, const std::filesystem::path& directory);

ExperimentReport load_report(const std::filesystem::path& report_json);

void to_json(nlohmann::json& j, const LoadIssue& value);
void from_json(const nlohmann::json& j, LoadIssue& value);
void to_json(nlohmann::json& j, const GenerationResult& value);
void from_json(const nlohmann::json& j, GenerationResult& value);
void to_json(nlohmann::json& j, const SkipRecord& value);
void from_json(const nlohmann::json& j, SkipRecord& value);
void to_json(nlohmann::json& j, const RobustnessRow& value);
void from_json(const nlohmann::json& j, RobustnessRow& value);
void to_json(nlohmann::json& j, const ExperimentReport& value);
void from_json(const nlohmann::json& j, ExperimentReport& value);

}  // namespace specforge::experiment
