// specforge: generate ACSL specs over a corpus and inspect the pieces.
//
// Exit codes: 0 ok, 1 findings or failed results, 2 configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "specforge/acsl.hpp"
#include "specforge/c_lexer.hpp"
#include "specforge/eva.hpp"
#include "specforge/experiment.hpp"
#include "specforge/gateway.hpp"
#include "specforge/model.hpp"
#include "specforge/mutation.hpp"
#include "specforge/pathcrawler.hpp"
#include "specforge/prompt.hpp"

namespace fs = std::filesystem;
using namespace specforge;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kConfig = 2;

std::string read_input(const std::string& path)
{
    if (!fs::is_regular_file(path)) {
        throw ConfigError("cannot read " + path);
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct GenerateArgs {
    std::string corpus;
    std::string variants = "baseline,pathcrawler,eva";
    std::string backend = "replay";
    std::string out;
    int samples = 3;
    double temperature = 0.7;
    std::string model = GenerationConfig{}.model_id;
    int max_tokens = 4096;
    std::string templates = SPECFORGE_DATA_DIR "/templates";
    std::string fixtures = SPECFORGE_DATA_DIR "/fixtures";
    std::string base_url = gateway::LiveOptions{}.base_url;
    std::string api_key_env = gateway::LiveOptions{}.api_key_env;
    int max_inflight = 4;
    std::string record;
    bool force = false;
    std::string normalize = "total";
    std::string run_pathcrawler;
    std::string run_eva;
};

int cmd_generate(const GenerateArgs& a)
{
    GenerationConfig config;
    config.model_id = a.model;
    config.temperature = a.temperature;
    config.samples_per_program = a.samples;
    config.max_output_tokens = a.max_tokens;
    config.validate();

    const auto variants = parse_variant_list(a.variants);
    experiment::RunOptions run_options;
    if (a.normalize == "per-sample") run_options.normalization = experiment::Normalization::PerSample;
    else if (a.normalize != "total") throw ConfigError("--normalize must be total or per-sample");

    std::unique_ptr<gateway::Backend> backend;
    if (a.backend == "replay") {
        if (!fs::is_directory(a.fixtures)) throw ConfigError("fixture directory " + a.fixtures + " not found");
        backend = std::make_unique<gateway::ReplayBackend>(a.fixtures);
    } else if (a.backend == "live") {
        gateway::LiveOptions live;
        live.base_url = a.base_url;
        live.api_key_env = a.api_key_env;
        const char* key = std::getenv(live.api_key_env.c_str());
        if (!key || !*key) throw ConfigError("live backend needs " + live.api_key_env + " to be set");
        backend = std::make_unique<gateway::LiveBackend>(live);
        if (!a.record.empty()) {
            backend = std::make_unique<gateway::RecordingBackend>(std::move(backend), a.record, a.force);
        }
    } else {
        throw ConfigError("--backend must be replay or live");
    }
    gateway::Gateway gw(std::move(backend), a.max_inflight);

    std::map<PromptVariant, prompt::PromptTemplate> templates;
    try {
        templates = prompt::load_templates(a.templates);
    } catch (const prompt::PromptError& e) {
        throw ConfigError(e.what());
    }

    experiment::LoadOptions load_options;
    if (!a.run_pathcrawler.empty()) load_options.pathcrawler_command = a.run_pathcrawler;
    if (!a.run_eva.empty()) load_options.eva_command = a.run_eva;
    experiment::Corpus corpus;
    try {
        corpus = experiment::load_corpus(a.corpus, load_options);
    } catch (const experiment::EmptyCorpus& e) {
        throw ConfigError(e.what());
    }

    const auto report = experiment::run(corpus, variants, config, templates, gw, run_options);
    experiment::emit(report, a.out);

    long failed = 0;
    for (const auto& [status, n] : report.failures) failed += n;
    std::cout << report.results.size() << " results, " << failed << " failed, "
              << report.skipped.size() << " skipped; wrote " << (fs::path(a.out) / "report.json").string()
              << "\n";
    for (const auto& issue : corpus.issues) {
        std::cerr << "warning: " << issue.program << "/" << issue.file << ": " << issue.message << "\n";
    }
    for (const auto& r : report.results) {
        if (r.status != experiment::Status::Ok) {
            std::cerr << r.program_name << "/" << to_string(r.variant) << "/" << r.sample_index << ": "
                      << experiment::to_string(r.status) << ": " << r.reason << "\n";
        }
    }
    return failed > 0 ? kFindings : kOk;
}

int cmd_parse_tests(const std::string& file)
{
    const auto suite = pathcrawler::parse_test_csv(read_input(file));
    nlohmann::json out = {{"suite", suite}, {"summary", pathcrawler::summarize(suite)}};
    std::cout << canonical_dump(out);
    return kOk;
}

int cmd_parse_eva(const std::string& file)
{
    const auto report = eva::parse_eva_report(read_input(file));
    const auto discrepancies = eva::consistency_check(report);
    nlohmann::json out = {{"report", report}, {"discrepancies", discrepancies}};
    std::cout << canonical_dump(out);
    return discrepancies.empty() ? kOk : kFindings;
}

int cmd_mutate(const std::string& file, std::uint64_t seed, const std::string& out_dir, bool index_swap)
{
    SourceProgram program;
    program.name = fs::path(file).stem().string();
    program.source = read_input(file);
    auto [mutant, record] = mutation::mutate(program, seed, index_swap);
    if (out_dir.empty()) {
        std::cout << mutant.source;
        std::cerr << canonical_dump(record);
    } else {
        std::cout << mutation::write_mutant(program, mutant, record, out_dir).string() << "\n";
    }
    return kOk;
}

int cmd_count(const std::string& file, bool merge_loop_assigns, bool json)
{
    auto histogram = acsl::count_by_kind(acsl::parse_annotations(read_input(file)));
    if (merge_loop_assigns) histogram = histogram.merged_loop_assigns();
    if (json) std::cout << canonical_dump(histogram);
    else std::cout << histogram.to_csv();
    return kOk;
}

int cmd_lint(const std::string& file)
{
    const auto issues = acsl::lint(read_input(file));
    for (const auto& issue : issues) {
        std::cout << file << ":" << issue.line << ": " << acsl::to_string(issue.rule) << ": "
                  << issue.detail << "\n";
    }
    return issues.empty() ? kOk : kFindings;
}

int cmd_report(const std::string& in, const std::string& out)
{
    const auto report = experiment::load_report(in);
    experiment::emit(report, out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ACSL specification generation study driver"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "generate specs for every corpus program");
    generate->add_option("--corpus", gen.corpus, "corpus directory")->required();
    generate->add_option("--variants", gen.variants, "comma-separated prompt variants");
    generate->add_option("--backend", gen.backend, "replay or live");
    generate->add_option("--out", gen.out, "output directory")->required();
    generate->add_option("--samples", gen.samples, "samples per program and variant");
    generate->add_option("--temperature", gen.temperature, "sampling temperature");
    generate->add_option("--model", gen.model, "model id for the live backend");
    generate->add_option("--max-tokens", gen.max_tokens, "completion token limit");
    generate->add_option("--templates", gen.templates, "prompt template directory");
    generate->add_option("--fixtures", gen.fixtures, "replay fixture directory");
    generate->add_option("--base-url", gen.base_url, "chat-completions endpoint base");
    generate->add_option("--api-key-env", gen.api_key_env, "environment variable holding the key");
    generate->add_option("--max-inflight", gen.max_inflight, "concurrent requests");
    generate->add_option("--record", gen.record, "record live responses as fixtures here");
    generate->add_flag("--force", gen.force, "overwrite existing recorded fixtures");
    generate->add_option("--normalize", gen.normalize, "total or per-sample histogram counts");
    generate->add_option("--run-pathcrawler", gen.run_pathcrawler, "command producing tests.csv on stdout");
    generate->add_option("--run-eva", gen.run_eva, "command producing the value-analysis report");

    std::string file;
    auto* parse_tests = app.add_subcommand("parse-tests", "parse a test-case CSV to JSON");
    parse_tests->add_option("FILE", file)->required();
    auto* parse_eva = app.add_subcommand("parse-eva", "parse a value-analysis report to JSON");
    parse_eva->add_option("FILE", file)->required();

    std::uint64_t seed = 0;
    std::string mutate_out;
    bool index_swap = false;
    auto* mutate = app.add_subcommand("mutate", "write one seeded typo mutant");
    mutate->add_option("FILE", file)->required();
    mutate->add_option("--seed", seed)->required();
    mutate->add_option("--out", mutate_out, "directory for <name>.mut<id>.c/.json");
    mutate->add_flag("--index-swap", index_swap, "also draw from two-token subscript swaps");

    bool merge_loop_assigns = false, json = false;
    auto* count = app.add_subcommand("count", "annotation kind histogram of one file");
    count->add_option("FILE", file)->required();
    count->add_flag("--merge-loop-assigns", merge_loop_assigns, "count loop assigns as assigns");
    count->add_flag("--json", json, "JSON instead of CSV");

    auto* lint = app.add_subcommand("lint", "check annotation placement rules");
    lint->add_option("FILE", file)->required();

    std::string report_in, report_out;
    auto* report = app.add_subcommand("report", "re-emit result files from report.json");
    report->add_option("--in", report_in)->required();
    report->add_option("--out", report_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*parse_tests) return cmd_parse_tests(file);
        if (*parse_eva) return cmd_parse_eva(file);
        if (*mutate) return cmd_mutate(file, seed, mutate_out, index_swap);
        if (*count) return cmd_count(file, merge_loop_assigns, json);
        if (*lint) return cmd_lint(file);
        if (*report) return cmd_report(report_in, report_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFindings;
    }
    return kConfig;
}
