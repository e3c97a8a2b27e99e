#include "specforge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "specforge/c_lexer.hpp"
#include "specforge/digest.hpp"

namespace specforge::experiment {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        throw gateway::IoError(gateway::IoError::Reason::WriteFailed, "cannot write " + path.string());
    }
}

std::string shell_quote(const std::string& text)
{
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

// stdout of `command 'file'`; throws Error on a non-zero exit.
std::string run_hook(const std::string& command, const fs::path& file)
{
    const std::string line = command + " " + shell_quote(file.string());
    FILE* pipe = ::popen(line.c_str(), "r");
    if (!pipe) throw Error("cannot start '" + command + "'");
    std::string output;
    char buffer[4096];
    std::size_t n;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, n);
    int rc = ::pclose(pipe);
    if (rc != 0) throw Error("'" + command + "' exited with status " + std::to_string(rc));
    return output;
}

std::string format_number(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", value);
    return buffer;
}

bool needs_suite(PromptVariant v) { return v == PromptVariant::Pathcrawler; }
bool needs_report(PromptVariant v) { return v == PromptVariant::Eva; }

struct Task {
    const CorpusEntry* entry;
    std::size_t prompt_index;
    int sample;
};

GenerationResult execute(const Task& task, const prompt::BuiltPrompt& built,
                         const GenerationConfig& config, gateway::Gateway& gw)
{
    GenerationResult result;
    result.program_name = task.entry->program.name;
    result.variant = built.variant;
    result.sample_index = task.sample;
    result.context_digest = built.context_digest;
    for (auto w : built.warnings) result.prompt_warnings.emplace_back(prompt::to_string(w));

    gateway::CompletionRequest request{built, config, task.sample};
    try {
        result.response = gw.complete(request);
    } catch (const std::exception& e) {
        result.status = Status::BackendFailed;
        result.reason = e.what();
        return result;
    }

    try {
        result.split = acsl::split_response(result.response->text);
    } catch (const acsl::NoCodeFence& e) {
        result.status = Status::NoCodeFence;
        result.reason = e.what();
        return result;
    }

    try {
        result.annotations = acsl::parse_annotations(result.split->code);
        result.histogram = acsl::count_by_kind(result.annotations);
        result.lint_issues = acsl::lint(result.split->code);
        result.preservation = acsl::check_code_preserved(task.entry->program, result.split->code);
    } catch (const std::exception& e) {
        result.annotations.clear();
        result.histogram = {};
        result.lint_issues.clear();
        result.preservation = {};
        result.status = Status::ParseFailed;
        result.reason = e.what();
    }
    return result;
}

auto result_key(const GenerationResult& r)
{
    return std::tie(r.program_name, r.variant, r.sample_index);
}

std::vector<PromptVariant> normalized_variants(std::span<const PromptVariant> variants)
{
    std::vector<PromptVariant> out(variants.begin(), variants.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

const CorpusEntry* Corpus::find(std::string_view name) const
{
    for (const auto& e : entries) {
        if (e.program.name == name) return &e;
    }
    return nullptr;
}

Corpus load_corpus(const fs::path& directory, const LoadOptions& options)
{
    Corpus corpus;
    if (!fs::is_directory(directory)) {
        throw EmptyCorpus(directory);
    }
    std::vector<fs::path> dirs;
    for (const auto& item : fs::directory_iterator(directory)) {
        if (item.is_directory() && fs::is_regular_file(item.path() / "program.c")) {
            dirs.push_back(item.path());
        }
    }
    if (dirs.empty()) {
        throw EmptyCorpus(directory);
    }
    std::sort(dirs.begin(), dirs.end());

    std::string digest_input;
    auto feed = [&](const std::string& label, const std::string& bytes) {
        digest_input += label + '\0' + std::to_string(bytes.size()) + '\0' + bytes;
    };

    for (const auto& dir : dirs) {
        CorpusEntry entry;
        const std::string name = dir.filename().string();
        entry.program.name = name;
        entry.program.source = read_file(dir / "program.c");
        feed(name + "/program.c", entry.program.source);

        if (auto meta_path = dir / "meta.json"; fs::is_regular_file(meta_path)) {
            const std::string text = read_file(meta_path);
            feed(name + "/meta.json", text);
            try {
                entry.meta = nlohmann::json::parse(text);
                if (auto it = entry.meta.find("entry_function"); it != entry.meta.end() && it->is_string())
                    entry.program.entry_function = it->get<std::string>();
                if (auto it = entry.meta.find("mutant_of"); it != entry.meta.end() && it->is_object())
                    entry.program.mutant_of = it->get<MutantOrigin>();
                if (auto it = entry.meta.find("provenance"); it != entry.meta.end() && it->is_string())
                    entry.provenance = it->get<std::string>();
            } catch (const std::exception& e) {
                entry.meta = nlohmann::json::object();
                corpus.issues.push_back({name, "meta.json", e.what()});
            }
        }

        auto load_context = [&](const char* file, const std::optional<std::string>& hook,
                                auto&& parse) {
            std::string text;
            try {
                if (hook) {
                    text = run_hook(*hook, dir / "program.c");
                } else if (fs::is_regular_file(dir / file)) {
                    text = read_file(dir / file);
                } else {
                    return;
                }
                feed(name + "/" + file, text);
                parse(text);
            } catch (const std::exception& e) {
                corpus.issues.push_back({name, file, e.what()});
            }
        };
        load_context("tests.csv", options.pathcrawler_command,
                     [&](const std::string& t) { entry.suite = pathcrawler::parse_test_csv(t); });
        load_context("eva.txt", options.eva_command,
                     [&](const std::string& t) { entry.report = eva::parse_eva_report(t); });

        corpus.entries.push_back(std::move(entry));
    }
    corpus.digest = sha256_hex(digest_input);
    return corpus;
}

std::string_view to_string(Status status)
{
    switch (status) {
    case Status::Ok:
        return "ok";
    case Status::NoCodeFence:
        return "no_code_fence";
    case Status::ParseFailed:
        return "parse_failed";
    case Status::BackendFailed:
        return "backend_failed";
    }
    return "ok";
}

Status parse_status(std::string_view text)
{
    for (auto s : {Status::Ok, Status::NoCodeFence, Status::ParseFailed, Status::BackendFailed}) {
        if (to_string(s) == text) return s;
    }
    throw Error("unknown result status '" + std::string(text) + "'");
}

void aggregate(ExperimentReport& report)
{
    report.aggregate_histograms.clear();
    report.behavior_histograms.clear();
    report.failures.clear();
    for (auto v : report.variants) {
        report.aggregate_histograms[v];
        report.behavior_histograms[v];
    }
    for (auto s : {Status::NoCodeFence, Status::ParseFailed, Status::BackendFailed}) {
        report.failures[std::string(to_string(s))] = 0;
    }
    for (const auto& r : report.results) {
        if (r.status != Status::Ok) {
            ++report.failures[std::string(to_string(r.status))];
            continue;
        }
        report.aggregate_histograms[r.variant] += r.histogram;
        auto& nested = report.behavior_histograms[r.variant];
        for (const auto& a : r.annotations) {
            if (a.enclosing.kind == acsl::EnclosingKind::BehaviorBody) nested.add(a.kind);
        }
    }
}

ExperimentReport run(const Corpus& corpus, std::span<const PromptVariant> requested,
                     const GenerationConfig& config,
                     const std::map<PromptVariant, prompt::PromptTemplate>& templates,
                     gateway::Gateway& gw, const RunOptions& options)
{
    config.validate();
    const auto variants = normalized_variants(requested);
    if (variants.empty()) {
        throw ConfigError("no prompt variants requested");
    }
    for (auto v : variants) {
        if (!templates.contains(v)) {
            throw ConfigError("no template loaded for variant '" + std::string(to_string(v)) + "'");
        }
    }

    ExperimentReport report;
    report.config = config;
    report.corpus_digest = corpus.digest;
    report.variants = variants;
    report.normalization = options.normalization;
    report.load_issues = corpus.issues;

    // Prompts are built up front so worker threads only share read-only data.
    std::vector<prompt::BuiltPrompt> prompts;
    std::vector<Task> tasks;
    for (const auto& entry : corpus.entries) {
        report.provenance[entry.program.name] = entry.provenance;
        for (auto v : variants) {
            if (needs_suite(v) && !entry.suite) {
                report.skipped.push_back({entry.program.name, v, "no test-case CSV"});
                continue;
            }
            if (needs_report(v) && !entry.report) {
                report.skipped.push_back({entry.program.name, v, "no value-analysis report"});
                continue;
            }
            try {
                prompts.push_back(prompt::build_prompt(templates.at(v), entry.program,
                                                       entry.suite ? &*entry.suite : nullptr,
                                                       entry.report ? &*entry.report : nullptr));
            } catch (const prompt::PromptError& e) {
                report.skipped.push_back({entry.program.name, v, e.what()});
                continue;
            }
            for (int s = 0; s < config.samples_per_program; ++s) {
                tasks.push_back({&entry, prompts.size() - 1, s});
            }
        }
    }
    report.results.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            report.results[i] = execute(tasks[i], prompts[tasks[i].prompt_index], config, gw);
        }
    };
    const auto thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(gw.max_inflight()), tasks.size());
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < thread_count; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();

    std::sort(report.results.begin(), report.results.end(),
              [](const auto& a, const auto& b) { return result_key(a) < result_key(b); });
    std::sort(report.skipped.begin(), report.skipped.end(), [](const auto& a, const auto& b) {
        return std::tie(a.program_name, a.variant) < std::tie(b.program_name, b.variant);
    });
    aggregate(report);
    const auto pairs = mutant_pairs(corpus);
    report.robustness = robustness_from_results(report.results, pairs, variants);
    return report;
}

std::vector<MutantPair> mutant_pairs(const Corpus& corpus)
{
    std::vector<MutantPair> pairs;
    for (const auto& e : corpus.entries) {
        if (e.program.mutant_of && corpus.find(e.program.mutant_of->parent_name)) {
            pairs.push_back({e.program.mutant_of->parent_name, e.program.name});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.parent, a.mutant) < std::tie(b.parent, b.mutant);
    });
    return pairs;
}

std::vector<RobustnessRow> robustness_from_results(std::span<const GenerationResult> results,
                                                   std::span<const MutantPair> pairs,
                                                   std::span<const PromptVariant> requested)
{
    std::map<std::tuple<std::string, PromptVariant, int>, const GenerationResult*> ok;
    for (const auto& r : results) {
        if (r.status == Status::Ok) ok[{r.program_name, r.variant, r.sample_index}] = &r;
    }
    std::vector<RobustnessRow> rows;
    for (auto v : normalized_variants(requested)) {
        for (const auto& pair : pairs) {
            RobustnessRow row{pair.parent, pair.mutant, v, std::nullopt, 0};
            double sum = 0;
            for (const auto& [key, parent] : ok) {
                if (std::get<0>(key) != pair.parent || std::get<1>(key) != v) continue;
                auto it = ok.find({pair.mutant, v, std::get<2>(key)});
                if (it == ok.end()) continue;
                sum += acsl::spec_similarity(parent->annotations, it->second->annotations);
                ++row.compared_samples;
            }
            if (row.compared_samples > 0) row.mean_similarity = sum / row.compared_samples;
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.variant, a.parent, a.mutant) < std::tie(b.variant, b.parent, b.mutant);
    });
    return rows;
}

std::vector<RobustnessRow> robustness_study(const Corpus& corpus, std::span<const MutantPair> pairs,
                                            std::span<const PromptVariant> variants,
                                            const GenerationConfig& config,
                                            const std::map<PromptVariant, prompt::PromptTemplate>& templates,
                                            gateway::Gateway& gw)
{
    Corpus subset;
    subset.digest = corpus.digest;
    std::set<std::string> names;
    for (const auto& p : pairs) {
        for (const auto& name : {p.parent, p.mutant}) {
            const auto* entry = corpus.find(name);
            if (!entry) throw ConfigError("robustness pair names unknown program '" + name + "'");
            if (names.insert(name).second) subset.entries.push_back(*entry);
        }
    }
    if (subset.entries.empty()) return {};
    auto report = run(subset, variants, config, templates, gw);
    return robustness_from_results(report.results, pairs, variants);
}

std::string histogram_csv(const ExperimentReport& report)
{
    std::set<AnnotationKind> observed;
    for (const auto& [v, h] : report.aggregate_histograms) {
        for (const auto& [kind, n] : h.entries()) observed.insert(kind);
    }
    auto cell = [&](PromptVariant v, const AnnotationKind& kind) -> std::string {
        auto it = report.aggregate_histograms.find(v);
        long n = it == report.aggregate_histograms.end() ? 0 : it->second.count(kind);
        if (report.normalization == Normalization::PerSample) {
            return format_number(static_cast<double>(n) / report.config.samples_per_program);
        }
        return std::to_string(n);
    };
    std::string out = "kind,baseline_count,pathcrawler_count,eva_count\n";
    for (const auto& kind : observed) {
        out += kind.id();
        for (auto v : kAllVariants) out += "," + cell(v, kind);
        out += "\n";
    }
    return out;
}

std::string robustness_csv(const ExperimentReport& report)
{
    std::string out = "variant,parent,mutant,mean_similarity,compared_samples\n";
    for (const auto& row : report.robustness) {
        out += std::string(to_string(row.variant)) + "," + row.parent + "," + row.mutant + "," +
               (row.mean_similarity ? format_number(*row.mean_similarity) : std::string()) + "," +
               std::to_string(row.compared_samples) + "\n";
    }
    return out;
}

void emit(const ExperimentReport& report, const fs::path& directory)
{
    std::error_code ec;
    fs::create_directories(directory / "generated", ec);
    if (ec) {
        throw gateway::IoError(gateway::IoError::Reason::WriteFailed,
                               "cannot create " + (directory / "generated").string());
    }
    write_file(directory / "report.json", canonical_dump(report));
    write_file(directory / "histogram.csv", histogram_csv(report));
    write_file(directory / "robustness.csv", robustness_csv(report));
    for (const auto& r : report.results) {
        if (r.status != Status::Ok || !r.split) continue;
        auto dir = directory / "generated" / r.program_name / std::string(to_string(r.variant));
        fs::create_directories(dir, ec);
        if (ec) {
            throw gateway::IoError(gateway::IoError::Reason::WriteFailed, "cannot create " + dir.string());
        }
        write_file(dir / (std::to_string(r.sample_index) + ".c"), r.split->code);
    }
}

ExperimentReport load_report(const fs::path& report_json)
{
    if (!fs::is_regular_file(report_json)) {
        throw ConfigError("report file " + report_json.string() + " does not exist");
    }
    try {
        return nlohmann::json::parse(read_file(report_json)).get<ExperimentReport>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed report " + report_json.string() + ": " + e.what());
    }
}

void to_json(nlohmann::json& j, const LoadIssue& value)
{
    j = nlohmann::json{{"program", value.program}, {"file", value.file}, {"message", value.message}};
}

void from_json(const nlohmann::json& j, LoadIssue& value)
{
    j.at("program").get_to(value.program);
    j.at("file").get_to(value.file);
    j.at("message").get_to(value.message);
}

void to_json(nlohmann::json& j, const GenerationResult& value)
{
    j = nlohmann::json{{"program", value.program_name},
                       {"variant", value.variant},
                       {"sample_index", value.sample_index},
                       {"context_digest", value.context_digest},
                       {"prompt_warnings", value.prompt_warnings},
                       {"response", nullptr},
                       {"split", nullptr},
                       {"annotations", value.annotations},
                       {"histogram", value.histogram},
                       {"lint_issues", value.lint_issues},
                       {"preservation", value.preservation},
                       {"status", to_string(value.status)},
                       {"reason", value.reason}};
    if (value.response) j["response"] = *value.response;
    if (value.split) j["split"] = *value.split;
}

void from_json(const nlohmann::json& j, GenerationResult& value)
{
    j.at("program").get_to(value.program_name);
    j.at("variant").get_to(value.variant);
    j.at("sample_index").get_to(value.sample_index);
    j.at("context_digest").get_to(value.context_digest);
    j.at("prompt_warnings").get_to(value.prompt_warnings);
    value.response.reset();
    if (!j.at("response").is_null()) value.response = j["response"].get<gateway::CompletionResponse>();
    value.split.reset();
    if (!j.at("split").is_null()) value.split = j["split"].get<acsl::SplitResponse>();
    j.at("annotations").get_to(value.annotations);
    j.at("histogram").get_to(value.histogram);
    j.at("lint_issues").get_to(value.lint_issues);
    j.at("preservation").get_to(value.preservation);
    value.status = parse_status(j.at("status").get<std::string>());
    j.at("reason").get_to(value.reason);
}

void to_json(nlohmann::json& j, const SkipRecord& value)
{
    j = nlohmann::json{
        {"program", value.program_name}, {"variant", value.variant}, {"reason", value.reason}};
}

void from_json(const nlohmann::json& j, SkipRecord& value)
{
    j.at("program").get_to(value.program_name);
    j.at("variant").get_to(value.variant);
    j.at("reason").get_to(value.reason);
}

void to_json(nlohmann::json& j, const RobustnessRow& value)
{
    j = nlohmann::json{{"parent", value.parent},
                       {"mutant", value.mutant},
                       {"variant", value.variant},
                       {"mean_similarity", nullptr},
                       {"compared_samples", value.compared_samples}};
    if (value.mean_similarity) j["mean_similarity"] = *value.mean_similarity;
}

void from_json(const nlohmann::json& j, RobustnessRow& value)
{
    j.at("parent").get_to(value.parent);
    j.at("mutant").get_to(value.mutant);
    j.at("variant").get_to(value.variant);
    value.mean_similarity.reset();
    if (!j.at("mean_similarity").is_null()) value.mean_similarity = j["mean_similarity"].get<double>();
    j.at("compared_samples").get_to(value.compared_samples);
}

namespace {

template <typename T>
nlohmann::json by_variant(const std::map<PromptVariant, T>& values)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [v, h] : values) out[std::string(to_string(v))] = h;
    return out;
}

template <typename T>
std::map<PromptVariant, T> variant_map(const nlohmann::json& j)
{
    std::map<PromptVariant, T> out;
    for (const auto& [key, value] : j.items()) out[parse_variant(key)] = value.template get<T>();
    return out;
}

}  // namespace

void to_json(nlohmann::json& j, const ExperimentReport& value)
{
    j = nlohmann::json{
        {"config", value.config},
        {"corpus_digest", value.corpus_digest},
        {"variants", value.variants},
        {"normalization", value.normalization == Normalization::PerSample ? "per_sample" : "total"},
        {"provenance", value.provenance},
        {"results", value.results},
        {"skipped", value.skipped},
        {"load_issues", value.load_issues},
        {"aggregate_histograms", by_variant(value.aggregate_histograms)},
        {"behavior_histograms", by_variant(value.behavior_histograms)},
        {"robustness", value.robustness},
        {"failures", value.failures},
    };
}

void from_json(const nlohmann::json& j, ExperimentReport& value)
{
    j.at("config").get_to(value.config);
    j.at("corpus_digest").get_to(value.corpus_digest);
    j.at("variants").get_to(value.variants);
    value.normalization = j.at("normalization").get<std::string>() == "per_sample"
                              ? Normalization::PerSample
                              : Normalization::Total;
    j.at("provenance").get_to(value.provenance);
    j.at("results").get_to(value.results);
    j.at("skipped").get_to(value.skipped);
    j.at("load_issues").get_to(value.load_issues);
    value.aggregate_histograms = variant_map<acsl::Histogram>(j.at("aggregate_histograms"));
    value.behavior_histograms = variant_map<acsl::Histogram>(j.at("behavior_histograms"));
    j.at("robustness").get_to(value.robustness);
    j.at("failures").get_to(value.failures);
}

}  // namespace specforge::experiment
