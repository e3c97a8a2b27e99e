#include <gtest/gtest.h>

#include <random>

#include "specforge/experiment.hpp"
#include "test_support.hpp"

using namespace specforge;
using namespace specforge::experiment;
using sftest::TempDir;
using sftest::data_dir;
using sftest::read_file;
using sftest::write_file;
namespace fs = std::filesystem;

namespace {

const std::map<PromptVariant, prompt::PromptTemplate>& templates()
{
    static const auto t = prompt::load_templates(data_dir() / "templates");
    return t;
}

const Corpus& shipped_corpus()
{
    static const auto c = load_corpus(data_dir() / "corpus");
    return c;
}

ExperimentReport run_replay(const Corpus& corpus, const fs::path& fixtures,
                            std::vector<PromptVariant> variants = {std::begin(kAllVariants), std::end(kAllVariants)},
                            int inflight = 4, RunOptions options = {})
{
    gateway::Gateway gw(std::make_unique<gateway::ReplayBackend>(fixtures), inflight);
    return run(corpus, variants, GenerationConfig{}, templates(), gw, options);
}

const ExperimentReport& shipped_report()
{
    static const auto r = run_replay(shipped_corpus(), data_dir() / "fixtures");
    return r;
}

std::size_t files_named(const std::string& file)
{
    std::size_t n = 0;
    for (const auto& name : sftest::corpus_names()) n += fs::exists(data_dir() / "corpus" / name / file);
    return n;
}

void copy_tree(const fs::path& from, const fs::path& to)
{
    fs::create_directories(to);
    fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

}  // namespace

TEST(Corpus, LoadsEveryProgramAndContext)
{
    const auto& corpus = shipped_corpus();
    EXPECT_EQ(corpus.entries.size(), sftest::corpus_names().size());
    EXPECT_GE(corpus.entries.size(), 8u);
    std::size_t suites = 0, reports = 0;
    for (const auto& e : corpus.entries) {
        suites += e.suite.has_value();
        reports += e.report.has_value();
        EXPECT_NE(e.provenance, "unlabelled") << e.program.name;
    }
    EXPECT_EQ(suites, files_named("tests.csv"));
    EXPECT_EQ(reports, files_named("eva.txt"));
    EXPECT_TRUE(corpus.issues.empty());
    EXPECT_EQ(corpus.digest.size(), 64u);
    ASSERT_NE(corpus.find("tritype_mut"), nullptr);
    EXPECT_EQ(corpus.find("tritype_mut")->program.mutant_of->parent_name, "tritype");
    EXPECT_EQ(corpus.find("tritype")->program.entry_function, "tritype");
    EXPECT_EQ(corpus.find("nope"), nullptr);
    EXPECT_TRUE(std::is_sorted(corpus.entries.begin(), corpus.entries.end(),
                               [](const auto& a, const auto& b) { return a.program.name < b.program.name; }));
}

TEST(Corpus, EmptyOrMissingDirectory)
{
    TempDir dir;
    EXPECT_THROW(load_corpus(dir.path()), EmptyCorpus);
    EXPECT_THROW(load_corpus(dir.path() / "absent"), EmptyCorpus);
    write_file(dir.path() / "x" / "notes.txt", "no program here");
    EXPECT_THROW(load_corpus(dir.path()), EmptyCorpus);
}

TEST(Corpus, MalformedContextBecomesIssue)
{
    TempDir dir;
    copy_tree(data_dir() / "corpus" / "adpcm", dir.path() / "adpcm");
    write_file(dir.path() / "adpcm" / "tests.csv", "input_a,output,verdict\n1,2\n");
    write_file(dir.path() / "adpcm" / "meta.json", "{not json");
    auto corpus = load_corpus(dir.path());
    ASSERT_EQ(corpus.entries.size(), 1u);
    EXPECT_FALSE(corpus.entries[0].suite.has_value());
    ASSERT_EQ(corpus.issues.size(), 2u);
    EXPECT_EQ(corpus.issues[0].file, "meta.json");
    EXPECT_EQ(corpus.issues[1].file, "tests.csv");
    EXPECT_EQ(corpus.issues[1].program, "adpcm");
}

TEST(Corpus, DigestTracksContent)
{
    TempDir a, b;
    copy_tree(data_dir() / "corpus" / "tritype", a.path() / "tritype");
    copy_tree(data_dir() / "corpus" / "tritype", b.path() / "tritype");
    EXPECT_EQ(load_corpus(a.path()).digest, load_corpus(b.path()).digest);
    write_file(b.path() / "tritype" / "program.c", read_file(b.path() / "tritype" / "program.c") + "\n");
    EXPECT_NE(load_corpus(a.path()).digest, load_corpus(b.path()).digest);
}

TEST(Corpus, HookCommandsReplaceContextFiles)
{
    TempDir dir;
    copy_tree(data_dir() / "corpus" / "tritype", dir.path() / "tritype");
    const auto csv = read_file(data_dir() / "corpus" / "adpcm" / "tests.csv");
    write_file(dir.path() / "generated.csv", csv);
    LoadOptions options;
    options.pathcrawler_command = "cat '" + (dir.path() / "generated.csv").string() + "'; true";
    auto corpus = load_corpus(dir.path(), options);
    ASSERT_TRUE(corpus.entries[0].suite.has_value());
    EXPECT_EQ(corpus.entries[0].suite->raw, csv);

    options.pathcrawler_command = "false";
    auto failed = load_corpus(dir.path(), options);
    EXPECT_FALSE(failed.entries[0].suite.has_value());
    ASSERT_EQ(failed.issues.size(), 1u);
    EXPECT_EQ(failed.issues[0].file, "tests.csv");
}

TEST(Run, EveryCellIsAResultOrASkip)
{
    const auto& corpus = shipped_corpus();
    const auto& report = shipped_report();
    std::size_t expected_results = 0, expected_skips = 0;
    for (const auto& e : corpus.entries) {
        expected_results += 3;
        for (bool has_context : {e.suite.has_value(), e.report.has_value()}) {
            if (has_context) expected_results += 3;
            else ++expected_skips;
        }
    }
    EXPECT_EQ(report.results.size(), expected_results);
    EXPECT_EQ(report.skipped.size(), expected_skips);
    for (const auto& s : report.skipped) {
        const auto* e = corpus.find(s.program_name);
        ASSERT_NE(e, nullptr);
        if (s.variant == PromptVariant::Pathcrawler) EXPECT_FALSE(e->suite.has_value());
        if (s.variant == PromptVariant::Eva) EXPECT_FALSE(e->report.has_value());
        EXPECT_NE(s.variant, PromptVariant::Baseline);
        EXPECT_FALSE(s.reason.empty());
    }
    for (const auto& r : report.results) {
        EXPECT_EQ(r.status, Status::Ok) << r.program_name << "/" << to_string(r.variant) << "/" << r.sample_index << ": " << r.reason;
        EXPECT_TRUE(r.preservation.preserved) << r.program_name;
        EXPECT_EQ(r.variant == PromptVariant::Baseline, r.context_digest.empty());
    }
    EXPECT_EQ(report.corpus_digest, corpus.digest);
    EXPECT_EQ(report.provenance.size(), corpus.entries.size());
    EXPECT_TRUE(std::is_sorted(report.results.begin(), report.results.end(), [](const auto& a, const auto& b) {
        return std::tie(a.program_name, a.variant, a.sample_index) < std::tie(b.program_name, b.variant, b.sample_index);
    }));
}

TEST(Run, MissingFixtureFailsOnlyThatCell)
{
    TempDir dir;
    copy_tree(data_dir() / "fixtures", dir.path() / "fixtures");
    fs::remove(dir.path() / "fixtures" / "tritype" / "pathcrawler" / "1.txt");
    auto report = run_replay(shipped_corpus(), dir.path() / "fixtures");
    int failed = 0;
    for (const auto& r : report.results) {
        if (r.status == Status::Ok) continue;
        ++failed;
        EXPECT_EQ(r.status, Status::BackendFailed);
        EXPECT_EQ(r.program_name, "tritype");
        EXPECT_EQ(r.variant, PromptVariant::Pathcrawler);
        EXPECT_EQ(r.sample_index, 1);
        EXPECT_NE(r.reason.find("tritype/pathcrawler/1"), std::string::npos);
        EXPECT_FALSE(r.response.has_value());
    }
    EXPECT_EQ(failed, 1);
    EXPECT_EQ(report.failures.at("backend_failed"), 1);
    EXPECT_EQ(report.failures.at("no_code_fence"), 0);
    EXPECT_EQ(report.results.size(), shipped_report().results.size());
}

TEST(Run, UnusableResponsesAreClassified)
{
    TempDir dir;
    copy_tree(data_dir() / "corpus" / "tritype", dir.path() / "corpus" / "tritype");
    const auto fx = dir.path() / "fixtures" / "tritype" / "baseline";
    write_file(fx / "0.txt", "I cannot help with that.\n");
    write_file(fx / "1.txt", "```c\n/*@ requires x; */ int tritype(\n```\n");
    write_file(fx / "2.txt", "```c\n/*@ requires open\n```\n");
    auto corpus = load_corpus(dir.path() / "corpus");
    std::vector<PromptVariant> only_baseline = {PromptVariant::Baseline};
    auto report = run_replay(corpus, dir.path() / "fixtures", only_baseline);
    ASSERT_EQ(report.results.size(), 3u);
    EXPECT_EQ(report.results[0].status, Status::NoCodeFence);
    // Altered code is a preservation finding, not a failure.
    EXPECT_EQ(report.results[1].status, Status::Ok);
    EXPECT_FALSE(report.results[1].preservation.preserved);
    EXPECT_EQ(report.results[2].status, Status::ParseFailed);
    EXPECT_TRUE(report.results[2].annotations.empty());
    EXPECT_EQ(report.failures.at("no_code_fence"), 1);
    EXPECT_EQ(report.failures.at("parse_failed"), 1);
    EXPECT_EQ(report.aggregate_histograms.at(PromptVariant::Baseline).total(), 1);
}

TEST(Run, ConfigErrors)
{
    gateway::Gateway gw(std::make_unique<gateway::ReplayBackend>(data_dir() / "fixtures"));
    std::vector<PromptVariant> none;
    EXPECT_THROW(run(shipped_corpus(), none, GenerationConfig{}, templates(), gw), ConfigError);
    auto partial = templates();
    partial.erase(PromptVariant::Eva);
    std::vector<PromptVariant> eva = {PromptVariant::Eva};
    EXPECT_THROW(run(shipped_corpus(), eva, GenerationConfig{}, partial, gw), ConfigError);
    GenerationConfig bad;
    bad.temperature = -1;
    EXPECT_THROW(run(shipped_corpus(), eva, bad, templates(), gw), ConfigError);
}

TEST(Aggregate, SumOfPerResultHistograms)
{
    const auto& report = shipped_report();
    std::map<PromptVariant, acsl::Histogram> oracle;
    for (auto v : kAllVariants) oracle[v];
    for (const auto& r : report.results) {
        if (r.status != Status::Ok) continue;
        for (const auto& a : r.annotations) oracle[r.variant].add(a.kind);
    }
    EXPECT_EQ(report.aggregate_histograms, oracle);
}

TEST(Aggregate, InsensitiveToOrderAndConcurrency)
{
    auto shuffled = shipped_report();
    std::mt19937 rng(7);
    std::shuffle(shuffled.results.begin(), shuffled.results.end(), rng);
    aggregate(shuffled);
    EXPECT_EQ(shuffled.aggregate_histograms, shipped_report().aggregate_histograms);
    EXPECT_EQ(shuffled.behavior_histograms, shipped_report().behavior_histograms);
    EXPECT_EQ(shuffled.failures, shipped_report().failures);

    auto serial = run_replay(shipped_corpus(), data_dir() / "fixtures",
                             {std::begin(kAllVariants), std::end(kAllVariants)}, 1);
    EXPECT_EQ(serial, shipped_report());
}

TEST(Aggregate, RequiresAndEnsuresLead)
{
    acsl::Histogram total;
    for (const auto& [v, h] : shipped_report().aggregate_histograms) total += h;
    std::vector<std::pair<long, std::string>> ranked;
    for (const auto& [kind, n] : total.entries()) ranked.emplace_back(n, kind.id());
    std::sort(ranked.rbegin(), ranked.rend());
    ASSERT_GE(ranked.size(), 2u);
    std::set<std::string> top = {ranked[0].second, ranked[1].second};
    EXPECT_EQ(top, (std::set<std::string>{"requires", "ensures"}));
}

TEST(Emit, DeterministicFilesAndFixedPoint)
{
    TempDir a, b, c;
    emit(shipped_report(), a.path());
    emit(shipped_report(), b.path());
    for (const auto* name : {"report.json", "histogram.csv", "robustness.csv"}) {
        EXPECT_EQ(read_file(a.path() / name), read_file(b.path() / name)) << name;
    }
    auto loaded = load_report(a.path() / "report.json");
    EXPECT_EQ(loaded, shipped_report());
    emit(loaded, c.path());
    EXPECT_EQ(read_file(c.path() / "report.json"), read_file(a.path() / "report.json"));
    EXPECT_EQ(read_file(c.path() / "histogram.csv"), read_file(a.path() / "histogram.csv"));

    std::size_t generated = 0;
    for (const auto& e : fs::recursive_directory_iterator(a.path() / "generated")) generated += e.is_regular_file();
    EXPECT_EQ(generated, shipped_report().results.size());
    const auto& first = shipped_report().results.front();
    EXPECT_EQ(read_file(a.path() / "generated" / first.program_name / std::string(to_string(first.variant)) /
                        (std::to_string(first.sample_index) + ".c")),
              first.split->code);
}

TEST(Emit, HistogramCsvRecomputedFromReportJson)
{
    TempDir dir;
    emit(shipped_report(), dir.path());
    const auto json = nlohmann::json::parse(read_file(dir.path() / "report.json"));
    // Independent tally straight from the serialized annotations.
    std::map<std::string, std::map<std::string, long>> tally;
    for (const auto& r : json.at("results")) {
        if (r.at("status") != "ok") continue;
        for (const auto& a : r.at("annotations")) ++tally[a.at("kind").get<std::string>()][r.at("variant").get<std::string>()];
    }
    std::set<std::string> csv_kinds;
    std::istringstream in(read_file(dir.path() / "histogram.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "kind,baseline_count,pathcrawler_count,eva_count");
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 4u) << line;
        csv_kinds.insert(cells[0]);
        const auto& counts = tally[cells[0]];
        auto get = [&](const char* v) { auto it = counts.find(v); return it == counts.end() ? 0L : it->second; };
        EXPECT_EQ(std::stol(cells[1]), get("baseline")) << cells[0];
        EXPECT_EQ(std::stol(cells[2]), get("pathcrawler")) << cells[0];
        EXPECT_EQ(std::stol(cells[3]), get("eva")) << cells[0];
    }
    std::set<std::string> tally_kinds;
    for (const auto& [k, v] : tally) tally_kinds.insert(k);
    EXPECT_EQ(csv_kinds, tally_kinds);
}

TEST(Emit, PerSampleNormalization)
{
    auto per_sample = run_replay(shipped_corpus(), data_dir() / "fixtures",
                                 {std::begin(kAllVariants), std::end(kAllVariants)}, 4,
                                 RunOptions{Normalization::PerSample});
    EXPECT_EQ(per_sample.aggregate_histograms, shipped_report().aggregate_histograms);
    const auto csv = histogram_csv(per_sample);
    const long requires_baseline =
        shipped_report().aggregate_histograms.at(PromptVariant::Baseline).count(AnnotationKind(AnnotationKind::Tag::Requires));
    char expected[64];
    std::snprintf(expected, sizeof expected, "requires,%.6f,", static_cast<double>(requires_baseline) / 3.0);
    EXPECT_NE(csv.find(expected), std::string::npos) << csv;
}

TEST(Emit, EmptyReportWritesHeaders)
{
    TempDir dir;
    ExperimentReport empty;
    emit(empty, dir.path());
    EXPECT_EQ(read_file(dir.path() / "histogram.csv"), "kind,baseline_count,pathcrawler_count,eva_count\n");
    EXPECT_EQ(read_file(dir.path() / "robustness.csv"), "variant,parent,mutant,mean_similarity,compared_samples\n");
    EXPECT_TRUE(fs::is_directory(dir.path() / "generated"));
    EXPECT_EQ(load_report(dir.path() / "report.json"), empty);
}

TEST(Emit, LoadReportErrors)
{
    TempDir dir;
    EXPECT_THROW(load_report(dir.path() / "absent.json"), ConfigError);
    write_file(dir.path() / "bad.json", "{\"results\": 3}");
    EXPECT_THROW(load_report(dir.path() / "bad.json"), ConfigError);
}

TEST(Robustness, ShippedPairs)
{
    auto pairs = mutant_pairs(shipped_corpus());
    std::vector<MutantPair> expected = {{"levenshtein", "levenshtein_mut"}, {"tritype", "tritype_mut"}};
    EXPECT_EQ(pairs, expected);
    const auto& rows = shipped_report().robustness;
    EXPECT_EQ(rows.size(), pairs.size() * 3);
    for (const auto& row : rows) {
        if (row.variant != PromptVariant::Baseline) {
            // Neither end of either pair has both kinds of context.
            EXPECT_FALSE(row.mean_similarity.has_value());
            continue;
        }
        ASSERT_TRUE(row.mean_similarity.has_value());
        EXPECT_EQ(row.compared_samples, 3);
        double oracle = 0;
        for (int s = 0; s < 3; ++s) {
            auto a = acsl::parse_annotations(sftest::fixture_code(row.parent, "baseline", s));
            auto b = acsl::parse_annotations(sftest::fixture_code(row.mutant, "baseline", s));
            oracle += acsl::spec_similarity(a, b) / 3.0;
        }
        EXPECT_NEAR(*row.mean_similarity, oracle, 1e-12) << row.parent;
    }
}

TEST(Robustness, ProgramPairedWithItselfScoresOne)
{
    TempDir dir;
    copy_tree(data_dir() / "corpus" / "tritype", dir.path() / "corpus" / "tritype");
    copy_tree(data_dir() / "corpus" / "tritype", dir.path() / "corpus" / "twin");
    write_file(dir.path() / "corpus" / "twin" / "meta.json",
               R"({"mutant_of": {"parent_name": "tritype", "mutation_id": "identity"}})");
    copy_tree(data_dir() / "fixtures" / "tritype", dir.path() / "fixtures" / "tritype");
    copy_tree(data_dir() / "fixtures" / "tritype", dir.path() / "fixtures" / "twin");
    auto corpus = load_corpus(dir.path() / "corpus");
    gateway::Gateway gw(std::make_unique<gateway::ReplayBackend>(dir.path() / "fixtures"));
    std::vector<PromptVariant> variants = {PromptVariant::Baseline, PromptVariant::Pathcrawler};
    auto rows = robustness_study(corpus, mutant_pairs(corpus), variants, GenerationConfig{}, templates(), gw);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) {
        ASSERT_TRUE(row.mean_similarity.has_value());
        EXPECT_DOUBLE_EQ(*row.mean_similarity, 1.0);
        EXPECT_EQ(row.compared_samples, 3);
    }
    const auto csv = robustness_csv(ExperimentReport{.robustness = rows});
    EXPECT_NE(csv.find("baseline,tritype,twin,1"), std::string::npos) << csv;
}

TEST(ExperimentJson, StatusNames)
{
    for (auto s : {Status::Ok, Status::NoCodeFence, Status::ParseFailed, Status::BackendFailed}) {
        EXPECT_EQ(parse_status(to_string(s)), s);
    }
    EXPECT_THROW(parse_status("weird"), Error);
}
