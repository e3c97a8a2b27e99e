// Acceptance driver: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <functional>
#include <iostream>

#include "specforge/acsl.hpp"
#include "specforge/digest.hpp"
#include "specforge/eva.hpp"
#include "specforge/experiment.hpp"
#include "specforge/mutation.hpp"
#include "specforge/pathcrawler.hpp"
#include "specforge/prompt.hpp"
#include "test_support.hpp"

using namespace specforge;
using namespace sftest;
using Tag = AnnotationKind::Tag;

namespace {

struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what)
    {
        if (!ok) failures.push_back(what);
    }
};

int failed_criteria = 0;

void criterion(int n, const std::string& title, const std::function<void(Check&)>& body)
{
    Check check;
    try {
        body(check);
    } catch (const std::exception& e) {
        check.failures.push_back(std::string("exception: ") + e.what());
    }
    if (check.failures.empty()) {
        std::cout << "PASS criterion " << n << ": " << title << "\n";
        return;
    }
    ++failed_criteria;
    std::cout << "FAIL criterion " << n << ": " << title << " (" << check.failures.front();
    if (check.failures.size() > 1) std::cout << "; +" << check.failures.size() - 1 << " more";
    std::cout << ")\n";
}

std::string corpus_file(const std::string& program, const std::string& file)
{
    return read_file(data_dir() / "corpus" / program / file);
}

std::vector<std::filesystem::path> fixture_files()
{
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(data_dir() / "fixtures")) {
        if (e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

void csv_adapter(Check& c)
{
    const auto raw = corpus_file("adpcm", "tests.csv");
    const auto suite = pathcrawler::parse_test_csv(raw);
    c.expect(suite.cases.size() == 3, "case count");
    c.expect(suite.input_columns().size() == 4, "input column count");
    std::vector<std::string> outputs;
    bool verdicts = true;
    for (const auto& tc : suite.cases) {
        outputs.push_back(tc.output);
        verdicts = verdicts && tc.verdict == "unknown";
    }
    c.expect(outputs == std::vector<std::string>{"0", "0", "1"}, "outputs");
    c.expect(verdicts, "verdicts");
    c.expect(pathcrawler::render_csv(suite) == raw, "render is not byte-identical");

    std::vector<double> micros;
    for (int i = 0; i < 201; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        auto parsed = pathcrawler::parse_test_csv(raw);
        const auto t1 = std::chrono::steady_clock::now();
        micros.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        if (parsed.cases.size() != 3) c.expect(false, "unstable parse");
    }
    std::nth_element(micros.begin(), micros.begin() + 100, micros.end());
    c.expect(micros[100] < 1000.0, "median parse " + std::to_string(micros[100]) + " us");
}

void eva_adapter(Check& c)
{
    const auto f = eva::parse_eva_report(corpus_file("labels_tritype", "eva.txt"));
    c.expect(f.alarms.size() == 6, "alarm count " + std::to_string(f.alarms.size()));
    for (const auto& a : f.alarms) c.expect(a.kind == eva::AlarmKind::SignedOverflow, "non-overflow alarm");
    auto domain_of = [&](const std::string& var) {
        for (const auto& d : f.domains) {
            if (d.variable == var) return d.domain;
        }
        return std::string("<absent>");
    };
    c.expect(domain_of("triOut") == "{1; 2; 3; 4}", "triOut domain");
    c.expect(domain_of("__retres") == "{1; 2; 3; 4}", "__retres domain");
    c.expect(f.summary_alarm_count == 6, "summary alarm count");
    c.expect(eva::consistency_check(f).empty(), "consistency discrepancies");

    const auto alias = eva::parse_eva_report(corpus_file("alias5", "eva.txt"));
    c.expect(alias.alarms.size() == 5, "alias5 alarm count");
    int oob = 0;
    for (const auto& a : alias.alarms) {
        if (a.kind == eva::AlarmKind::OutOfBoundsWrite) {
            ++oob;
            c.expect(a.assertion == "\\valid(tab + 2)", "alias5 assertion " + a.assertion);
        }
    }
    c.expect(oob == 1, "alias5 out-of-bounds write count");
}

void census(Check& c)
{
    const auto d = acsl::count_by_kind(acsl::parse_annotations(fixture_code("bsearch", "baseline", 0)));
    acsl::Histogram expected;
    for (auto tag : {Tag::Requires, Tag::Ensures, Tag::Assigns, Tag::LoopInvariant, Tag::LoopAssigns,
                     Tag::LoopVariant}) {
        expected.add(AnnotationKind(tag));
    }
    c.expect(d == expected, "plain listing histogram");
    const auto e = acsl::count_by_kind(acsl::parse_annotations(fixture_code("bsearch", "baseline", 1)));
    c.expect(e.count(AnnotationKind(Tag::Assert)) >= 1, "rich listing asserts");
    c.expect(e.count(AnnotationKind(Tag::Assigns)) >= 8, "rich listing assigns");
}

void preservation(Check& c)
{
    const auto d = acsl::strip_annotations(fixture_code("bsearch", "baseline", 0));
    const auto e = acsl::strip_annotations(fixture_code("bsearch", "baseline", 1));
    c.expect(token_texts(d) == token_texts(e), "stripped listings differ");
    std::size_t pairs = 0;
    for (const auto& path : fixture_files()) {
        const auto program = corpus_program(path.parent_path().parent_path().filename().string());
        const auto code = acsl::split_response(read_file(path)).code;
        c.expect(acsl::check_code_preserved(program, code).preserved, "not preserved: " + path.string());
        ++pairs;
    }
    c.expect(pairs > 0, "no fixtures");

    auto repaired = fixture_code("tritype_mut", "baseline", 0);
    const auto pos = repaired.find("(i+k <= i)");
    c.expect(pos != std::string::npos, "mutated condition missing from fixture");
    if (pos == std::string::npos) return;
    repaired.replace(pos, 10, "(j+k <= i)");
    const auto verdict = acsl::check_code_preserved(corpus_program("tritype_mut"), repaired);
    c.expect(!verdict.preserved, "repaired output reported as preserved");
    c.expect(verdict.diff.size() == 1 && verdict.diff[0].line == 16 && verdict.diff[0].original == "i" &&
                 verdict.diff[0].modified == "j",
             "repair not localized at line 16");
}

void lint_rules(Check& c)
{
    const auto issues = acsl::lint(
        "void f(int n) {\n  /*@ loop invariant n >= 0;\n    loop variant n;\n    loop assigns n; */\n"
        "  while (n > 0) n--;\n}\n");
    c.expect(issues.size() == 1 && issues[0].rule == acsl::LintRule::VariantBeforeAssigns,
             "constructed loop block");
    c.expect(acsl::lint(fixture_code("bsearch", "baseline", 0)).empty(), "plain listing issues");
}

void mutation_engine(Check& c)
{
    std::size_t mutants = 0;
    for (const auto& name : corpus_names()) {
        const auto parent = corpus_program(name);
        const auto before = token_texts(parent.source);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto [mutant, record] = mutation::mutate(parent, seed);
            std::vector<std::string> after;
            try {
                after = token_texts(mutant.source);
            } catch (const lex::LexError&) {
                c.expect(false, name + " seed " + std::to_string(seed) + " does not re-tokenize");
                continue;
            }
            std::size_t differing = before.size() == after.size() ? 0 : 2;
            for (std::size_t i = 0; differing < 2 && i < before.size(); ++i) differing += before[i] != after[i];
            c.expect(differing == 1, name + " seed " + std::to_string(seed) + " is not a single-token mutant");
            const auto again = mutation::mutate(parent, seed);
            c.expect(again.first.source == mutant.source && again.second == record,
                     name + " seed " + std::to_string(seed) + " is not reproducible");
            ++mutants;
        }
    }
    c.expect(mutants >= 800, "too few programs");
}

void end_to_end(Check& c)
{
    TempDir dir;
    const auto fixtures = dir.path() / "fixtures";
    std::filesystem::copy(data_dir() / "fixtures", fixtures, std::filesystem::copy_options::recursive);
    std::filesystem::remove(fixtures / "bsearch" / "pathcrawler" / "2.txt");
    const auto out = dir.path() / "out";

    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_cli({"generate", "--corpus", (data_dir() / "corpus").string(), "--variants",
                            "baseline,pathcrawler,eva", "--backend", "replay", "--samples", "3", "--fixtures",
                            fixtures.string(), "--out", out.string()});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(seconds < 10.0, "took " + std::to_string(seconds) + " s");
    c.expect(r.exit_code == 1, "exit code " + std::to_string(r.exit_code) + " (expected 1: one failed cell)");
    c.expect(std::filesystem::exists(out / "histogram.csv"), "histogram.csv missing");
    const auto report = nlohmann::json::parse(read_file(out / "report.json"));

    std::set<std::string> programs;
    int backend_failed = 0, other_failed = 0;
    for (const auto& result : report.at("results")) {
        programs.insert(result.at("program").get<std::string>());
        const auto status = result.at("status").get<std::string>();
        const bool deleted = result.at("program") == "bsearch" && result.at("variant") == "pathcrawler" &&
                             result.at("sample_index") == 2;
        if (deleted) {
            c.expect(status == "backend_failed", "deleted cell status " + status);
            backend_failed += status == "backend_failed";
        } else if (status != "ok") {
            ++other_failed;
        }
    }
    c.expect(programs.size() >= 8, "programs in report");
    c.expect(backend_failed == 1, "deleted cell not reported");
    c.expect(other_failed == 0, std::to_string(other_failed) + " other cells failed");

    std::vector<std::pair<long, std::string>> ranked;
    std::istringstream csv(read_file(out / "histogram.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        std::stringstream row(line);
        std::string kind, cell;
        std::getline(row, kind, ',');
        long total = 0;
        while (std::getline(row, cell, ',')) total += std::stol(cell);
        ranked.emplace_back(total, kind);
    }
    std::sort(ranked.rbegin(), ranked.rend());
    c.expect(ranked.size() >= 3 && ranked[1].first > ranked[2].first, "top two kinds are not unique");
    c.expect(ranked.size() >= 2 &&
                 std::set<std::string>{ranked[0].second, ranked[1].second} ==
                     std::set<std::string>{"requires", "ensures"},
             "requires/ensures are not the two most frequent kinds");
}

void robustness(Check& c)
{
    const std::string intended = "i+j <= k || j+k <= i || i+k <= j";
    const std::string typo = "i+k <= i";
    for (int sample = 0; sample < 3; ++sample) {
        const auto annotations = acsl::parse_annotations(fixture_code("tritype_mut", "baseline", sample));
        bool states_intent = false;
        for (const auto& a : annotations) {
            if (a.enclosing.kind == acsl::EnclosingKind::LoopAnnotation ||
                a.enclosing.kind == acsl::EnclosingKind::Statement)
                continue;
            states_intent = states_intent || contains_tokens(a.clause_text, intended);
            c.expect(!contains_tokens(a.clause_text, typo),
                     "sample " + std::to_string(sample) + " clause restates the typo: " + a.clause_text);
        }
        c.expect(states_intent, "sample " + std::to_string(sample) + " lacks the triangle-inequality disjunction");
    }
}

void prompt_builder(Check& c)
{
    const auto templates = prompt::load_templates(data_dir() / "templates");
    const auto corpus = experiment::load_corpus(data_dir() / "corpus");
    std::map<PromptVariant, int> built_per_variant;
    for (const auto& entry : corpus.entries) {
        for (auto variant : kAllVariants) {
            const pathcrawler::TestSuite* suite = entry.suite ? &*entry.suite : nullptr;
            const eva::EvaReport* report = entry.report ? &*entry.report : nullptr;
            if ((variant == PromptVariant::Pathcrawler && !suite) || (variant == PromptVariant::Eva && !report))
                continue;
            const auto& tmpl = templates.at(variant);
            const auto first = prompt::build_prompt(tmpl, entry.program, suite, report);
            const auto second = prompt::build_prompt(tmpl, entry.program, suite, report);
            const std::string where = entry.program.name + "/" + std::string(to_string(variant));
            c.expect(sha256_hex(first.text) == sha256_hex(second.text), where + " is not deterministic");
            c.expect(first.text.find(entry.program.source) != std::string::npos, where + " lacks the program");
            std::string context;
            if (variant == PromptVariant::Pathcrawler) context = pathcrawler::render_csv(*suite);
            if (variant == PromptVariant::Eva) context = report->raw;
            c.expect(first.text.find(context) != std::string::npos, where + " lacks its context");
            // Any {name} left must come from the substituted material itself.
            auto leftover = prompt::placeholders_in(first.text);
            auto inherited = prompt::placeholders_in(entry.program.source + "\n" + context);
            std::sort(leftover.begin(), leftover.end());
            std::sort(inherited.begin(), inherited.end());
            c.expect(std::includes(inherited.begin(), inherited.end(), leftover.begin(), leftover.end()),
                     where + " has unresolved placeholders");
            ++built_per_variant[variant];
        }
    }
    for (auto variant : kAllVariants) {
        c.expect(built_per_variant[variant] > 0, "no prompt built for " + std::string(to_string(variant)));
    }
}

}  // namespace

int main()
{
    criterion(1, "test-case CSV adapter", csv_adapter);
    criterion(2, "value-analysis report adapter", eva_adapter);
    criterion(3, "annotation census", census);
    criterion(4, "code preservation", preservation);
    criterion(5, "annotation lint", lint_rules);
    criterion(6, "single-token mutation engine", mutation_engine);
    criterion(7, "end-to-end replay generation", end_to_end);
    criterion(8, "mutant robustness keeps intent", robustness);
    criterion(9, "prompt builder", prompt_builder);
    std::cout << (failed_criteria == 0 ? "all criteria passed" : std::to_string(failed_criteria) + " criteria failed")
              << "\n";
    return failed_criteria == 0 ? 0 : 1;
}
