#include <gtest/gtest.h>

#include "specforge/digest.hpp"
#include "specforge/prompt.hpp"
#include "test_support.hpp"

using namespace specforge;
using namespace specforge::prompt;
using sftest::corpus_program;
using sftest::data_dir;
using sftest::read_file;

namespace {

const std::map<PromptVariant, PromptTemplate>& shipped()
{
    static const auto templates = load_templates(data_dir() / "templates");
    return templates;
}

PromptTemplate make(PromptVariant v, std::string body)
{
    return PromptTemplate{v, std::move(body), {}};
}

}  // namespace

TEST(Templates, ShippedTemplatesValidate)
{
    ASSERT_EQ(shipped().size(), 3u);
    for (const auto& [variant, tmpl] : shipped()) {
        EXPECT_EQ(tmpl.variant, variant);
        EXPECT_NO_THROW(tmpl.validate());
        EXPECT_EQ(tmpl.snippets.size(), 2u);
    }
}

TEST(Templates, PlaceholderRules)
{
    const std::string start = "START OF INPUT\n";
    EXPECT_NO_THROW(make(PromptVariant::Baseline, start + "{program}").validate());
    EXPECT_THROW(make(PromptVariant::Baseline, start + "no slot").validate(), PlaceholderMismatch);
    EXPECT_THROW(make(PromptVariant::Baseline, start + "{program} {csv}").validate(), PlaceholderMismatch);
    EXPECT_THROW(make(PromptVariant::Pathcrawler, start + "{program}").validate(), PlaceholderMismatch);
    EXPECT_NO_THROW(make(PromptVariant::Pathcrawler, start + "{program} {csv}").validate());
    EXPECT_THROW(make(PromptVariant::Pathcrawler, start + "{program} {csv} {eva}").validate(),
                 PlaceholderMismatch);
    EXPECT_NO_THROW(make(PromptVariant::Eva, start + "{program} {eva}").validate());
    EXPECT_THROW(make(PromptVariant::Eva, start + "{program} {bogus} {eva}").validate(), PlaceholderMismatch);
    EXPECT_THROW(make(PromptVariant::Baseline, "{program}").validate(), PlaceholderMismatch);
    try {
        make(PromptVariant::Eva, start + "{program}").validate();
        FAIL();
    } catch (const PlaceholderMismatch& e) {
        EXPECT_EQ(e.placeholder(), "{eva}");
        EXPECT_EQ(e.variant(), PromptVariant::Eva);
    }
}

TEST(Templates, MissingFileIsReported)
{
    sftest::TempDir dir;
    sftest::write_file(dir.path() / "baseline.txt", "START OF INPUT\n{program}\n");
    try {
        load_templates(dir.path());
        FAIL();
    } catch (const MissingTemplate& e) {
        EXPECT_EQ(e.variant(), PromptVariant::Pathcrawler);
    }
}

TEST(Placeholders, ScannerIgnoresCodeBraces)
{
    EXPECT_EQ(placeholders_in("a {program} { x } {Upper} {csv}{}"), (std::vector<std::string>{"program", "csv"}));
}

TEST(BuildPrompt, SubstitutesOncePerSlot)
{
    auto tmpl = make(PromptVariant::Pathcrawler, "START OF INPUT\n{program}\n--\n{csv}");
    SourceProgram p{"p", "int f(){ return 0; } /* {csv} */", std::nullopt, std::nullopt};
    auto suite = pathcrawler::parse_test_csv("input_a,output,verdict\n1,2,unknown\n");
    auto built = build_prompt(tmpl, p, &suite, nullptr);
    // The {csv} inside the program text is not rescanned.
    EXPECT_EQ(built.text, "START OF INPUT\n" + p.source + "\n--\n" + suite.raw);
    EXPECT_EQ(built.context_digest, sha256_hex(suite.raw));
    EXPECT_TRUE(built.warnings.empty());
    EXPECT_EQ(built.program_name, "p");
}

TEST(BuildPrompt, MissingContextAndSnippet)
{
    const auto program = corpus_program("bsearch");
    EXPECT_THROW(build_prompt(shipped().at(PromptVariant::Pathcrawler), program, nullptr, nullptr),
                 MissingContext);
    EXPECT_THROW(build_prompt(shipped().at(PromptVariant::Eva), program, nullptr, nullptr), MissingContext);
    auto no_snippets = shipped().at(PromptVariant::Baseline);
    no_snippets.snippets.clear();
    try {
        build_prompt(no_snippets, program, nullptr, nullptr);
        FAIL();
    } catch (const UnresolvedPlaceholder& e) {
        EXPECT_EQ(e.name(), "valid_assigns");
    }
}

TEST(BuildPrompt, OutputlessSuiteWarnsAboutStateMutation)
{
    auto tmpl = make(PromptVariant::Pathcrawler, "START OF INPUT\n{program}\n{csv}");
    SourceProgram p{"p", "void f(int *x){ *x = 0; }", std::nullopt, std::nullopt};
    auto suite = pathcrawler::parse_test_csv("input_x,output,verdict\n1,,unknown\n");
    auto built = build_prompt(tmpl, p, &suite, nullptr);
    ASSERT_EQ(built.warnings.size(), 1u);
    EXPECT_EQ(built.warnings[0], PromptWarning::StateMutation);
}

TEST(BuildPrompt, ShippedVariantsAreDeterministicAndComplete)
{
    const auto program = corpus_program("labels_tritype");
    const auto report = eva::parse_eva_report(read_file(data_dir() / "corpus" / "labels_tritype" / "eva.txt"));
    const auto bs = corpus_program("bsearch");
    const auto suite = pathcrawler::parse_test_csv(read_file(data_dir() / "corpus" / "bsearch" / "tests.csv"));

    auto baseline = build_prompt(shipped().at(PromptVariant::Baseline), program, nullptr, nullptr);
    auto with_eva = build_prompt(shipped().at(PromptVariant::Eva), program, nullptr, &report);
    auto with_csv = build_prompt(shipped().at(PromptVariant::Pathcrawler), bs, &suite, nullptr);
    EXPECT_NE(baseline.text.find(program.source), std::string::npos);
    EXPECT_TRUE(baseline.context_digest.empty());
    EXPECT_NE(with_eva.text.find(report.raw), std::string::npos);
    EXPECT_NE(with_csv.text.find(suite.raw), std::string::npos);
    EXPECT_NE(with_csv.text.find(bs.source), std::string::npos);
    for (const auto* built : {&baseline, &with_eva, &with_csv}) {
        EXPECT_TRUE(placeholders_in(built->text).empty());
        EXPECT_EQ(nlohmann::json(*built).get<BuiltPrompt>(), *built);
    }
    EXPECT_EQ(build_prompt(shipped().at(PromptVariant::Eva), program, nullptr, &report), with_eva);
}
