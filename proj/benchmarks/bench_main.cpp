#include <filesystem>
#include <fstream>
#include <sstream>

#include <benchmark/benchmark.h>

#include "specforge/acsl.hpp"
#include "specforge/eva.hpp"
#include "specforge/mutation.hpp"
#include "specforge/pathcrawler.hpp"

namespace {

std::string corpus_file(const std::string& program, const std::string& file)
{
    std::ifstream in(std::filesystem::path(SPECFORGE_DATA_DIR) / "corpus" / program / file,
                     std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void BM_ParseCsvAdpcm(benchmark::State& state)
{
    const auto raw = corpus_file("adpcm", "tests.csv");
    for (auto _ : state) benchmark::DoNotOptimize(specforge::pathcrawler::parse_test_csv(raw));
}
BENCHMARK(BM_ParseCsvAdpcm);

void BM_ParseCsvApache(benchmark::State& state)
{
    const auto raw = corpus_file("apache", "tests.csv");
    for (auto _ : state) benchmark::DoNotOptimize(specforge::pathcrawler::parse_test_csv(raw));
}
BENCHMARK(BM_ParseCsvApache);

void BM_ParseEva(benchmark::State& state)
{
    const auto raw = corpus_file("labels_tritype", "eva.txt");
    for (auto _ : state) benchmark::DoNotOptimize(specforge::eva::parse_eva_report(raw));
}
BENCHMARK(BM_ParseEva);

void BM_ParseAnnotations(benchmark::State& state)
{
    std::ifstream in(std::filesystem::path(SPECFORGE_DATA_DIR) / "fixtures" / "bsearch" / "baseline" / "1.txt");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto code = specforge::acsl::split_response(buffer.str()).code;
    for (auto _ : state) benchmark::DoNotOptimize(specforge::acsl::parse_annotations(code));
}
BENCHMARK(BM_ParseAnnotations);

void BM_CheckPreserved(benchmark::State& state)
{
    specforge::SourceProgram program{"levenshtein", corpus_file("levenshtein", "program.c"), {}, {}};
    const auto annotated = program.source;
    for (auto _ : state)
        benchmark::DoNotOptimize(specforge::acsl::check_code_preserved(program, annotated));
}
BENCHMARK(BM_CheckPreserved);

void BM_Mutate(benchmark::State& state)
{
    specforge::SourceProgram program{"tritype", corpus_file("tritype", "program.c"), {}, {}};
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(specforge::mutation::mutate(program, seed++));
}
BENCHMARK(BM_Mutate);

}  // namespace
BENCHMARK_MAIN();
