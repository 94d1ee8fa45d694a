#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "gasm/aligner.hpp"

namespace {

std::string random_dna(std::uint64_t seed, std::size_t len) {
    std::mt19937_64 rng(seed);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) s += "ACGT"[rng() % 4];
    return s;
}

void BM_LocalAlign(benchmark::State& state) {
    const std::size_t len = static_cast<std::size_t>(state.range(0));
    gasm::AlignParams params;
    std::string contig_window = random_dna(1, len + 32);
    std::string read = contig_window.substr(16, len);
    std::mt19937_64 rng(2);
    for (auto& c : read)
        if (rng() % 100 == 0) c = "ACGT"[rng() % 4];
    for (auto _ : state) {
        auto result = gasm::local_align(read, contig_window, params);
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_LocalAlign)->Arg(100)->Arg(250);

void BM_AlignRead(benchmark::State& state) {
    gasm::AlignParams params;
    std::mt19937_64 rng(3);
    std::vector<gasm::Contig> contigs;
    for (std::uint64_t i = 0; i < 32; ++i)
        contigs.push_back({i, random_dna(100 + i, 5000), 30.0});
    gasm::RankTopology topo{1, 7};
    auto index = gasm::build_seed_index(contigs, topo, params);
    std::string read = contigs[5].seq.substr(1234, 100);
    std::uint64_t read_id = 0;
    for (auto _ : state) {
        auto alns = gasm::align_read(index, 0, read_id++, 1, read);
        benchmark::DoNotOptimize(alns);
    }
}
BENCHMARK(BM_AlignRead);

}  // namespace
