#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "gasm/kmer.hpp"

namespace {

std::string random_dna(std::uint64_t seed, std::size_t len) {
    std::mt19937_64 rng(seed);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) s += "ACGT"[rng() % 4];
    return s;
}

void BM_EncodeKmer(benchmark::State& state) {
    std::string seq = random_dna(1, 21);
    for (auto _ : state) {
        auto enc = gasm::encode(seq);
        benchmark::DoNotOptimize(enc);
    }
}
BENCHMARK(BM_EncodeKmer);

void BM_ExtractKmers(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::string read = random_dna(2, 100);
    for (auto _ : state) {
        auto kmers = gasm::extract_kmers(read, k);
        benchmark::DoNotOptimize(kmers);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(read.size() - static_cast<std::size_t>(k) + 1));
}
BENCHMARK(BM_ExtractKmers)->Arg(21)->Arg(31);

void BM_Canonical(benchmark::State& state) {
    auto enc = gasm::encode(random_dna(3, 21));
    gasm::Kmer kmer = *enc;
    for (auto _ : state) {
        auto c = gasm::canonical(kmer, 21);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_Canonical);

}  // namespace

BENCHMARK_MAIN();
