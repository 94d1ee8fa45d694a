#include <benchmark/benchmark.h>

#include <cstdint>

#include "gasm/dht.hpp"
#include "gasm/worker_pool.hpp"

namespace {

// GUO update throughput: aggregated counting into a rank-sharded table.
void BM_GuoUpdates(benchmark::State& state) {
    const int P = static_cast<int>(state.range(0));
    const std::uint64_t updates = 1 << 18;
    for (auto _ : state) {
        gasm::RankTopology topo{P, 11};
        gasm::TableConfig cfg;
        gasm::ShardedTable<std::uint64_t, std::uint64_t> table(
            topo, cfg, [](const std::uint64_t& d) { return d; },
            [](std::uint64_t& v, const std::uint64_t& d) { v += d; });
        gasm::run_workers(P, [&](int w) {
            auto& h = table.handle(w);
            auto [b, e] = gasm::slice(updates, P, w);
            for (std::uint64_t i = b; i < e; ++i) h.guo_update(i % 65536, 1);
        });
        table.phase_barrier(gasm::PhaseMode::GRO);
        benchmark::DoNotOptimize(table.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(updates));
}
BENCHMARK(BM_GuoUpdates)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

// GRO lookup throughput with the per-worker read cache.
void BM_GroLookups(benchmark::State& state) {
    const int P = 4;
    const std::uint64_t keys = 1 << 16;
    gasm::RankTopology topo{P, 13};
    gasm::TableConfig cfg;
    gasm::ShardedTable<std::uint64_t, std::uint64_t> table(
        topo, cfg, [](const std::uint64_t& d) { return d; },
        [](std::uint64_t& v, const std::uint64_t& d) { v += d; });
    gasm::run_workers(P, [&](int w) {
        auto& h = table.handle(w);
        auto [b, e] = gasm::slice(keys, P, w);
        for (std::uint64_t i = b; i < e; ++i) h.guo_update(i, i);
    });
    table.phase_barrier(gasm::PhaseMode::GRO);
    for (auto _ : state) {
        std::uint64_t sum = 0;
        auto& h = table.handle(0);
        for (std::uint64_t i = 0; i < keys; ++i) {
            const std::uint64_t* v = h.gro_lookup(i);
            if (v) sum += *v;
        }
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(keys));
}
BENCHMARK(BM_GroLookups)->Unit(benchmark::kMillisecond);

}  // namespace
