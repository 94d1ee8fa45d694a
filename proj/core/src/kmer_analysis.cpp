#include "gasm/kmer_analysis.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "gasm/worker_pool.hpp"

namespace gasm {

namespace {

inline void sat_inc(std::uint16_t& x) {
    if (x != UINT16_MAX) ++x;
}

inline void tally(ExtensionCounts& c, const KmerObs& obs) {
    ++c.count;
    if (obs.left != kExtX) sat_inc(c.left[obs.left]);
    if (obs.right != kExtX) sat_inc(c.right[obs.right]);
}

}  // namespace

EstimateResult estimate_pass(const std::vector<std::string_view>& reads,
                             const RankTopology& topo, const AnalysisParams& params) {
    check_k(params.k);
    const int P = topo.num_ranks;
    std::vector<Hyperloglog> sketches(static_cast<std::size_t>(P),
                                      Hyperloglog(params.hll_bits, params.seed));
    std::vector<HeavyHitterSummary> summaries(static_cast<std::size_t>(P),
                                              HeavyHitterSummary(params.hh_capacity));
    run_workers(P, [&](int w) {
        auto [begin, end] = slice(reads.size(), P, w);
        auto& hll = sketches[static_cast<std::size_t>(w)];
        auto& hh = summaries[static_cast<std::size_t>(w)];
        for (std::size_t i = begin; i < end; ++i) {
            for (const auto& kx : extract_kmers(reads[i], params.k)) {
                Kmer canon = canonical(kx.kmer, params.k).first;
                hll.insert(canon);
                hh.offer(canon);
            }
        }
    });
    EstimateResult result;
    result.sketch = Hyperloglog(params.hll_bits, params.seed);
    result.summary = HeavyHitterSummary(params.hh_capacity);
    for (int w = 0; w < P; ++w) {
        result.sketch.merge(sketches[static_cast<std::size_t>(w)]);
        result.summary.merge(summaries[static_cast<std::size_t>(w)]);
    }
    result.cardinality =
        result.summary.stream_length() == 0 ? 0.0 : result.sketch.estimate();
    if (params.hh_threshold > 0)
        for (Kmer item : result.summary.items_above(params.hh_threshold))
            result.heavy.insert(item);
    return result;
}

CountResult count_kmers(const std::vector<std::string_view>& reads,
                        const RankTopology& topo, const AnalysisParams& params,
                        double cardinality, const std::unordered_set<Kmer>& heavy) {
    check_k(params.k);
    if (cardinality <= 0 && !reads.empty()) {
        bool any = false;
        for (auto r : reads)
            if (r.size() >= static_cast<std::size_t>(params.k)) any = true;
        if (any)
            throw std::logic_error("count_kmers called with zero cardinality on nonempty reads");
    }
    const int P = topo.num_ranks;
    CountResult result;

    std::shared_ptr<std::vector<BloomFilter>> blooms;
    auto suppressed = std::make_shared<std::vector<std::uint64_t>>(
        static_cast<std::size_t>(P), 0);
    if (params.use_bloom && cardinality > 0) {
        std::uint64_t per_rank = static_cast<std::uint64_t>(
            cardinality * params.bloom_safety / P);
        if (per_rank < 64) per_rank = 64;
        blooms = std::make_shared<std::vector<BloomFilter>>();
        blooms->reserve(static_cast<std::size_t>(P));
        for (int r = 0; r < P; ++r)
            blooms->emplace_back(per_rank, params.bloom_fpr, params.seed + 17);
        result.bloom_bits_per_rank = blooms->front().n_bits();
        result.bloom_hashes = blooms->front().num_hashes();
    }

    const bool with_bloom = blooms != nullptr;
    auto init = [with_bloom](const KmerObs& obs) {
        ExtensionCounts c;
        tally(c, obs);
        // Promotion on second sighting: the filter already absorbed the
        // first occurrence, so start the count at 2.
        if (with_bloom) ++c.count;
        return c;
    };
    auto combine = [](ExtensionCounts& c, const KmerObs& obs) { tally(c, obs); };
    CountTable::GateFn gate;
    // Sentinel-initialized per-rank memory of the previous gated key. The
    // gate only ever runs inside the sorted barrier replay, so records of one
    // key are consecutive and a single slot per rank suffices.
    auto prev_key = std::make_shared<std::vector<std::uint64_t>>(
        static_cast<std::size_t>(P), ~std::uint64_t{0});
    if (with_bloom) {
        gate = [blooms, suppressed, prev_key](int rank, std::uint64_t key,
                                              const KmerObs&) {
            auto r = static_cast<std::size_t>(rank);
            (*blooms)[r].test_and_insert(key);
            // Retention must not hinge on a filter false positive (those vary
            // with the rank's key population): structurally suppress the
            // first record of every key and admit from the second on.
            bool repeat = (*prev_key)[r] == key;
            (*prev_key)[r] = key;
            if (!repeat) {
                ++(*suppressed)[r];
                return false;
            }
            return true;
        };
    }

    TableConfig cfg;
    cfg.agg_capacity = params.agg_capacity;
    // Deterministic replay: which occurrence the Bloom gate swallows must not
    // depend on delivery interleaving, or the extension tallies (and with
    // them the UU set) would vary run to run.
    cfg.defer_lrw = with_bloom;
    auto table = std::make_unique<CountTable>(topo, cfg, init, combine, gate);
    table->set_stage("kmer_analysis");
    table->phase_barrier(PhaseMode::LRW);

    const bool have_heavy = !heavy.empty();
    std::vector<std::unordered_map<Kmer, ExtensionCounts>> heavy_local(
        static_cast<std::size_t>(P));
    run_workers(P, [&](int w) {
        auto& handle = table->handle(w);
        auto& local = heavy_local[static_cast<std::size_t>(w)];
        auto [begin, end] = slice(reads.size(), P, w);
        for (std::size_t i = begin; i < end; ++i) {
            for (const auto& kx : extract_kmers(reads[i], params.k)) {
                auto [canon, obs] = canonical_obs(kx, params.k);
                if (have_heavy && heavy.count(canon)) {
                    tally(local[canon], obs);
                    continue;
                }
                handle.lrw_route_and_apply(canon, obs);
            }
        }
    });
    table->phase_barrier(PhaseMode::LRW);

    // Final reduction of the worker-local heavy accumulators into the owner
    // shards (exact counts, Bloom not consulted).
    for (auto& local : heavy_local) {
        for (auto& [kmer, counts] : local) {
            auto& shard = table->shard_map(topo.route(kmer));
            auto it = shard.find(kmer);
            if (it == shard.end()) {
                shard.emplace(std::piecewise_construct, std::forward_as_tuple(kmer),
                              std::forward_as_tuple(counts));
            } else {
                ExtensionCounts& dst = it->second.value;
                dst.count += counts.count;
                for (int b = 0; b < 4; ++b) {
                    std::uint32_t l = dst.left[b] + counts.left[b];
                    std::uint32_t r = dst.right[b] + counts.right[b];
                    dst.left[b] = static_cast<std::uint16_t>(std::min<std::uint32_t>(l, UINT16_MAX));
                    dst.right[b] = static_cast<std::uint16_t>(std::min<std::uint32_t>(r, UINT16_MAX));
                }
            }
        }
    }

    for (std::uint64_t s : *suppressed) result.bloom_suppressed += s;
    result.table = std::move(table);
    return result;
}

std::vector<UURecord> classify_uu(const CountTable& table, const AnalysisParams& params) {
    std::vector<UURecord> out;
    table.for_each([&](std::uint64_t key, const CountTable::Entry& entry) {
        const ExtensionCounts& c = entry.value;
        if (c.count <= params.epsilon) return;
        auto unique_hq = [&](const std::uint16_t side[4]) -> int {
            int letter = -1;
            for (int b = 0; b < 4; ++b) {
                if (side[b] >= params.t_hq) {
                    if (letter >= 0) return -2;  // fork
                    letter = b;
                }
            }
            return letter;  // -1: terminator side
        };
        int right = unique_hq(c.right);
        int left = unique_hq(c.left);
        if (right < 0 || left < 0) return;
        out.push_back({key, base_char(right), base_char(left)});
    });
    std::sort(out.begin(), out.end(),
              [](const UURecord& a, const UURecord& b) { return a.kmer < b.kmer; });
    return out;
}

std::map<std::uint32_t, std::uint64_t> count_histogram(const CountTable& table) {
    std::map<std::uint32_t, std::uint64_t> hist;
    table.for_each([&](std::uint64_t, const CountTable::Entry& e) {
        ++hist[e.value.count];
    });
    return hist;
}

void write_uu_tsv(const std::string& path, const std::vector<UURecord>& records, int k) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<UURecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const UURecord& a, const UURecord& b) { return a.kmer < b.kmer; });
    for (const auto& rec : sorted)
        out << decode(rec.kmer, k) << '\t' << rec.ext_right << rec.ext_left << '\n';
}

std::vector<UURecord> read_uu_tsv(const std::string& path, int k) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<UURecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.size() < tab + 3)
            throw std::runtime_error("malformed UU record: " + line);
        auto kmer = encode(line.substr(0, tab));
        if (!kmer || tab != static_cast<std::size_t>(k))
            throw std::runtime_error("malformed UU k-mer: " + line);
        out.push_back({*kmer, line[tab + 1], line[tab + 2]});
    }
    return out;
}

}  // namespace gasm
