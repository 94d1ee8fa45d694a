#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gasm/bloom.hpp"
#include "gasm/dht.hpp"
#include "gasm/kmer.hpp"
#include "gasm/sketch.hpp"

namespace gasm {

struct AnalysisParams {
    int k = 21;
    std::uint32_t epsilon = 1;      // drop k-mers with count <= epsilon
    std::uint32_t t_hq = 2;         // extension tally needed to be high quality
    std::uint64_t hh_threshold = 0; // heavy-hitter count cutoff; 0 disables
    int hll_bits = 12;
    std::size_t hh_capacity = 1024;
    bool use_bloom = true;
    double bloom_fpr = 0.05;
    double bloom_safety = 1.1;      // per-rank provisioning headroom
    std::uint64_t seed = 0x5eedULL;
    std::size_t agg_capacity = 8192;
};

// Occurrence counters per canonical k-mer: total count plus per-side ACGT
// extension tallies ("two short integer arrays of length four"). Tallies
// saturate at 16 bits.
struct ExtensionCounts {
    std::uint16_t left[4] = {0, 0, 0, 0};
    std::uint16_t right[4] = {0, 0, 0, 0};
    std::uint32_t count = 0;
};

// One k-mer occurrence in the canonical frame; 0..3 = ACGT, 4 = X (boundary).
struct KmerObs {
    std::uint8_t left;
    std::uint8_t right;

    auto operator<=>(const KmerObs&) const = default;
};

constexpr std::uint8_t kExtX = 4;

// Canonicalize an observed k-mer with flanks: when the canonical form is the
// reverse complement, left/right swap and the letters complement.
inline std::pair<Kmer, KmerObs> canonical_obs(const KmerWithExts& kx, int k) {
    auto code_of = [](char c) -> std::uint8_t {
        int b = base_code(c);
        return b < 0 ? kExtX : static_cast<std::uint8_t>(b);
    };
    auto [canon, reversed] = canonical(kx.kmer, k);
    KmerObs obs;
    if (!reversed) {
        obs.left = code_of(kx.left);
        obs.right = code_of(kx.right);
    } else {
        auto comp = [](std::uint8_t c) -> std::uint8_t {
            return c == kExtX ? kExtX : static_cast<std::uint8_t>(3 - c);
        };
        obs.left = comp(code_of(kx.right));
        obs.right = comp(code_of(kx.left));
    }
    return {canon, obs};
}

using CountTable = ShardedTable<ExtensionCounts, KmerObs>;

struct EstimateResult {
    double cardinality = 0;
    std::unordered_set<Kmer> heavy;
    Hyperloglog sketch{12};
    HeavyHitterSummary summary{1024};
};

// First pass: per-worker Hyperloglog + heavy-hitter summaries over disjoint
// read shards, merged by reduction. Communication volume is independent of
// the read volume.
EstimateResult estimate_pass(const std::vector<std::string_view>& reads,
                             const RankTopology& topo, const AnalysisParams& params);

struct CountResult {
    std::unique_ptr<CountTable> table;
    // Records suppressed by the per-rank Bloom filters (first sightings).
    std::uint64_t bloom_suppressed = 0;
    std::uint64_t bloom_bits_per_rank = 0;
    int bloom_hashes = 0;
};

// Second pass: owner-computes counting via LRW routing with aggregation.
// Per-owner Bloom filters suppress first occurrences; promotion happens on
// the second sighting with count initialized to 2 (the first occurrence's
// extensions are lost, which shifts each tally by at most one). Heavy k-mers
// are accumulated worker-locally and combined by a final reduction.
CountResult count_kmers(const std::vector<std::string_view>& reads,
                        const RankTopology& topo, const AnalysisParams& params,
                        double cardinality, const std::unordered_set<Kmer>& heavy);

// A de Bruijn vertex: canonical k-mer plus its unique high-quality forward
// (right) and backward (left) extension letters.
struct UURecord {
    Kmer kmer;
    char ext_right;
    char ext_left;

    bool operator==(const UURecord&) const = default;
};

// Keep k-mers with count > epsilon whose extension tallies qualify exactly
// one letter per side at t_hq. Zero or two-plus qualifying letters on a side
// make the k-mer a terminator or fork and it is excluded. Output sorted by
// k-mer code (lexicographic in the decoded strings).
std::vector<UURecord> classify_uu(const CountTable& table, const AnalysisParams& params);

// count -> number of distinct k-mers at that count
std::map<std::uint32_t, std::uint64_t> count_histogram(const CountTable& table);

// KMER<TAB>XY (forward then backward letter), sorted lexicographically.
void write_uu_tsv(const std::string& path, const std::vector<UURecord>& records, int k);
std::vector<UURecord> read_uu_tsv(const std::string& path, int k);

}  // namespace gasm
