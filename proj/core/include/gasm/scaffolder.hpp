#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "gasm/aligner.hpp"
#include "gasm/contig_gen.hpp"
#include "gasm/dht.hpp"
#include "gasm/kmer_analysis.hpp"

namespace gasm {

struct ScaffoldParams {
    std::uint32_t min_support = 3;  // pairs required to trust a link
    double min_contig_depth = 0;    // contigs below this are dropped upstream
    std::size_t agg_capacity = 8192;
};

// A contig endpoint facing a gap: 'L' = the low-coordinate end, 'R' = high.
inline std::uint64_t endpoint_code(std::uint64_t contig_id, char side) {
    return (contig_id << 1) | (side == 'R' ? 1u : 0u);
}
inline std::uint64_t endpoint_contig(std::uint64_t code) { return code >> 1; }
inline char endpoint_side(std::uint64_t code) { return (code & 1) ? 'R' : 'L'; }

// Aggregated evidence that two contig endpoints are adjacent in the genome.
struct ContigLink {
    std::uint64_t ep1 = 0, ep2 = 0;  // endpoint codes, ep1 < ep2
    std::uint32_t support = 0;
    double gap_mean = 0;
    double gap_sigma = 0;

    bool operator==(const ContigLink&) const = default;
};

// Both ends of a pair aligned, with the library's insert size.
struct PairAln {
    Alignment end1;
    Alignment end2;
    double insert_size = 0;
};

// Derives one oriented link observation per pair whose ends sit on different
// contigs, aggregates per endpoint pair with GUO, and returns links meeting
// min_support. A forward-strand alignment faces the contig's right end and
// consumes len - contig_start bases of the insert; a reverse-strand one faces
// the left end and consumes contig_end.
std::vector<ContigLink> gen_links(const std::vector<PairAln>& pairs,
                                  const std::vector<Contig>& contigs,
                                  const RankTopology& topo,
                                  const ScaffoldParams& params);

// Per-contig mean k-mer depth via cached read-only lookups against the count
// table from the counting stage.
void compute_attrs(std::vector<Contig>& contigs, CountTable& counts,
                   const RankTopology& topo, int k);

struct BubbleResult {
    std::vector<ContigLink> links;
    std::unordered_set<std::uint64_t> removed_contigs;
};

// Collapses parallel paths of at most two contigs between the same endpoint
// pair: the path with the higher mean depth survives (ties to the smaller
// leading contig id) and absorbs the losers' support.
BubbleResult remove_bubbles(const std::vector<ContigLink>& links,
                            const std::vector<Contig>& contigs);

struct ScaffoldEntry {
    std::uint64_t contig_id = 0;
    bool reversed = false;
    // gap to the previous entry; meaningless for the first one
    double gap_before = 0;
    double gap_sigma_before = 0;
};

struct Scaffold {
    std::uint64_t id = 0;
    std::vector<ScaffoldEntry> entries;
};

// Serial traversal in decreasing contig length. A scaffold extends through an
// endpoint only when one link is strictly heavier than every competitor on
// both of its endpoints.
std::vector<Scaffold> build_scaffolds(const std::vector<Contig>& contigs,
                                      const std::vector<ContigLink>& links,
                                      const ScaffoldParams& params);

// Oriented contig sequences joined by N-runs of max(1, round(gap)) bases.
std::string scaffold_sequence(const Scaffold& scaffold,
                              const std::vector<Contig>& contigs);

void write_scaffold_fasta(const std::string& path,
                          const std::vector<Scaffold>& scaffolds,
                          const std::vector<Contig>& contigs);

}  // namespace gasm
