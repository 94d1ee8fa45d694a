#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gasm/contig_gen.hpp"
#include "gasm/dht.hpp"
#include "gasm/kmer.hpp"

namespace gasm {

struct AlignParams {
    int k = 21;
    int match = 1;
    int mismatch = -2;
    int gap_open = -3;    // first gap base
    int gap_extend = -1;  // each further base
    double min_identity = 0.9;
    std::size_t max_postings_per_seed = 32;  // query-side repeat cutoff
    std::size_t max_anchors = 1000;
    int window_pad = 16;  // contig slack around the anchor diagonal
    std::size_t agg_capacity = 8192;
};

// One seed occurrence in a contig. `reversed` records whether the canonical
// form of the seed is the reverse complement of the contig-forward window.
struct Posting {
    std::uint32_t contig_id;
    std::uint32_t offset;
    bool reversed;

    bool operator==(const Posting&) const = default;
};

using SeedTable = ShardedTable<std::vector<Posting>, Posting>;

// Canonical seed k-mer -> postings, built with GUO aggregation. Holds a view
// of the contigs; they must outlive the index.
struct SeedIndex {
    std::unique_ptr<SeedTable> table;
    const std::vector<Contig>* contigs = nullptr;
    AlignParams params;
};

SeedIndex build_seed_index(const std::vector<Contig>& contigs, const RankTopology& topo,
                           const AlignParams& params);

struct Alignment {
    std::uint64_t read_id = 0;
    int end = 0;  // 1 or 2 within the pair
    std::uint64_t contig_id = 0;
    int read_start = 0, read_end = 0;          // half-open, forward-read frame
    std::int64_t contig_start = 0, contig_end = 0;  // half-open
    char strand = '+';
    int score = 0;
    int matches = 0;
    int aligned_len = 0;

    double identity() const {
        return aligned_len == 0 ? 0.0 : static_cast<double>(matches) / aligned_len;
    }
};

// Seed-and-extend against the index using cached read-only lookups from the
// given worker's handle. Returns accepted alignments, best first. A perfect
// full-length hit short-circuits the remaining anchors.
std::vector<Alignment> align_read(SeedIndex& index, int worker, std::uint64_t read_id,
                                  int end, std::string_view read);

// Local alignment with affine gaps (length-L gap costs open + (L-1)*extend).
// Returns score plus half-open ranges of the best-scoring local path.
struct LocalAlignResult {
    int score = 0;
    int matches = 0;
    int aligned_len = 0;  // alignment columns
    int a_start = 0, a_end = 0;
    int b_start = 0, b_end = 0;
};

LocalAlignResult local_align(std::string_view a, std::string_view b,
                             const AlignParams& params);

// read_id end contig_id read_start read_end contig_start contig_end strand score
void write_alignment_tsv(const std::string& path, const std::vector<Alignment>& alns);
std::vector<Alignment> read_alignment_tsv(const std::string& path);

}  // namespace gasm
