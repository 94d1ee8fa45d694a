#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gasm/aligner.hpp"
#include "gasm/scaffolder.hpp"

namespace gasm {

struct GapParams {
    int k = 21;            // assembly k; the gap walk uses a smaller k
    int k_delta = 8;       // gap k = k - k_delta (forced odd)
    int flank_len = 100;
    std::uint32_t t_hq = 2;
    std::uint32_t epsilon = 0;  // gap pools are tiny; keep singletons
    double slack = 50;          // absolute length tolerance beyond 3 sigma
    std::size_t agg_capacity = 8192;

    int gap_k() const {
        int kg = k - k_delta;
        if (kg % 2 == 0) --kg;
        return kg < 5 ? 5 : kg;
    }
};

// One N-run in a scaffold with its oriented flanking sequence.
struct Gap {
    std::uint64_t id = 0;
    std::uint64_t scaffold_id = 0;
    std::size_t entry_index = 0;  // gap precedes scaffold.entries[entry_index]
    std::string flank_left;       // scaffold-forward, ends where the Ns start
    std::string flank_right;      // scaffold-forward, starts where the Ns end
    double estimate = 0;
    double sigma = 0;
    std::size_t scaffold_start = 0, scaffold_end = 0;  // N-run, half-open
};

std::vector<Gap> collect_gaps(const std::vector<Scaffold>& scaffolds,
                              const std::vector<Contig>& contigs,
                              const GapParams& params);

// Placement of a contig inside a scaffold string.
struct ContigPlacement {
    std::uint64_t scaffold_id = 0;
    std::size_t offset = 0;
    bool reversed = false;
};

std::map<std::uint64_t, ContigPlacement> place_contigs(
    const std::vector<Scaffold>& scaffolds, const std::vector<Contig>& contigs);

// A pair with exactly one aligned end; the mate is projected by insert size.
struct HalfAlignedPair {
    Alignment aligned;
    std::string mate_seq;
    double insert_size = 0;
};

using GapReadTable = ShardedTable<std::vector<std::string>, std::string>;

// Routes each projected mate whose window overlaps a gap (padded by the flank
// length) to the gap's owner rank via LRW. Mates are stored scaffold-forward.
std::unique_ptr<GapReadTable> localize_reads(const std::vector<Gap>& gaps,
                                             const std::vector<Scaffold>& scaffolds,
                                             const std::vector<Contig>& contigs,
                                             const std::vector<HalfAlignedPair>& pairs,
                                             const RankTopology& topo,
                                             const GapParams& params);

// Mini-assembly across one gap: count k-mers of the localized reads plus both
// flanks at the reduced k, then walk by unique high-quality extension from the
// left flank's last window to the right flank's first. Returns the sequence
// spanning flank_left through flank_right, or nothing when the walk forks,
// dies, or lands outside estimate +- (3 sigma + slack).
std::optional<std::string> close_gap(const Gap& gap,
                                     const std::vector<std::string>& reads,
                                     const GapParams& params);

std::map<std::uint64_t, std::string> close_gaps(const std::vector<Gap>& gaps,
                                                GapReadTable& table,
                                                const RankTopology& topo,
                                                const GapParams& params);

// Splices closures into a scaffold string; `gaps` must all belong to it.
std::string apply_closures(const std::string& scaffold_seq,
                           const std::vector<Gap>& gaps,
                           const std::map<std::uint64_t, std::string>& closures);

}  // namespace gasm
