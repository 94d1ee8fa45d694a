#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "gasm/gap_closer.hpp"

using namespace gasm;

namespace {

std::string random_dna(std::mt19937_64& rng, int len) {
    std::string s;
    for (int i = 0; i < len; ++i) s += "ACGT"[rng() % 4];
    return s;
}

// sliding read windows giving every position multi-read coverage
std::vector<std::string> shred(const std::string& src, int len, int step) {
    std::vector<std::string> reads;
    for (std::size_t i = 0; i + static_cast<std::size_t>(len) <= src.size();
         i += static_cast<std::size_t>(step))
        reads.push_back(src.substr(i, static_cast<std::size_t>(len)));
    return reads;
}

}  // namespace

TEST_CASE("gap walk k is reduced, odd, and floored") {
    GapParams p;
    p.k = 21;
    p.k_delta = 8;
    CHECK(p.gap_k() == 13);
    p.k_delta = 7;  // 14 -> forced odd
    CHECK(p.gap_k() == 13);
    p.k = 11;
    p.k_delta = 8;  // 3 -> floored
    CHECK(p.gap_k() == 5);
}

TEST_CASE("collect_gaps records flanks and scaffold coordinates") {
    std::vector<Contig> contigs = {{0, "AAAACCCCGGGG", 1.0}, {1, "TTTTACGTACGT", 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 3;
    scaffolds[0].entries = {{0, false, 0, 0}, {1, false, 5.0, 2.0}};
    GapParams params;
    params.flank_len = 6;
    auto gaps = collect_gaps(scaffolds, contigs, params);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].id == 0);
    CHECK(gaps[0].scaffold_id == 3);
    CHECK(gaps[0].entry_index == 1);
    CHECK(gaps[0].flank_left == "CCGGGG");
    CHECK(gaps[0].flank_right == "TTTTAC");
    CHECK(gaps[0].estimate == doctest::Approx(5.0));
    CHECK(gaps[0].sigma == doctest::Approx(2.0));
    CHECK(gaps[0].scaffold_start == 12);
    CHECK(gaps[0].scaffold_end == 17);
}

TEST_CASE("collect_gaps orients flanks for reversed entries") {
    std::vector<Contig> contigs = {{0, "AAAACCCC", 1.0}, {1, "GGGGTTTT", 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 0;
    scaffolds[0].entries = {{0, false, 0, 0}, {1, true, 2.0, 0}};
    GapParams params;
    params.flank_len = 4;
    auto gaps = collect_gaps(scaffolds, contigs, params);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].flank_left == "CCCC");
    CHECK(gaps[0].flank_right == "AAAA");  // revcomp of GGGGTTTT starts AAAACCCC
}

TEST_CASE("place_contigs accounts for N runs") {
    std::vector<Contig> contigs = {{0, std::string(10, 'A'), 1.0},
                                   {1, std::string(20, 'C'), 1.0},
                                   {2, std::string(5, 'G'), 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 7;
    scaffolds[0].entries = {{0, false, 0, 0}, {1, true, 4.0, 0}, {2, false, 0.2, 0}};
    auto placed = place_contigs(scaffolds, contigs);
    REQUIRE(placed.size() == 3);
    CHECK(placed.at(0).offset == 0);
    CHECK_FALSE(placed.at(0).reversed);
    CHECK(placed.at(1).offset == 14);  // 10 + 4 Ns
    CHECK(placed.at(1).reversed);
    CHECK(placed.at(2).offset == 35);  // 14 + 20 + max(1, round(0.2)) N
    CHECK(placed.at(0).scaffold_id == 7);
}

TEST_CASE("localize_reads projects mates into overlapping gap windows") {
    std::mt19937_64 rng(12);
    std::vector<Contig> contigs = {{0, random_dna(rng, 200), 1.0},
                                   {1, random_dna(rng, 200), 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 0;
    scaffolds[0].entries = {{0, false, 0, 0}, {1, false, 50.0, 2.0}};
    GapParams params;
    params.flank_len = 40;
    auto gaps = collect_gaps(scaffolds, contigs, params);
    REQUIRE(gaps.size() == 1);

    std::string mate = random_dna(rng, 100);
    // + alignment at scaffold [100,200): mate projected to [230,330),
    // overlapping the padded gap window [160,290)
    Alignment a;
    a.contig_id = 0;
    a.strand = '+';
    a.contig_start = 100;
    a.contig_end = 200;
    // far - alignment projected away from the gap
    Alignment far = a;
    far.strand = '-';
    far.contig_start = 0;
    far.contig_end = 100;
    std::vector<HalfAlignedPair> pairs = {{a, mate, 230.0}, {far, mate, 230.0}};
    RankTopology topo{4, 6};
    auto table = localize_reads(gaps, scaffolds, contigs, pairs, topo, params);
    auto& shard = table->shard_map(topo.route(0));
    auto it = shard.find(0);
    REQUIRE(it != shard.end());
    REQUIRE(it->second.value.size() == 1);
    // mates from + alignments are stored reverse-complemented (scaffold-forward)
    CHECK(it->second.value[0] == revcomp_str(mate));
    CHECK(table->stage_stats("gap_closing").records_exchanged == 1);
}

TEST_CASE("localize_reads flips the frame for reversed contig placements") {
    std::mt19937_64 rng(13);
    std::vector<Contig> contigs = {{0, random_dna(rng, 200), 1.0},
                                   {1, random_dna(rng, 200), 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 0;
    // second contig reversed in the scaffold
    scaffolds[0].entries = {{0, false, 0, 0}, {1, true, 50.0, 2.0}};
    GapParams params;
    params.flank_len = 40;
    auto gaps = collect_gaps(scaffolds, contigs, params);

    std::string mate = random_dna(rng, 100);
    // '-' alignment near the right (contig-frame) end of the reversed contig 1
    // sits near scaffold position 250 and projects leftward into the gap
    Alignment a;
    a.contig_id = 1;
    a.strand = '-';
    a.contig_start = 100;
    a.contig_end = 200;
    std::vector<HalfAlignedPair> pairs = {{a, mate, 230.0}};
    RankTopology topo{2, 6};
    auto table = localize_reads(gaps, scaffolds, contigs, pairs, topo, params);
    // placement of contig 1 starts at 250; reversed, so contig [100,200)
    // maps to scaffold [250,350) and '-' becomes '+': mate at [380,480),
    // not overlapping the gap window [160,290)
    auto& shard = table->shard_map(topo.route(0));
    CHECK(shard.find(0) == shard.end());

    // the mirrored alignment (contig [0,100), '+') maps to [350,450) with
    // strand '-' and projects to [220,320): overlaps
    Alignment b;
    b.contig_id = 1;
    b.strand = '+';
    b.contig_start = 0;
    b.contig_end = 100;
    std::vector<HalfAlignedPair> pairs2 = {{b, mate, 230.0}};
    auto table2 = localize_reads(gaps, scaffolds, contigs, pairs2, topo, params);
    auto& shard2 = table2->shard_map(topo.route(0));
    auto it = shard2.find(0);
    REQUIRE(it != shard2.end());
    CHECK(it->second.value[0] == mate);  // '-' frame keeps the mate as-is
}

TEST_CASE("close_gap walks across a covered gap") {
    std::mt19937_64 rng(21);
    std::string left = random_dna(rng, 60);
    std::string inner = random_dna(rng, 45);
    std::string right = random_dna(rng, 60);
    std::string truth = left + inner + right;
    GapParams params;
    params.k = 21;  // gap walk at k = 13
    Gap gap;
    gap.flank_left = left;
    gap.flank_right = right;
    gap.estimate = 45.0;
    gap.sigma = 3.0;
    auto reads = shred(truth, 30, 5);
    auto closed = close_gap(gap, reads, params);
    REQUIRE(closed.has_value());
    CHECK(*closed == truth);
}

TEST_CASE("close_gap fails without read support") {
    std::mt19937_64 rng(22);
    GapParams params;
    params.k = 21;
    Gap gap;
    gap.flank_left = random_dna(rng, 60);
    gap.flank_right = random_dna(rng, 60);
    gap.estimate = 40.0;
    gap.sigma = 2.0;
    CHECK_FALSE(close_gap(gap, {}, params).has_value());
}

TEST_CASE("close_gap joins directly overlapping flanks") {
    std::mt19937_64 rng(23);
    std::string core = random_dna(rng, 80);
    GapParams params;
    params.k = 21;
    Gap gap;
    gap.flank_left = core.substr(0, 50);    // [0,50)
    gap.flank_right = core.substr(30, 50);  // [30,80): 20-base overlap
    gap.estimate = -20.0;
    gap.sigma = 1.0;
    auto closed = close_gap(gap, {}, params);
    REQUIRE(closed.has_value());
    CHECK(*closed == core);
}

TEST_CASE("close_gap rejects walks violating the length estimate") {
    std::mt19937_64 rng(24);
    std::string left = random_dna(rng, 60);
    std::string inner = random_dna(rng, 45);
    std::string right = random_dna(rng, 60);
    std::string truth = left + inner + right;
    GapParams params;
    params.k = 21;
    params.slack = 20;
    Gap gap;
    gap.flank_left = left;
    gap.flank_right = right;
    gap.estimate = 300.0;  // wildly off: |45 - 300| > 3*sigma + slack
    gap.sigma = 1.0;
    auto reads = shred(truth, 30, 5);
    CHECK_FALSE(close_gap(gap, reads, params).has_value());
}

TEST_CASE("close_gaps shards work by gap id and collects closures") {
    std::mt19937_64 rng(25);
    GapParams params;
    params.k = 21;
    RankTopology topo{4, 17};
    std::vector<Gap> gaps;
    std::vector<std::string> truths;
    TableConfig cfg;
    GapReadTable table(
        topo, cfg, [](const std::string& r) { return std::vector<std::string>{r}; },
        [](std::vector<std::string>& v, const std::string& r) { v.push_back(r); });
    table.phase_barrier(PhaseMode::LRW);
    for (std::uint64_t id = 0; id < 6; ++id) {
        std::string left = random_dna(rng, 50);
        std::string inner = random_dna(rng, 30);
        std::string right = random_dna(rng, 50);
        Gap g;
        g.id = id;
        g.flank_left = left;
        g.flank_right = right;
        g.estimate = 30.0;
        g.sigma = 2.0;
        gaps.push_back(g);
        truths.push_back(left + inner + right);
        auto& handle = table.handle(0);
        for (const auto& r : shred(truths.back(), 30, 5))
            handle.lrw_route_and_apply(id, r);
    }
    table.phase_barrier(PhaseMode::LRW);
    auto closures = close_gaps(gaps, table, topo, params);
    REQUIRE(closures.size() == 6);
    for (std::uint64_t id = 0; id < 6; ++id) CHECK(closures.at(id) == truths[id]);
}

TEST_CASE("apply_closures splices flank-to-flank replacements") {
    std::string left = "AAAACCCC";
    std::string right = "GGGGTTTT";
    std::string scaffold = left + "NNNNN" + right;
    Gap gap;
    gap.id = 0;
    gap.flank_left = left;
    gap.flank_right = right;
    gap.scaffold_start = 8;
    gap.scaffold_end = 13;
    std::map<std::uint64_t, std::string> closures = {
        {0, left + "ACGTA" + right}};
    CHECK(apply_closures(scaffold, {gap}, closures) == "AAAACCCCACGTAGGGGTTTT");
    // no closure: untouched
    CHECK(apply_closures(scaffold, {gap}, {}) == scaffold);
}

TEST_CASE("apply_closures handles multiple gaps right to left") {
    std::string scaffold = "AAAA" "NN" "CCCC" "NNN" "GGGG";
    Gap g1, g2;
    g1.id = 0;
    g1.flank_left = "AAAA";
    g1.flank_right = "CCCC";
    g1.scaffold_start = 4;
    g1.scaffold_end = 6;
    g2.id = 1;
    g2.flank_left = "CCCC";
    g2.flank_right = "GGGG";
    g2.scaffold_start = 10;
    g2.scaffold_end = 13;
    std::map<std::uint64_t, std::string> closures = {
        {0, "AAAATTCCCC"},
        {1, "CCCCAGGGG"},
    };
    CHECK(apply_closures(scaffold, {g1, g2}, closures) == "AAAATTCCCCAGGGG");
}
