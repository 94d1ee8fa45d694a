#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gasm/scaffolder.hpp"

using namespace gasm;
namespace fs = std::filesystem;

namespace {

std::vector<Contig> two_contigs() {
    return {{0, std::string(100, 'A'), 0.0}, {1, std::string(80, 'C'), 0.0}};
}

Alignment aln(std::uint64_t contig, char strand, std::int64_t cstart, std::int64_t cend) {
    Alignment a;
    a.contig_id = contig;
    a.strand = strand;
    a.contig_start = cstart;
    a.contig_end = cend;
    return a;
}

}  // namespace

TEST_CASE("endpoint codes pack contig and side") {
    CHECK(endpoint_code(7, 'L') == 14);
    CHECK(endpoint_code(7, 'R') == 15);
    CHECK(endpoint_contig(15) == 7);
    CHECK(endpoint_side(15) == 'R');
    CHECK(endpoint_side(14) == 'L');
}

TEST_CASE("gen_links aggregates gap estimates per endpoint pair") {
    auto contigs = two_contigs();
    // + on contig 0 starting at 60 consumes 40; - on contig 1 ending at 30
    // consumes 30; inserts 100/110/120 give gaps 30/40/50
    std::vector<PairAln> pairs;
    for (double insert : {100.0, 110.0, 120.0})
        pairs.push_back({aln(0, '+', 60, 100), aln(1, '-', 0, 30), insert});
    ScaffoldParams params;
    params.min_support = 3;
    RankTopology topo{4, 11};
    auto links = gen_links(pairs, contigs, topo, params);
    REQUIRE(links.size() == 1);
    CHECK(links[0].ep1 == endpoint_code(0, 'R'));
    CHECK(links[0].ep2 == endpoint_code(1, 'L'));
    CHECK(links[0].support == 3);
    CHECK(links[0].gap_mean == doctest::Approx(40.0));
    CHECK(links[0].gap_sigma == doctest::Approx(std::sqrt(200.0 / 3.0)));
}

TEST_CASE("gen_links ignores same-contig pairs and thin links") {
    auto contigs = two_contigs();
    std::vector<PairAln> pairs = {
        {aln(0, '+', 10, 60), aln(0, '-', 40, 90), 150.0},  // same contig
        {aln(0, '+', 60, 100), aln(1, '-', 0, 30), 100.0},  // support 1 only
    };
    ScaffoldParams params;
    params.min_support = 3;
    RankTopology topo{2, 1};
    CHECK(gen_links(pairs, contigs, topo, params).empty());
}

TEST_CASE("gen_links orientation drives which ends face each other") {
    auto contigs = two_contigs();
    // - on contig 0 faces its left end; + on contig 1 faces its right end
    std::vector<PairAln> pairs(3, {aln(0, '-', 0, 50), aln(1, '+', 20, 80), 200.0});
    ScaffoldParams params;
    RankTopology topo{2, 9};
    auto links = gen_links(pairs, contigs, topo, params);
    REQUIRE(links.size() == 1);
    CHECK(links[0].ep1 == endpoint_code(0, 'L'));
    CHECK(links[0].ep2 == endpoint_code(1, 'R'));
    // consumed: contig_end 50 plus len-start = 80-20=60 -> gap 90
    CHECK(links[0].gap_mean == doctest::Approx(90.0));
    CHECK(links[0].gap_sigma == doctest::Approx(0.0));
}

TEST_CASE("compute_attrs averages k-mer counts over each contig") {
    const int k = 5;
    RankTopology topo{2, 3};
    CountTable counts(
        topo, TableConfig{},
        [](const KmerObs&) { return ExtensionCounts{}; },
        [](ExtensionCounts& c, const KmerObs&) { ++c.count; });
    std::vector<Contig> contigs = {{0, "GATCTGAACCG", 0.0}};
    // seed the table: give the 7 windows counts 1..7
    std::uint32_t next = 1;
    for (const auto& kx : extract_kmers(contigs[0].seq, k)) {
        Kmer canon = canonical(kx.kmer, k).first;
        ExtensionCounts c;
        c.count = next++;
        counts.shard_map(topo.route(canon))
            .emplace(std::piecewise_construct, std::forward_as_tuple(canon),
                     std::forward_as_tuple(c));
    }
    compute_attrs(contigs, counts, topo, k);
    CHECK(contigs[0].mean_depth == doctest::Approx(4.0));  // mean of 1..7
    CHECK(counts.stage_stats("scaffolding").remote_lookups == 7);
}

TEST_CASE("remove_bubbles keeps the deeper parallel path") {
    // junctions A(id 0) and B(id 1); X(id 2, depth 10) and Z(id 3, depth 5)
    // form parallel single-contig paths A.R -> {X,Z} -> B.L
    std::vector<Contig> contigs = {{0, "AAAA", 20.0},
                                   {1, "CCCC", 20.0},
                                   {2, "GGGG", 10.0},
                                   {3, "TTTT", 5.0}};
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(2, 'L'), 5, 10.0, 1.0},
        {endpoint_code(2, 'R'), endpoint_code(1, 'L'), 4, 12.0, 1.0},
        {endpoint_code(0, 'R'), endpoint_code(3, 'L'), 3, 11.0, 1.0},
        {endpoint_code(3, 'R'), endpoint_code(1, 'L'), 3, 13.0, 1.0},
    };
    auto result = remove_bubbles(links, contigs);
    CHECK(result.removed_contigs == std::unordered_set<std::uint64_t>{3});
    REQUIRE(result.links.size() == 2);
    // losers' minimum support (3) merged into the winners
    for (const auto& link : result.links) {
        CHECK(endpoint_contig(link.ep1) != 3);
        CHECK(endpoint_contig(link.ep2) != 3);
    }
    CHECK(result.links[0].support == 8);
    CHECK(result.links[1].support == 7);
}

TEST_CASE("remove_bubbles leaves non-parallel structure alone") {
    std::vector<Contig> contigs = {{0, "AAAA", 9.0}, {1, "CCCC", 9.0}, {2, "GGGG", 9.0}};
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(1, 'L'), 5, 10.0, 1.0},
        {endpoint_code(1, 'R'), endpoint_code(2, 'L'), 4, 12.0, 1.0},
    };
    auto result = remove_bubbles(links, contigs);
    CHECK(result.removed_contigs.empty());
    CHECK(result.links == links);
}

TEST_CASE("remove_bubbles collapses a two-contig alternative path") {
    // keep path: single deep contig 2; loser path: contigs 3 -> 4
    std::vector<Contig> contigs = {{0, "AAAA", 20.0}, {1, "CCCC", 20.0},
                                   {2, "GGGG", 12.0}, {3, "TTTT", 4.0},
                                   {4, "ACGT", 4.0}};
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(2, 'L'), 6, 10.0, 1.0},
        {endpoint_code(2, 'R'), endpoint_code(1, 'L'), 6, 10.0, 1.0},
        {endpoint_code(0, 'R'), endpoint_code(3, 'L'), 3, 2.0, 1.0},
        {endpoint_code(3, 'R'), endpoint_code(4, 'L'), 3, 2.0, 1.0},
        {endpoint_code(4, 'R'), endpoint_code(1, 'L'), 3, 2.0, 1.0},
    };
    auto result = remove_bubbles(links, contigs);
    CHECK(result.removed_contigs == std::unordered_set<std::uint64_t>{3, 4});
    REQUIRE(result.links.size() == 2);
    CHECK(result.links[0].support == 9);
    CHECK(result.links[1].support == 9);
}

TEST_CASE("build_scaffolds chains through strictly-unique links") {
    std::vector<Contig> contigs = {{0, std::string(100, 'A'), 10.0},
                                   {1, std::string(80, 'C'), 10.0},
                                   {2, std::string(60, 'G'), 10.0}};
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(1, 'L'), 10, 20.0, 2.0},
        {endpoint_code(1, 'R'), endpoint_code(2, 'L'), 8, 5.0, 1.0},
    };
    ScaffoldParams params;
    auto scaffolds = build_scaffolds(contigs, links, params);
    REQUIRE(scaffolds.size() == 1);
    const auto& s = scaffolds[0];
    REQUIRE(s.entries.size() == 3);
    // the chain is one scaffold; all orientations consistent (either
    // 0,1,2 forward or 2,1,0 reversed)
    bool forward = s.entries[0].contig_id == 0;
    if (forward) {
        CHECK(s.entries[1].contig_id == 1);
        CHECK(s.entries[2].contig_id == 2);
        CHECK(s.entries[1].gap_before == doctest::Approx(20.0));
        CHECK(s.entries[2].gap_before == doctest::Approx(5.0));
        for (const auto& e : s.entries) CHECK_FALSE(e.reversed);
    } else {
        CHECK(s.entries[0].contig_id == 2);
        CHECK(s.entries[1].contig_id == 1);
        CHECK(s.entries[2].contig_id == 0);
        CHECK(s.entries[1].gap_before == doctest::Approx(5.0));
        CHECK(s.entries[2].gap_before == doctest::Approx(20.0));
        for (const auto& e : s.entries) CHECK(e.reversed);
    }
}

TEST_CASE("ambiguous equal-support links stop the chain") {
    std::vector<Contig> contigs = {{0, std::string(100, 'A'), 10.0},
                                   {1, std::string(80, 'C'), 10.0},
                                   {2, std::string(60, 'G'), 10.0}};
    // contig 0's right end has two rival links of equal support
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(1, 'L'), 5, 20.0, 2.0},
        {endpoint_code(0, 'R'), endpoint_code(2, 'L'), 5, 5.0, 1.0},
    };
    ScaffoldParams params;
    auto scaffolds = build_scaffolds(contigs, links, params);
    CHECK(scaffolds.size() == 3);
    for (const auto& s : scaffolds) CHECK(s.entries.size() == 1);
}

TEST_CASE("entering a right endpoint flips the contig") {
    std::vector<Contig> contigs = {{0, "AAAACCCC", 10.0}, {1, "GGGGTTTT", 10.0}};
    // contig 0 right end meets contig 1 right end: 1 must appear reversed
    std::vector<ContigLink> links = {
        {endpoint_code(0, 'R'), endpoint_code(1, 'R'), 6, 3.0, 1.0}};
    ScaffoldParams params;
    auto scaffolds = build_scaffolds(contigs, links, params);
    REQUIRE(scaffolds.size() == 1);
    const auto& s = scaffolds[0];
    REQUIRE(s.entries.size() == 2);
    CHECK(s.entries[0].reversed != s.entries[1].reversed);
    std::string seq = scaffold_sequence(s, contigs);
    bool fwd = seq == "AAAACCCC" + std::string(3, 'N') + revcomp_str("GGGGTTTT");
    bool bwd = seq == "GGGGTTTT" + std::string(3, 'N') + revcomp_str("AAAACCCC");
    CHECK((fwd || bwd));
}

TEST_CASE("scaffold sequence joins with max(1, round(gap)) Ns") {
    std::vector<Contig> contigs = {{0, "AAAA", 1.0}, {1, "CCCC", 1.0}, {2, "GGGG", 1.0}};
    Scaffold s;
    s.id = 0;
    s.entries = {{0, false, 0, 0}, {1, false, 0.4, 0}, {2, false, -5.0, 0}};
    CHECK(scaffold_sequence(s, contigs) == "AAAANCCCCNGGGG");
    s.entries[1].gap_before = 2.6;
    CHECK(scaffold_sequence(s, contigs) == "AAAANNNCCCCNGGGG");
    // reversed entry contributes its reverse complement
    s.entries = {{0, false, 0, 0}, {1, true, 1.0, 0}};
    CHECK(scaffold_sequence(s, contigs) == "AAAANGGGG");
}

TEST_CASE("scaffold fasta output is well formed") {
    std::vector<Contig> contigs = {{0, "AAAATTTT", 1.0}, {1, "CCCCGGGG", 1.0}};
    std::vector<Scaffold> scaffolds(1);
    scaffolds[0].id = 0;
    scaffolds[0].entries = {{0, false, 0, 0}, {1, false, 4.0, 0}};
    fs::path tmp = fs::temp_directory_path() / "gasm_test_scaf.fasta";
    write_scaffold_fasta(tmp.string(), scaffolds, contigs);
    std::ifstream in(tmp);
    std::string header, seq;
    std::getline(in, header);
    std::getline(in, seq);
    CHECK(header == ">scaffold_0 parts=2 len=20");
    CHECK(seq == "AAAATTTTNNNNCCCCGGGG");
    fs::remove(tmp);
}
