#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gasm/contig_gen.hpp"

using namespace gasm;
namespace fs = std::filesystem;

namespace {

// Independent serial oracle: treat the UU records as an undirected graph in
// string space and walk each component with plain string operations.
std::vector<std::string> oracle_components(const std::vector<UURecord>& records, int k) {
    std::map<std::string, std::pair<char, char>> ext;  // canon -> (right, left)
    for (const auto& r : records)
        ext[decode(r.kmer, k)] = {r.ext_right, r.ext_left};

    auto canon_of = [](const std::string& s) {
        std::string rc = revcomp_str(s);
        return rc < s ? rc : s;
    };
    auto comp = [](char c) {
        switch (c) {
            case 'A': return 'T';
            case 'C': return 'G';
            case 'G': return 'C';
            case 'T': return 'A';
        }
        return 'X';
    };
    // oriented extension of window w (as it appears in the walk frame)
    auto step_letter = [&](const std::string& w, bool right) -> char {
        std::string c = canon_of(w);
        auto it = ext.find(c);
        if (it == ext.end()) return '?';
        bool reversed = c != w;
        char letter = right ? (reversed ? comp(it->second.second) : it->second.first)
                            : (reversed ? comp(it->second.first) : it->second.second);
        return letter;
    };

    std::set<std::string> visited;
    std::vector<std::string> out;
    for (const auto& [canon, e] : ext) {
        if (visited.count(canon)) continue;
        std::string seq = canon;
        visited.insert(canon);
        bool cyclic = false;
        // extend right
        while (true) {
            std::string w = seq.substr(seq.size() - static_cast<std::size_t>(k));
            char letter = step_letter(w, true);
            if (letter == 'X' || letter == '?') break;
            std::string next = w.substr(1) + letter;
            std::string nc = canon_of(next);
            if (!ext.count(nc)) break;
            // mutual confirmation: the neighbor must point back
            if (step_letter(next, false) != w.front()) break;
            if (visited.count(nc)) { cyclic = true; break; }
            visited.insert(nc);
            seq += letter;
        }
        if (!cyclic) {
            while (true) {
                std::string w = seq.substr(0, static_cast<std::size_t>(k));
                char letter = step_letter(w, false);
                if (letter == 'X' || letter == '?') break;
                std::string next = letter + w.substr(0, static_cast<std::size_t>(k - 1));
                std::string nc = canon_of(next);
                if (!ext.count(nc)) break;
                if (step_letter(next, true) != w.back()) break;
                if (visited.count(nc)) break;
                visited.insert(nc);
                seq = letter + seq;
            }
        } else {
            // normalize the cycle: k-1 wrap bases were not appended, rotate
            // to the least representative over both strands
            std::string body = seq.substr(static_cast<std::size_t>(k - 1));
            auto least_rot = [](std::string s) {
                std::string best = s;
                for (std::size_t i = 1; i < s.size(); ++i) {
                    std::string r = s.substr(i) + s.substr(0, i);
                    if (r < best) best = r;
                }
                return best;
            };
            std::string fwd = least_rot(body);
            std::string bwd = least_rot(revcomp_str(body));
            std::string rot = std::min(fwd, bwd);
            out.push_back(rot + rot.substr(0, static_cast<std::size_t>(k - 1)));
            continue;
        }
        out.push_back(canonical_seq(seq));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string random_dna(std::mt19937_64& rng, int len) {
    std::string s;
    for (int i = 0; i < len; ++i) s += "ACGT"[rng() % 4];
    return s;
}

}  // namespace

TEST_CASE("build_dbg makes one vertex per record and counts the exchange") {
    auto records = uu_records_from_sequences({"GATCTGA"}, 5);
    RankTopology topo{4, 77};
    auto graph = build_dbg(records, topo, 5);
    CHECK(graph.size() == records.size());
    CHECK(graph.build_stats.records_exchanged == records.size());
    for (const auto& r : records) {
        auto* n = graph.find(r.kmer);
        REQUIRE(n != nullptr);
        CHECK(n->ext_right == r.ext_right);
        CHECK(n->ext_left == r.ext_left);
        CHECK(n->claim.load() == 0);
    }
    CHECK(graph.find(*encode("AAAAA")) == nullptr);
}

TEST_CASE("duplicate records with conflicting extensions throw") {
    std::vector<UURecord> records = {{*encode("ACA"), 'G', 'T'},
                                     {*encode("ACA"), 'C', 'T'}};
    RankTopology topo{2, 1};
    CHECK_THROWS(build_dbg(records, topo, 3));
}

TEST_CASE("seven-base fixture walks out as one contig") {
    // k = 5: the three windows GATCT, ATCTG, TCTGA stay distinct in
    // canonical space and the walk reassembles GATCTGA for any worker count
    auto records = uu_records_from_sequences({"GATCTGA"}, 5);
    REQUIRE(records.size() == 3);
    for (int P : {1, 2, 4, 8}) {
        RankTopology topo{P, 9};
        auto graph = build_dbg(records, topo, 5);
        auto result = traverse(graph, P);
        REQUIRE(result.contigs.size() == 1);
        CHECK(result.contigs[0] == "GATCTGA");
        CHECK(result.contigs[0] == canonical_seq("GATCTGA"));
    }
}

TEST_CASE("single isolated vertex becomes a k-length contig") {
    std::vector<UURecord> records = {{canonical(*encode("GGATC"), 5).first, 'X', 'X'}};
    RankTopology topo{2, 3};
    auto graph = build_dbg(records, topo, 5);
    auto result = traverse(graph, 2);
    REQUIRE(result.contigs.size() == 1);
    CHECK(result.contigs[0] == canonical_seq("GGATC"));
}

TEST_CASE("empty record set yields no contigs") {
    RankTopology topo{4, 0};
    auto graph = build_dbg({}, topo, 5);
    CHECK(graph.size() == 0);
    auto result = traverse(graph, 4);
    CHECK(result.contigs.empty());
}

TEST_CASE("multiple linear components are all recovered") {
    const int k = 13;
    std::mt19937_64 rng(100);
    std::vector<std::string> sources;
    for (int i = 0; i < 5; ++i) sources.push_back(random_dna(rng, 40 + i * 13));
    auto records = uu_records_from_sequences(sources, k);
    auto expect = oracle_components(records, k);
    for (int P : {1, 2, 4, 8}) {
        RankTopology topo{P, 8};
        auto graph = build_dbg(records, topo, k);
        auto result = traverse(graph, P);
        CHECK(result.contigs == expect);
    }
}

TEST_CASE("parallel traversal equals the serial oracle on random graphs") {
    const int k = 13;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        int pieces = 1 + static_cast<int>(rng() % 6);
        std::vector<std::string> sources;
        for (int p = 0; p < pieces; ++p)
            sources.push_back(random_dna(rng, k + static_cast<int>(rng() % 120)));
        std::vector<UURecord> records;
        try {
            records = uu_records_from_sequences(sources, k);
        } catch (const std::invalid_argument&) {
            continue;  // rare canonical k-mer collision across sources
        }
        auto expect = oracle_components(records, k);
        int P = 1 << (trial % 4);  // 1,2,4,8
        RankTopology topo{P, rng()};
        auto graph = build_dbg(records, topo, k);
        auto result = traverse(graph, P, rng());
        REQUIRE_MESSAGE(result.contigs == expect, "trial ", trial, " P=", P);
    }
}

TEST_CASE("a cycle is emitted once in normalized rotation") {
    const int k = 5;
    // circular sequence: walk wraps; every vertex interior
    std::string circle = "ACGTTAGCCATG";
    std::string wrapped = circle + circle.substr(0, static_cast<std::size_t>(k - 1));
    // build records whose extensions wrap around
    std::vector<UURecord> records;
    std::set<Kmer> seen;
    for (std::size_t i = 0; i < circle.size(); ++i) {
        std::string w = wrapped.substr(i, static_cast<std::size_t>(k));
        char left = wrapped[(i + circle.size() - 1) % circle.size()];
        char right = wrapped[(i + static_cast<std::size_t>(k)) % circle.size()];
        auto [canon, obs] = canonical_obs({*encode(w), left, right}, k);
        if (!seen.insert(canon).second) continue;
        records.push_back({canon, obs.right == 4 ? 'X' : "ACGT"[obs.right],
                           obs.left == 4 ? 'X' : "ACGT"[obs.left]});
    }
    std::vector<std::string> outputs;
    for (int P : {1, 2, 4, 8}) {
        RankTopology topo{P, 5};
        auto graph = build_dbg(records, topo, k);
        auto result = traverse(graph, P, 99);
        REQUIRE(result.contigs.size() == 1);
        outputs.push_back(result.contigs[0]);
        // the cycle contains every k-mer exactly once
        CHECK(result.contigs[0].size() == circle.size() + static_cast<std::size_t>(k - 1));
    }
    CHECK(std::equal(outputs.begin() + 1, outputs.end(), outputs.begin()));
}

TEST_CASE("conflict stress: many workers in one component, nothing lost") {
    const int k = 15;
    std::mt19937_64 rng(7);
    std::string genome = random_dna(rng, 2000);
    auto records = uu_records_from_sequences({genome}, k);
    auto expect = oracle_components(records, k);
    REQUIRE(expect.size() == 1);  // long random string: one component
    std::uint64_t total_backoffs = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RankTopology topo{8, 1000 + static_cast<std::uint64_t>(trial)};
        auto graph = build_dbg(records, topo, k);
        auto result = traverse(graph, 8, static_cast<std::uint64_t>(trial));
        REQUIRE(result.contigs.size() == 1);
        CHECK(result.contigs[0] == expect[0]);
        total_backoffs += result.backoffs;
    }
    // with 8 workers inside one component, meetings must actually occur
    CHECK(total_backoffs > 0);
}

TEST_CASE("contig fasta round trip preserves depth") {
    std::vector<Contig> contigs = {{0, "GATCTGAACCG", 24.5}, {1, "ACGTACGTA", 3.0}};
    fs::path tmp = fs::temp_directory_path() / "gasm_test_contigs.fasta";
    write_contig_fasta(tmp.string(), contigs);
    auto back = read_contig_fasta(tmp.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == 0);
    CHECK(back[0].seq == "GATCTGAACCG");
    CHECK(back[0].mean_depth == doctest::Approx(24.5));
    CHECK(back[1].mean_depth == doctest::Approx(3.0));
    CHECK(back[0].kmer_count(3) == 9);
    fs::remove(tmp);
}
