#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "gasm/kmer.hpp"
#include "gasm/simulate.hpp"

using namespace gasm;
namespace fs = std::filesystem;

namespace {

std::vector<SeqRecord> one_ref(std::uint64_t seed, int len) {
    std::mt19937_64 rng(seed);
    std::string s;
    for (int i = 0; i < len; ++i) s += "ACGT"[rng() % 4];
    return {{"ref1", s, ""}};
}

}  // namespace

TEST_CASE("pair count follows depth * G / (2L)") {
    auto refs = one_ref(1, 50000);
    SimParams params;
    params.depth = 30;
    params.read_len = 100;
    auto result = simulate_reads(refs, params);
    std::size_t expect = static_cast<std::size_t>(30.0 * 50000 / (2 * 100));
    CHECK(result.pairs.size() == expect);
    CHECK(result.truth.size() == result.pairs.size());
    for (const auto& p : result.pairs) {
        CHECK(p.read1.size() == 100);
        CHECK(p.read2.size() == 100);
    }
}

TEST_CASE("identical seeds give byte-identical output") {
    auto refs = one_ref(2, 20000);
    SimParams params;
    params.seed = 99;
    auto a = simulate_reads(refs, params);
    auto b = simulate_reads(refs, params);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].read1 == b.pairs[i].read1);
        CHECK(a.pairs[i].read2 == b.pairs[i].read2);
    }
    params.seed = 100;
    auto c = simulate_reads(refs, params);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.pairs.size() && !any_diff; ++i)
        any_diff = a.pairs[i].read1 != c.pairs[i].read1;
    CHECK(any_diff);
}

TEST_CASE("error-free reads match the reference at their truth positions") {
    auto refs = one_ref(3, 30000);
    const std::string& genome = refs[0].seq;
    SimParams params;
    params.error_rate = 0;
    params.seed = 7;
    auto result = simulate_reads(refs, params);
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        const auto& t = result.truth[i];
        const auto& p = result.pairs[i];
        REQUIRE(t.pos + t.insert <= genome.size());
        CHECK(t.insert >= 100);
        std::string fragment = genome.substr(t.pos, t.insert);
        std::string fwd1 = fragment.substr(0, 100);
        std::string fwd2 = revcomp_str(fragment.substr(fragment.size() - 100));
        if (!t.flipped) {
            CHECK(p.read1 == fwd1);
            CHECK(p.read2 == fwd2);
        } else {
            CHECK(p.read1 == fwd2);
            CHECK(p.read2 == fwd1);
        }
    }
}

TEST_CASE("substitution rate lands near the configured value") {
    auto refs = one_ref(4, 30000);
    const std::string& genome = refs[0].seq;
    SimParams params;
    params.error_rate = 0.02;
    params.seed = 11;
    auto result = simulate_reads(refs, params);
    std::uint64_t bases = 0, mismatches = 0;
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        const auto& t = result.truth[i];
        std::string fragment = genome.substr(t.pos, t.insert);
        std::string fwd1 = fragment.substr(0, 100);
        std::string fwd2 = revcomp_str(fragment.substr(fragment.size() - 100));
        const std::string& r1 = t.flipped ? result.pairs[i].read2 : result.pairs[i].read1;
        const std::string& r2 = t.flipped ? result.pairs[i].read1 : result.pairs[i].read2;
        for (int j = 0; j < 100; ++j) {
            bases += 2;
            if (r1[static_cast<std::size_t>(j)] != fwd1[static_cast<std::size_t>(j)]) ++mismatches;
            if (r2[static_cast<std::size_t>(j)] != fwd2[static_cast<std::size_t>(j)]) ++mismatches;
        }
    }
    double rate = static_cast<double>(mismatches) / static_cast<double>(bases);
    CHECK(rate == doctest::Approx(0.02).epsilon(0.15));
}

TEST_CASE("insert sizes are clamped and normally spread") {
    auto refs = one_ref(5, 100000);
    SimParams params;
    params.insert_mu = 395;
    params.insert_sigma = 30;
    params.seed = 13;
    auto result = simulate_reads(refs, params);
    double sum = 0;
    for (const auto& t : result.truth) {
        CHECK(t.insert >= 100);
        CHECK(t.pos + t.insert <= 100000);
        sum += t.insert;
    }
    double mean = sum / static_cast<double>(result.truth.size());
    CHECK(mean == doctest::Approx(395).epsilon(0.01));
    // both orientations occur
    bool fwd = false, rev = false;
    for (const auto& t : result.truth) (t.flipped ? rev : fwd) = true;
    CHECK(fwd);
    CHECK(rev);
}

TEST_CASE("truth and fastq files are written in matching order") {
    auto refs = one_ref(6, 5000);
    SimParams params;
    params.seed = 3;
    auto result = simulate_reads(refs, params);
    fs::path dir = fs::temp_directory_path() / "gasm_test_sim";
    fs::create_directories(dir);
    std::string prefix = (dir / "reads").string();
    write_pair_fastq(prefix, result.pairs);
    write_truth_tsv((dir / "truth.tsv").string(), result.truth);

    auto back = read_pairs(prefix + "_1.fastq", prefix + "_2.fastq", 0, 0);
    REQUIRE(back.size() == result.pairs.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].read1 == result.pairs[i].read1);
        CHECK(back[i].read2 == result.pairs[i].read2);
    }

    std::ifstream truth((dir / "truth.tsv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(truth, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::uint64_t pair_id, pos;
        std::string ref_id, strand;
        std::uint32_t insert;
        ss >> pair_id >> ref_id >> pos >> insert >> strand;
        CHECK(pair_id == result.truth[rows].pair_id);
        CHECK(ref_id == "ref1");
        ++rows;
    }
    CHECK(rows == result.truth.size());
    fs::remove_all(dir);
}
