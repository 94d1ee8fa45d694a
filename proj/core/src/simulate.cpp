#include "gasm/simulate.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "gasm/kmer.hpp"

namespace gasm {

namespace {

// Deterministic across standard library implementations, unlike the
// <random> distribution classes.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng, double mu, double sigma) {
    double u1 = unit_uniform(rng), u2 = unit_uniform(rng);
    if (u1 <= 0) u1 = 0x1.0p-53;
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * 3.14159265358979323846 * u2);
}

void mutate(std::string& seq, double error_rate, std::mt19937_64& rng) {
    for (char& c : seq) {
        if (unit_uniform(rng) >= error_rate) continue;
        int cur = base_code(c);
        int sub = static_cast<int>(rng() % 3);
        if (sub >= cur) ++sub;  // any base but the original
        c = base_char(sub);
    }
}

}  // namespace

SimResult simulate_reads(const std::vector<SeqRecord>& refs, const SimParams& params) {
    SimResult result;
    std::mt19937_64 rng(params.seed);
    const int L = params.read_len;
    std::uint64_t pair_id = 0;
    for (const SeqRecord& ref : refs) {
        const std::uint64_t G = ref.seq.size();
        if (G < static_cast<std::uint64_t>(L)) continue;
        std::uint64_t n_pairs = static_cast<std::uint64_t>(
            std::llround(params.depth * static_cast<double>(G) / (2.0 * L)));
        for (std::uint64_t i = 0; i < n_pairs; ++i) {
            double draw = normal(rng, params.insert_mu, params.insert_sigma);
            std::uint64_t insert = static_cast<std::uint64_t>(std::llround(draw));
            if (insert < static_cast<std::uint64_t>(L)) insert = static_cast<std::uint64_t>(L);
            if (insert > G) insert = G;
            std::uint64_t pos = G == insert ? 0 : rng() % (G - insert + 1);
            std::string fwd = ref.seq.substr(pos, static_cast<std::size_t>(L));
            std::string rev = revcomp_str(ref.seq.substr(
                pos + insert - static_cast<std::uint64_t>(L), static_cast<std::size_t>(L)));
            bool flipped = (rng() & 1) != 0;
            ReadPair pair;
            pair.id = pair_id;
            if (!flipped) {
                pair.read1 = std::move(fwd);
                pair.read2 = std::move(rev);
            } else {
                pair.read1 = std::move(rev);
                pair.read2 = std::move(fwd);
            }
            mutate(pair.read1, params.error_rate, rng);
            mutate(pair.read2, params.error_rate, rng);
            pair.quals1.assign(pair.read1.size(), 'I');
            pair.quals2.assign(pair.read2.size(), 'I');
            result.pairs.push_back(std::move(pair));
            result.truth.push_back({pair_id, ref.id, pos,
                                    static_cast<std::uint32_t>(insert), flipped});
            ++pair_id;
        }
    }
    return result;
}

void write_truth_tsv(const std::string& path, const std::vector<SimTruth>& truth) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const SimTruth& t : truth)
        out << t.pair_id << '\t' << t.ref_id << '\t' << t.pos << '\t' << t.insert
            << '\t' << (t.flipped ? '-' : '+') << '\n';
}

void write_pair_fastq(const std::string& prefix, const std::vector<ReadPair>& pairs) {
    std::vector<SeqRecord> r1, r2;
    r1.reserve(pairs.size());
    r2.reserve(pairs.size());
    for (const ReadPair& p : pairs) {
        std::string name = "pair_" + std::to_string(p.id);
        r1.push_back({name + "/1", p.read1, p.quals1});
        r2.push_back({name + "/2", p.read2, p.quals2});
    }
    write_fastq(prefix + "_1.fastq", r1);
    write_fastq(prefix + "_2.fastq", r2);
}

}  // namespace gasm
