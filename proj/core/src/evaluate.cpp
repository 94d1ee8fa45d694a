#include "gasm/evaluate.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "gasm/kmer.hpp"

namespace gasm {

namespace {

struct RefPosting {
    std::uint32_t ref;
    std::uint32_t pos;
    bool reversed;
};

// Calls fn(q, canonical, reversed) for every clean window of seq.
template <class Fn>
void rolling_seeds(std::string_view seq, int k, Fn&& fn) {
    Kmer cur = 0;
    int have = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        int b = base_code(seq[i]);
        if (b < 0) {
            have = 0;
            continue;
        }
        cur = ((cur << 2) | static_cast<Kmer>(b)) & kmer_mask(k);
        if (++have >= k) {
            auto [canon, reversed] = canonical(cur, k);
            fn(i + 1 - static_cast<std::size_t>(k), canon, reversed);
        }
    }
}

struct Seed {
    std::int64_t q;
    std::int64_t diag;
};

}  // namespace

EvalReport evaluate_assembly(const std::vector<SeqRecord>& assembly,
                             const std::vector<SeqRecord>& refs,
                             const EvalParams& params) {
    const int k = params.k;
    EvalReport report;
    report.num_sequences = assembly.size();

    std::unordered_map<Kmer, std::vector<RefPosting>> index;
    for (std::uint32_t r = 0; r < refs.size(); ++r) {
        report.reference_len += refs[r].seq.size();
        rolling_seeds(refs[r].seq, k, [&](std::size_t p, Kmer canon, bool reversed) {
            auto& v = index[canon];
            if (v.size() <= params.max_seed_hits)
                v.push_back({r, static_cast<std::uint32_t>(p), reversed});
        });
    }

    std::vector<std::uint64_t> lengths;
    std::uint64_t total_matches = 0, total_aligned = 0;
    // per reference: covered intervals
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> covered(refs.size());

    for (const SeqRecord& rec : assembly) {
        lengths.push_back(rec.seq.size());
        report.assembly_len += rec.seq.size();
        // split into blocks at non-ACGT runs
        std::size_t i = 0;
        while (i < rec.seq.size()) {
            while (i < rec.seq.size() && base_code(rec.seq[i]) < 0) ++i;
            std::size_t j = i;
            while (j < rec.seq.size() && base_code(rec.seq[j]) >= 0) ++j;
            if (j > i) {
                std::string_view block(rec.seq.data() + i, j - i);
                ++report.num_blocks;
                const std::int64_t Lb = static_cast<std::int64_t>(block.size());

                std::map<std::pair<std::uint32_t, char>, std::vector<Seed>> groups;
                rolling_seeds(block, k, [&](std::size_t q, Kmer canon, bool rev_q) {
                    auto it = index.find(canon);
                    if (it == index.end() || it->second.size() > params.max_seed_hits)
                        return;
                    for (const RefPosting& p : it->second) {
                        if (p.reversed == rev_q) {
                            groups[{p.ref, '+'}].push_back(
                                {static_cast<std::int64_t>(q),
                                 static_cast<std::int64_t>(p.pos) -
                                     static_cast<std::int64_t>(q)});
                        } else {
                            std::int64_t qr = Lb - k - static_cast<std::int64_t>(q);
                            groups[{p.ref, '-'}].push_back(
                                {qr, static_cast<std::int64_t>(p.pos) - qr});
                        }
                    }
                });
                if (groups.empty()) {
                    ++report.unaligned_blocks;
                    i = j;
                    continue;
                }
                auto best = groups.begin();
                for (auto it = groups.begin(); it != groups.end(); ++it)
                    if (it->second.size() > best->second.size()) best = it;
                auto [ref_id, strand] = best->first;
                std::vector<Seed>& seeds = best->second;
                std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
                    return std::tie(a.q, a.diag) < std::tie(b.q, b.diag);
                });
                std::string oriented = strand == '+'
                                           ? std::string(block)
                                           : revcomp_str(std::string(block));
                const std::string& ref_seq = refs[ref_id].seq;

                // equal-diagonal runs, compared base by base
                std::size_t s = 0;
                while (s < seeds.size()) {
                    std::size_t t = s;
                    while (t + 1 < seeds.size() && seeds[t + 1].diag == seeds[s].diag)
                        ++t;
                    std::int64_t q0 = seeds[s].q, q1 = seeds[t].q + k;
                    std::int64_t d = seeds[s].diag;
                    std::int64_t r0 = q0 + d, r1 = q1 + d;
                    if (r0 >= 0 && r1 <= static_cast<std::int64_t>(ref_seq.size())) {
                        for (std::int64_t q = q0; q < q1; ++q)
                            if (oriented[static_cast<std::size_t>(q)] ==
                                ref_seq[static_cast<std::size_t>(q + d)])
                                ++total_matches;
                        total_aligned += static_cast<std::uint64_t>(q1 - q0);
                        covered[ref_id].push_back({r0, r1});
                    }
                    s = t + 1;
                }

                // best banded chain explains the block, or it is misjoined
                std::int64_t best_span = 0;
                std::size_t c = 0;
                while (c < seeds.size()) {
                    std::size_t e = c;
                    while (e + 1 < seeds.size() &&
                           std::abs(seeds[e + 1].diag - seeds[e].diag) <=
                               params.chain_band)
                        ++e;
                    best_span = std::max(best_span, seeds[e].q + k - seeds[c].q);
                    c = e + 1;
                }
                if (Lb >= static_cast<std::int64_t>(params.min_block_len_factor) * k &&
                    static_cast<double>(best_span) <
                        params.min_block_fraction * static_cast<double>(Lb))
                    ++report.misassemblies;
            }
            i = j;
        }
    }

    std::uint64_t covered_total = 0;
    for (auto& intervals : covered) {
        std::sort(intervals.begin(), intervals.end());
        std::int64_t lo = 0, hi = 0;
        bool open = false;
        for (auto [a, b] : intervals) {
            if (!open || a > hi) {
                if (open) covered_total += static_cast<std::uint64_t>(hi - lo);
                lo = a;
                hi = b;
                open = true;
            } else {
                hi = std::max(hi, b);
            }
        }
        if (open) covered_total += static_cast<std::uint64_t>(hi - lo);
    }
    report.coverage = report.reference_len == 0
                          ? 0.0
                          : static_cast<double>(covered_total) /
                                static_cast<double>(report.reference_len);
    report.identity = total_aligned == 0
                          ? 0.0
                          : static_cast<double>(total_matches) /
                                static_cast<double>(total_aligned);

    std::sort(lengths.begin(), lengths.end(), std::greater<>());
    if (!lengths.empty()) report.largest = lengths.front();
    std::uint64_t half = report.assembly_len / 2, acc = 0;
    for (std::uint64_t len : lengths) {
        acc += len;
        if (acc >= half) {
            report.n50 = len;
            break;
        }
    }
    return report;
}

}  // namespace gasm
