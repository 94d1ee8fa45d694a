#include "gasm/gap_closer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gasm/worker_pool.hpp"

namespace gasm {

namespace {

std::string oriented_seq(const Contig& c, bool reversed) {
    return reversed ? revcomp_str(c.seq) : c.seq;
}

std::size_t n_run_len(double gap) {
    long n = std::lround(gap);
    return static_cast<std::size_t>(std::max(1L, n));
}

}  // namespace

std::vector<Gap> collect_gaps(const std::vector<Scaffold>& scaffolds,
                              const std::vector<Contig>& contigs,
                              const GapParams& params) {
    std::vector<Gap> gaps;
    const std::size_t flank = static_cast<std::size_t>(params.flank_len);
    for (const Scaffold& s : scaffolds) {
        std::size_t pos = 0;
        std::string prev;
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            const ScaffoldEntry& e = s.entries[i];
            std::string cur = oriented_seq(contigs[e.contig_id], e.reversed);
            if (i > 0) {
                std::size_t n = n_run_len(e.gap_before);
                Gap g;
                g.id = gaps.size();
                g.scaffold_id = s.id;
                g.entry_index = i;
                g.flank_left = prev.size() > flank ? prev.substr(prev.size() - flank) : prev;
                g.flank_right = cur.substr(0, std::min(flank, cur.size()));
                g.estimate = e.gap_before;
                g.sigma = e.gap_sigma_before;
                g.scaffold_start = pos;
                g.scaffold_end = pos + n;
                gaps.push_back(std::move(g));
                pos += n;
            }
            pos += cur.size();
            prev = std::move(cur);
        }
    }
    return gaps;
}

std::map<std::uint64_t, ContigPlacement> place_contigs(
    const std::vector<Scaffold>& scaffolds, const std::vector<Contig>& contigs) {
    std::map<std::uint64_t, ContigPlacement> out;
    for (const Scaffold& s : scaffolds) {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            const ScaffoldEntry& e = s.entries[i];
            if (i > 0) pos += n_run_len(e.gap_before);
            out[e.contig_id] = {s.id, pos, e.reversed};
            pos += contigs[e.contig_id].seq.size();
        }
    }
    return out;
}

std::unique_ptr<GapReadTable> localize_reads(const std::vector<Gap>& gaps,
                                             const std::vector<Scaffold>& scaffolds,
                                             const std::vector<Contig>& contigs,
                                             const std::vector<HalfAlignedPair>& pairs,
                                             const RankTopology& topo,
                                             const GapParams& params) {
    (void)scaffolds;
    auto placements = place_contigs(scaffolds, contigs);
    std::map<std::uint64_t, std::vector<const Gap*>> by_scaffold;
    for (const Gap& g : gaps) by_scaffold[g.scaffold_id].push_back(&g);

    TableConfig cfg;
    cfg.agg_capacity = params.agg_capacity;
    auto init = [](const std::string& r) { return std::vector<std::string>{r}; };
    auto combine = [](std::vector<std::string>& v, const std::string& r) {
        v.push_back(r);
    };
    auto table = std::make_unique<GapReadTable>(topo, cfg, init, combine);
    table->set_stage("gap_closing");
    table->phase_barrier(PhaseMode::LRW);

    const std::int64_t pad = params.flank_len;
    run_workers(topo.num_ranks, [&](int w) {
        auto& handle = table->handle(w);
        auto [begin, end] = slice(pairs.size(), topo.num_ranks, w);
        for (std::size_t i = begin; i < end; ++i) {
            const HalfAlignedPair& p = pairs[i];
            auto pit = placements.find(p.aligned.contig_id);
            if (pit == placements.end()) continue;
            const ContigPlacement& pl = pit->second;
            const std::int64_t clen =
                static_cast<std::int64_t>(contigs[p.aligned.contig_id].seq.size());
            std::int64_t a_lo, a_hi;
            char strand = p.aligned.strand;
            if (!pl.reversed) {
                a_lo = static_cast<std::int64_t>(pl.offset) + p.aligned.contig_start;
                a_hi = static_cast<std::int64_t>(pl.offset) + p.aligned.contig_end;
            } else {
                a_lo = static_cast<std::int64_t>(pl.offset) + clen - p.aligned.contig_end;
                a_hi = static_cast<std::int64_t>(pl.offset) + clen - p.aligned.contig_start;
                strand = strand == '+' ? '-' : '+';
            }
            const std::int64_t L = static_cast<std::int64_t>(p.mate_seq.size());
            const std::int64_t insert = static_cast<std::int64_t>(p.insert_size);
            std::int64_t m_lo;
            std::string fwd;
            if (strand == '+') {
                m_lo = a_lo + insert - L;
                fwd = revcomp_str(p.mate_seq);
            } else {
                m_lo = a_hi - insert;
                fwd = p.mate_seq;
            }
            std::int64_t m_hi = m_lo + L;
            auto sit = by_scaffold.find(pl.scaffold_id);
            if (sit == by_scaffold.end()) continue;
            for (const Gap* g : sit->second) {
                std::int64_t g_lo = static_cast<std::int64_t>(g->scaffold_start) - pad;
                std::int64_t g_hi = static_cast<std::int64_t>(g->scaffold_end) + pad;
                if (m_hi > g_lo && m_lo < g_hi)
                    handle.lrw_route_and_apply(g->id, fwd);
            }
        }
    });
    table->phase_barrier(PhaseMode::LRW);
    return table;
}

std::optional<std::string> close_gap(const Gap& gap,
                                     const std::vector<std::string>& reads,
                                     const GapParams& params) {
    const int kg = params.gap_k();
    const std::size_t kgs = static_cast<std::size_t>(kg);
    if (gap.flank_left.size() < kgs || gap.flank_right.size() < kgs) return std::nullopt;
    const double tol = 3.0 * gap.sigma + params.slack;

    // Direct overlap between the flanks is the degenerate (negative-gap) case.
    std::size_t max_ov = std::min(gap.flank_left.size(), gap.flank_right.size());
    for (std::size_t ov = max_ov; ov >= kgs; --ov) {
        if (std::abs(-static_cast<double>(ov) - gap.estimate) > tol) continue;
        if (gap.flank_left.compare(gap.flank_left.size() - ov, ov, gap.flank_right, 0,
                                   ov) == 0)
            return gap.flank_left + gap.flank_right.substr(ov);
    }

    AnalysisParams ap;
    ap.k = kg;
    ap.epsilon = params.epsilon;
    ap.t_hq = params.t_hq;
    ap.use_bloom = false;
    ap.hh_threshold = 0;
    ap.agg_capacity = params.agg_capacity;
    RankTopology solo{1, 0};
    std::vector<std::string_view> views;
    views.reserve(reads.size() + 2);
    for (const std::string& r : reads) views.push_back(r);
    views.push_back(gap.flank_left);
    views.push_back(gap.flank_right);
    CountResult counted = count_kmers(views, solo, ap, 1.0, {});

    const std::string target = gap.flank_right.substr(0, kgs);
    std::string seq = gap.flank_left;
    std::string cur = seq.substr(seq.size() - kgs);
    const double max_inner = std::max(0.0, gap.estimate + tol);
    const std::size_t max_steps =
        static_cast<std::size_t>(max_inner) + kgs + gap.flank_right.size() + 16;
    for (std::size_t step = 0; cur != target; ++step) {
        if (step >= max_steps) return std::nullopt;
        auto enc = encode(cur);
        if (!enc) return std::nullopt;
        auto [canon, reversed] = canonical(*enc, kg);
        const auto* entry = counted.table->find_entry(canon);
        if (!entry || entry->value.count <= ap.epsilon) return std::nullopt;
        const ExtensionCounts& c = entry->value;
        int letter = -1;
        for (int b = 0; b < 4; ++b) {
            std::uint16_t tally = reversed ? c.left[3 - b] : c.right[b];
            if (tally >= ap.t_hq) {
                if (letter >= 0) return std::nullopt;  // fork inside the gap
                letter = b;
            }
        }
        if (letter < 0) return std::nullopt;  // dead end
        seq += base_char(letter);
        cur = seq.substr(seq.size() - kgs);
    }
    std::string closed = seq + gap.flank_right.substr(kgs);
    double inner = static_cast<double>(closed.size()) -
                   static_cast<double>(gap.flank_left.size()) -
                   static_cast<double>(gap.flank_right.size());
    if (std::abs(inner - gap.estimate) > tol) return std::nullopt;
    return closed;
}

std::map<std::uint64_t, std::string> close_gaps(const std::vector<Gap>& gaps,
                                                GapReadTable& table,
                                                const RankTopology& topo,
                                                const GapParams& params) {
    static const std::vector<std::string> kNoReads;
    std::vector<std::map<std::uint64_t, std::string>> partial(
        static_cast<std::size_t>(topo.num_ranks));
    run_workers(topo.num_ranks, [&](int w) {
        for (const Gap& g : gaps) {
            if (topo.route(g.id) != w) continue;  // reads live in this shard
            const auto& shard = table.shard_map(w);
            auto it = shard.find(g.id);
            const std::vector<std::string>& reads =
                it == shard.end() ? kNoReads : it->second.value;
            if (auto closed = close_gap(g, reads, params))
                partial[static_cast<std::size_t>(w)].emplace(g.id, std::move(*closed));
        }
    });
    std::map<std::uint64_t, std::string> out;
    for (auto& m : partial)
        for (auto& [id, seq] : m) out.emplace(id, std::move(seq));
    return out;
}

std::string apply_closures(const std::string& scaffold_seq,
                           const std::vector<Gap>& gaps,
                           const std::map<std::uint64_t, std::string>& closures) {
    std::vector<const Gap*> ordered;
    for (const Gap& g : gaps) ordered.push_back(&g);
    std::sort(ordered.begin(), ordered.end(),
              [](const Gap* a, const Gap* b) { return a->scaffold_start > b->scaffold_start; });
    std::string out = scaffold_seq;
    for (const Gap* g : ordered) {
        auto it = closures.find(g->id);
        if (it == closures.end()) continue;
        std::size_t lo = g->scaffold_start - g->flank_left.size();
        std::size_t hi = g->scaffold_end + g->flank_right.size();
        if (hi > out.size() || lo > out.size())
            throw std::logic_error("gap coordinates outside scaffold");
        out.replace(lo, hi - lo, it->second);
    }
    return out;
}

}  // namespace gasm
