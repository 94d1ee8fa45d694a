#include "gasm/scaffolder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "gasm/worker_pool.hpp"

namespace gasm {

namespace {

struct LinkAgg {
    std::uint32_t support;
    double gap_sum;
    double gap_sq_sum;
};

struct EndObs {
    std::uint64_t ep;
    double consumed;
};

EndObs observe_end(const Alignment& a, const std::vector<Contig>& contigs) {
    const Contig& c = contigs[a.contig_id];
    if (a.strand == '+')
        return {endpoint_code(a.contig_id, 'R'),
                static_cast<double>(c.seq.size()) - static_cast<double>(a.contig_start)};
    return {endpoint_code(a.contig_id, 'L'), static_cast<double>(a.contig_end)};
}

std::uint64_t pair_key(std::uint64_t ep1, std::uint64_t ep2) {
    if (ep1 > ep2) std::swap(ep1, ep2);
    return (ep1 << 32) | ep2;
}

}  // namespace

std::vector<ContigLink> gen_links(const std::vector<PairAln>& pairs,
                                  const std::vector<Contig>& contigs,
                                  const RankTopology& topo,
                                  const ScaffoldParams& params) {
    TableConfig cfg;
    cfg.agg_capacity = params.agg_capacity;
    auto init = [](const double& gap) { return LinkAgg{1, gap, gap * gap}; };
    auto combine = [](LinkAgg& agg, const double& gap) {
        ++agg.support;
        agg.gap_sum += gap;
        agg.gap_sq_sum += gap * gap;
    };
    ShardedTable<LinkAgg, double> table(topo, cfg, init, combine);
    table.set_stage("scaffolding");
    run_workers(topo.num_ranks, [&](int w) {
        auto& handle = table.handle(w);
        auto [begin, end] = slice(pairs.size(), topo.num_ranks, w);
        for (std::size_t i = begin; i < end; ++i) {
            const PairAln& p = pairs[i];
            if (p.end1.contig_id == p.end2.contig_id) continue;
            EndObs e1 = observe_end(p.end1, contigs);
            EndObs e2 = observe_end(p.end2, contigs);
            double gap = p.insert_size - e1.consumed - e2.consumed;
            handle.guo_update(pair_key(e1.ep, e2.ep), gap);
        }
    });
    table.phase_barrier(PhaseMode::GUO);

    std::vector<ContigLink> links;
    table.for_each([&](std::uint64_t key, const auto& entry) {
        const LinkAgg& agg = entry.value;
        if (agg.support < params.min_support) return;
        ContigLink link;
        link.ep1 = key >> 32;
        link.ep2 = key & 0xffffffffULL;
        link.support = agg.support;
        link.gap_mean = agg.gap_sum / agg.support;
        double var = agg.gap_sq_sum / agg.support - link.gap_mean * link.gap_mean;
        link.gap_sigma = var > 0 ? std::sqrt(var) : 0.0;
        links.push_back(link);
    });
    std::sort(links.begin(), links.end(), [](const ContigLink& a, const ContigLink& b) {
        return std::tie(a.ep1, a.ep2) < std::tie(b.ep1, b.ep2);
    });
    return links;
}

void compute_attrs(std::vector<Contig>& contigs, CountTable& counts,
                   const RankTopology& topo, int k) {
    counts.set_stage("scaffolding");
    counts.phase_barrier(PhaseMode::GRO);
    run_workers(topo.num_ranks, [&](int w) {
        auto& handle = counts.handle(w);
        auto [begin, end] = slice(contigs.size(), topo.num_ranks, w);
        for (std::size_t i = begin; i < end; ++i) {
            Contig& c = contigs[i];
            std::uint64_t total = 0, n = 0;
            for (const auto& kx : extract_kmers(c.seq, k)) {
                Kmer canon = canonical(kx.kmer, k).first;
                const ExtensionCounts* counts_ptr = handle.gro_lookup(canon);
                if (counts_ptr) {
                    total += counts_ptr->count;
                    ++n;
                }
            }
            c.mean_depth = n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
        }
    });
}

namespace {

struct Path {
    std::uint64_t junc_a, junc_b;           // endpoint codes of the flanks
    std::vector<std::uint64_t> contig_ids;  // interior contigs, in order a->b
    std::vector<std::size_t> link_idx;      // links along the path
};

std::uint64_t other_end(std::uint64_t ep) { return ep ^ 1; }

}  // namespace

BubbleResult remove_bubbles(const std::vector<ContigLink>& links,
                            const std::vector<Contig>& contigs) {
    std::map<std::uint64_t, std::vector<std::size_t>> at;  // endpoint -> link indices
    for (std::size_t i = 0; i < links.size(); ++i) {
        at[links[i].ep1].push_back(i);
        at[links[i].ep2].push_back(i);
    }
    auto far_ep = [&](std::size_t li, std::uint64_t from) {
        return links[li].ep1 == from ? links[li].ep2 : links[li].ep1;
    };
    // An interior contig is clean when its endpoints carry exactly the path's
    // links and nothing else; removing it then cannot orphan other structure.
    auto degree = [&](std::uint64_t ep) {
        auto it = at.find(ep);
        return it == at.end() ? std::size_t{0} : it->second.size();
    };
    static const std::vector<std::size_t> kNone;
    auto links_at = [&](std::uint64_t ep) -> const std::vector<std::size_t>& {
        auto it = at.find(ep);
        return it == at.end() ? kNone : it->second;
    };

    std::vector<Path> paths;
    for (const auto& [junc, out] : at) {
        for (std::size_t l1 : out) {
            std::uint64_t x_in = far_ep(l1, junc);
            std::uint64_t x_out = other_end(x_in);
            std::uint64_t x = endpoint_contig(x_in);
            if (degree(x_in) != 1) continue;
            if (degree(x_out) != 1) continue;
            for (std::size_t l2 : links_at(x_out)) {
                std::uint64_t nxt = far_ep(l2, x_out);
                if (endpoint_contig(nxt) == x) continue;
                // length-1 path: junc -(l1)- X -(l2)- nxt; emit once per
                // unordered junction pair
                if (nxt < junc && endpoint_contig(nxt) != endpoint_contig(junc))
                    paths.push_back({nxt, junc, {x}, {l2, l1}});
                // length-2 path: junc -(l1)- X -(l2)- Y -(l3)- far
                std::uint64_t y_out = other_end(nxt);
                std::uint64_t y = endpoint_contig(nxt);
                if (y == endpoint_contig(junc)) continue;
                if (degree(nxt) != 1 || degree(y_out) != 1) continue;
                for (std::size_t l3 : links_at(y_out)) {
                    std::uint64_t far = far_ep(l3, y_out);
                    if (endpoint_contig(far) == x || endpoint_contig(far) == y) continue;
                    if (far > junc) continue;
                    paths.push_back({far, junc, {y, x}, {l3, l2, l1}});
                }
            }
        }
    }

    // Group parallel paths by junction pair.
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < paths.size(); ++i)
        groups[{paths[i].junc_a, paths[i].junc_b}].push_back(i);

    std::vector<std::uint32_t> extra_support(links.size(), 0);
    std::vector<bool> drop_link(links.size(), false);
    BubbleResult result;
    for (auto& [junc, members] : groups) {
        if (members.size() < 2) continue;
        auto path_depth = [&](const Path& p) {
            double sum = 0;
            for (std::uint64_t cid : p.contig_ids) sum += contigs[cid].mean_depth;
            return sum / static_cast<double>(p.contig_ids.size());
        };
        auto path_support = [&](const Path& p) {
            std::uint32_t s = UINT32_MAX;
            for (std::size_t li : p.link_idx) s = std::min(s, links[li].support);
            return s;
        };
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            double da = path_depth(paths[a]), db = path_depth(paths[b]);
            if (da != db) return da > db;
            return paths[a].contig_ids.front() < paths[b].contig_ids.front();
        });
        const Path& keep = paths[members.front()];
        for (std::size_t m = 1; m < members.size(); ++m) {
            const Path& loser = paths[members[m]];
            bool disjoint = true;
            for (std::uint64_t cid : loser.contig_ids)
                for (std::uint64_t kid : keep.contig_ids)
                    if (cid == kid) disjoint = false;
            if (!disjoint) continue;
            std::uint32_t s = path_support(loser);
            for (std::size_t li : loser.link_idx) drop_link[li] = true;
            for (std::uint64_t cid : loser.contig_ids) result.removed_contigs.insert(cid);
            for (std::size_t li : keep.link_idx) extra_support[li] += s;
        }
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (drop_link[i]) continue;
        ContigLink link = links[i];
        link.support += extra_support[i];
        result.links.push_back(link);
    }
    return result;
}

namespace {

void reverse_scaffold(Scaffold& s) {
    const std::size_t n = s.entries.size();
    std::vector<ScaffoldEntry> rev(n);
    for (std::size_t j = 0; j < n; ++j) {
        rev[j] = s.entries[n - 1 - j];
        rev[j].reversed = !rev[j].reversed;
        if (j == 0) {
            rev[j].gap_before = 0;
            rev[j].gap_sigma_before = 0;
        } else {
            rev[j].gap_before = s.entries[n - j].gap_before;
            rev[j].gap_sigma_before = s.entries[n - j].gap_sigma_before;
        }
    }
    s.entries = std::move(rev);
}

}  // namespace

std::vector<Scaffold> build_scaffolds(const std::vector<Contig>& contigs,
                                      const std::vector<ContigLink>& links,
                                      const ScaffoldParams& params) {
    std::map<std::uint64_t, std::vector<const ContigLink*>> at;
    for (const ContigLink& link : links) {
        if (link.support < params.min_support) continue;
        at[link.ep1].push_back(&link);
        at[link.ep2].push_back(&link);
    }
    // A usable step must be strictly heavier than every rival at both ends.
    auto unique_link = [&](std::uint64_t ep) -> const ContigLink* {
        auto it = at.find(ep);
        if (it == at.end()) return nullptr;
        const ContigLink* best = nullptr;
        for (const ContigLink* l : it->second) {
            if (!best || l->support > best->support) best = l;
            else if (l != best && l->support == best->support) return nullptr;
        }
        for (const ContigLink* l : it->second)
            if (l != best && l->support >= best->support) return nullptr;
        std::uint64_t far = best->ep1 == ep ? best->ep2 : best->ep1;
        auto ft = at.find(far);
        for (const ContigLink* l : ft->second)
            if (l != best && l->support >= best->support) return nullptr;
        return best;
    };

    std::vector<std::size_t> order(contigs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (contigs[a].seq.size() != contigs[b].seq.size())
            return contigs[a].seq.size() > contigs[b].seq.size();
        return contigs[a].id < contigs[b].id;
    });

    std::vector<bool> used(contigs.size(), false);
    std::vector<Scaffold> scaffolds;
    auto extend_right = [&](Scaffold& s) {
        for (;;) {
            const ScaffoldEntry& tail = s.entries.back();
            std::uint64_t cur = endpoint_code(tail.contig_id, tail.reversed ? 'L' : 'R');
            const ContigLink* link = unique_link(cur);
            if (!link) return;
            std::uint64_t enter = link->ep1 == cur ? link->ep2 : link->ep1;
            std::uint64_t tgt = endpoint_contig(enter);
            if (used[tgt]) return;
            ScaffoldEntry e;
            e.contig_id = tgt;
            e.reversed = endpoint_side(enter) == 'R';
            e.gap_before = link->gap_mean;
            e.gap_sigma_before = link->gap_sigma;
            s.entries.push_back(e);
            used[tgt] = true;
        }
    };

    for (std::size_t idx : order) {
        if (used[idx]) continue;
        used[idx] = true;
        Scaffold s;
        s.id = scaffolds.size();
        s.entries.push_back({contigs[idx].id, false, 0, 0});
        extend_right(s);
        reverse_scaffold(s);
        extend_right(s);
        scaffolds.push_back(std::move(s));
    }
    return scaffolds;
}

std::string scaffold_sequence(const Scaffold& scaffold,
                              const std::vector<Contig>& contigs) {
    std::string out;
    for (std::size_t i = 0; i < scaffold.entries.size(); ++i) {
        const ScaffoldEntry& e = scaffold.entries[i];
        if (i > 0) {
            long n = std::lround(e.gap_before);
            out.append(static_cast<std::size_t>(std::max(1L, n)), 'N');
        }
        const std::string& seq = contigs[e.contig_id].seq;
        out += e.reversed ? revcomp_str(seq) : seq;
    }
    return out;
}

void write_scaffold_fasta(const std::string& path,
                          const std::vector<Scaffold>& scaffolds,
                          const std::vector<Contig>& contigs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Scaffold& s : scaffolds) {
        std::string seq = scaffold_sequence(s, contigs);
        out << ">scaffold_" << s.id << " parts=" << s.entries.size()
            << " len=" << seq.size() << '\n';
        for (std::size_t i = 0; i < seq.size(); i += 80)
            out << seq.substr(i, 80) << '\n';
    }
}

}  // namespace gasm
