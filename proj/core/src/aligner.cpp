#include "gasm/aligner.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gasm/worker_pool.hpp"

namespace gasm {

SeedIndex build_seed_index(const std::vector<Contig>& contigs, const RankTopology& topo,
                           const AlignParams& params) {
    check_k(params.k);
    TableConfig cfg;
    cfg.agg_capacity = params.agg_capacity;
    auto init = [](const Posting& p) { return std::vector<Posting>{p}; };
    auto combine = [](std::vector<Posting>& v, const Posting& p) { v.push_back(p); };
    SeedIndex index;
    index.params = params;
    index.contigs = &contigs;
    index.table = std::make_unique<SeedTable>(topo, cfg, init, combine);
    index.table->set_stage("alignment");
    const int k = params.k;
    run_workers(topo.num_ranks, [&](int w) {
        auto& handle = index.table->handle(w);
        auto [begin, end] = slice(contigs.size(), topo.num_ranks, w);
        for (std::size_t c = begin; c < end; ++c) {
            const std::string& seq = contigs[c].seq;  // contigs are N-free
            if (seq.size() < static_cast<std::size_t>(k)) continue;
            Kmer cur = 0;
            for (int i = 0; i < k; ++i)
                cur = (cur << 2) | static_cast<Kmer>(base_code(seq[static_cast<std::size_t>(i)]));
            for (std::size_t p = 0;; ++p) {
                auto [canon, reversed] = canonical(cur, k);
                handle.guo_update(canon,
                                  Posting{static_cast<std::uint32_t>(contigs[c].id),
                                          static_cast<std::uint32_t>(p), reversed});
                if (p + static_cast<std::size_t>(k) >= seq.size()) break;
                cur = ((cur << 2) | static_cast<Kmer>(
                                        base_code(seq[p + static_cast<std::size_t>(k)]))) &
                      kmer_mask(k);
            }
        }
    });
    // Postings are order-sensitive per key: sort for worker-count invariance.
    index.table->phase_barrier(PhaseMode::GRO);
    for (int r = 0; r < topo.num_ranks; ++r)
        for (auto& [key, entry] : index.table->shard_map(r))
            std::sort(entry.value.begin(), entry.value.end(),
                      [](const Posting& a, const Posting& b) {
                          return std::tie(a.contig_id, a.offset, a.reversed) <
                                 std::tie(b.contig_id, b.offset, b.reversed);
                      });
    return index;
}

LocalAlignResult local_align(std::string_view a, std::string_view b,
                             const AlignParams& params) {
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    const int NEG = -(1 << 28);
    auto idx = [m](int i, int j) { return static_cast<std::size_t>(i) *
                                          static_cast<std::size_t>(m + 1) +
                                          static_cast<std::size_t>(j); };
    std::vector<int> H(idx(n, m) + 1, 0), E(idx(n, m) + 1, NEG), F(idx(n, m) + 1, NEG);
    // move codes: 0 stop, 1 diag, 2 from E (gap in a), 3 from F (gap in b)
    std::vector<std::uint8_t> moveH(idx(n, m) + 1, 0), extE(idx(n, m) + 1, 0),
        extF(idx(n, m) + 1, 0);
    int best = 0, bi = 0, bj = 0;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) {
            int e_open = H[idx(i, j - 1)] + params.gap_open;
            int e_ext = E[idx(i, j - 1)] + params.gap_extend;
            E[idx(i, j)] = std::max(e_open, e_ext);
            extE[idx(i, j)] = e_ext > e_open;
            int f_open = H[idx(i - 1, j)] + params.gap_open;
            int f_ext = F[idx(i - 1, j)] + params.gap_extend;
            F[idx(i, j)] = std::max(f_open, f_ext);
            extF[idx(i, j)] = f_ext > f_open;
            int sub = a[static_cast<std::size_t>(i - 1)] == b[static_cast<std::size_t>(j - 1)]
                          ? params.match : params.mismatch;
            int diag = H[idx(i - 1, j - 1)] + sub;
            int h = 0;
            std::uint8_t mv = 0;
            if (diag > h) { h = diag; mv = 1; }
            if (E[idx(i, j)] > h) { h = E[idx(i, j)]; mv = 2; }
            if (F[idx(i, j)] > h) { h = F[idx(i, j)]; mv = 3; }
            H[idx(i, j)] = h;
            moveH[idx(i, j)] = mv;
            if (h > best) { best = h; bi = i; bj = j; }
        }
    }
    LocalAlignResult res;
    res.score = best;
    int i = bi, j = bj, state = 0;  // 0 = H, 2 = E, 3 = F
    while (i > 0 && j > 0) {
        if (state == 0) {
            std::uint8_t mv = moveH[idx(i, j)];
            if (mv == 0) break;
            if (mv == 1) {
                if (a[static_cast<std::size_t>(i - 1)] ==
                    b[static_cast<std::size_t>(j - 1)])
                    ++res.matches;
                ++res.aligned_len;
                --i; --j;
            } else {
                state = mv;
            }
        } else if (state == 2) {
            ++res.aligned_len;
            bool ext = extE[idx(i, j)];
            --j;
            if (!ext) state = 0;
        } else {
            ++res.aligned_len;
            bool ext = extF[idx(i, j)];
            --i;
            if (!ext) state = 0;
        }
    }
    res.a_start = i;
    res.a_end = bi;
    res.b_start = j;
    res.b_end = bj;
    return res;
}

std::vector<Alignment> align_read(SeedIndex& index, int worker, std::uint64_t read_id,
                                  int end, std::string_view read) {
    const AlignParams& P = index.params;
    const int k = P.k;
    const int L = static_cast<int>(read.size());
    std::vector<Alignment> out;
    if (L < k) return out;
    auto& handle = index.table->handle(worker);

    // anchors: (contig, strand, diagonal), diagonal in the strand's query frame
    std::set<std::tuple<std::uint32_t, char, std::int64_t>> anchors;
    for (int q = 0; q + k <= L && anchors.size() < P.max_anchors; ++q) {
        auto win = encode(read.substr(static_cast<std::size_t>(q),
                                      static_cast<std::size_t>(k)));
        if (!win) continue;
        auto [canon, reversed] = canonical(*win, k);
        const std::vector<Posting>* postings = handle.gro_lookup(canon);
        if (!postings || postings->size() > P.max_postings_per_seed) continue;
        for (const Posting& p : *postings) {
            if (p.reversed == reversed) {
                anchors.emplace(p.contig_id, '+',
                                static_cast<std::int64_t>(p.offset) - q);
            } else {
                int qr = L - k - q;  // seed offset in the reverse-complement read
                anchors.emplace(p.contig_id, '-',
                                static_cast<std::int64_t>(p.offset) - qr);
            }
        }
    }
    if (anchors.empty()) return out;

    // One alignment attempt per (contig, strand), window spanning all diagonals.
    std::map<std::pair<std::uint32_t, char>,
             std::pair<std::int64_t, std::int64_t>> spans;
    for (const auto& [cid, strand, diag] : anchors) {
        auto [it, inserted] = spans.try_emplace({cid, strand}, diag, diag);
        if (!inserted) {
            it->second.first = std::min(it->second.first, diag);
            it->second.second = std::max(it->second.second, diag);
        }
    }
    std::string rc;
    for (const auto& [key, span] : spans) {
        auto [cid, strand] = key;
        const Contig& contig = (*index.contigs)[cid];
        std::int64_t lo = std::max<std::int64_t>(0, span.first - P.window_pad);
        std::int64_t hi = std::min<std::int64_t>(
            static_cast<std::int64_t>(contig.seq.size()),
            span.second + L + P.window_pad);
        if (hi <= lo) continue;
        std::string_view query = read;
        if (strand == '-') {
            rc = revcomp_str(std::string(read));
            query = rc;
        }
        std::string_view window(contig.seq.data() + lo,
                                static_cast<std::size_t>(hi - lo));
        LocalAlignResult la = local_align(query, window, P);
        double identity = la.aligned_len == 0
                              ? 0.0
                              : static_cast<double>(la.matches) / la.aligned_len;
        if (la.aligned_len < k || identity < P.min_identity) continue;
        Alignment aln;
        aln.read_id = read_id;
        aln.end = end;
        aln.contig_id = contig.id;
        aln.strand = strand;
        aln.score = la.score;
        aln.matches = la.matches;
        aln.aligned_len = la.aligned_len;
        aln.contig_start = lo + la.b_start;
        aln.contig_end = lo + la.b_end;
        if (strand == '+') {
            aln.read_start = la.a_start;
            aln.read_end = la.a_end;
        } else {
            aln.read_start = L - la.a_end;
            aln.read_end = L - la.a_start;
        }
        out.push_back(aln);
        if (la.score == L * P.match && la.matches == L) break;  // perfect hit
    }
    std::sort(out.begin(), out.end(), [](const Alignment& a, const Alignment& b) {
        return std::tie(b.score, a.contig_id, a.contig_start, a.strand) <
               std::tie(a.score, b.contig_id, b.contig_start, b.strand);
    });
    return out;
}

void write_alignment_tsv(const std::string& path, const std::vector<Alignment>& alns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& a : alns)
        out << a.read_id << '\t' << a.end << '\t' << a.contig_id << '\t'
            << a.read_start << '\t' << a.read_end << '\t' << a.contig_start << '\t'
            << a.contig_end << '\t' << a.strand << '\t' << a.score << '\t'
            << a.matches << '\t' << a.aligned_len << '\n';
}

std::vector<Alignment> read_alignment_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<Alignment> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Alignment a;
        if (!(ss >> a.read_id >> a.end >> a.contig_id >> a.read_start >> a.read_end >>
              a.contig_start >> a.contig_end >> a.strand >> a.score >> a.matches >>
              a.aligned_len))
            throw std::runtime_error("malformed alignment record: " + line);
        out.push_back(a);
    }
    return out;
}

}  // namespace gasm
