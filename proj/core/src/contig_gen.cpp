#include "gasm/contig_gen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gasm/worker_pool.hpp"

namespace gasm {

namespace {

// Least cyclic rotation (Booth's algorithm), used to normalize circular
// components so their emitted form is schedule independent.
std::string least_rotation(const std::string& s) {
    std::string d = s + s;
    std::size_t n = d.size();
    std::vector<int> f(n, -1);
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
        char c = d[j];
        int i = f[j - best - 1];
        while (i != -1 && c != d[best + static_cast<std::size_t>(i) + 1]) {
            if (c < d[best + static_cast<std::size_t>(i) + 1])
                best = j - static_cast<std::size_t>(i) - 1;
            i = f[static_cast<std::size_t>(i)];
        }
        if (c != d[best + static_cast<std::size_t>(i) + 1]) {
            if (c < d[best]) best = j;
            f[j - best] = -1;
        } else {
            f[j - best] = i + 1;
        }
    }
    return d.substr(best, s.size());
}

std::string normalize_cycle(const std::string& walked, int k) {
    // walked holds every vertex window exactly once: m = len - (k-1)
    std::size_t m = walked.size() - static_cast<std::size_t>(k - 1);
    std::string core = walked.substr(0, m);
    std::string core_rc = revcomp_str(walked).substr(0, m);
    std::string a = least_rotation(core);
    std::string b = least_rotation(core_rc);
    const std::string& best = b < a ? b : a;
    return best + best.substr(0, static_cast<std::size_t>(k - 1));
}

struct SubContig {
    enum Status : int { Active, Parked, Merged, Completed };

    std::uint32_t id = 0;
    int owner = 0;
    std::string seq;
    std::atomic<int> status{Active};
    std::uint32_t merged_into = 0;
    std::mutex mu;
};

// Append-only registry with stable addresses and lock-free reads: ids are
// published through the vertex claim words, so get() may race with create()
// for other slots but never for the slot it reads.
class SubRegistry {
public:
    static constexpr std::size_t kChunkBits = 10;
    static constexpr std::size_t kChunkSize = 1 << kChunkBits;
    static constexpr std::size_t kMaxChunks = 1 << 14;

    SubRegistry() {
        for (auto& c : chunks_) c.store(nullptr, std::memory_order_relaxed);
    }
    ~SubRegistry() {
        for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
    }

    SubContig& create(int owner) {
        std::lock_guard lock(alloc_mu_);
        std::uint32_t id = next_++;
        std::size_t chunk = id >> kChunkBits;
        if (chunk >= kMaxChunks) throw std::runtime_error("subcontig registry overflow");
        SubContig* base = chunks_[chunk].load(std::memory_order_acquire);
        if (!base) {
            base = new SubContig[kChunkSize];
            chunks_[chunk].store(base, std::memory_order_release);
        }
        SubContig& s = base[id & (kChunkSize - 1)];
        s.id = id;
        s.owner = owner;
        return s;
    }

    SubContig& get(std::uint32_t id) {
        SubContig* base = chunks_[id >> kChunkBits].load(std::memory_order_acquire);
        return base[id & (kChunkSize - 1)];
    }

    std::uint32_t count() const { return next_ - 1; }

private:
    std::array<std::atomic<SubContig*>, kMaxChunks> chunks_;
    std::uint32_t next_ = 1;  // claim value 0 means unvisited
    std::mutex alloc_mu_;
};

struct WalkerCtx {
    DbgGraph* graph;
    SubRegistry* registry;
    int worker;
    CommStats stats;
    std::uint64_t backoffs = 0;
};

// Follow merged_into links to the live subcontig currently owning a claim.
std::uint32_t resolve_root(SubRegistry& reg, std::uint32_t id) {
    while (true) {
        SubContig& s = reg.get(id);
        if (s.status.load(std::memory_order_acquire) != SubContig::Merged) return id;
        id = s.merged_into;
    }
}

enum class WalkEnd { Terminal, Cycle, MustPark };

// Splice a parked subcontig onto S's right end at the meeting k-mer.
// The meeting vertex is a terminal window of T's sequence in one strand.
bool try_splice_right(SubContig& S, SubContig& T, const std::string& meet, int k) {
    std::lock_guard lock(T.mu);
    if (T.status.load(std::memory_order_acquire) != SubContig::Parked) return false;
    const std::size_t uk = static_cast<std::size_t>(k);
    if (T.seq.compare(0, uk, meet) == 0) {
        S.seq += T.seq.substr(uk - 1);
    } else {
        std::string rc = revcomp_str(T.seq);
        if (rc.compare(0, uk, meet) != 0)
            throw std::logic_error("subcontig takeover: meeting k-mer not at a terminal window");
        S.seq += rc.substr(uk - 1);
    }
    T.merged_into = S.id;
    T.status.store(SubContig::Merged, std::memory_order_release);
    return true;
}

WalkEnd extend_right(WalkerCtx& ctx, SubContig& S) {
    DbgGraph& g = *ctx.graph;
    const int k = g.k();
    const std::size_t uk = static_cast<std::size_t>(k);
    while (true) {
        Kmer cur = *encode(std::string_view(S.seq).substr(S.seq.size() - uk));
        auto [canon, reversed] = canonical(cur, k);
        DbgGraph::Node* node = g.find(canon);
        if (!node) throw std::logic_error("walk left the UU set");
        char ext = reversed ? complement(node->ext_left) : node->ext_right;
        if (ext == 'X') return WalkEnd::Terminal;
        Kmer next = next_kmer(cur, k, Direction::Right, ext);
        auto [ncanon, nrev] = canonical(next, k);
        ++ctx.stats.remote_lookups;
        DbgGraph::Node* nnode = g.find(ncanon);
        if (!nnode) return WalkEnd::Terminal;  // neighbor was not UU
        // Reciprocity: the edge is real only if the neighbor's backward
        // extension points back at us. Without this check noisy one-sided
        // extensions would let walks cross into foreign components.
        char back = nrev ? complement(nnode->ext_right) : nnode->ext_left;
        if (back != S.seq[S.seq.size() - uk]) return WalkEnd::Terminal;
        std::uint32_t expected = 0;
        ++ctx.stats.remote_atomics;
        if (nnode->claim.compare_exchange_strong(expected, S.id)) {
            S.seq += ext;
            continue;
        }
        // Conflict: the vertex belongs to another subcontig.
        std::uint32_t root = resolve_root(*ctx.registry, expected);
        if (root == S.id) return WalkEnd::Cycle;
        SubContig& other = ctx.registry->get(root);
        int status = other.status.load(std::memory_order_acquire);
        if (status == SubContig::Merged) continue;  // re-resolve
        if (status == SubContig::Parked) {
            if (try_splice_right(S, other, decode(next, k), k)) continue;
            continue;  // lost the race; re-resolve
        }
        if (status == SubContig::Active) {
            // Deterministic victim: the lower worker id backs off and the
            // survivor takes the released subcontig over.
            if (ctx.worker < other.owner) return WalkEnd::MustPark;
            std::this_thread::yield();
            continue;
        }
        throw std::logic_error("walk met a completed subcontig: components not disjoint");
    }
}

}  // namespace

DbgGraph build_dbg(const std::vector<UURecord>& records, const RankTopology& topo,
                   int k, std::size_t agg_capacity) {
    struct DbgVal {
        char ext_right, ext_left;
    };
    TableConfig cfg;
    cfg.agg_capacity = agg_capacity;
    auto init = [](const UURecord& r) { return DbgVal{r.ext_right, r.ext_left}; };
    auto combine = [](DbgVal& v, const UURecord& r) {
        if (v.ext_right != r.ext_right || v.ext_left != r.ext_left)
            throw std::logic_error("duplicate UU k-mer with conflicting extension code");
    };
    ShardedTable<DbgVal, UURecord> table(topo, cfg, init, combine);
    table.set_stage("contig_generation");
    run_workers(topo.num_ranks, [&](int w) {
        auto [begin, end] = slice(records.size(), topo.num_ranks, w);
        auto& handle = table.handle(w);
        for (std::size_t i = begin; i < end; ++i)
            handle.guo_update(records[i].kmer, records[i]);
    });
    table.phase_barrier(PhaseMode::GRW);

    DbgGraph graph(topo, k);
    std::vector<Kmer> keys;
    keys.reserve(table.size());
    table.for_each([&](std::uint64_t key, const auto&) { keys.push_back(key); });
    std::sort(keys.begin(), keys.end());
    for (Kmer key : keys) {
        const auto* entry = table.find_entry(key);
        graph.add({key, entry->value.ext_right, entry->value.ext_left});
    }
    graph.build_stats = table.stage_stats("contig_generation");
    return graph;
}

TraverseResult traverse(DbgGraph& graph, int num_workers, std::uint64_t rng_seed) {
    const int k = graph.k();
    SubRegistry registry;
    std::vector<std::vector<std::string>> emitted(static_cast<std::size_t>(num_workers));
    std::vector<CommStats> stats(static_cast<std::size_t>(num_workers));
    std::vector<std::uint64_t> backoffs(static_cast<std::size_t>(num_workers), 0);

    run_workers(num_workers, [&](int w) {
        WalkerCtx ctx{&graph, &registry, w, {}, 0};
        // Every worker scans all shards but starts from its own: with fewer
        // workers than ranks the remaining shards still get seeded.
        std::vector<std::uint32_t> order;
        for (int r = 0; r < graph.topology().num_ranks; ++r) {
            const auto& ids = graph.shard_nodes((r + w) % graph.topology().num_ranks);
            order.insert(order.end(), ids.begin(), ids.end());
        }
        std::mt19937_64 rng(rng_seed + static_cast<std::uint64_t>(w) * 7919);
        std::shuffle(order.begin(), order.end(), rng);

        for (std::uint32_t idx : order) {
            DbgGraph::Node& seed = graph.node(idx);
            if (seed.claim.load(std::memory_order_relaxed) != 0) continue;
            SubContig& S = registry.create(w);
            std::uint32_t expected = 0;
            ++ctx.stats.remote_atomics;
            if (!seed.claim.compare_exchange_strong(expected, S.id)) {
                S.status.store(SubContig::Completed, std::memory_order_release);
                continue;
            }
            S.seq = decode(seed.key, k);

            WalkEnd r1 = extend_right(ctx, S);
            if (r1 == WalkEnd::MustPark) {
                ++ctx.backoffs;
                S.status.store(SubContig::Parked, std::memory_order_release);
                continue;
            }
            if (r1 == WalkEnd::Cycle) {
                emitted[static_cast<std::size_t>(w)].push_back(normalize_cycle(S.seq, k));
                S.status.store(SubContig::Completed, std::memory_order_release);
                continue;
            }
            S.seq = revcomp_str(S.seq);
            WalkEnd r2 = extend_right(ctx, S);
            if (r2 == WalkEnd::MustPark) {
                ++ctx.backoffs;
                S.status.store(SubContig::Parked, std::memory_order_release);
                continue;
            }
            if (r2 == WalkEnd::Cycle) {
                emitted[static_cast<std::size_t>(w)].push_back(normalize_cycle(S.seq, k));
                S.status.store(SubContig::Completed, std::memory_order_release);
                continue;
            }
            emitted[static_cast<std::size_t>(w)].push_back(canonical_seq(S.seq));
            S.status.store(SubContig::Completed, std::memory_order_release);
        }
        stats[static_cast<std::size_t>(w)] = ctx.stats;
        backoffs[static_cast<std::size_t>(w)] = ctx.backoffs;
    });

    // Sanity: every vertex claimed, no subcontig left parked or active.
    for (int r = 0; r < graph.topology().num_ranks; ++r)
        for (std::uint32_t idx : graph.shard_nodes(r))
            if (graph.node(idx).claim.load(std::memory_order_relaxed) == 0)
                throw std::logic_error("traversal finished with unvisited vertices");
    for (std::uint32_t id = 1; id <= registry.count(); ++id) {
        int st = registry.get(id).status.load(std::memory_order_acquire);
        if (st == SubContig::Active || st == SubContig::Parked)
            throw std::logic_error("traversal finished with an unresolved subcontig");
    }

    TraverseResult result;
    for (int w = 0; w < num_workers; ++w) {
        auto& part = emitted[static_cast<std::size_t>(w)];
        result.contigs.insert(result.contigs.end(), part.begin(), part.end());
        result.stats += stats[static_cast<std::size_t>(w)];
        result.backoffs += backoffs[static_cast<std::size_t>(w)];
    }
    std::sort(result.contigs.begin(), result.contigs.end());
    return result;
}

std::vector<UURecord> uu_records_from_sequences(const std::vector<std::string>& seqs,
                                                int k) {
    std::unordered_map<Kmer, UURecord> records;
    for (const auto& seq : seqs) {
        for (const auto& kx : extract_kmers(seq, k)) {
            auto [canon, obs] = canonical_obs(kx, k);
            char er = obs.right == kExtX ? 'X' : base_char(obs.right);
            char el = obs.left == kExtX ? 'X' : base_char(obs.left);
            auto it = records.find(canon);
            if (it == records.end()) {
                records.emplace(canon, UURecord{canon, er, el});
            } else if (it->second.ext_right != er || it->second.ext_left != el) {
                throw std::invalid_argument("sequences do not describe a UU graph");
            }
        }
    }
    std::vector<UURecord> out;
    out.reserve(records.size());
    for (const auto& [kmer, rec] : records) out.push_back(rec);
    std::sort(out.begin(), out.end(),
              [](const UURecord& a, const UURecord& b) { return a.kmer < b.kmer; });
    return out;
}

void write_contig_fasta(const std::string& path, const std::vector<Contig>& contigs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& c : contigs) {
        out << ">contig_" << c.id << " len=" << c.seq.size() << " depth=";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", c.mean_depth);
        out << buf << '\n';
        for (std::size_t i = 0; i < c.seq.size(); i += 80)
            out << c.seq.substr(i, 80) << '\n';
    }
}

std::vector<Contig> read_contig_fasta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<Contig> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '>') {
            Contig c;
            std::istringstream hdr(line.substr(1));
            std::string name;
            hdr >> name;
            auto us = name.rfind('_');
            if (us != std::string::npos)
                c.id = std::strtoull(name.c_str() + us + 1, nullptr, 10);
            std::string field;
            while (hdr >> field)
                if (field.rfind("depth=", 0) == 0)
                    c.mean_depth = std::strtod(field.c_str() + 6, nullptr);
            out.push_back(std::move(c));
        } else if (!out.empty()) {
            out.back().seq += line;
        }
    }
    return out;
}

}  // namespace gasm
