#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "gasm/dht.hpp"
#include "gasm/kmer.hpp"
#include "gasm/kmer_analysis.hpp"

namespace gasm {

// The frozen de Bruijn graph of UU k-mers: one vertex per canonical k-mer,
// neighbors implicit in the two-letter extension code, plus a claim word
// driven by compare-and-swap during traversal. Claim value 0 means
// unvisited; any other value is the id of the subcontig holding the vertex.
class DbgGraph {
public:
    struct Node {
        Kmer key = 0;
        char ext_right = 'X';  // forward extension in the canonical frame
        char ext_left = 'X';   // backward extension in the canonical frame
        std::atomic<std::uint32_t> claim{0};
    };

    DbgGraph(RankTopology topo, int k) : topo_(topo), k_(k),
        index_(static_cast<std::size_t>(topo.num_ranks)),
        by_shard_(static_cast<std::size_t>(topo.num_ranks)) {}

    int k() const { return k_; }
    const RankTopology& topology() const { return topo_; }
    std::size_t size() const { return nodes_.size(); }

    Node* find(Kmer canon) {
        auto& m = index_[static_cast<std::size_t>(topo_.route(canon))];
        auto it = m.find(canon);
        return it == m.end() ? nullptr : &nodes_[it->second];
    }
    const Node* find(Kmer canon) const {
        return const_cast<DbgGraph*>(this)->find(canon);
    }

    void add(const UURecord& rec) {
        std::uint32_t idx = static_cast<std::uint32_t>(nodes_.size());
        Node& n = nodes_.emplace_back();  // in place: Node is not movable
        n.key = rec.kmer;
        n.ext_right = rec.ext_right;
        n.ext_left = rec.ext_left;
        std::size_t shard = static_cast<std::size_t>(topo_.route(rec.kmer));
        index_[shard].emplace(rec.kmer, idx);
        by_shard_[shard].push_back(idx);
    }

    const std::vector<std::uint32_t>& shard_nodes(int rank) const {
        return by_shard_[static_cast<std::size_t>(rank)];
    }
    Node& node(std::uint32_t idx) { return nodes_[idx]; }

    CommStats build_stats;

private:
    RankTopology topo_;
    int k_;
    std::deque<Node> nodes_;  // deque: stable addresses, atomics never move
    std::vector<std::unordered_map<Kmer, std::uint32_t>> index_;
    std::vector<std::vector<std::uint32_t>> by_shard_;
};

// GUO-phase insertion of the UU set with dynamic aggregation, then freeze.
// Exactly one vertex per canonical UU k-mer; a duplicate key arriving with a
// conflicting extension code is an upstream bug and throws.
DbgGraph build_dbg(const std::vector<UURecord>& records, const RankTopology& topo,
                   int k, std::size_t agg_capacity = 8192);

struct TraverseResult {
    // Connected components as sequences, strand-canonicalized and sorted.
    std::vector<std::string> contigs;
    CommStats stats;
    std::uint64_t backoffs = 0;  // subcontigs released to another worker
};

// Parallel traversal: every worker claims unvisited seeds from its own
// shards, extends subcontigs in both directions, and resolves meetings with
// the back-off protocol (the lower worker id releases its subcontig; the
// survivor splices it on and keeps walking). Deterministic output for any
// worker count and seed order.
TraverseResult traverse(DbgGraph& graph, int num_workers, std::uint64_t rng_seed = 1);

struct Contig {
    std::uint64_t id = 0;
    std::string seq;
    double mean_depth = 0;

    std::size_t kmer_count(int k) const {
        return seq.size() >= static_cast<std::size_t>(k)
                   ? seq.size() - static_cast<std::size_t>(k) + 1 : 0;
    }
};

// min(seq, revcomp(seq)) — the strand-invariant form used for comparisons
// and for deterministic output ordering.
inline std::string canonical_seq(const std::string& seq) {
    std::string rc = revcomp_str(seq);
    return rc < seq ? rc : seq;
}

// Builds UU records for the k-mers of the given sequences with extensions
// read off the sequences themselves (X at ends). Test fixtures and the
// gap-closing mini-assembly use this to describe known-good graphs.
std::vector<UURecord> uu_records_from_sequences(const std::vector<std::string>& seqs,
                                                int k);

void write_contig_fasta(const std::string& path, const std::vector<Contig>& contigs);
std::vector<Contig> read_contig_fasta(const std::string& path);

}  // namespace gasm
