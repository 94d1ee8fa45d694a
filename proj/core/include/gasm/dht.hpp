#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gasm/hash.hpp"

namespace gasm {

// Rank-sharded hash table emulating a PGAS distributed hash table in one
// process: deterministic key routing, phase-typed operation modes, dynamic
// update aggregation, per-entry atomic state words, read-only caching and
// communication accounting. Ranks are worker threads; each shard is mutated
// only by batch deliveries under its own lock, except the per-entry state
// words which support compare-and-swap from any worker during GRW.

struct RankTopology {
    int num_ranks = 1;
    std::uint64_t seed = 0;

    int route(std::uint64_t key) const {
        return static_cast<int>(hash64(key, seed) % static_cast<std::uint64_t>(num_ranks));
    }
};

enum class PhaseMode { GUO, GRW, GRO, LRW };

inline const char* to_string(PhaseMode m) {
    switch (m) {
        case PhaseMode::GUO: return "GUO";
        case PhaseMode::GRW: return "GRW";
        case PhaseMode::GRO: return "GRO";
        case PhaseMode::LRW: return "LRW";
    }
    return "?";
}

struct CommStats {
    std::uint64_t messages_sent = 0;
    std::uint64_t records_exchanged = 0;
    std::uint64_t remote_lookups = 0;
    std::uint64_t remote_atomics = 0;
    std::uint64_t cache_hits = 0;

    CommStats& operator+=(const CommStats& o) {
        messages_sent += o.messages_sent;
        records_exchanged += o.records_exchanged;
        remote_lookups += o.remote_lookups;
        remote_atomics += o.remote_atomics;
        cache_hits += o.cache_hits;
        return *this;
    }
};

class PhaseError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct TableConfig {
    std::size_t agg_capacity = 8192;       // aggregation buffer records per pair
    std::size_t cache_capacity = 1 << 20;  // per-worker GRO cache entries
    bool cache_negative = true;
    // Hold LRW deliveries until the phase barrier and replay them in sorted
    // record order. Required when a gate makes per-record decisions (which
    // record gets dropped must not depend on thread arrival order).
    bool defer_lrw = false;
};

// V: stored value; D: update record. V must be constructible through the
// `init` functor and combinable through `combine`; both are supplied at
// construction so tables can carry counting, appending or claim semantics.
template <class V, class D>
class ShardedTable {
public:
    using InitFn = std::function<V(const D&)>;
    using CombineFn = std::function<void(V&, const D&)>;
    // Consulted for keys not yet present (owner side); returning false drops
    // the record instead of inserting. Used for Bloom pre-filtering.
    using GateFn = std::function<bool(int rank, std::uint64_t key, const D&)>;

    struct Entry {
        V value;
        std::atomic<std::uint32_t> state{0};
        explicit Entry(V v) : value(std::move(v)) {}
    };

    ShardedTable(RankTopology topo, TableConfig cfg, InitFn init, CombineFn combine,
                 GateFn gate = nullptr)
        : topo_(topo), cfg_(cfg), init_(std::move(init)), combine_(std::move(combine)),
          gate_(std::move(gate)), mode_(PhaseMode::GUO),
          shards_(static_cast<std::size_t>(topo.num_ranks)) {
        for (int w = 0; w < topo.num_ranks; ++w)
            handles_.emplace_back(new Handle(*this, w));
    }

    ShardedTable(const ShardedTable&) = delete;
    ShardedTable& operator=(const ShardedTable&) = delete;

    const RankTopology& topology() const { return topo_; }
    PhaseMode mode() const { return mode_; }
    const TableConfig& config() const { return cfg_; }

    // Per-worker access point. One handle per worker thread.
    class Handle {
    public:
        // GUO: buffered commutative update routed to the owner rank.
        void guo_update(std::uint64_t key, const D& delta) {
            table_.require_mode(PhaseMode::GUO);
            route_and_buffer(key, delta);
        }

        // LRW: identical delivery path; the owner-side table is then used as
        // a plain serial hash table by its owner only.
        void lrw_route_and_apply(std::uint64_t key, const D& delta) {
            table_.require_mode(PhaseMode::LRW);
            route_and_buffer(key, delta);
        }

        // GRO: cached lookup. Absence is a value and is cached too.
        const V* gro_lookup(std::uint64_t key) {
            table_.require_mode(PhaseMode::GRO);
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                ++stats_.cache_hits;
                return it->second ? &*it->second : nullptr;
            }
            ++stats_.remote_lookups;
            const Entry* e = table_.find_entry(key);
            std::optional<V> copy;
            if (e) copy = e->value;
            if (e || table_.cfg_.cache_negative) {
                if (cache_.size() >= table_.cfg_.cache_capacity) {
                    // FIFO eviction
                    cache_.erase(cache_order_.front());
                    cache_order_.pop_front();
                }
                auto [pos, _] = cache_.emplace(key, std::move(copy));
                cache_order_.push_back(key);
                return pos->second ? &*pos->second : nullptr;
            }
            return nullptr;
        }

        struct ClaimResult {
            bool found = false;
            std::uint32_t previous = 0;  // state observed before the swap attempt
        };

        // GRW: atomic compare-and-swap on the entry's state word.
        ClaimResult grw_claim(std::uint64_t key, std::uint32_t expected,
                              std::uint32_t desired) {
            table_.require_mode(PhaseMode::GRW);
            ++stats_.remote_atomics;
            Entry* e = table_.find_entry_mut(key);
            if (!e) return {false, 0};
            std::uint32_t exp = expected;
            e->state.compare_exchange_strong(exp, desired);
            return {true, exp};
        }

        void flush_all() {
            for (int r = 0; r < table_.topo_.num_ranks; ++r) flush(r);
        }

        int rank() const { return rank_; }
        const CommStats& stats() const { return stats_; }

    private:
        friend class ShardedTable;
        Handle(ShardedTable& t, int rank)
            : table_(t), rank_(rank),
              buffers_(static_cast<std::size_t>(t.topo_.num_ranks)) {}

        void route_and_buffer(std::uint64_t key, const D& delta) {
            int owner = table_.topo_.route(key);
            ++stats_.records_exchanged;
            auto& buf = buffers_[static_cast<std::size_t>(owner)];
            buf.emplace_back(key, delta);
            if (buf.size() >= table_.cfg_.agg_capacity) flush(owner);
        }

        void flush(int receiver) {
            auto& buf = buffers_[static_cast<std::size_t>(receiver)];
            if (buf.empty()) return;
            ++stats_.messages_sent;
            table_.deliver_batch(receiver, buf);
            buf.clear();
        }

        void clear_cache() {
            cache_.clear();
            cache_order_.clear();
        }

        ShardedTable& table_;
        int rank_;
        std::vector<std::vector<std::pair<std::uint64_t, D>>> buffers_;
        std::unordered_map<std::uint64_t, std::optional<V>> cache_;
        std::deque<std::uint64_t> cache_order_;
        CommStats stats_;
    };

    Handle& handle(int worker) { return *handles_[static_cast<std::size_t>(worker)]; }

    // Full-participation rendezvous, driven by the orchestrator between
    // parallel regions: flush all pending batches, drop caches, checkpoint
    // stats under the current stage label, switch mode.
    void phase_barrier(PhaseMode new_mode) {
        for (auto& h : handles_) h->flush_all();
        for (auto& h : handles_) h->clear_cache();
        drain_pending();
        snapshot_stats();
        mode_ = new_mode;
    }

    void set_stage(const std::string& name) {
        snapshot_stats();
        stage_ = name;
    }

    // Counters accumulated per stage label. Pending (un-snapshotted) activity
    // of the current stage is included.
    std::map<std::string, CommStats> comm_report() const {
        std::map<std::string, CommStats> out = by_stage_;
        CommStats current = pending_totals();
        if (current.messages_sent || current.records_exchanged || current.remote_lookups ||
            current.remote_atomics || current.cache_hits)
            out[stage_] += current;
        return out;
    }

    CommStats stage_stats(const std::string& name) const {
        auto report = comm_report();
        auto it = report.find(name);
        return it == report.end() ? CommStats{} : it->second;
    }

    // Owner-side access; valid outside parallel regions or from the owning
    // worker during LRW.
    std::unordered_map<std::uint64_t, Entry>& shard_map(int rank) {
        return shards_[static_cast<std::size_t>(rank)].map;
    }
    const std::unordered_map<std::uint64_t, Entry>& shard_map(int rank) const {
        return shards_[static_cast<std::size_t>(rank)].map;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& s : shards_) n += s.map.size();
        return n;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const auto& s : shards_)
            for (const auto& [key, entry] : s.map) fn(key, entry);
    }

    const Entry* find_entry(std::uint64_t key) const {
        const auto& m = shards_[static_cast<std::size_t>(topo_.route(key))].map;
        auto it = m.find(key);
        return it == m.end() ? nullptr : &it->second;
    }

    Entry* find_entry_mut(std::uint64_t key) {
        auto& m = shards_[static_cast<std::size_t>(topo_.route(key))].map;
        auto it = m.find(key);
        return it == m.end() ? nullptr : &it->second;
    }

    // Order-insensitive digest of shard contents (key plus hashed state),
    // used to assert read-only phases do not mutate anything.
    std::uint64_t content_checksum(const std::function<std::uint64_t(const V&)>& vh) const {
        std::uint64_t sum = 0;
        for_each([&](std::uint64_t key, const Entry& e) {
            sum ^= hash64(key ^ vh(e.value), 0x5eedULL);
        });
        return sum;
    }

private:
    struct Shard {
        std::unordered_map<std::uint64_t, Entry> map;
        std::vector<std::pair<std::uint64_t, D>> pending;  // deferred deliveries
        std::mutex mu;
    };

    void require_mode(PhaseMode m) const {
        if (mode_ != m)
            throw PhaseError(std::string("operation requires ") + to_string(m) +
                             " mode, table is in " + to_string(mode_));
    }

    void deliver_batch(int receiver,
                       const std::vector<std::pair<std::uint64_t, D>>& batch) {
        Shard& shard = shards_[static_cast<std::size_t>(receiver)];
        std::lock_guard lock(shard.mu);
        if (cfg_.defer_lrw && mode_ == PhaseMode::LRW) {
            shard.pending.insert(shard.pending.end(), batch.begin(), batch.end());
            return;
        }
        for (const auto& [key, delta] : batch) apply(shard, receiver, key, delta);
    }

    void apply(Shard& shard, int rank, std::uint64_t key, const D& delta) {
        auto it = shard.map.find(key);
        if (it != shard.map.end()) {
            combine_(it->second.value, delta);
        } else {
            if (gate_ && !gate_(rank, key, delta)) return;
            shard.map.emplace(std::piecewise_construct, std::forward_as_tuple(key),
                              std::forward_as_tuple(init_(delta)));
        }
    }

    void drain_pending() {
        for (int r = 0; r < topo_.num_ranks; ++r) {
            Shard& shard = shards_[static_cast<std::size_t>(r)];
            if (shard.pending.empty()) continue;
            if constexpr (requires(const D& a, const D& b) { a < b; }) {
                std::sort(shard.pending.begin(), shard.pending.end());
            } else {
                std::stable_sort(shard.pending.begin(), shard.pending.end(),
                                 [](const auto& a, const auto& b) {
                                     return a.first < b.first;
                                 });
            }
            for (const auto& [key, delta] : shard.pending) apply(shard, r, key, delta);
            shard.pending.clear();
            shard.pending.shrink_to_fit();
        }
    }

    CommStats pending_totals() const {
        CommStats total;
        for (const auto& h : handles_) total += h->stats_;
        CommStats delta = total;
        delta.messages_sent -= snapshotted_.messages_sent;
        delta.records_exchanged -= snapshotted_.records_exchanged;
        delta.remote_lookups -= snapshotted_.remote_lookups;
        delta.remote_atomics -= snapshotted_.remote_atomics;
        delta.cache_hits -= snapshotted_.cache_hits;
        return delta;
    }

    void snapshot_stats() {
        CommStats delta = pending_totals();
        by_stage_[stage_] += delta;
        snapshotted_ += delta;
    }

    RankTopology topo_;
    TableConfig cfg_;
    InitFn init_;
    CombineFn combine_;
    GateFn gate_;
    PhaseMode mode_;
    std::vector<Shard> shards_;
    std::vector<std::unique_ptr<Handle>> handles_;
    std::string stage_ = "default";
    std::map<std::string, CommStats> by_stage_;
    CommStats snapshotted_;
};

}  // namespace gasm
