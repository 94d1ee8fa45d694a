#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gasm/hash.hpp"

namespace gasm {

// Streaming cardinality estimator over 64-bit hashed items. Each of 2^b
// registers keeps the maximum observed rank (trailing-zero count + 1) of the
// non-index portion of the hash. Merge is the elementwise register maximum,
// which is the order-isomorphic view of keeping the minimum hash value per
// bucket. State size is fixed by b, independent of the stream.
class Hyperloglog {
public:
    explicit Hyperloglog(int bucket_bits = 12, std::uint64_t seed = 0);

    void insert(std::uint64_t item);
    double estimate() const;

    // Register-wise max combine. Commutative, associative, idempotent.
    // Throws if bucket count or seed differ.
    void merge(const Hyperloglog& other);

    int bucket_bits() const { return bits_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint8_t>& registers() const { return registers_; }
    std::size_t memory_bytes() const { return registers_.size(); }

    void save(const std::string& path) const;
    static Hyperloglog load(const std::string& path);

private:
    int bits_;
    std::uint64_t seed_;
    std::vector<std::uint8_t> registers_;
};

// Misra-Gries frequent-item summary: at most `capacity` tracked counters,
// one-pass updates. Any item with true frequency > N/capacity is guaranteed
// to be present; reported counts are lower bounds with error at most the
// total decrement amount.
class HeavyHitterSummary {
public:
    explicit HeavyHitterSummary(std::size_t capacity = 1024);

    void offer(std::uint64_t item);

    std::uint64_t stream_length() const { return total_; }
    std::uint64_t lower_bound(std::uint64_t item) const;
    std::uint64_t error_bound() const { return decremented_; }

    // Items whose count could reach `threshold`: a superset of the true heavy
    // hitters at that threshold (callers resolve false positives downstream).
    std::vector<std::uint64_t> items_above(std::uint64_t threshold) const;

    void merge(const HeavyHitterSummary& other);
    std::size_t size() const { return counters_.size(); }

private:
    std::size_t capacity_;
    std::uint64_t total_ = 0;
    std::uint64_t decremented_ = 0;  // max undercount of any tracked item
    std::unordered_map<std::uint64_t, std::uint64_t> counters_;
};

}  // namespace gasm
