#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gasm/hash.hpp"

namespace gasm {

// Membership pre-filter used to keep singleton (erroneous) k-mers out of the
// counting tables. No false negatives: every inserted key tests positive.
// h hash functions are synthesized by double hashing from two base hashes.
class BloomFilter {
public:
    // Sizes for a target false positive rate at the provisioned distinct
    // count: n_bits = ceil(-m ln p / (ln 2)^2), h = max(1, round(ln2 * n/m)).
    BloomFilter(std::uint64_t expected_m, double target_fpr,
                std::uint64_t seed = 0);

    // Sets the key's bits; returns whether all of them were already set.
    bool test_and_insert(std::uint64_t key);
    bool test(std::uint64_t key) const;

    std::uint64_t n_bits() const { return n_bits_; }
    int num_hashes() const { return h_; }
    std::uint64_t expected_m() const { return expected_m_; }
    std::size_t memory_bytes() const { return words_.size() * sizeof(std::uint64_t); }

    // Closed-form Pr(e) = (1 - e^{-h m / n_bits})^h.
    static double theoretical_fpr(std::uint64_t n_bits, std::uint64_t m, int h);

private:
    std::uint64_t n_bits_;
    int h_;
    std::uint64_t expected_m_;
    std::uint64_t seed_;
    std::vector<std::uint64_t> words_;
};

}  // namespace gasm
