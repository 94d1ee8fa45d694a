#include "gasm/bloom.hpp"

#include <cmath>
#include <stdexcept>

namespace gasm {

BloomFilter::BloomFilter(std::uint64_t expected_m, double target_fpr,
                         std::uint64_t seed)
    : expected_m_(expected_m), seed_(seed) {
    if (expected_m == 0) throw std::invalid_argument("expected_m must be positive");
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw std::invalid_argument("target_fpr must be in (0, 1)");
    const double ln2 = std::log(2.0);
    double bits = std::ceil(-static_cast<double>(expected_m) *
                            std::log(target_fpr) / (ln2 * ln2));
    if (bits > 1e18) throw std::overflow_error("bloom filter size overflow");
    n_bits_ = static_cast<std::uint64_t>(bits);
    if (n_bits_ == 0) n_bits_ = 1;
    double h_opt = ln2 * static_cast<double>(n_bits_) / static_cast<double>(expected_m);
    h_ = static_cast<int>(std::lround(h_opt));
    if (h_ < 1) h_ = 1;
    words_.assign((n_bits_ + 63) / 64, 0);
}

bool BloomFilter::test_and_insert(std::uint64_t key) {
    std::uint64_t h1 = hash64(key, seed_);
    std::uint64_t h2 = hash64(key, seed_ ^ 0xa5a5a5a5a5a5a5a5ULL) | 1;
    bool seen = true;
    for (int i = 0; i < h_; ++i) {
        std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % n_bits_;
        std::uint64_t mask = std::uint64_t{1} << (bit & 63);
        std::uint64_t& word = words_[bit >> 6];
        if (!(word & mask)) {
            seen = false;
            word |= mask;
        }
    }
    return seen;
}

bool BloomFilter::test(std::uint64_t key) const {
    std::uint64_t h1 = hash64(key, seed_);
    std::uint64_t h2 = hash64(key, seed_ ^ 0xa5a5a5a5a5a5a5a5ULL) | 1;
    for (int i = 0; i < h_; ++i) {
        std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % n_bits_;
        if (!(words_[bit >> 6] & (std::uint64_t{1} << (bit & 63)))) return false;
    }
    return true;
}

double BloomFilter::theoretical_fpr(std::uint64_t n_bits, std::uint64_t m, int h) {
    double x = -static_cast<double>(h) * static_cast<double>(m) /
               static_cast<double>(n_bits);
    return std::pow(1.0 - std::exp(x), h);
}

}  // namespace gasm
