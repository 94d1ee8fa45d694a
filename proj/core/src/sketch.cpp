#include "gasm/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gasm {

namespace {
constexpr char kHllMagic[4] = {'G', 'H', 'L', '1'};

double alpha_for(std::size_t m) {
    switch (m) {
        case 16: return 0.673;
        case 32: return 0.697;
        case 64: return 0.709;
        default: return 0.7213 / (1.0 + 1.079 / static_cast<double>(m));
    }
}
}  // namespace

Hyperloglog::Hyperloglog(int bucket_bits, std::uint64_t seed)
    : bits_(bucket_bits), seed_(seed),
      registers_(std::size_t{1} << bucket_bits, 0) {
    if (bucket_bits < 4 || bucket_bits > 20)
        throw std::invalid_argument("hyperloglog bucket bits must be in [4, 20]");
}

void Hyperloglog::insert(std::uint64_t item) {
    std::uint64_t h = hash64(item, seed_);
    std::size_t bucket = static_cast<std::size_t>(h >> (64 - bits_));
    // rank = trailing zeros of the non-index portion + 1, capped by width
    std::uint64_t low = h & (~std::uint64_t{0} >> bits_);
    int tz = low == 0 ? 64 - bits_ : std::countr_zero(low);
    std::uint8_t rank = static_cast<std::uint8_t>(tz + 1);
    registers_[bucket] = std::max(registers_[bucket], rank);
}

double Hyperloglog::estimate() const {
    const std::size_t m = registers_.size();
    double sum = 0;
    std::size_t zeros = 0;
    for (std::uint8_t r : registers_) {
        sum += std::ldexp(1.0, -static_cast<int>(r));
        if (r == 0) ++zeros;
    }
    double raw = alpha_for(m) * static_cast<double>(m) * static_cast<double>(m) / sum;
    if (raw <= 2.5 * static_cast<double>(m) && zeros > 0)
        return static_cast<double>(m) *
               std::log(static_cast<double>(m) / static_cast<double>(zeros));
    return raw;
}

void Hyperloglog::merge(const Hyperloglog& other) {
    if (other.bits_ != bits_ || other.seed_ != seed_)
        throw std::invalid_argument("cannot merge sketches with different parameters");
    for (std::size_t i = 0; i < registers_.size(); ++i)
        registers_[i] = std::max(registers_[i], other.registers_[i]);
}

void Hyperloglog::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kHllMagic, 4);
    std::uint32_t b = static_cast<std::uint32_t>(bits_);
    out.write(reinterpret_cast<const char*>(&b), sizeof b);
    out.write(reinterpret_cast<const char*>(&seed_), sizeof seed_);
    out.write(reinterpret_cast<const char*>(registers_.data()),
              static_cast<std::streamsize>(registers_.size()));
}

Hyperloglog Hyperloglog::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kHllMagic, 4) != 0)
        throw std::runtime_error("bad sketch file header: " + path);
    std::uint32_t b = 0;
    std::uint64_t seed = 0;
    in.read(reinterpret_cast<char*>(&b), sizeof b);
    in.read(reinterpret_cast<char*>(&seed), sizeof seed);
    Hyperloglog h(static_cast<int>(b), seed);
    in.read(reinterpret_cast<char*>(h.registers_.data()),
            static_cast<std::streamsize>(h.registers_.size()));
    if (!in) throw std::runtime_error("truncated sketch file: " + path);
    return h;
}

HeavyHitterSummary::HeavyHitterSummary(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("capacity must be positive");
    counters_.reserve(capacity);
}

void HeavyHitterSummary::offer(std::uint64_t item) {
    ++total_;
    auto it = counters_.find(item);
    if (it != counters_.end()) {
        ++it->second;
        return;
    }
    if (counters_.size() < capacity_) {
        counters_.emplace(item, 1);
        return;
    }
    // Decrement all counters, dropping those that reach zero.
    ++decremented_;
    for (auto iter = counters_.begin(); iter != counters_.end();) {
        if (--iter->second == 0)
            iter = counters_.erase(iter);
        else
            ++iter;
    }
}

std::uint64_t HeavyHitterSummary::lower_bound(std::uint64_t item) const {
    auto it = counters_.find(item);
    return it == counters_.end() ? 0 : it->second;
}

std::vector<std::uint64_t> HeavyHitterSummary::items_above(std::uint64_t threshold) const {
    std::vector<std::uint64_t> out;
    for (const auto& [item, count] : counters_)
        if (count + decremented_ >= threshold) out.push_back(item);
    std::sort(out.begin(), out.end());
    return out;
}

void HeavyHitterSummary::merge(const HeavyHitterSummary& other) {
    // Counter-wise sum then trim back to capacity; error bounds add.
    total_ += other.total_;
    decremented_ += other.decremented_;
    for (const auto& [item, count] : other.counters_) counters_[item] += count;
    while (counters_.size() > capacity_) {
        // Repeated decrement rounds until within capacity.
        std::uint64_t min_count = UINT64_MAX;
        for (const auto& [item, count] : counters_)
            min_count = std::min(min_count, count);
        decremented_ += min_count;
        for (auto iter = counters_.begin(); iter != counters_.end();) {
            if (iter->second <= min_count)
                iter = counters_.erase(iter);
            else {
                iter->second -= min_count;
                ++iter;
            }
        }
    }
}

}  // namespace gasm
