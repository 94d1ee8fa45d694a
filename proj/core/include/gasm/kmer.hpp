#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gasm {

// A k-mer packed 2 bits per base (A=00, C=01, G=10, T=11) into the low 2k
// bits of a 64-bit word. k must be odd and <= 32 so no k-mer equals its own
// reverse complement and everything fits one word.
using Kmer = std::uint64_t;

constexpr int kMaxK = 32;

// 0..3 for ACGT, -1 otherwise (including N).
constexpr int base_code(char c) {
    switch (c) {
        case 'A': case 'a': return 0;
        case 'C': case 'c': return 1;
        case 'G': case 'g': return 2;
        case 'T': case 't': return 3;
        default: return -1;
    }
}

constexpr char base_char(int code) { return "ACGT"[code & 3]; }

constexpr char complement(char b) {
    switch (b) {
        case 'A': return 'T';
        case 'C': return 'G';
        case 'G': return 'C';
        case 'T': return 'A';
        case 'X': return 'X';
        case 'N': return 'N';
        default: return b;
    }
}

inline std::uint64_t kmer_mask(int k) {
    return k >= 32 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (2 * k)) - 1);
}

inline void check_k(int k) {
    if (k < 1 || k > kMaxK || k % 2 == 0)
        throw std::invalid_argument("k must be odd and in [1, 32]");
}

// Encodes an N-free window of length k. Returns nullopt if any base is not
// ACGT; callers skip windows spanning N.
inline std::optional<Kmer> encode(std::string_view window) {
    Kmer w = 0;
    for (char c : window) {
        int code = base_code(c);
        if (code < 0) return std::nullopt;
        w = (w << 2) | static_cast<Kmer>(code);
    }
    return w;
}

inline std::string decode(Kmer w, int k) {
    std::string s(static_cast<std::size_t>(k), 'A');
    for (int i = k - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = base_char(static_cast<int>(w & 3));
        w >>= 2;
    }
    return s;
}

// Reverse complement of a packed k-mer: complement every base (bitwise NOT in
// this encoding) and reverse the base order.
inline Kmer revcomp(Kmer w, int k) {
    w = ~w;
    // Swap adjacent 2-bit groups pairwise up to a full word reversal.
    w = ((w >> 2) & 0x3333333333333333ULL) | ((w & 0x3333333333333333ULL) << 2);
    w = ((w >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((w & 0x0F0F0F0F0F0F0F0FULL) << 4);
    w = ((w >> 8) & 0x00FF00FF00FF00FFULL) | ((w & 0x00FF00FF00FF00FFULL) << 8);
    w = ((w >> 16) & 0x0000FFFF0000FFFFULL) | ((w & 0x0000FFFF0000FFFFULL) << 16);
    w = (w >> 32) | (w << 32);
    return w >> (64 - 2 * k);
}

// Lexicographically smaller of a k-mer and its reverse complement (A<C<G<T
// matches numeric order of the packed code). The flag records reversal.
inline std::pair<Kmer, bool> canonical(Kmer w, int k) {
    Kmer rc = revcomp(w, k);
    return rc < w ? std::pair{rc, true} : std::pair{w, false};
}

inline std::string revcomp_str(std::string_view s) {
    std::string out(s.size(), 'N');
    for (std::size_t i = 0; i < s.size(); ++i)
        out[s.size() - 1 - i] = complement(s[i]);
    return out;
}

enum class Direction { Left, Right };

// The neighboring k-mer reached by following an extension letter: drop the
// first base and append for Right, prepend and drop the last for Left.
// The result is in the same strand frame as the input (not canonicalized).
inline Kmer next_kmer(Kmer cur, int k, Direction dir, char ext) {
    int code = base_code(ext);
    if (code < 0) throw std::invalid_argument("extension letter must be ACGT");
    if (dir == Direction::Right)
        return ((cur << 2) & kmer_mask(k)) | static_cast<Kmer>(code);
    return (cur >> 2) | (static_cast<Kmer>(code) << (2 * (k - 1)));
}

// A k-mer occurrence with its flanking bases in the read ('X' at a read or
// fragment boundary).
struct KmerWithExts {
    Kmer kmer;
    char left;
    char right;
};

// All k-mers of a read in read order, N-free fragments handled separately.
// An N-free read of length L yields exactly L-k+1 entries.
inline std::vector<KmerWithExts> extract_kmers(std::string_view read, int k) {
    check_k(k);
    std::vector<KmerWithExts> out;
    if (read.size() < static_cast<std::size_t>(k)) return out;
    out.reserve(read.size() - static_cast<std::size_t>(k) + 1);
    std::size_t frag_start = 0;
    auto flush_fragment = [&](std::size_t begin, std::size_t end) {
        // [begin, end) is N-free
        if (end - begin < static_cast<std::size_t>(k)) return;
        Kmer w = 0;
        for (std::size_t i = begin; i < begin + static_cast<std::size_t>(k); ++i)
            w = (w << 2) | static_cast<Kmer>(base_code(read[i]));
        for (std::size_t pos = begin;; ++pos) {
            char l = pos == begin ? 'X' : read[pos - 1];
            std::size_t after = pos + static_cast<std::size_t>(k);
            char r = after == end ? 'X' : read[after];
            out.push_back({w, l, r});
            if (after == end) break;
            w = ((w << 2) & kmer_mask(k)) | static_cast<Kmer>(base_code(read[after]));
        }
    };
    for (std::size_t i = 0; i <= read.size(); ++i) {
        if (i == read.size() || base_code(read[i]) < 0) {
            flush_fragment(frag_start, i);
            frag_start = i + 1;
        }
    }
    return out;
}

}  // namespace gasm
