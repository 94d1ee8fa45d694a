#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gasm {

struct SeqRecord {
    std::string id;
    std::string seq;
    std::string qual;  // empty for FASTA
};

struct LibrarySpec {
    double insert_size = 0;   // mean outer distance between pair ends
    double insert_sigma = 0;
    int read_length = 0;      // nominal L
};

struct ReadPair {
    std::uint64_t id = 0;
    std::string read1, read2;
    std::string quals1, quals2;
    int library_id = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
          line_number(line) {}
    std::size_t line_number;
};

// Streaming FASTA/FASTQ reader; transparently inflates files ending in ".gz".
// Single consumer per stream; constant memory per record.
class FastxReader {
public:
    explicit FastxReader(const std::string& path);
    ~FastxReader();
    FastxReader(FastxReader&&) noexcept;
    FastxReader& operator=(FastxReader&&) noexcept;

    // Next record, or nullopt at end of stream. Throws ParseError on
    // malformed input (including sequence/quality length mismatch).
    std::optional<SeqRecord> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<SeqRecord> read_fastx(const std::string& path);

// Pairs reads from two parallel files, or from one interleaved file when
// path2 is empty. Record order within files is preserved.
std::vector<ReadPair> read_pairs(const std::string& path1, const std::string& path2,
                                 int library_id, std::uint64_t first_id = 0);

void write_fasta(const std::string& path, const std::vector<SeqRecord>& records,
                 std::size_t wrap = 80);
void write_fastq(const std::string& path, const std::vector<SeqRecord>& records);

}  // namespace gasm
