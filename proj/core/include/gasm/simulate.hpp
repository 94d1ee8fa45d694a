#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gasm/fastx.hpp"

namespace gasm {

struct SimParams {
    double depth = 30;
    int read_len = 100;
    double error_rate = 0.01;  // per-base substitution probability
    double insert_mu = 395;
    double insert_sigma = 30;
    std::uint64_t seed = 1;
};

// Ground truth for one simulated pair.
struct SimTruth {
    std::uint64_t pair_id = 0;
    std::string ref_id;
    std::uint64_t pos = 0;     // fragment start on the reference forward strand
    std::uint32_t insert = 0;  // realized outer distance
    bool flipped = false;      // pair drawn from the reverse strand
};

struct SimResult {
    std::vector<ReadPair> pairs;
    std::vector<SimTruth> truth;
};

// Uniform paired-end sampling in forward/reverse orientation with normal
// insert sizes (clamped to [read_len, ref_len]) and i.i.d. substitution
// errors. Fully reproducible: a fixed seed yields byte-identical reads.
SimResult simulate_reads(const std::vector<SeqRecord>& refs, const SimParams& params);

// pair_id ref_id pos insert strand
void write_truth_tsv(const std::string& path, const std::vector<SimTruth>& truth);

// Writes <prefix>_1.fastq and <prefix>_2.fastq.
void write_pair_fastq(const std::string& prefix, const std::vector<ReadPair>& pairs);

}  // namespace gasm
