#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gasm/fastx.hpp"

namespace gasm {

struct EvalParams {
    int k = 21;                    // seed size for reference anchoring
    std::size_t max_seed_hits = 4; // repeat seeds above this are ignored
    int chain_band = 10;           // diagonal drift allowed in one alignment
    double min_block_fraction = 0.9;  // chained span below this flags a block
    int min_block_len_factor = 2;  // misassembly calls need len >= factor*k
};

struct EvalReport {
    double coverage = 0;   // fraction of reference bases covered
    double identity = 0;   // matches / aligned bases
    int misassemblies = 0;
    std::uint64_t assembly_len = 0;
    std::uint64_t reference_len = 0;
    std::uint64_t n50 = 0;
    std::uint64_t largest = 0;
    std::size_t num_sequences = 0;
    std::size_t num_blocks = 0;       // scaffold pieces between N-runs
    std::size_t unaligned_blocks = 0; // no seed hit anywhere
};

// Reference-based scoring: scaffolds are split at N-runs into blocks, each
// block is anchored by seed votes on (reference, strand, diagonal), and
// same-diagonal runs are compared base by base. A long block whose best
// banded chain explains too little of it counts as a misassembly.
EvalReport evaluate_assembly(const std::vector<SeqRecord>& assembly,
                             const std::vector<SeqRecord>& refs,
                             const EvalParams& params = {});

}  // namespace gasm
