#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gasm/aligner.hpp"
#include "gasm/config.hpp"
#include "gasm/dht.hpp"
#include "gasm/fastx.hpp"
#include "gasm/gap_closer.hpp"
#include "gasm/kmer_analysis.hpp"
#include "gasm/scaffolder.hpp"

namespace gasm {

inline constexpr const char* kPipelineVersion = "0.1.0";

// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

struct LibraryInput {
    std::string reads1, reads2;  // reads2 empty means interleaved
    LibrarySpec spec;
};

struct PipelineConfig {
    int k = 21;
    int workers = 4;
    std::uint64_t seed = 0x5eedULL;
    double min_contig_depth = 3;  // drops shallow error-spur contigs
    std::string out_dir = "gasm_out";
    AnalysisParams analysis;
    AlignParams align;
    ScaffoldParams scaffold;
    GapParams gap;
    std::vector<LibraryInput> libraries;

    // [assembly] and [library.N] sections; unknown keys are errors.
    static PipelineConfig from_ini(const Ini& ini);
    void sync_derived();  // pushes k/seed into the per-stage parameter blocks
};

// All reads live here and are parsed from disk exactly once per process.
class ReadCache {
public:
    explicit ReadCache(std::vector<LibraryInput> libraries);

    const std::vector<ReadPair>& pairs();
    std::vector<std::string_view> all_reads();  // both ends of every pair
    const LibraryInput& library(int id) const { return libraries_.at(static_cast<std::size_t>(id)); }
    int disk_loads() const { return disk_loads_; }

private:
    void ensure_loaded();
    std::vector<LibraryInput> libraries_;
    std::vector<ReadPair> pairs_;
    bool loaded_ = false;
    int disk_loads_ = 0;
};

struct RunResult {
    std::map<std::string, CommStats> comm;   // merged across tables, per stage
    std::map<std::string, double> seconds;   // wall time per executed stage
    std::string final_fasta;                 // path of the finished assembly
    int disk_loads = 0;
    std::string metrics_json;                // serialized run metrics
};

// Runs the requested stages (all by default) against cfg.out_dir, writing a
// checkpoint per stage. With resume=true, stages whose checkpoint matches the
// current k and seed are loaded instead of recomputed; a k mismatch throws.
RunResult run_pipeline(const PipelineConfig& cfg, ReadCache& cache,
                       const std::vector<std::string>& stages = {},
                       bool resume = false);

}  // namespace gasm
