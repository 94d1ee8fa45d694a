#include "gasm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "gasm/contig_gen.hpp"
#include "gasm/evaluate.hpp"
#include "gasm/worker_pool.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gasm {

const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {
        "kmer_analysis", "contig_generation", "alignment", "scaffolding",
        "gap_closing"};
    return stages;
}

void PipelineConfig::sync_derived() {
    analysis.k = k;
    analysis.seed = seed;
    align.k = k;
    gap.k = k;
    gap.t_hq = analysis.t_hq;
}

PipelineConfig PipelineConfig::from_ini(const Ini& ini) {
    PipelineConfig cfg;
    static const std::set<std::string> assembly_keys = {
        "k", "workers", "seed", "out", "epsilon", "t_hq", "min_contig_depth",
        "min_support", "min_identity", "use_bloom", "bloom_fpr", "hh_threshold",
        "flank_len", "slack"};
    for (const auto& [key, value] : ini.section("assembly"))
        if (!assembly_keys.count(key))
            throw std::runtime_error("unknown [assembly] key: " + key);
    cfg.k = static_cast<int>(ini.get_int("assembly", "k", cfg.k));
    cfg.workers = static_cast<int>(ini.get_int("assembly", "workers", cfg.workers));
    cfg.seed = static_cast<std::uint64_t>(ini.get_int("assembly", "seed",
                                                      static_cast<long>(cfg.seed)));
    cfg.out_dir = ini.get("assembly", "out", cfg.out_dir);
    cfg.analysis.epsilon = static_cast<std::uint32_t>(
        ini.get_int("assembly", "epsilon", cfg.analysis.epsilon));
    cfg.analysis.t_hq = static_cast<std::uint32_t>(
        ini.get_int("assembly", "t_hq", cfg.analysis.t_hq));
    cfg.analysis.hh_threshold = static_cast<std::uint64_t>(
        ini.get_int("assembly", "hh_threshold",
                    static_cast<long>(cfg.analysis.hh_threshold)));
    cfg.analysis.use_bloom = ini.get_bool("assembly", "use_bloom", cfg.analysis.use_bloom);
    cfg.analysis.bloom_fpr = ini.get_double("assembly", "bloom_fpr", cfg.analysis.bloom_fpr);
    cfg.min_contig_depth =
        ini.get_double("assembly", "min_contig_depth", cfg.min_contig_depth);
    cfg.scaffold.min_support = static_cast<std::uint32_t>(
        ini.get_int("assembly", "min_support", cfg.scaffold.min_support));
    cfg.align.min_identity =
        ini.get_double("assembly", "min_identity", cfg.align.min_identity);
    cfg.gap.flank_len = static_cast<int>(
        ini.get_int("assembly", "flank_len", cfg.gap.flank_len));
    cfg.gap.slack = ini.get_double("assembly", "slack", cfg.gap.slack);

    static const std::set<std::string> library_keys = {
        "reads1", "reads2", "insert_size", "insert_sigma", "read_length"};
    for (const std::string& section : ini.sections()) {
        if (section == "assembly") continue;
        if (section.rfind("library.", 0) != 0)
            throw std::runtime_error("unknown config section: [" + section + "]");
        for (const auto& [key, value] : ini.section(section))
            if (!library_keys.count(key))
                throw std::runtime_error("unknown [" + section + "] key: " + key);
        LibraryInput lib;
        lib.reads1 = ini.get(section, "reads1");
        lib.reads2 = ini.get(section, "reads2");
        if (lib.reads1.empty())
            throw std::runtime_error("[" + section + "] needs reads1");
        lib.spec.insert_size = ini.get_double(section, "insert_size", 0);
        lib.spec.insert_sigma = ini.get_double(section, "insert_sigma", 0);
        lib.spec.read_length =
            static_cast<int>(ini.get_int(section, "read_length", 0));
        cfg.libraries.push_back(std::move(lib));
    }
    cfg.sync_derived();
    return cfg;
}

ReadCache::ReadCache(std::vector<LibraryInput> libraries)
    : libraries_(std::move(libraries)) {}

void ReadCache::ensure_loaded() {
    if (loaded_) return;
    ++disk_loads_;
    for (std::size_t i = 0; i < libraries_.size(); ++i) {
        auto pairs = read_pairs(libraries_[i].reads1, libraries_[i].reads2,
                                static_cast<int>(i), pairs_.size());
        pairs_.insert(pairs_.end(), std::make_move_iterator(pairs.begin()),
                      std::make_move_iterator(pairs.end()));
    }
    loaded_ = true;
}

const std::vector<ReadPair>& ReadCache::pairs() {
    ensure_loaded();
    return pairs_;
}

std::vector<std::string_view> ReadCache::all_reads() {
    ensure_loaded();
    std::vector<std::string_view> views;
    views.reserve(pairs_.size() * 2);
    for (const ReadPair& p : pairs_) {
        views.emplace_back(p.read1);
        views.emplace_back(p.read2);
    }
    return views;
}

namespace {

struct StageIo {
    fs::path dir;
    const PipelineConfig* cfg;

    fs::path path(const std::string& file) const { return dir / file; }

    bool manifest_ok() const {
        std::ifstream in(dir / "manifest.json");
        if (!in) return false;
        json m;
        try {
            in >> m;
        } catch (const json::exception&) {
            return false;
        }
        if (!m.value("complete", false)) return false;
        if (m.value("k", -1) != cfg->k)
            throw std::runtime_error("checkpoint " + dir.string() + " was built with k=" +
                                     std::to_string(m.value("k", -1)) +
                                     ", current run uses k=" + std::to_string(cfg->k));
        return m.value("seed", std::uint64_t{0}) == cfg->seed;
    }

    void write_manifest(const std::string& stage, json extra = json::object()) const {
        json m = std::move(extra);
        m["stage"] = stage;
        m["k"] = cfg->k;
        m["seed"] = cfg->seed;
        m["version"] = kPipelineVersion;
        m["complete"] = true;
        std::ofstream out(dir / "manifest.json");
        out << m.dump(2) << '\n';
    }
};

void save_counts(const fs::path& path, const CountTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("GCT1", 4);
    std::uint64_t n = table.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    table.for_each([&](std::uint64_t key, const CountTable::Entry& e) {
        out.write(reinterpret_cast<const char*>(&key), sizeof key);
        out.write(reinterpret_cast<const char*>(&e.value.count), sizeof e.value.count);
        out.write(reinterpret_cast<const char*>(e.value.left), sizeof e.value.left);
        out.write(reinterpret_cast<const char*>(e.value.right), sizeof e.value.right);
    });
}

std::unique_ptr<CountTable> load_counts(const fs::path& path, const RankTopology& topo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "GCT1")
        throw std::runtime_error("bad count table file " + path.string());
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    auto init = [](const KmerObs&) { return ExtensionCounts{}; };
    auto combine = [](ExtensionCounts&, const KmerObs&) {};
    auto table = std::make_unique<CountTable>(topo, TableConfig{}, init, combine);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t key;
        ExtensionCounts c;
        in.read(reinterpret_cast<char*>(&key), sizeof key);
        in.read(reinterpret_cast<char*>(&c.count), sizeof c.count);
        in.read(reinterpret_cast<char*>(c.left), sizeof c.left);
        in.read(reinterpret_cast<char*>(c.right), sizeof c.right);
        if (!in) throw std::runtime_error("truncated count table " + path.string());
        table->shard_map(topo.route(key))
            .emplace(std::piecewise_construct, std::forward_as_tuple(key),
                     std::forward_as_tuple(c));
    }
    return table;
}

// scaffold_id contig_id reversed gap_before gap_sigma_before
void save_scaffolds(const fs::path& path, const std::vector<Scaffold>& scaffolds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    for (const Scaffold& s : scaffolds)
        for (const ScaffoldEntry& e : s.entries)
            out << s.id << '\t' << e.contig_id << '\t' << (e.reversed ? 1 : 0) << '\t'
                << e.gap_before << '\t' << e.gap_sigma_before << '\n';
}

std::vector<Scaffold> load_scaffolds(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<Scaffold> out;
    std::uint64_t sid;
    ScaffoldEntry e;
    int rev;
    while (in >> sid >> e.contig_id >> rev >> e.gap_before >> e.gap_sigma_before) {
        e.reversed = rev != 0;
        if (out.empty() || out.back().id != sid) out.push_back({sid, {}});
        out.back().entries.push_back(e);
    }
    return out;
}

struct EndAlignments {
    // index = pair index; unset entries have aligned_len == 0
    std::vector<Alignment> end1, end2;
    std::vector<bool> has1, has2;
};

EndAlignments split_by_end(const std::vector<Alignment>& alns, std::size_t n_pairs) {
    EndAlignments out;
    out.end1.resize(n_pairs);
    out.end2.resize(n_pairs);
    out.has1.assign(n_pairs, false);
    out.has2.assign(n_pairs, false);
    for (const Alignment& a : alns) {
        if (a.read_id >= n_pairs) throw std::runtime_error("alignment read_id out of range");
        if (a.end == 1) {
            out.end1[a.read_id] = a;
            out.has1[a.read_id] = true;
        } else {
            out.end2[a.read_id] = a;
            out.has2[a.read_id] = true;
        }
    }
    return out;
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& cfg_in, ReadCache& cache,
                       const std::vector<std::string>& stages, bool resume) {
    PipelineConfig cfg = cfg_in;
    cfg.sync_derived();
    const RankTopology topo{cfg.workers, cfg.seed};
    fs::create_directories(cfg.out_dir);

    std::set<std::string> requested(stages.begin(), stages.end());
    if (requested.empty())
        requested.insert(pipeline_stages().begin(), pipeline_stages().end());
    for (const std::string& s : requested)
        if (std::find(pipeline_stages().begin(), pipeline_stages().end(), s) ==
            pipeline_stages().end())
            throw std::runtime_error("unknown stage: " + s);

    RunResult result;
    json metrics;
    metrics["k"] = cfg.k;
    metrics["workers"] = cfg.workers;
    metrics["seed"] = cfg.seed;

    // state carried between stages
    std::unique_ptr<CountTable> counts;
    std::vector<UURecord> uu;
    std::vector<Contig> contigs;
    std::vector<Alignment> alns;
    std::vector<Scaffold> scaffolds;

    auto stage_io = [&](const std::string& stage) {
        StageIo io{fs::path(cfg.out_dir) / stage, &cfg};
        fs::create_directories(io.dir);
        return io;
    };
    auto should_run = [&](const StageIo& io, const std::string& stage) {
        if (!requested.count(stage)) {
            if (!io.manifest_ok())
                throw std::runtime_error("stage " + stage +
                                         " was not requested and has no valid checkpoint");
            return false;
        }
        return !(resume && io.manifest_ok());
    };
    auto timed = [&](const std::string& stage, auto&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        result.seconds[stage] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    // ---- k-mer analysis ----
    {
        StageIo io = stage_io("kmer_analysis");
        if (should_run(io, "kmer_analysis")) {
            timed("kmer_analysis", [&] {
                auto reads = cache.all_reads();
                EstimateResult est = estimate_pass(reads, topo, cfg.analysis);
                CountResult counted =
                    count_kmers(reads, topo, cfg.analysis, est.cardinality, est.heavy);
                counts = std::move(counted.table);
                uu = classify_uu(*counts, cfg.analysis);
                save_counts(io.path("counts.bin"), *counts);
                write_uu_tsv(io.path("uu.tsv").string(), uu, cfg.k);
                auto hist = count_histogram(*counts);
                std::ofstream hout(io.path("histogram.tsv"));
                for (auto [count, freq] : hist) hout << count << '\t' << freq << '\n';
                metrics["cardinality_estimate"] = est.cardinality;
                metrics["distinct_kmers"] = counts->size();
                metrics["uu_kmers"] = uu.size();
                metrics["bloom_suppressed"] = counted.bloom_suppressed;
                io.write_manifest("kmer_analysis");
            });
        } else {
            counts = load_counts(io.path("counts.bin"), topo);
            uu = read_uu_tsv(io.path("uu.tsv").string(), cfg.k);
        }
    }

    // ---- contig generation ----
    {
        StageIo io = stage_io("contig_generation");
        if (should_run(io, "contig_generation")) {
            timed("contig_generation", [&] {
                DbgGraph graph = build_dbg(uu, topo, cfg.k, cfg.analysis.agg_capacity);
                TraverseResult tr = traverse(graph, cfg.workers, cfg.seed + 1);
                contigs.clear();
                for (std::size_t i = 0; i < tr.contigs.size(); ++i)
                    contigs.push_back({i, tr.contigs[i], 0});
                compute_attrs(contigs, *counts, topo, cfg.k);
                if (cfg.min_contig_depth > 0) {
                    std::vector<Contig> kept;
                    for (Contig& c : contigs)
                        if (c.mean_depth >= cfg.min_contig_depth)
                            kept.push_back(std::move(c));
                    contigs = std::move(kept);
                    for (std::size_t i = 0; i < contigs.size(); ++i) contigs[i].id = i;
                }
                write_contig_fasta(io.path("contigs.fasta").string(), contigs);
                result.comm["contig_generation"] += graph.build_stats;
                result.comm["contig_generation"] += tr.stats;
                metrics["contigs"] = contigs.size();
                metrics["traversal_backoffs"] = tr.backoffs;
                io.write_manifest("contig_generation",
                                  json{{"contigs", contigs.size()}});
            });
        } else {
            contigs = read_contig_fasta(io.path("contigs.fasta").string());
        }
    }

    // ---- alignment ----
    {
        StageIo io = stage_io("alignment");
        if (should_run(io, "alignment")) {
            timed("alignment", [&] {
                SeedIndex index = build_seed_index(contigs, topo, cfg.align);
                const auto& pairs = cache.pairs();
                std::vector<std::vector<Alignment>> partial(
                    static_cast<std::size_t>(cfg.workers));
                run_workers(cfg.workers, [&](int w) {
                    auto [begin, end] = slice(pairs.size(), cfg.workers, w);
                    auto& out = partial[static_cast<std::size_t>(w)];
                    auto best_unique = [](std::vector<Alignment> hits)
                        -> std::optional<Alignment> {
                        if (hits.empty()) return std::nullopt;
                        if (hits.size() > 1 && hits[1].score >= hits[0].score)
                            return std::nullopt;  // ambiguous placement
                        return hits[0];
                    };
                    for (std::size_t i = begin; i < end; ++i) {
                        if (auto a = best_unique(align_read(index, w, pairs[i].id, 1,
                                                           pairs[i].read1)))
                            out.push_back(*a);
                        if (auto a = best_unique(align_read(index, w, pairs[i].id, 2,
                                                           pairs[i].read2)))
                            out.push_back(*a);
                    }
                });
                alns.clear();
                for (auto& p : partial)
                    alns.insert(alns.end(), p.begin(), p.end());
                std::sort(alns.begin(), alns.end(),
                          [](const Alignment& a, const Alignment& b) {
                              return std::tie(a.read_id, a.end) <
                                     std::tie(b.read_id, b.end);
                          });
                write_alignment_tsv(io.path("alignments.tsv").string(), alns);
                for (auto& [stage, s] : index.table->comm_report())
                    result.comm[stage] += s;
                metrics["aligned_ends"] = alns.size();
                io.write_manifest("alignment", json{{"alignments", alns.size()}});
            });
        } else {
            alns = read_alignment_tsv(io.path("alignments.tsv").string());
        }
    }

    // ---- scaffolding ----
    std::unordered_set<std::uint64_t> bubble_contigs;
    {
        StageIo io = stage_io("scaffolding");
        if (should_run(io, "scaffolding")) {
            timed("scaffolding", [&] {
                const auto& pairs = cache.pairs();
                EndAlignments ends = split_by_end(alns, pairs.size());
                std::vector<PairAln> pair_alns;
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    if (!ends.has1[i] || !ends.has2[i]) continue;
                    double insert = cache.library(pairs[i].library_id).spec.insert_size;
                    pair_alns.push_back({ends.end1[i], ends.end2[i], insert});
                }
                std::vector<ContigLink> links =
                    gen_links(pair_alns, contigs, topo, cfg.scaffold);
                BubbleResult bubbles = remove_bubbles(links, contigs);
                bubble_contigs = bubbles.removed_contigs;
                scaffolds = build_scaffolds(contigs, bubbles.links, cfg.scaffold);
                // a popped bubble's loser must not resurface as a singleton
                std::erase_if(scaffolds, [&](const Scaffold& s) {
                    return s.entries.size() == 1 &&
                           bubble_contigs.count(s.entries[0].contig_id) > 0;
                });
                for (std::size_t i = 0; i < scaffolds.size(); ++i) scaffolds[i].id = i;
                save_scaffolds(io.path("scaffolds.tsv"), scaffolds);
                write_scaffold_fasta(io.path("scaffolds.fasta").string(), scaffolds,
                                     contigs);
                metrics["links"] = links.size();
                metrics["bubbles_removed"] = bubble_contigs.size();
                metrics["scaffolds"] = scaffolds.size();
                io.write_manifest("scaffolding", json{{"scaffolds", scaffolds.size()}});
            });
        } else {
            scaffolds = load_scaffolds(io.path("scaffolds.tsv"));
        }
    }

    // ---- gap closing ----
    {
        StageIo io = stage_io("gap_closing");
        if (should_run(io, "gap_closing")) {
            timed("gap_closing", [&] {
                const auto& pairs = cache.pairs();
                EndAlignments ends = split_by_end(alns, pairs.size());
                std::vector<HalfAlignedPair> half;
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    if (ends.has1[i] == ends.has2[i]) continue;
                    double insert = cache.library(pairs[i].library_id).spec.insert_size;
                    if (ends.has1[i])
                        half.push_back({ends.end1[i], pairs[i].read2, insert});
                    else
                        half.push_back({ends.end2[i], pairs[i].read1, insert});
                }
                std::vector<Gap> gaps = collect_gaps(scaffolds, contigs, cfg.gap);
                auto gap_table =
                    localize_reads(gaps, scaffolds, contigs, half, topo, cfg.gap);
                auto closures = close_gaps(gaps, *gap_table, topo, cfg.gap);

                std::map<std::uint64_t, std::vector<Gap>> gaps_by_scaffold;
                for (const Gap& g : gaps) gaps_by_scaffold[g.scaffold_id].push_back(g);
                std::vector<SeqRecord> finals;
                for (const Scaffold& s : scaffolds) {
                    std::string seq = scaffold_sequence(s, contigs);
                    auto git = gaps_by_scaffold.find(s.id);
                    if (git != gaps_by_scaffold.end())
                        seq = apply_closures(seq, git->second, closures);
                    finals.push_back({"scaffold_" + std::to_string(s.id),
                                      std::move(seq), ""});
                }
                write_fasta(io.path("final.fasta").string(), finals);
                for (auto& [stage, s] : gap_table->comm_report())
                    result.comm[stage] += s;
                metrics["gaps"] = gaps.size();
                metrics["gaps_closed"] = closures.size();
                io.write_manifest("gap_closing",
                                  json{{"gaps", gaps.size()},
                                       {"closed", closures.size()}});
            });
        }
        result.final_fasta = io.path("final.fasta").string();
    }

    if (counts)
        for (auto& [stage, s] : counts->comm_report()) result.comm[stage] += s;

    result.disk_loads = cache.disk_loads();
    metrics["disk_loads"] = result.disk_loads;
    json comm_json;
    for (const auto& [stage, s] : result.comm)
        comm_json[stage] = {{"messages_sent", s.messages_sent},
                            {"records_exchanged", s.records_exchanged},
                            {"remote_lookups", s.remote_lookups},
                            {"remote_atomics", s.remote_atomics},
                            {"cache_hits", s.cache_hits}};
    metrics["comm"] = comm_json;
    json timing_json;
    for (const auto& [stage, secs] : result.seconds) timing_json[stage] = secs;
    metrics["seconds"] = timing_json;
    result.metrics_json = metrics.dump(2);
    std::ofstream mout(fs::path(cfg.out_dir) / "metrics.json");
    mout << result.metrics_json << '\n';
    return result;
}

}  // namespace gasm
