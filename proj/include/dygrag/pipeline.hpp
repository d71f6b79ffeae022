#pragma once

#include "dygrag/config.hpp"
#include "dygrag/evaluation.hpp"
#include "dygrag/event_graph.hpp"
#include "dygrag/generation.hpp"
#include "dygrag/ingestion.hpp"
#include "dygrag/retrieval.hpp"
#include "dygrag/vector_index.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dygrag {

/// File names inside an index directory.
struct IndexLayout {
    std::filesystem::path dir;

    std::filesystem::path graph() const { return dir / "graph.jsonl"; }
    std::filesystem::path vectors() const { return dir / "vectors.idx"; }
    std::filesystem::path manifest() const { return dir / "manifest.jsonl"; }
    std::filesystem::path info() const { return dir / "index_info.json"; }
};

struct BuildStats {
    std::size_t documents = 0;
    std::size_t chunks_processed = 0;
    std::size_t failed_chunks = 0;
    std::size_t new_events = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t model_calls = 0;
    double seconds = 0.0;
    bool resumed = false;
};

/// Ingests `docs` into `out_dir`. When the directory already holds a manifest, the graph and
/// vectors are loaded and only chunks not recorded as ok or skipped are sent to the model.
BuildStats build_index(const std::vector<Document>& docs, const RunConfig& cfg,
                       ModelGateway& gateway, const std::filesystem::path& out_dir);

struct LoadedIndex {
    EventGraph graph;
    VectorIndex vectors;
    std::vector<ManifestRecord> manifest;
    std::optional<double> index_time_seconds;
};

/// Throws Error(Compat) when the stored metadata disagrees with `cfg` or the graph and
/// vectors disagree with each other.
void check_compatible(const EventGraph& graph, const VectorIndex& vectors, const RunConfig& cfg);

/// Loads and freezes an index directory. Missing or corrupt files raise Error(Compat) or
/// ParseError.
LoadedIndex load_index(const std::filesystem::path& dir, const RunConfig& cfg);

struct QueryRun {
    QueryPlan plan;
    SeedSelection seeds;
    std::vector<std::vector<std::string>> paths;
    EventTimeline timeline;
    TimeCotPrompt prompt;
    GeneratedAnswer answer;
    std::optional<std::string> error;  // gateway failure while embedding or generating

    nlohmann::json report(bool include_prompt) const;
};

/// Query path over a frozen index: parse, embed, seed, walk, timeline, prompt, answer.
class QueryEngine {
public:
    QueryEngine(const LoadedIndex& index, const RunConfig& cfg, ModelGateway& gateway);

    QueryRun run(const std::string& question, std::optional<double> lambda = std::nullopt) const;

private:
    const LoadedIndex& index_;
    const RunConfig& cfg_;
    ModelGateway& gateway_;
};

/// Answers every item through `engine` and scores it.
EvalReport run_benchmark(const QueryEngine& engine, const std::vector<QaItem>& items,
                         const RunConfig& cfg);

}  // namespace dygrag
