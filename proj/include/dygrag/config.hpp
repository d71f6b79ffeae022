#pragma once

#include "dygrag/event_graph.hpp"
#include "dygrag/ingestion.hpp"
#include "dygrag/model_gateway.hpp"
#include "dygrag/retrieval.hpp"
#include "dygrag/temporal_encoding.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace dygrag {

/// Every tunable of a run. Files and environment use flat keys ("chunk_tokens", "lambda",
/// ...); the environment spells them DYGRAG_<KEY> in upper case.
struct RunConfig {
    ChunkingConfig chunking;
    EncoderConfig encoder;
    double static_decay = 0.5;
    std::string graph_build = "incremental";  // or "rebuild"
    RetrievalParams retrieval;
    std::string reranker = "lexical";  // or "gateway"
    GatewayConfig gateway;

    /// Copies shared knobs (concurrency, walk length) into every sub-config, then checks
    /// bounds. Throws Error(Validation).
    void finalize();

    GraphParams graph_params() const { return GraphParams::from(encoder, static_decay); }
    nlohmann::json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads DYGRAG_* variables from the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Defaults, then the JSON file (unknown keys rejected), then the environment.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const EnvLookup& env = process_env);

/// Sets one flat key from its text form, as the environment does.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace dygrag
