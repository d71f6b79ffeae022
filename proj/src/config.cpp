#include "dygrag/config.hpp"

#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <cctype>
#include <cstdlib>
#include <type_traits>
#include <fstream>
#include <variant>
#include <vector>

namespace dygrag {

using nlohmann::json;

namespace {

// Where size_t and uint64_t are one type the second slot is never used.
struct Unused {};
using Uint64Slot = std::conditional_t<std::is_same_v<std::size_t, std::uint64_t>, Unused, std::uint64_t>;
using FieldRef = std::variant<int*, std::size_t*, double*, Uint64Slot*, std::string*, bool*>;

std::vector<std::pair<std::string, FieldRef>> fields(RunConfig& c) {
    return {
        {"chunk_tokens", &c.chunking.chunk_tokens},
        {"overlap_tokens", &c.chunking.overlap_tokens},
        {"d_tau", &c.encoder.d_tau},
        {"min_period_days", &c.encoder.min_period_days},
        {"max_period_days", &c.encoder.max_period_days},
        {"lambda", &c.encoder.lambda_default},
        {"delta_t_days", &c.encoder.delta_t_days},
        {"alpha_per_year", &c.encoder.alpha_per_year},
        {"top_k_neighbors", &c.encoder.top_k_neighbors},
        {"static_decay", &c.static_decay},
        {"graph_build", &c.graph_build},
        {"k_candidates", &c.retrieval.k_candidates},
        {"seed_count", &c.retrieval.seed_count},
        {"walks_per_seed", &c.retrieval.walks_per_seed},
        {"walk_length", &c.retrieval.walk_length},
        {"rerank_floor", &c.retrieval.rerank_floor},
        {"context_cap_tokens", &c.retrieval.context_cap_tokens},
        {"rng_seed", &c.retrieval.rng_seed},
        {"reranker", &c.reranker},
        {"max_concurrency", &c.gateway.max_concurrency},
        {"backend", &c.gateway.backend},
        {"base_url", &c.gateway.base_url},
        {"api_key_env", &c.gateway.api_key_env},
        {"chat_model", &c.gateway.chat_model},
        {"embed_model", &c.gateway.embed_model},
        {"retry_count", &c.gateway.retry_count},
        {"timeout_seconds", &c.gateway.timeout_seconds},
        {"embed_batch_size", &c.gateway.embed_batch_size},
        {"backoff_initial_ms", &c.gateway.backoff_initial_ms},
        {"backoff_max_ms", &c.gateway.backoff_max_ms},
        {"mock_embedding_dim", &c.gateway.mock_embedding_dim},
    };
}

FieldRef find_field(RunConfig& c, const std::string& key) {
    for (auto& [name, ref] : fields(c)) {
        if (name == key) return ref;
    }
    throw Error(ErrorKind::Validation, "unknown config key: " + key);
}

void set_from_json(FieldRef ref, const json& v, const std::string& key) {
    try {
        std::visit(
            [&](auto* p) {
                using T = std::remove_pointer_t<decltype(p)>;
                if constexpr (std::is_same_v<T, Unused>) {
                    (void)p;
                } else if constexpr (std::is_same_v<T, std::string>) {
                    *p = v.get<std::string>();
                } else if constexpr (std::is_same_v<T, bool>) {
                    *p = v.get<bool>();
                } else if constexpr (std::is_same_v<T, double>) {
                    if (!v.is_number()) throw Error(ErrorKind::Validation, "expected a number");
                    *p = v.get<double>();
                } else {
                    if (!v.is_number_integer()) throw Error(ErrorKind::Validation, "expected an integer");
                    if constexpr (std::is_unsigned_v<T>) {
                        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                            throw Error(ErrorKind::Validation, "expected a non-negative integer");
                        }
                    }
                    *p = v.get<T>();
                }
            },
            ref);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, "config key " + key + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::Validation, "config key " + key + ": " + e.what());
    }
}

json parse_scalar(const std::string& key, const std::string& value, const FieldRef& ref) {
    if (std::holds_alternative<std::string*>(ref)) return value;
    try {
        return json::parse(value);
    } catch (const json::exception&) {
        throw Error(ErrorKind::Validation, "config key " + key + ": cannot parse '" + value + "'");
    }
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto ref = find_field(cfg, key);
    set_from_json(ref, parse_scalar(key, value, ref), key);
}

void RunConfig::finalize() {
    retrieval.max_concurrency = static_cast<std::size_t>(std::max(1, gateway.max_concurrency));
    encoder.walk_length = retrieval.walk_length;
    chunking.validate();
    encoder.validate();
    graph_params().validate();
    retrieval.validate();
    gateway.validate();
    if (!(encoder.lambda_default >= 0.0 && encoder.lambda_default <= 1.0)) {
        throw Error(ErrorKind::Validation, "lambda must lie in [0, 1]");
    }
    if (retrieval.context_cap_tokens < 512) {
        throw Error(ErrorKind::Validation, "context_cap_tokens must be >= 512");
    }
    if (graph_build != "incremental" && graph_build != "rebuild") {
        throw Error(ErrorKind::Validation, "graph_build must be 'incremental' or 'rebuild'");
    }
    if (reranker != "lexical" && reranker != "gateway") {
        throw Error(ErrorKind::Validation, "reranker must be 'lexical' or 'gateway'");
    }
}

json RunConfig::to_json() const {
    auto copy = *this;
    json out = json::object();
    for (auto& [name, ref] : fields(copy)) {
        std::visit(
            [&](auto* p) {
                if constexpr (!std::is_same_v<std::remove_pointer_t<decltype(p)>, Unused>) out[name] = *p;
            },
            ref);
    }
    return out;
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    RunConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw Error(ErrorKind::Io, "cannot read config file " + file->string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Validation, "config file " + file->string() + ": " + e.what());
        }
        if (!j.is_object()) throw Error(ErrorKind::Validation, "config file must hold a JSON object");
        for (const auto& [key, value] : j.items()) set_from_json(find_field(cfg, key), value, key);
    }
    std::vector<std::string> names;
    for (auto& [name, ref] : fields(cfg)) names.push_back(name);
    for (const auto& name : names) {
        std::string var = "DYGRAG_";
        for (char c : name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (auto v = env(var)) set_config_value(cfg, name, *v);
    }
    cfg.finalize();
    return cfg;
}

}  // namespace dygrag
