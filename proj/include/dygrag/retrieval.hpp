#pragma once

#include "dygrag/core.hpp"
#include "dygrag/event_graph.hpp"
#include "dygrag/model_gateway.hpp"
#include "dygrag/temporal_encoding.hpp"
#include "dygrag/tokenizer.hpp"
#include "dygrag/vector_index.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

enum class QuestionClass { Boundary, Continuity, Aggregate, Other };

const char* to_string(QuestionClass c);
std::optional<QuestionClass> question_class_from_string(std::string_view s);

struct QueryPlan {
    std::string question;
    std::optional<TimeAnchor> t_q;  // never static
    double lambda = 0.3;
    QuestionClass question_class = QuestionClass::Other;
    bool used_fallback = false;

    void validate() const;
};

/// Years and month-year phrases found by regex; the class is left as Other.
QueryPlan parse_query_fallback(std::string_view question, double lambda);

/// Asks the gateway for the temporal constraint and class, falling back to the regex parse
/// when the gateway is missing, fails, or replies off-schema. Throws only on an empty question.
QueryPlan parse_query(std::string_view question, double lambda, ModelGateway* gateway);

/// Scores (question, passage) relevance in [0, 1].
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual std::vector<double> score(std::string_view question,
                                      std::span<const std::string> passages) = 0;
};

/// Share of the question's content words present in the passage.
class LexicalReranker final : public Reranker {
public:
    std::vector<double> score(std::string_view question,
                              std::span<const std::string> passages) override;
};

/// Sends the candidates to the chat endpoint as a rerank task. Replies that do not parse fall
/// back to lexical scores.
class GatewayReranker final : public Reranker {
public:
    explicit GatewayReranker(ModelGateway& gateway) : gateway_(gateway) {}

    std::vector<double> score(std::string_view question,
                              std::span<const std::string> passages) override;

private:
    ModelGateway& gateway_;
    LexicalReranker fallback_;
};

struct RetrievalParams {
    std::size_t k_candidates = 20;
    std::size_t seed_count = 5;
    std::size_t walks_per_seed = 3;
    int walk_length = 4;
    double rerank_floor = 0.1;
    std::size_t context_cap_tokens = 16384;
    std::uint64_t rng_seed = 0;
    std::size_t max_concurrency = 32;

    void validate() const;
};

struct ScoredCandidate {
    std::string event_id;
    double vector_score = 0.0;
    double rerank_score = 0.0;
};

struct SeedSelection {
    std::vector<ScoredCandidate> candidates;  // vector-search order
    std::vector<std::string> seeds;           // best rerank score first
};

/// Vector search with the time-enhanced query, rerank, then keep the top `seed_count`
/// candidates scoring above `rerank_floor`. Throws Error(Compat) when a hit is missing from
/// the graph.
SeedSelection retrieve_seeds(const QueryPlan& plan, std::span<const double> question_vector,
                             const VectorIndex& index, const EventGraph& graph,
                             Reranker& reranker, const RetrievalParams& params,
                             const EncoderConfig& enc);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// Independent stream seed for walk `walk_index` of seed `seed_index`.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t seed_index,
                                 std::uint64_t walk_index);

/// Weighted walk of at most `length` steps. The node just left is excluded unless it is the
/// only neighbor; the walk stops early at a node with nowhere to go.
std::vector<std::string> random_walk(const EventGraph& graph, const std::string& seed,
                                     int length, std::mt19937_64& rng);

/// `walks_per_seed` walks from every seed, ordered by (seed, walk).
std::vector<std::vector<std::string>> run_walks(const EventGraph& graph,
                                                const std::vector<std::string>& seeds,
                                                const RetrievalParams& params);

struct TimelineEntry {
    DynamicEventUnit deu;
    std::size_t priority = 0;  // 0 is kept longest
};

struct EventTimeline {
    std::vector<TimelineEntry> static_entries;
    std::vector<TimelineEntry> temporal_entries;  // by index day, then event id
    std::string rendered;

    bool empty() const { return static_entries.empty() && temporal_entries.empty(); }
    std::size_t size() const { return static_entries.size() + temporal_entries.size(); }

    /// In rendered order.
    std::vector<std::string> event_ids() const;
};

/// `Event # <index> [<timestamp>]: <sentence>`
std::string render_timeline_line(std::size_t index, const DynamicEventUnit& deu);

/// Re-renders after sorting; lines are numbered from 1, static entries first.
void render_timeline(EventTimeline& timeline);

/// Drops the lowest-priority entries until the rendered text fits `token_budget`.
void truncate_timeline(EventTimeline& timeline, std::size_t token_budget,
                       const Tokenizer& tokenizer = default_tokenizer());

/// Union of the path nodes. Priority follows first appearance when paths are scanned step by
/// step, so seeds outrank their neighbors and nearer hops outrank farther ones.
EventTimeline build_timeline(const EventGraph& graph,
                             const std::vector<std::vector<std::string>>& paths,
                             std::size_t token_budget,
                             const Tokenizer& tokenizer = default_tokenizer());

}  // namespace dygrag
