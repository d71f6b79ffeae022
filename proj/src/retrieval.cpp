#include "dygrag/retrieval.hpp"

#include "dygrag/assets.hpp"
#include "dygrag/error.hpp"
#include "dygrag/ingestion.hpp"
#include "dygrag/lexical.hpp"
#include "dygrag/temporal_text.hpp"
#include "dygrag/text_util.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace dygrag {

using nlohmann::json;

const char* to_string(QuestionClass c) {
    switch (c) {
        case QuestionClass::Boundary: return "boundary";
        case QuestionClass::Continuity: return "continuity";
        case QuestionClass::Aggregate: return "aggregate";
        case QuestionClass::Other: return "other";
    }
    return "other";
}

std::optional<QuestionClass> question_class_from_string(std::string_view s) {
    for (auto c : {QuestionClass::Boundary, QuestionClass::Continuity, QuestionClass::Aggregate,
                   QuestionClass::Other}) {
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

void QueryPlan::validate() const {
    if (text::trim(question).empty()) throw Error(ErrorKind::Validation, "question is empty");
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorKind::Validation, "lambda must lie in [0, 1]");
    }
    if (t_q && t_q->is_static()) throw Error(ErrorKind::Validation, "query time must not be static");
}

namespace {

struct OffSchema {};

QueryPlan empty_plan(std::string_view question, double lambda) {
    QueryPlan plan;
    plan.question = std::string(text::trim(question));
    plan.lambda = lambda;
    plan.validate();
    return plan;
}

}  // namespace

QueryPlan parse_query_fallback(std::string_view question, double lambda) {
    auto plan = empty_plan(question, lambda);
    plan.used_fallback = true;
    for (const auto& m : find_time_expressions(question)) {
        if (!m.absolute()) continue;
        if (auto a = parse_absolute_time(m.text)) {
            plan.t_q = *a;
            break;
        }
    }
    return plan;
}

QueryPlan parse_query(std::string_view question, double lambda, ModelGateway* gateway) {
    auto plan = empty_plan(question, lambda);
    if (!gateway) return parse_query_fallback(question, lambda);
    try {
        std::vector<ChatMessage> messages = {{"system", std::string(assets::get("parse_query"))},
                                             {"user", plan.question}};
        auto reply = json::parse(text::extract_json_object(gateway->chat(messages)));
        if (!reply.is_object()) throw OffSchema{};
        const auto& expr = reply.at("temporal_expression");
        if (expr.is_string() && !text::trim(expr.get<std::string>()).empty()) {
            TimeStack stack;
            auto anchor = normalize_time(expr.get<std::string>(), stack, plan.question);
            if (!anchor.is_static()) plan.t_q = anchor;
        } else if (!expr.is_null()) {
            throw OffSchema{};
        }
        auto cls = reply.value("question_class", std::string("other"));
        plan.question_class = question_class_from_string(cls).value_or(QuestionClass::Other);
        return plan;
    } catch (const GatewayError& e) {
        spdlog::warn("query parsing fell back to regex: {}", e.what());
    } catch (const json::exception& e) {
        spdlog::warn("query parsing fell back to regex: {}", e.what());
    } catch (const OffSchema&) {
        spdlog::warn("query parsing fell back to regex: reply does not follow the schema");
    }
    return parse_query_fallback(question, lambda);
}

std::vector<double> LexicalReranker::score(std::string_view question,
                                           std::span<const std::string> passages) {
    std::vector<double> out;
    out.reserve(passages.size());
    for (const auto& p : passages) out.push_back(lexical_overlap(question, p));
    return out;
}

std::vector<double> GatewayReranker::score(std::string_view question,
                                           std::span<const std::string> passages) {
    if (passages.empty()) return {};
    json request = {{"question", question}, {"passages", passages}};
    std::vector<ChatMessage> messages = {
        {"system", task_header(task::kRerank) +
                       "Score how relevant each passage is to the question, from 0 to 1.\n"
                       "Reply with JSON only: {\"scores\": [number, ...]} in passage order.\n"},
        {"user", request.dump()}};
    try {
        auto reply = json::parse(text::extract_json_object(gateway_.chat(messages)));
        const auto& scores = reply.at("scores");
        if (!scores.is_array() || scores.size() != passages.size()) {
            throw OffSchema{};
        }
        std::vector<double> out;
        for (const auto& s : scores) out.push_back(std::clamp(s.get<double>(), 0.0, 1.0));
        return out;
    } catch (const json::exception& e) {
        spdlog::warn("rerank reply unusable, using lexical scores: {}", e.what());
    } catch (const OffSchema&) {
        spdlog::warn("rerank reply unusable, using lexical scores: score count mismatch");
    }
    return fallback_.score(question, passages);
}

void RetrievalParams::validate() const {
    if (k_candidates < 1) throw Error(ErrorKind::Validation, "k_candidates must be >= 1");
    if (seed_count < 1) throw Error(ErrorKind::Validation, "seed_count must be >= 1");
    if (walks_per_seed < 1) throw Error(ErrorKind::Validation, "walks_per_seed must be >= 1");
    if (walk_length < 0) throw Error(ErrorKind::Validation, "walk_length must be >= 0");
    if (!(rerank_floor >= 0.0 && rerank_floor <= 1.0)) {
        throw Error(ErrorKind::Validation, "rerank_floor must lie in [0, 1]");
    }
    if (context_cap_tokens < 1) throw Error(ErrorKind::Validation, "context cap must be >= 1");
    if (max_concurrency < 1) throw Error(ErrorKind::Validation, "max_concurrency must be >= 1");
}

SeedSelection retrieve_seeds(const QueryPlan& plan, std::span<const double> question_vector,
                             const VectorIndex& index, const EventGraph& graph,
                             Reranker& reranker, const RetrievalParams& params,
                             const EncoderConfig& enc) {
    plan.validate();
    params.validate();
    SeedSelection out;
    if (index.size() == 0) return out;
    auto query = embed_query(question_vector, plan.t_q, plan.lambda, enc);
    auto hits = index.search(query, params.k_candidates);

    std::vector<std::string> passages;
    for (const auto& h : hits) {
        if (!graph.contains(h.event_id)) {
            throw Error(ErrorKind::Compat, "vector index row " + h.event_id + " is not in the graph");
        }
        passages.push_back(graph.node(h.event_id).sentence);
    }
    auto scores = reranker.score(plan.question, passages);
    if (scores.size() != hits.size()) {
        throw Error(ErrorKind::Validation, "reranker returned the wrong number of scores");
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
        out.candidates.push_back({hits[i].event_id, hits[i].score, scores[i]});
    }

    std::vector<std::size_t> order(hits.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.candidates[a].rerank_score > out.candidates[b].rerank_score;
    });
    std::set<std::string> seen;
    for (auto i : order) {
        const auto& c = out.candidates[i];
        if (out.seeds.size() >= params.seed_count) break;
        if (c.rerank_score > params.rerank_floor && seen.insert(c.event_id).second) {
            out.seeds.push_back(c.event_id);
        }
    }
    return out;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t seed_index,
                                 std::uint64_t walk_index) {
    auto h = splitmix64(master);
    h = splitmix64(h ^ (seed_index * 0xd1342543de82ef95ULL + 1));
    return splitmix64(h ^ (walk_index * 0xaf251af3b0f025b5ULL + 2));
}

std::vector<std::string> random_walk(const EventGraph& graph, const std::string& seed,
                                     int length, std::mt19937_64& rng) {
    if (!graph.contains(seed)) throw Error(ErrorKind::Validation, "unknown walk seed: " + seed);
    if (length < 0) throw Error(ErrorKind::Validation, "walk length must be >= 0");
    std::vector<std::string> path{seed};
    std::vector<const Neighbor*> eligible;
    for (int step = 0; step < length; ++step) {
        const std::string* previous = path.size() > 1 ? &path[path.size() - 2] : nullptr;
        const auto& nbrs = graph.neighbors(path.back());
        eligible.clear();
        for (const auto& n : nbrs) {
            if (previous && n.id == *previous && nbrs.size() > 1) continue;
            eligible.push_back(&n);
        }
        if (eligible.empty()) break;
        double total = 0.0;
        for (const auto* n : eligible) total += n->weight;
        const double r = uniform01(rng) * total;
        const Neighbor* pick = eligible.back();
        double acc = 0.0;
        for (const auto* n : eligible) {
            acc += n->weight;
            if (r < acc) {
                pick = n;
                break;
            }
        }
        path.push_back(pick->id);
    }
    return path;
}

std::vector<std::vector<std::string>> run_walks(const EventGraph& graph,
                                                const std::vector<std::string>& seeds,
                                                const RetrievalParams& params) {
    params.validate();
    for (const auto& s : seeds) {
        if (!graph.contains(s)) throw Error(ErrorKind::Validation, "unknown walk seed: " + s);
    }
    const std::size_t per = params.walks_per_seed;
    std::vector<std::vector<std::string>> paths(seeds.size() * per);
    parallel_for(paths.size(), params.max_concurrency, [&](std::size_t i) {
        std::mt19937_64 rng(derive_stream_seed(params.rng_seed, i / per, i % per));
        paths[i] = random_walk(graph, seeds[i / per], params.walk_length, rng);
    });
    return paths;
}

std::vector<std::string> EventTimeline::event_ids() const {
    std::vector<std::string> out;
    for (const auto& e : static_entries) out.push_back(e.deu.event_id);
    for (const auto& e : temporal_entries) out.push_back(e.deu.event_id);
    return out;
}

std::string render_timeline_line(std::size_t index, const DynamicEventUnit& deu) {
    return "Event # " + std::to_string(index) + " [" + format_timestamp(deu.anchor) +
           "]: " + text::collapse_whitespace(deu.sentence);
}

void render_timeline(EventTimeline& timeline) {
    std::sort(timeline.static_entries.begin(), timeline.static_entries.end(),
              [](const TimelineEntry& a, const TimelineEntry& b) {
                  return a.priority < b.priority;
              });
    std::sort(timeline.temporal_entries.begin(), timeline.temporal_entries.end(),
              [](const TimelineEntry& a, const TimelineEntry& b) {
                  auto da = *index_day(a.deu.anchor), db = *index_day(b.deu.anchor);
                  if (da != db) return da < db;
                  return a.deu.event_id < b.deu.event_id;
              });
    std::string out;
    std::size_t i = 0;
    for (const auto* list : {&timeline.static_entries, &timeline.temporal_entries}) {
        for (const auto& e : *list) {
            if (i > 0) out += '\n';
            out += render_timeline_line(++i, e.deu);
        }
    }
    timeline.rendered = std::move(out);
}

void truncate_timeline(EventTimeline& timeline, std::size_t token_budget,
                       const Tokenizer& tokenizer) {
    render_timeline(timeline);
    while (!timeline.empty() && tokenizer.count(timeline.rendered) > token_budget) {
        auto worst = [](const std::vector<TimelineEntry>& v) {
            return std::max_element(v.begin(), v.end(), [](const auto& a, const auto& b) {
                return a.priority < b.priority;
            });
        };
        auto s = worst(timeline.static_entries);
        auto t = worst(timeline.temporal_entries);
        const bool drop_static = s != timeline.static_entries.end() &&
                                 (t == timeline.temporal_entries.end() || s->priority > t->priority);
        if (drop_static) {
            timeline.static_entries.erase(s);
        } else {
            timeline.temporal_entries.erase(t);
        }
        render_timeline(timeline);
    }
}

EventTimeline build_timeline(const EventGraph& graph,
                             const std::vector<std::vector<std::string>>& paths,
                             std::size_t token_budget, const Tokenizer& tokenizer) {
    EventTimeline timeline;
    std::set<std::string> seen;
    std::size_t priority = 0;
    std::size_t longest = 0;
    for (const auto& p : paths) longest = std::max(longest, p.size());
    for (std::size_t step = 0; step < longest; ++step) {
        for (const auto& p : paths) {
            if (step >= p.size() || !seen.insert(p[step]).second) continue;
            const auto& deu = graph.node(p[step]);
            auto& list = deu.anchor.is_static() ? timeline.static_entries : timeline.temporal_entries;
            list.push_back({deu, priority++});
        }
    }
    truncate_timeline(timeline, token_budget, tokenizer);
    return timeline;
}

}  // namespace dygrag
