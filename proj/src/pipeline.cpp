#include "dygrag/pipeline.hpp"

#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>

namespace dygrag {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out << content;
        if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

GraphMetadata metadata_for(int d, const RunConfig& cfg) {
    return {d, cfg.encoder.d_tau, cfg.encoder.hash()};
}

}  // namespace

void check_compatible(const EventGraph& graph, const VectorIndex& vectors, const RunConfig& cfg) {
    const auto expected_hash = cfg.encoder.hash();
    const auto& meta = graph.metadata();
    if (meta.encoder_hash != expected_hash || vectors.encoder_hash() != expected_hash) {
        throw Error(ErrorKind::Compat,
                    "index was built with encoder settings " + meta.encoder_hash +
                        " but the current configuration hashes to " + expected_hash +
                        " (d_tau, periods, alpha, delta_t or top_k differ)");
    }
    if (meta.d_tau != cfg.encoder.d_tau || vectors.d_tau() != cfg.encoder.d_tau) {
        throw Error(ErrorKind::Compat, "time segment width differs from the configuration");
    }
    if (meta.d != vectors.d()) {
        throw Error(ErrorKind::Compat, "graph and vector index disagree on the text dimension");
    }
    const auto gp = cfg.graph_params();
    const auto& stored = graph.params();
    if (stored.delta_t_days != gp.delta_t_days || stored.alpha_per_year != gp.alpha_per_year ||
        stored.top_k != gp.top_k || stored.static_decay != gp.static_decay) {
        throw Error(ErrorKind::Compat, "graph parameters differ from the configuration");
    }
    if (vectors.size() != graph.node_count()) {
        throw Error(ErrorKind::Compat, "vector index holds " + std::to_string(vectors.size()) +
                                           " rows but the graph has " +
                                           std::to_string(graph.node_count()) + " nodes");
    }
    for (const auto& id : vectors.ids().ids()) {
        if (!graph.contains(id)) throw Error(ErrorKind::Compat, "vector row " + id + " has no graph node");
    }
}

BuildStats build_index(const std::vector<Document>& docs, const RunConfig& cfg,
                       ModelGateway& gateway, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const auto calls_before = gateway.call_count();
    const IndexLayout layout{out_dir};
    std::filesystem::create_directories(out_dir);

    BuildStats stats;
    stats.documents = docs.size();
    std::vector<ManifestRecord> manifest;
    std::optional<EventGraph> graph;
    std::optional<VectorIndex> vectors;
    if (std::filesystem::exists(layout.manifest())) {
        manifest = read_manifest(layout.manifest());
        if (!std::filesystem::exists(layout.graph()) || !std::filesystem::exists(layout.vectors())) {
            throw Error(ErrorKind::Compat, "index directory has a manifest but no graph or vectors");
        }
        graph = load_graph(layout.graph());
        vectors = VectorIndex::load(layout.vectors());
        check_compatible(*graph, *vectors, cfg);
        stats.resumed = true;
    }

    std::set<std::pair<std::string, int>> completed;
    for (const auto& r : manifest) {
        if (r.status != ChunkStatus::Failed) completed.insert({r.doc_id, r.chunk_index});
    }
    std::erase_if(manifest, [](const ManifestRecord& r) { return r.status == ChunkStatus::Failed; });

    IngestOptions opts;
    opts.chunking = cfg.chunking;
    opts.max_concurrency = static_cast<std::size_t>(cfg.gateway.max_concurrency);
    auto ingested = ingest_documents(docs, opts, gateway, completed);
    stats.chunks_processed = ingested.chunks_processed;

    std::vector<DynamicEventUnit> fresh;
    for (auto& deu : ingested.deus) {
        if (graph && graph->contains(deu.event_id)) {
            spdlog::warn("event {} already indexed; keeping the stored copy", deu.event_id);
            continue;
        }
        fresh.push_back(std::move(deu));
    }

    std::vector<std::vector<double>> text_vectors;
    if (!fresh.empty()) {
        std::vector<std::string> sentences;
        sentences.reserve(fresh.size());
        for (const auto& deu : fresh) sentences.push_back(deu.sentence);
        text_vectors = gateway.embed(sentences);
    }
    if (!graph) {
        int d = 0;
        if (!text_vectors.empty()) {
            d = static_cast<int>(text_vectors.front().size());
        } else {
            const std::vector<std::string> probe{"dimension probe"};
            d = static_cast<int>(gateway.embed(probe).front().size());
        }
        graph.emplace(cfg.graph_params(), metadata_for(d, cfg));
        vectors.emplace(d, cfg.encoder.d_tau, cfg.encoder.hash());
    }

    for (std::size_t i = 0; i < fresh.size(); ++i) {
        auto emb = embed_deu(text_vectors[i], fresh[i].anchor, cfg.encoder);
        vectors->upsert(fresh[i].event_id, emb);
        graph->insert_node(std::move(fresh[i]));
    }
    stats.new_events = fresh.size();
    if (cfg.graph_build == "rebuild") graph->rebuild_sparsified();

    for (auto& r : ingested.manifest) {
        if (r.status == ChunkStatus::Failed) ++stats.failed_chunks;
        manifest.push_back(std::move(r));
    }
    std::map<std::string, std::size_t> doc_order;
    for (std::size_t i = 0; i < docs.size(); ++i) doc_order.emplace(docs[i].source_id, i);
    std::stable_sort(manifest.begin(), manifest.end(), [&](const auto& a, const auto& b) {
        auto oa = doc_order.contains(a.doc_id) ? doc_order[a.doc_id] : docs.size();
        auto ob = doc_order.contains(b.doc_id) ? doc_order[b.doc_id] : docs.size();
        if (oa != ob) return oa < ob;
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        return a.chunk_index < b.chunk_index;
    });

    save_graph(*graph, layout.graph());
    vectors->save(layout.vectors());
    write_manifest(layout.manifest(), manifest);

    stats.nodes = graph->node_count();
    stats.edges = graph->edge_count();
    stats.model_calls = gateway.call_count() - calls_before;
    stats.seconds = seconds_since(start);
    json info = {{"config", cfg.to_json()},
                 {"documents", stats.documents},
                 {"chunks_processed", stats.chunks_processed},
                 {"failed_chunks", stats.failed_chunks},
                 {"new_events", stats.new_events},
                 {"nodes", stats.nodes},
                 {"edges", stats.edges},
                 {"model_calls", stats.model_calls},
                 {"resumed", stats.resumed},
                 {"index_time_seconds", stats.seconds}};
    write_text_atomic(layout.info(), info.dump(2) + "\n");
    if (stats.failed_chunks > 0) {
        spdlog::warn("{} chunk(s) failed and will be retried on the next run", stats.failed_chunks);
    }
    return stats;
}

LoadedIndex load_index(const std::filesystem::path& dir, const RunConfig& cfg) {
    const IndexLayout layout{dir};
    for (const auto& p : {layout.graph(), layout.vectors()}) {
        if (!std::filesystem::exists(p)) throw Error(ErrorKind::Compat, "index file missing: " + p.string());
    }
    LoadedIndex out{load_graph(layout.graph()), VectorIndex::load(layout.vectors()), {}, std::nullopt};
    if (std::filesystem::exists(layout.manifest())) out.manifest = read_manifest(layout.manifest());
    check_compatible(out.graph, out.vectors, cfg);
    if (std::filesystem::exists(layout.info())) {
        try {
            std::ifstream in(layout.info());
            auto info = json::parse(in);
            if (info.contains("index_time_seconds")) out.index_time_seconds = info["index_time_seconds"].get<double>();
        } catch (const json::exception& e) {
            spdlog::warn("ignoring unreadable {}: {}", layout.info().string(), e.what());
        }
    }
    out.graph.freeze();
    out.vectors.freeze();
    return out;
}

json QueryRun::report(bool include_prompt) const {
    json candidates = json::array();
    for (const auto& c : seeds.candidates) {
        candidates.push_back({{"event_id", c.event_id},
                              {"vector_score", c.vector_score},
                              {"rerank_score", c.rerank_score}});
    }
    json out = {{"question", plan.question},
                {"t_Q", plan.t_q ? json(format_timestamp(*plan.t_q)) : json(nullptr)},
                {"lambda", plan.lambda},
                {"question_class", to_string(plan.question_class)},
                {"query_parse_fallback", plan.used_fallback},
                {"candidates", candidates},
                {"seeds", seeds.seeds},
                {"paths", paths},
                {"timeline_event_ids", timeline.event_ids()},
                {"rendered_timeline", timeline.rendered},
                {"answer", answer.answer},
                {"answer_marker_missing", answer.marker_missing},
                {"error", error ? json(*error) : json(nullptr)}};
    if (include_prompt) {
        out["prompt"] = prompt.render();
        out["raw_reasoning"] = answer.raw_reasoning;
    }
    return out;
}

QueryEngine::QueryEngine(const LoadedIndex& index, const RunConfig& cfg, ModelGateway& gateway)
    : index_(index), cfg_(cfg), gateway_(gateway) {}

QueryRun QueryEngine::run(const std::string& question, std::optional<double> lambda) const {
    QueryRun run;
    run.plan = parse_query(question, lambda.value_or(cfg_.encoder.lambda_default), &gateway_);
    try {
        const std::vector<std::string> texts{run.plan.question};
        auto question_vector = gateway_.embed(texts).front();

        LexicalReranker lexical;
        GatewayReranker remote(gateway_);
        Reranker& reranker = cfg_.reranker == "gateway" ? static_cast<Reranker&>(remote) : lexical;
        run.seeds = retrieve_seeds(run.plan, question_vector, index_.vectors, index_.graph,
                                   reranker, cfg_.retrieval, cfg_.encoder);

        auto params = cfg_.retrieval;
        params.rng_seed = derive_stream_seed(cfg_.retrieval.rng_seed, text::fnv1a64(run.plan.question), 0);
        run.paths = run_walks(index_.graph, run.seeds.seeds, params);
        run.timeline = build_timeline(index_.graph, run.paths, cfg_.retrieval.context_cap_tokens);
        run.prompt = assemble_prompt(run.plan, run.timeline, cfg_.retrieval.context_cap_tokens);
        run.answer = generate_answer(run.prompt, gateway_);
    } catch (const GatewayError& e) {
        run.error = std::string(to_string(e.kind())) + " error: " + e.what();
        spdlog::error("query failed: {}", *run.error);
    }
    return run;
}

EvalReport run_benchmark(const QueryEngine& engine, const std::vector<QaItem>& items,
                         const RunConfig& cfg) {
    return score_items(
        items,
        [&](const QaItem& item) {
            auto run = engine.run(item.question);
            if (run.error) throw Error(ErrorKind::Transport, *run.error);
            return Prediction{run.answer.answer, {{"seeds", run.seeds.seeds},
                                                  {"timeline_event_ids", run.timeline.event_ids()}}};
        },
        static_cast<std::size_t>(cfg.gateway.max_concurrency));
}

}  // namespace dygrag
