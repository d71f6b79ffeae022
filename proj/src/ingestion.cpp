#include "dygrag/ingestion.hpp"

#include "dygrag/assets.hpp"
#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>

namespace dygrag {

using nlohmann::json;

void ChunkingConfig::validate() const {
    if (overlap_tokens == 0 || chunk_tokens <= overlap_tokens) {
        throw Error(ErrorKind::Validation, "chunking requires chunk_tokens > overlap_tokens > 0");
    }
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tokenizer) {
    cfg.validate();
    auto spans = tokenizer.spans(doc.text);
    if (spans.empty()) {
        throw Error(ErrorKind::Validation, "document '" + doc.source_id + "' has no text");
    }
    const std::size_t stride = cfg.chunk_tokens - cfg.overlap_tokens;
    std::vector<Chunk> chunks;
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + cfg.chunk_tokens, spans.size());
        Chunk c;
        c.source_id = doc.source_id;
        c.chunk_index = static_cast<int>(chunks.size());
        c.title = doc.title;
        auto body = std::string_view(doc.text).substr(spans[start].begin,
                                                      spans[end - 1].end - spans[start].begin);
        c.text = doc.title.empty() ? std::string(body) : doc.title + "\n" + std::string(body);
        c.token_count = end - start;
        c.token_begin = start;
        c.token_end = end;
        chunks.push_back(std::move(c));
        if (end == spans.size()) break;
    }
    return chunks;
}

int score_information(const CandidateEvent& c) {
    return int{c.flags.has_entity} + int{c.flags.has_state_change} +
           int{c.flags.has_result_or_quantity} + int{c.flags.has_month_precision_anchor};
}

const char* to_string(ChunkStatus s) {
    switch (s) {
    case ChunkStatus::Ok: return "ok";
    case ChunkStatus::Skipped: return "skipped";
    case ChunkStatus::Failed: return "failed";
    }
    return "failed";
}

std::optional<ChunkStatus> chunk_status_from_string(std::string_view s) {
    if (s == "ok") return ChunkStatus::Ok;
    if (s == "skipped") return ChunkStatus::Skipped;
    if (s == "failed") return ChunkStatus::Failed;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

std::vector<ChatMessage> build_extraction_prompt(const Chunk& chunk) {
    std::string user = "Title: " + chunk.title + "\n<<<PASSAGE\n" + chunk.text + "\nPASSAGE>>>";
    return {{"system", std::string(assets::get("extract_events"))}, {"user", std::move(user)}};
}

namespace {

struct SchemaViolation {};

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw SchemaViolation{};
    for (const auto& v : arr) {
        auto s = v.get<std::string>();
        if (!text::trim(s).empty()) out.push_back(std::string(text::trim(s)));
    }
    return out;
}

bool flag(const json& j, const char* key) {
    return j.contains(key) && j.at(key).get<bool>();
}

}  // namespace

std::optional<std::vector<CandidateEvent>> parse_extraction_reply(std::string_view reply,
                                                                  const Chunk& chunk) {
    try {
        auto j = json::parse(text::extract_json_object(reply));
        const json& events = j.is_array() ? j : j.at("events");
        if (!events.is_array()) return std::nullopt;
        std::vector<CandidateEvent> out;
        int ordinal = 0;
        for (const auto& e : events) {
            CandidateEvent c;
            c.sentence = std::string(text::trim(e.at("sentence").get<std::string>()));
            if (c.sentence.empty()) return std::nullopt;
            c.temporal_expressions = string_list(e, "temporal_expressions");
            c.entity_mentions = string_list(e, "entities");
            c.flags.has_entity = flag(e, "has_entity");
            c.flags.has_state_change = flag(e, "has_state_change");
            c.flags.has_result_or_quantity = flag(e, "has_result_or_quantity");
            c.flags.has_month_precision_anchor = flag(e, "has_month_precision_anchor");
            c.chunk_index = chunk.chunk_index;
            c.ordinal = ordinal++;
            c.source_id = chunk.source_id;
            out.push_back(std::move(c));
        }
        return out;
    } catch (const json::exception&) {
        return std::nullopt;
    } catch (const SchemaViolation&) {
        return std::nullopt;
    }
}

ExtractionResult extract_candidates(const Chunk& chunk, ModelGateway& gateway) {
    auto messages = build_extraction_prompt(chunk);
    ExtractionResult result;
    try {
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto reply = gateway.chat(messages);
            if (auto parsed = parse_extraction_reply(reply, chunk)) {
                result.candidates = std::move(*parsed);
                return result;
            }
            messages.push_back({"assistant", reply});
            messages.push_back({"user",
                                "Your reply did not follow the required JSON schema. Reply again "
                                "with only the JSON object."});
        }
        result.status = ChunkStatus::Skipped;
        result.message = "malformed extraction output after re-prompt";
        spdlog::warn("skipping chunk {}#{}: {}", chunk.source_id, chunk.chunk_index,
                     result.message);
    } catch (const Error& e) {
        result.status = ChunkStatus::Failed;
        result.message = e.what();
        spdlog::warn("chunk {}#{} failed: {}", chunk.source_id, chunk.chunk_index, e.what());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Coreference and merging
// ---------------------------------------------------------------------------

std::string make_event_id(std::string_view source_id, int chunk_index, int ordinal) {
    return fmt::format("{}/c{:04d}/e{:03d}", source_id, chunk_index, ordinal);
}

std::string coordinate_sentences(std::string_view first, std::string_view second,
                                 const std::vector<std::string>& shared_surfaces) {
    std::string a(text::trim(first));
    while (!a.empty() && (a.back() == '.' || a.back() == '!' || a.back() == '?')) a.pop_back();
    std::string_view b = text::trim(second);

    auto surfaces = shared_surfaces;
    std::sort(surfaces.begin(), surfaces.end(),
              [](const auto& x, const auto& y) { return x.size() > y.size(); });
    for (const auto& s : surfaces) {
        if (b.size() > s.size() && text::starts_with_icase(b, s) && b[s.size()] == ' ') {
            b = text::trim(b.substr(s.size()));
            break;
        }
    }
    std::string out = a + " and " + std::string(b);
    if (!out.empty() && out.back() != '.' && out.back() != '!' && out.back() != '?') {
        out.push_back('.');
    }
    return out;
}

namespace {

void apply_coreference(std::vector<CandidateEvent>& work, ModelGateway& gateway) {
    json payload = {{"sentences", json::array()}};
    for (const auto& c : work) {
        payload["sentences"].push_back({{"sentence", c.sentence}, {"entities", c.entity_mentions}});
    }
    std::vector<ChatMessage> messages = {
        {"system", std::string(assets::get("resolve_coreference"))}, {"user", payload.dump()}};
    try {
        auto reply = gateway.chat(messages);
        auto j = json::parse(text::extract_json_object(reply));
        const auto& rows = j.at("sentences");
        if (!rows.is_array() || rows.size() != work.size()) {
            spdlog::warn("coreference reply has {} rows for {} sentences; keeping originals",
                         rows.is_array() ? rows.size() : 0, work.size());
            return;
        }
        for (std::size_t i = 0; i < work.size(); ++i) {
            auto sentence = rows[i].at("sentence").get<std::string>();
            if (!text::trim(sentence).empty()) work[i].sentence = std::string(text::trim(sentence));
            if (rows[i].contains("entities")) work[i].entity_mentions = string_list(rows[i], "entities");
        }
    } catch (const json::exception& e) {
        spdlog::warn("malformed coreference reply ({}); keeping originals", e.what());
    } catch (const SchemaViolation&) {
        spdlog::warn("coreference reply violates the schema; keeping originals");
    } catch (const Error& e) {
        spdlog::warn("coreference call failed ({}); keeping originals", e.what());
    }
}

struct Group {
    const CandidateEvent* first = nullptr;
    std::string sentence;
    TimeAnchor anchor;
    std::map<std::string, std::string> entities;  // normalized -> surface
    std::vector<std::string> surface_order;
    int score = 0;

    void add_entities(const std::vector<std::string>& mentions) {
        for (const auto& m : mentions) {
            auto n = normalize_entity(m);
            if (n.empty()) continue;
            if (entities.emplace(n, std::string(text::trim(m))).second) {
                surface_order.push_back(std::string(text::trim(m)));
            }
        }
    }

    std::vector<std::string> shared_with(const std::vector<std::string>& mentions) const {
        std::vector<std::string> out;
        for (const auto& m : mentions) {
            auto it = entities.find(normalize_entity(m));
            if (it != entities.end()) out.push_back(it->second);
        }
        return out;
    }

    DynamicEventUnit finish() const {
        DynamicEventUnit d;
        d.event_id = make_event_id(first->source_id, first->chunk_index, first->ordinal);
        d.source_id = first->source_id;
        d.sentence = sentence;
        d.anchor = anchor;
        for (const auto& [n, _] : entities) d.entities.insert(n);
        d.entity_surfaces = surface_order;
        d.info_score = score;
        d.chunk_index = first->chunk_index;
        validate(d);
        return d;
    }
};

}  // namespace

std::vector<DynamicEventUnit> merge_and_resolve(const std::vector<CandidateEvent>& cands,
                                                const std::vector<TimeAnchor>& anchors,
                                                ModelGateway* gateway) {
    if (cands.size() != anchors.size()) {
        throw Error(ErrorKind::Validation, "candidates and anchors are not aligned");
    }
    std::vector<CandidateEvent> work;
    std::vector<TimeAnchor> work_anchors;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (score_information(cands[i]) < 1 || text::trim(cands[i].sentence).empty()) continue;
        work.push_back(cands[i]);
        work_anchors.push_back(anchors[i]);
    }
    if (gateway && !work.empty()) apply_coreference(work, *gateway);

    std::vector<DynamicEventUnit> out;
    std::set<std::pair<std::string, std::string>> seen;  // (folded sentence, timestamp)
    std::optional<Group> group;
    for (std::size_t i = 0; i < work.size(); ++i) {
        const auto& c = work[i];
        const auto& anchor = work_anchors[i];
        // Overlapping chunk windows re-extract the same statement.
        auto key = std::pair{text::fold_case(text::collapse_whitespace(c.sentence)),
                             format_timestamp(anchor)};
        if (!seen.insert(key).second) continue;

        if (group && !anchor.is_static() && group->anchor.same_time(anchor)) {
            auto shared = group->shared_with(c.entity_mentions);
            if (!shared.empty()) {
                group->sentence = coordinate_sentences(group->sentence, c.sentence, shared);
                group->add_entities(c.entity_mentions);
                group->score = std::max(group->score, score_information(c));
                continue;
            }
        }
        if (group) out.push_back(group->finish());
        group.emplace();
        group->first = &c;
        group->sentence = c.sentence;
        group->anchor = anchor;
        group->add_entities(c.entity_mentions);
        group->score = score_information(c);
    }
    if (group) out.push_back(group->finish());
    return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open corpus " + path.string());
    std::vector<Document> docs;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            Document d{j.at("doc_id").get<std::string>(), j.value("title", std::string()),
                       j.at("text").get<std::string>()};
            if (d.source_id.empty()) throw ParseError("empty doc_id", lineno);
            if (!ids.insert(d.source_id).second) {
                throw ParseError("duplicate doc_id '" + d.source_id + "'", lineno);
            }
            if (text::trim(d.text).empty()) {
                throw ParseError("document '" + d.source_id + "' has empty text", lineno);
            }
            docs.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw ParseError(std::string("corpus record: ") + e.what(), lineno);
        }
    }
    return docs;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
    std::vector<ManifestRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            auto status = chunk_status_from_string(j.at("status").get<std::string>());
            if (!status) throw ParseError("unknown manifest status", lineno);
            out.push_back({j.at("doc_id").get<std::string>(), j.at("chunk_index").get<int>(),
                           *status, j.at("deu_count").get<int>()});
        } catch (const json::exception& e) {
            throw ParseError(std::string("manifest record: ") + e.what(), lineno);
        }
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        for (const auto& r : records) {
            json j = {{"doc_id", r.doc_id},
                      {"chunk_index", r.chunk_index},
                      {"status", to_string(r.status)},
                      {"deu_count", r.deu_count}};
            out << j.dump() << '\n';
        }
        if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Corpus-level driver
// ---------------------------------------------------------------------------

IngestResult ingest_documents(const std::vector<Document>& docs, const IngestOptions& opts,
                              ModelGateway& gateway,
                              const std::set<std::pair<std::string, int>>& completed,
                              const Tokenizer& tokenizer) {
    struct Task {
        std::size_t doc;
        Chunk chunk;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<std::size_t>> tasks_by_doc(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (auto& c : chunk_document(docs[d], opts.chunking, tokenizer)) {
            if (completed.contains({c.source_id, c.chunk_index})) continue;
            tasks_by_doc[d].push_back(tasks.size());
            tasks.push_back({d, std::move(c)});
        }
    }

    std::vector<ExtractionResult> extracted(tasks.size());
    parallel_for(tasks.size(), opts.max_concurrency, [&](std::size_t i) {
        try {
            extracted[i] = extract_candidates(tasks[i].chunk, gateway);
        } catch (const std::exception& e) {
            extracted[i].status = ChunkStatus::Failed;
            extracted[i].message = e.what();
        }
    });

    std::vector<std::vector<DynamicEventUnit>> deus_by_doc(docs.size());
    std::vector<std::string> doc_errors(docs.size());
    parallel_for(docs.size(), opts.max_concurrency, [&](std::size_t d) {
        if (tasks_by_doc[d].empty()) return;
        std::vector<CandidateEvent> cands;
        std::vector<TimeAnchor> anchors;
        for (auto t : tasks_by_doc[d]) {
            TimeStack stack;  // scoped to one chunk
            for (const auto& c : extracted[t].candidates) {
                auto anchor = select_anchor(c.temporal_expressions, stack, c.sentence,
                                            static_cast<std::size_t>(c.ordinal));
                if (score_information(c) < 1) continue;
                cands.push_back(c);
                anchors.push_back(std::move(anchor));
            }
        }
        try {
            deus_by_doc[d] = merge_and_resolve(cands, anchors, &gateway);
        } catch (const std::exception& e) {
            doc_errors[d] = e.what();
        }
    });

    IngestResult result;
    result.chunks_processed = tasks.size();
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (!doc_errors[d].empty()) {
            throw Error(ErrorKind::Validation,
                        "document '" + docs[d].source_id + "': " + doc_errors[d]);
        }
        for (auto t : tasks_by_doc[d]) {
            ManifestRecord r{docs[d].source_id, tasks[t].chunk.chunk_index, extracted[t].status, 0};
            r.deu_count = static_cast<int>(std::count_if(
                deus_by_doc[d].begin(), deus_by_doc[d].end(),
                [&](const DynamicEventUnit& u) { return u.chunk_index == r.chunk_index; }));
            result.manifest.push_back(std::move(r));
        }
        for (auto& u : deus_by_doc[d]) result.deus.push_back(std::move(u));
    }
    return result;
}

}  // namespace dygrag
