#pragma once

#include "dygrag/core.hpp"
#include "dygrag/model_gateway.hpp"
#include "dygrag/tokenizer.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dygrag {

struct ChunkingConfig {
    std::size_t chunk_tokens = 1200;
    std::size_t overlap_tokens = 64;

    void validate() const;
};

struct Document {
    std::string source_id;
    std::string title;
    std::string text;
};

/// Sliding windows of `chunk_tokens` advancing by `chunk_tokens - overlap_tokens`; the last
/// window may be short. Each chunk's text is the title line followed by the segment.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tokenizer = default_tokenizer());

struct CandidateFlags {
    bool has_entity = false;
    bool has_state_change = false;
    bool has_result_or_quantity = false;
    bool has_month_precision_anchor = false;

    friend bool operator==(const CandidateFlags&, const CandidateFlags&) = default;
};

struct CandidateEvent {
    std::string sentence;
    std::vector<std::string> temporal_expressions;
    std::vector<std::string> entity_mentions;
    CandidateFlags flags;
    int chunk_index = 0;
    int ordinal = 0;  // position within the chunk's extraction output
    std::string source_id;
};

/// Information score: one point per satisfied criterion.
int score_information(const CandidateEvent& c);

/// Absolute anchors seen so far in the current context window, most recent last.
class TimeStack {
public:
    struct Entry {
        std::size_t position;
        TimeAnchor anchor;
    };

    void push(std::size_t position, TimeAnchor anchor);
    const TimeAnchor* top() const;
    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

private:
    std::vector<Entry> entries_;
};

/// Resolves one expression. Absolute expressions are pushed onto `stack`; relative ones
/// resolve against its top; anything unresolvable falls back to the first absolute date in
/// `fallback_context`, then to a static anchor. Never fails.
TimeAnchor normalize_time(std::string_view expr, TimeStack& stack,
                          std::string_view fallback_context, std::size_t position = 0);

/// Picks the finest-grained anchor among a candidate's expressions and pushes it when it is
/// absolute.
TimeAnchor select_anchor(const std::vector<std::string>& expressions, TimeStack& stack,
                         std::string_view fallback_context, std::size_t position = 0);

enum class ChunkStatus { Ok, Skipped, Failed };
const char* to_string(ChunkStatus s);
std::optional<ChunkStatus> chunk_status_from_string(std::string_view s);

struct ExtractionResult {
    ChunkStatus status = ChunkStatus::Ok;
    std::vector<CandidateEvent> candidates;
    std::string message;
};

std::vector<ChatMessage> build_extraction_prompt(const Chunk& chunk);

/// Parses the extraction model's JSON reply. Nothing when it does not follow the schema.
std::optional<std::vector<CandidateEvent>> parse_extraction_reply(std::string_view reply,
                                                                  const Chunk& chunk);

/// Asks the gateway for candidate events. A malformed reply is re-prompted once and then the
/// chunk is skipped; gateway errors mark the chunk failed. Never throws gateway errors.
ExtractionResult extract_candidates(const Chunk& chunk, ModelGateway& gateway);

std::string make_event_id(std::string_view source_id, int chunk_index, int ordinal);

/// Coreference rewrite plus same-anchor merging. `anchors[i]` belongs to `cands[i]`. When
/// `gateway` is null the coreference step is skipped.
std::vector<DynamicEventUnit> merge_and_resolve(const std::vector<CandidateEvent>& cands,
                                                const std::vector<TimeAnchor>& anchors,
                                                ModelGateway* gateway);

/// Joins two same-anchor statements into one coordinated sentence.
std::string coordinate_sentences(std::string_view first, std::string_view second,
                                 const std::vector<std::string>& shared_surfaces);

struct ManifestRecord {
    std::string doc_id;
    int chunk_index = 0;
    ChunkStatus status = ChunkStatus::Ok;
    int deu_count = 0;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

std::vector<Document> load_corpus(const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

struct IngestOptions {
    ChunkingConfig chunking;
    std::size_t max_concurrency = 32;
};

struct IngestResult {
    std::vector<DynamicEventUnit> deus;     // document order, then chunk order
    std::vector<ManifestRecord> manifest;   // one per processed chunk
    std::size_t chunks_processed = 0;
};

/// Runs chunking, extraction, temporal parsing, filtering and merging over `docs`. Chunks
/// listed in `completed` (doc_id, chunk_index) are not sent to the model again.
IngestResult ingest_documents(const std::vector<Document>& docs, const IngestOptions& opts,
                              ModelGateway& gateway,
                              const std::set<std::pair<std::string, int>>& completed = {},
                              const Tokenizer& tokenizer = default_tokenizer());

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn);

}  // namespace dygrag

#include "dygrag/detail/parallel_for.hpp"
