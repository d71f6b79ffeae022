#include "dygrag/error.hpp"
#include "dygrag/ingestion.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace dygrag {
namespace {

using testing::ScriptedGateway;
using testing::TempDir;

Document doc_with_tokens(std::size_t n) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) text += (i ? " w" : "w") + std::to_string(i);
    return {"doc", "Title", text};
}

TEST(Chunking, ShortDocumentIsOneChunk) {
    auto chunks = chunk_document(doc_with_tokens(500), {});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].token_count, 500u);
    EXPECT_TRUE(chunks[0].text.starts_with("Title\n"));
}

TEST(Chunking, StrideIsChunkMinusOverlap) {
    auto chunks = chunk_document(doc_with_tokens(2400), {1200, 64});
    // Brute-force window enumeration: start at 0 and advance by 1136 until the end is covered.
    std::vector<std::size_t> expected;
    for (std::size_t s = 0;; s += 1200 - 64) {
        expected.push_back(s);
        if (s + 1200 >= 2400) break;
    }
    ASSERT_EQ(chunks.size(), expected.size());
    ASSERT_EQ(expected, (std::vector<std::size_t>{0, 1136, 2272}));
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        EXPECT_EQ(chunks[i].token_begin, expected[i]);
        EXPECT_EQ(chunks[i].chunk_index, static_cast<int>(i));
        EXPECT_LE(chunks[i].token_count, 1200u);
    }
    EXPECT_EQ(chunks.back().token_end, 2400u);
}

TEST(Chunking, WindowsTileTheDocument) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 5000;
        const std::size_t size = 20 + rng() % 400;
        const std::size_t overlap = 1 + rng() % (size - 1);
        auto chunks = chunk_document(doc_with_tokens(n), {size, overlap});
        EXPECT_EQ(chunks.front().token_begin, 0u);
        EXPECT_EQ(chunks.back().token_end, n);
        for (std::size_t i = 1; i < chunks.size(); ++i) {
            EXPECT_EQ(chunks[i - 1].token_end - chunks[i].token_begin, overlap);
        }
    }
}

TEST(Chunking, RejectsEmptyTextAndBadConfig) {
    EXPECT_THROW(chunk_document({"d", "t", "   "}, {}), Error);
    EXPECT_THROW(chunk_document(doc_with_tokens(10), {64, 64}), Error);
    EXPECT_THROW(chunk_document(doc_with_tokens(10), {64, 0}), Error);
}

Chunk single_chunk(const std::string& text) {
    return chunk_document({"doc", "Doc", text}, {}).front();
}

TEST(Extraction, MockFlagsAStateChange) {
    MockGateway gw;
    auto r = extract_candidates(single_chunk("Obama became president in January 2009."), gw);
    ASSERT_EQ(r.status, ChunkStatus::Ok);
    ASSERT_EQ(r.candidates.size(), 1u);
    const auto& f = r.candidates[0].flags;
    EXPECT_TRUE(f.has_entity);
    EXPECT_TRUE(f.has_state_change);
    EXPECT_TRUE(f.has_month_precision_anchor);
    EXPECT_FALSE(f.has_result_or_quantity);
}

TEST(Extraction, GenericProseHasNoFlags) {
    MockGateway gw;
    auto r = extract_candidates(single_chunk("The weather is often discussed."), gw);
    ASSERT_EQ(r.candidates.size(), 1u);
    EXPECT_EQ(r.candidates[0].flags, CandidateFlags{});
    EXPECT_EQ(score_information(r.candidates[0]), 0);
}

TEST(Extraction, EmptyListIsLegal) {
    ScriptedGateway gw;
    gw.reply_when([](auto m) { return testing::is_task(m, task::kExtractEvents); }, R"({"events": []})");
    auto r = extract_candidates(single_chunk("Anything."), gw);
    EXPECT_EQ(r.status, ChunkStatus::Ok);
    EXPECT_TRUE(r.candidates.empty());
}

TEST(Extraction, MalformedReplyIsRepromptedOnceThenSkipped) {
    ScriptedGateway gw;
    gw.reply_when([](auto m) { return testing::is_task(m, task::kExtractEvents); }, "sorry, no JSON today");
    auto r = extract_candidates(single_chunk("Obama became president in January 2009."), gw);
    EXPECT_EQ(r.status, ChunkStatus::Skipped);
    EXPECT_EQ(gw.call_count(), 2u);
}

TEST(Extraction, GatewayFailureMarksChunkFailed) {
    ScriptedGateway gw;
    gw.fail_chat_when([](auto) { return true; });
    auto r = extract_candidates(single_chunk("Obama became president in January 2009."), gw);
    EXPECT_EQ(r.status, ChunkStatus::Failed);
    EXPECT_FALSE(r.message.empty());
}

TEST(Extraction, ParsesSchema) {
    auto chunk = single_chunk("x");
    auto ok = parse_extraction_reply(
        R"({"events":[{"sentence":"A won.","temporal_expressions":["1999"],"entities":["A"],"has_entity":true,"has_state_change":true,"has_result_or_quantity":false,"has_month_precision_anchor":false}]})",
        chunk);
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->size(), 1u);
    EXPECT_FALSE(parse_extraction_reply(R"({"events":[{"sentence":""}]})", chunk));
    EXPECT_FALSE(parse_extraction_reply(R"({"events":"nope"})", chunk));
    EXPECT_FALSE(parse_extraction_reply("no json here", chunk));
    EXPECT_TRUE(parse_extraction_reply("[]", chunk));  // a bare list is accepted
}

TEST(InformationScore, SumsFlags) {
    CandidateEvent c;
    c.flags = {true, true, true, true};
    EXPECT_EQ(score_information(c), 4);
    c.flags = {};
    EXPECT_EQ(score_information(c), 0);
    c.flags = {true, false, false, true};
    EXPECT_EQ(score_information(c), 2);
}

CandidateEvent cand(const std::string& sentence, std::vector<std::string> entities, int ordinal) {
    CandidateEvent c;
    c.sentence = sentence;
    c.entity_mentions = std::move(entities);
    c.flags.has_entity = !c.entity_mentions.empty();
    c.flags.has_state_change = true;
    c.ordinal = ordinal;
    c.source_id = "doc";
    return c;
}

TEST(Merge, SameAnchorSharedEntityMerges) {
    auto day = TimeAnchor::point_ymd(2009, 1, 20);
    auto out = merge_and_resolve({cand("Obama took the oath of office.", {"Obama"}, 0),
                                  cand("Obama delivered the inaugural address.", {"Obama"}, 1)},
                                 {day, day}, nullptr);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].sentence, "Obama took the oath of office and delivered the inaugural address.");
    EXPECT_EQ(out[0].entities, std::set<std::string>{"obama"});
}

TEST(Merge, DifferentDaysNeverMerge) {
    auto out = merge_and_resolve({cand("Obama took the oath of office.", {"Obama"}, 0),
                                  cand("Obama signed an order.", {"Obama"}, 1)},
                                 {TimeAnchor::point_ymd(2009, 1, 20), TimeAnchor::point_ymd(2009, 1, 21)},
                                 nullptr);
    EXPECT_EQ(out.size(), 2u);
}

TEST(Merge, SingletonPassesThrough) {
    auto out = merge_and_resolve({cand("Obama signed an order.", {"Obama"}, 4)},
                                 {TimeAnchor::point_ymd(2009, 1, 21)}, nullptr);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].sentence, "Obama signed an order.");
    EXPECT_EQ(out[0].event_id, make_event_id("doc", 0, 4));
}

TEST(Merge, NeverAcrossDistinctIndexDays) {
    std::mt19937 rng(17);
    const std::vector<std::string> names = {"Ada", "Bo", "Cy"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CandidateEvent> cs;
        std::vector<TimeAnchor> anchors;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            cs.push_back(cand(names[rng() % 3] + " did thing " + std::to_string(i) + ".",
                              {names[rng() % 3]}, i));
            anchors.push_back(rng() % 4 == 0 ? TimeAnchor::timeless()
                                             : TimeAnchor::point(static_cast<DayNumber>(rng() % 3),
                                                                 Granularity::Day));
        }
        auto out = merge_and_resolve(cs, anchors, nullptr);
        std::size_t parts = 0;
        for (const auto& d : out) {
            EXPECT_GE(d.info_score, 1);
            // Each merged DEU carries exactly one anchor, so every sentence inside shared it.
            std::size_t k = 1;
            for (std::size_t p = d.sentence.find(" and "); p != std::string::npos; p = d.sentence.find(" and ", p + 1)) ++k;
            parts += k;
        }
        EXPECT_EQ(parts, cs.size());
    }
}

TEST(Merge, CoreferenceViaGateway) {
    MockGateway gw;
    auto out = merge_and_resolve({cand("Marco Bellini signed for AS Roma.", {"Marco Bellini", "Roma"}, 0),
                                  cand("He scored twelve goals.", {}, 1)},
                                 {TimeAnchor::point_ymd(2008, 7, 1, Granularity::Month),
                                  TimeAnchor::point_ymd(2009, 1, 1, Granularity::Year)},
                                 &gw);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[1].sentence, "Marco Bellini scored twelve goals.");
    EXPECT_TRUE(out[1].entities.contains("marco bellini"));
}

TEST(Ingest, FiltersZeroScoreAndWritesManifest) {
    MockGateway gw;
    std::vector<Document> docs = {
        {"d1", "Doc one", "The weather is often discussed. Obama became president in January 2009."},
        {"d2", "Doc two", "Ada Lovelace published her notes in 1843."}};
    auto r = ingest_documents(docs, {}, gw);
    ASSERT_EQ(r.manifest.size(), 2u);
    EXPECT_EQ(r.chunks_processed, 2u);
    for (const auto& d : r.deus) {
        EXPECT_GE(d.info_score, 1);
        EXPECT_NO_THROW(validate(d));
        EXPECT_EQ(d.sentence.find("weather"), std::string::npos);
    }
    EXPECT_EQ(r.manifest[0].deu_count + r.manifest[1].deu_count, static_cast<int>(r.deus.size()));

    std::set<std::pair<std::string, int>> done = {{"d1", 0}, {"d2", 0}};
    auto calls = gw.call_count();
    auto again = ingest_documents(docs, {}, gw, done);
    EXPECT_EQ(gw.call_count(), calls);
    EXPECT_TRUE(again.deus.empty());
}

TEST(Ingest, DeterministicAcrossConcurrency) {
    MockGateway gw;
    std::vector<Document> docs;
    for (int i = 0; i < 12; ++i) {
        docs.push_back({"doc" + std::to_string(i), "Doc",
                        "Ada Lovelace met Charles Babbage in June 1833. She published notes in 1843."});
    }
    IngestOptions one, many;
    one.max_concurrency = 1;
    many.max_concurrency = 16;
    EXPECT_EQ(ingest_documents(docs, one, gw).deus, ingest_documents(docs, many, gw).deus);
}

TEST(Corpus, LoadsAndValidates) {
    TempDir dir;
    testing::write_file(dir / "ok.jsonl",
                        "{\"doc_id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\n\n{\"doc_id\":\"b\",\"title\":\"B\",\"text\":\"y\"}\n");
    EXPECT_EQ(load_corpus(dir / "ok.jsonl").size(), 2u);
    testing::write_file(dir / "dup.jsonl",
                        "{\"doc_id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\n{\"doc_id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\n");
    EXPECT_THROW(load_corpus(dir / "dup.jsonl"), ParseError);
    testing::write_file(dir / "bad.jsonl", "{\"doc_id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\n{oops\n");
    try {
        load_corpus(dir / "bad.jsonl");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Manifest, RoundTrips) {
    TempDir dir;
    std::vector<ManifestRecord> rs = {{"a", 0, ChunkStatus::Ok, 3}, {"a", 1, ChunkStatus::Skipped, 0},
                                      {"b", 0, ChunkStatus::Failed, 0}};
    write_manifest(dir / "m.jsonl", rs);
    EXPECT_EQ(read_manifest(dir / "m.jsonl"), rs);
}

}  // namespace
}  // namespace dygrag
