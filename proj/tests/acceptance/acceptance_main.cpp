// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include "dygrag/commands.hpp"
#include "dygrag/evaluation.hpp"
#include "dygrag/event_graph.hpp"
#include "dygrag/retrieval.hpp"
#include "dygrag/temporal_encoding.hpp"
#include "dygrag/vector_index.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>

#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

namespace {

using namespace dygrag;
using testing::day_anchor;
using testing::make_deu;
using nlohmann::json;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

std::string node_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%04d", i);
    return buf;
}

std::set<std::string> random_entities(std::mt19937_64& rng, int pool, int max_size) {
    std::set<std::string> s;
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_size));
    while (static_cast<int>(s.size()) < n) s.insert("ent" + std::to_string(rng() % static_cast<std::uint64_t>(pool)));
    return s;
}

double jaccard_oracle(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    return uni.empty() ? 0.0 : double(inter.size()) / double(uni.size());
}

Outcome criterion1() {
    Outcome o;
    std::mt19937_64 rng(1001);
    GraphParams p;
    int checked = 0, gated_out = 0;
    while (checked < 1000) {
        EventGraph g(p);
        auto ea = random_entities(rng, 6, 4);
        auto eb = random_entities(rng, 6, 4);
        const DayNumber base = static_cast<DayNumber>(rng() % 30000);
        const DayNumber gap = static_cast<DayNumber>(rng() % 2200);
        g.insert_node(make_deu("a", ea, day_anchor(base)));
        g.insert_node(make_deu("b", eb, day_anchor(base + gap)));
        const double sim = jaccard_oracle(ea, eb);
        const bool linked = sim > 0 && gap <= p.delta_t_days;
        const auto edges = g.edges();
        if (!linked) {
            if (!edges.empty()) o.fail("edge stored for a gated-out pair");
            ++gated_out;
            continue;
        }
        if (edges.size() != 1) {
            o.fail("missing edge for a gate-passing pair");
            break;
        }
        const double expected = sim * std::exp(-p.alpha_per_year * static_cast<double>(gap) / 365.25);
        if (std::abs(edges[0].weight - expected) > 1e-12) {
            o.fail("weight " + std::to_string(edges[0].weight) + " vs " + std::to_string(expected));
        }
        ++checked;
    }
    if (o.pass) o.detail = fmt::format("{} linked pairs matched, {} gated-out pairs had no edge", checked, gated_out);
    return o;
}

Outcome criterion2() {
    Outcome o;
    std::mt19937_64 rng(2002);
    GraphParams p;
    EventGraph g(p);
    std::vector<DynamicEventUnit> deus;
    for (int i = 0; i < 500; ++i) {
        TimeAnchor a = rng() % 8 == 0 ? TimeAnchor::timeless() : day_anchor(static_cast<DayNumber>(rng() % 20000));
        deus.push_back(make_deu(node_id(i), random_entities(rng, 60, 3), a));
        g.insert_node(deus.back());
    }
    std::set<std::pair<std::string, std::string>> allowed;
    for (std::size_t i = 0; i < deus.size(); ++i) {
        for (std::size_t j = i + 1; j < deus.size(); ++j) {
            const auto& x = deus[i];
            const auto& y = deus[j];
            if (jaccard_oracle(x.entities, y.entities) <= 0) continue;
            auto gap = day_distance(x.anchor, y.anchor);
            if (gap && *gap > p.delta_t_days) continue;
            allowed.insert({x.event_id, y.event_id});
        }
    }
    if (g.gate_passing_pairs() != allowed) o.fail("gate enumeration differs from exhaustive scan");
    std::size_t edges = 0;
    for (const auto& e : g.edges()) {
        ++edges;
        if (!allowed.contains({e.a, e.b})) o.fail("stored edge " + e.a + "-" + e.b + " violates the gate");
    }
    for (const auto& d : deus) {
        if (static_cast<int>(g.neighbors(d.event_id).size()) > p.top_k) o.fail("degree above K at " + d.event_id);
    }
    if (o.pass) o.detail = std::to_string(edges) + " edges, " + std::to_string(allowed.size()) + " gate-passing pairs";
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::mt19937_64 rng(3003);
    std::normal_distribution<double> gauss;
    const int d = 64, d_tau = 16;
    VectorIndex idx(d, d_tau, "acceptance");
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    auto unit = [&](int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = gauss(rng);
        return l2_normalized(v);
    };
    for (int i = 0; i < 10000; ++i) {
        TimeEnhancedEmbedding e{unit(d), i % 10 ? unit(d_tau) : std::vector<double>(d_tau, 0.0), i % 10 == 0};
        idx.upsert("v" + std::to_string(i), e);
        rows.push_back({"v" + std::to_string(i), e.concatenated()});
    }
    for (int q = 0; q < 100; ++q) {
        auto query = unit(d);
        auto t = unit(d_tau);
        for (double x : t) query.push_back(0.3 * x);
        const double qn = std::sqrt(dot(query, query));
        std::vector<SearchHit> brute;
        brute.reserve(rows.size());
        for (const auto& [id, v] : rows) brute.push_back({id, dot(query, v) / (qn * std::sqrt(dot(v, v)))});
        std::partial_sort(brute.begin(), brute.begin() + 20, brute.end(), [](const SearchHit& a, const SearchHit& b) {
            return a.score != b.score ? a.score > b.score : a.event_id < b.event_id;
        });
        auto hits = idx.search(query, 20);
        for (std::size_t i = 0; i < 20; ++i) {
            if (hits.at(i).event_id != brute[i].event_id) {
                o.fail("query " + std::to_string(q) + " rank " + std::to_string(i) + " differs");
                break;
            }
        }
    }
    if (o.pass) o.detail = "100 queries over 10000 rows";
    return o;
}

Outcome criterion4() {
    Outcome o;
    EventGraph g;
    g.insert_node(make_deu("center", {"a", "b", "c", "d"}, day_anchor(0)));
    const std::vector<std::pair<std::string, DayNumber>> leaves = {{"a", 0}, {"b", 200}, {"c", 500}, {"d", 900}};
    for (const auto& [e, gap] : leaves) g.insert_node(make_deu("leaf_" + e, {e}, day_anchor(gap)));
    const auto& nb = g.neighbors("center");
    if (nb.size() != 4) {
        o.fail("star has " + std::to_string(nb.size()) + " spokes");
        return o;
    }
    double total = 0;
    for (const auto& n : nb) total += n.weight;
    std::map<std::string, int> counts;
    const int walks = 100000;
    for (int i = 0; i < walks; ++i) {
        std::mt19937_64 rng(derive_stream_seed(4004, 0, static_cast<std::uint64_t>(i)));
        ++counts[random_walk(g, "center", 1, rng).at(1)];
    }
    double worst = 0;
    for (const auto& n : nb) {
        const double dev = std::abs(counts[n.id] / double(walks) - n.weight / total);
        worst = std::max(worst, dev);
    }
    if (worst > 0.01) o.fail("max deviation " + std::to_string(worst));
    else o.detail = "max deviation " + std::to_string(worst);
    return o;
}

Outcome criterion5() {
    Outcome o;
    EncoderConfig cfg;
    std::mt19937_64 rng(5005);
    std::uniform_int_distribution<DayNumber> day(-60000, 60000);
    for (int i = 0; i < 1000; ++i) {
        auto v = fourier_encode(day(rng), cfg);
        if (std::abs(dot(v, v) - 1.0) > 1e-12) o.fail("non-unit encoding");
    }
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const DayNumber t1 = day(rng), t2 = day(rng), c = day(rng);
        const double a = dot(fourier_encode(t1, cfg), fourier_encode(t2, cfg));
        const double b = dot(fourier_encode(t1 + c, cfg), fourier_encode(t2 + c, cfg));
        worst = std::max(worst, std::abs(a - b));
    }
    if (worst > 1e-9) o.fail(fmt::format("translation drift {:.3e}", worst));
    const auto zero = fourier_encode(0, cfg);
    const double c = 1.0 / std::sqrt(static_cast<double>(cfg.d_tau / 2));
    for (std::size_t i = 0; i < zero.size(); i += 2) {
        if (zero[i] != 0.0 || std::abs(zero[i + 1] - c) > 1e-15) o.fail("phi(0) pattern differs");
    }
    if (o.pass) o.detail = fmt::format("max translation drift {:.3e}", worst);
    return o;
}

class ConstantReranker final : public Reranker {
public:
    std::vector<double> score(std::string_view, std::span<const std::string> passages) override {
        return std::vector<double>(passages.size(), 0.5);
    }
};

Outcome criterion6() {
    Outcome o;
    EncoderConfig enc;
    EventGraph g;
    VectorIndex idx(4, enc.d_tau, enc.hash());
    const std::vector<double> text = {0.5, 0.5, 0.5, 0.5};
    auto a = TimeAnchor::point_ymd(1995, 5, 1, Granularity::Month);
    auto b = TimeAnchor::point_ymd(2013, 5, 1, Granularity::Month);
    for (const auto& [id, anchor] : {std::pair{"node_1995", a}, std::pair{"node_2013", b}}) {
        idx.upsert(id, embed_deu(text, anchor, enc));
        g.insert_node(make_deu(id, {"bridge"}, anchor, "The bridge reopened to traffic."));
    }
    ConstantReranker rr;
    auto run = [&](double lambda) {
        QueryPlan p;
        p.question = "When did the bridge reopen to traffic in May 2013?";
        p.t_q = b;
        p.lambda = lambda;
        return retrieve_seeds(p, text, idx, g, rr, {}, enc);
    };
    auto s0 = run(0.0);
    if (s0.candidates.size() != 2 || s0.candidates[0].vector_score != s0.candidates[1].vector_score) {
        o.fail("lambda 0 does not tie");
    } else if (s0.seeds != std::vector<std::string>{"node_1995", "node_2013"}) {
        o.fail("lambda 0 tie-break order differs");
    }
    auto s8 = run(0.8);
    if (s8.candidates.size() != 2 || !(s8.candidates[0].vector_score > s8.candidates[1].vector_score) ||
        s8.seeds.front() != "node_2013") {
        o.fail("lambda 0.8 does not rank 2013 strictly first");
    }
    if (o.pass) {
        o.detail = "lambda 0.8 scores " + std::to_string(s8.candidates[0].vector_score) + " > " +
                   std::to_string(s8.candidates[1].vector_score);
    }
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(7007);
    const std::regex line(
        R"(Event # ([0-9]+) \[(static|-?[0-9]{4}(-[0-9]{2}(-[0-9]{2})?)?(\.\.-?[0-9]{4}(-[0-9]{2}(-[0-9]{2})?)?)?)\]: (.+))");
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        EventGraph g;
        std::vector<std::string> ids;
        const int n = 2 + static_cast<int>(rng() % 25);
        for (int i = 0; i < n; ++i) {
            TimeAnchor a;
            switch (rng() % 4) {
                case 0: break;
                case 1: a = TimeAnchor::point(static_cast<DayNumber>(rng() % 30000), Granularity::Day); break;
                case 2: a = testing::year_anchor(1900 + static_cast<int>(rng() % 120)); break;
                default: {
                    const int y = 1900 + static_cast<int>(rng() % 100);
                    a = TimeAnchor::interval(days_from_civil(y, 1, 1), days_from_civil(y + 1 + static_cast<int>(rng() % 10), 1, 1),
                                             Granularity::Year);
                }
            }
            ids.push_back(node_id(i));
            g.insert_node(make_deu(ids.back(), {"x"}, a, "Sentence number " + std::to_string(i) + " here."));
        }
        std::vector<std::vector<std::string>> paths(1 + rng() % 15);
        for (auto& p : paths) {
            const auto len = 1 + rng() % 5;
            for (std::uint64_t s = 0; s < len; ++s) p.push_back(ids[rng() % ids.size()]);
        }
        auto t = build_timeline(g, paths, 1u << 20);
        std::set<std::string> seen;
        bool dated_seen = false;
        std::optional<DayNumber> prev;
        for (const auto& id : t.event_ids()) {
            if (!seen.insert(id).second) o.fail("duplicate entry " + id);
            const auto& anchor = g.node(id).anchor;
            if (anchor.is_static()) {
                if (dated_seen) o.fail("static entry after a dated one");
            } else {
                dated_seen = true;
                if (prev && *index_day(anchor) < *prev) o.fail("temporal entries out of order");
                prev = index_day(anchor);
            }
        }
        std::istringstream in(t.rendered);
        std::string l;
        std::size_t k = 0;
        const auto order = t.event_ids();
        while (std::getline(in, l)) {
            std::smatch m;
            if (!std::regex_match(l, m, line)) {
                o.fail("line does not match template: " + l);
                break;
            }
            if (std::stoul(m[1]) != k + 1 || m[8] != g.node(order.at(k)).sentence) o.fail("line content mismatch");
            ++k;
        }
        if (k != t.size()) o.fail("line count differs from entry count");
    }
    if (o.pass) o.detail = "1000 random path sets";
    return o;
}

Outcome criterion8() {
    Outcome o;
    testing::TempDir dir;
    const auto corpus = testing::data_path("fixtures/five_docs/corpus.jsonl").string();
    const auto qa = load_qa(testing::data_path("fixtures/five_docs/qa.jsonl"));
    std::vector<std::string> graphs, transcripts;
    for (int runno = 0; runno < 2; ++runno) {
        const auto idx = (dir / ("run" + std::to_string(runno))).string();
        auto r = testing::run({"--seed", "8", "index", "--corpus", corpus, "--out", idx});
        if (r.code != 0) {
            o.fail("index failed: " + r.err);
            return o;
        }
        graphs.push_back(testing::read_file(idx + "/graph.jsonl") + testing::read_file(idx + "/vectors.idx"));
        std::string transcript;
        for (std::size_t i = 0; i < qa.size(); ++i) {
            const auto audit = (dir / ("audit" + std::to_string(runno) + "_" + std::to_string(i) + ".json")).string();
            auto q = testing::run({"--seed", "8", "query", "--index", idx, qa[i].question, "--audit", audit});
            if (q.code != 0) o.fail("query failed: " + q.err);
            auto a = json::parse(testing::read_file(audit));
            transcript += a.at("prompt").get<std::string>() + "\n" + a.at("answer").get<std::string>() + "\n" + q.out;
        }
        transcripts.push_back(transcript);
    }
    if (graphs[0] != graphs[1]) o.fail("index files differ between runs");
    if (transcripts[0] != transcripts[1]) o.fail("prompts or answers differ between runs");
    if (o.pass) o.detail = std::to_string(qa.size()) + " queries byte-identical";
    return o;
}

Outcome criterion9() {
    Outcome o;
    testing::TempDir dir;
    auto r = testing::run({"eval", "--index", (dir / "idx").string(), "--corpus",
                           testing::data_path("fixtures/bench20/corpus.jsonl").string(), "--qa",
                           testing::data_path("fixtures/bench20/qa.jsonl").string(), "--out",
                           (dir / "report.json").string()});
    if (r.code != 0) {
        o.fail("eval failed: " + r.err);
        return o;
    }
    auto report = json::parse(testing::read_file(dir / "report.json"));
    const double recall = report.at("mean_recall").get<double>();
    const auto items = report.at("items").size();
    if (items != 20) o.fail(std::to_string(items) + " items scored");
    if (recall < 0.90) o.fail("mean recall " + std::to_string(recall));
    if (o.pass) {
        o.detail = "mean recall " + std::to_string(recall) + ", mean accuracy " +
                   std::to_string(report.at("mean_accuracy").get<double>());
    }
    return o;
}

Outcome criterion10() {
    Outcome o;
    std::mt19937_64 rng(1010);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;:!?'\"()-";
    for (int i = 0; i < 100; ++i) {
        std::string s;
        const auto len = 1 + rng() % 40;
        for (std::uint64_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
        s += static_cast<char>('a' + rng() % 26);  // at least one word character
        auto m = token_metrics(s, {s});
        if (m.accuracy != 1.0 || m.recall != 1.0) o.fail("identity fails for \"" + s + "\"");
    }
    auto a = token_metrics("S.S. Lazio", {"S.S. Lazio"});
    if (a.accuracy != 1.0 || a.recall != 1.0) o.fail("S.S. Lazio case");
    auto b = token_metrics("the Lazio club", {"Lazio"});
    if (b.accuracy != 1.0 / 3.0 || b.recall != 1.0) o.fail("the Lazio club case");
    auto c = token_metrics("", {"Lazio"});
    if (c.accuracy != 0.0 || c.recall != 0.0) o.fail("empty prediction case");
    if (o.pass) o.detail = "100 random identities and 3 hand cases";
    return o;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    struct Criterion {
        int number;
        const char* name;
        double budget_seconds;  // 0 when no runtime bound applies
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "edge-weight oracle", 1.0, criterion1},
        {2, "gate soundness and degree bound", 10.0, criterion2},
        {3, "vector search exactness", 30.0, criterion3},
        {4, "walk transition law", 5.0, criterion4},
        {5, "Fourier encoding properties", 0.0, criterion5},
        {6, "query time weight endpoints", 0.0, criterion6},
        {7, "timeline contract", 0.0, criterion7},
        {8, "end-to-end determinism", 0.0, criterion8},
        {9, "desk-scale pipeline recall", 60.0, criterion9},
        {10, "token metric identities", 0.0, criterion10},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            o.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(c.budget_seconds) + " s");
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name << " ("
                  << std::fixed << std::setprecision(3) << secs << " s) " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
