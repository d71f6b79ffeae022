#include "dygrag/event_graph.hpp"

#include "dygrag/error.hpp"
#include "dygrag/json_io.hpp"
#include "dygrag/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

namespace dygrag {

using nlohmann::json;

double entity_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& e : a) common += b.count(e);
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

double edge_weight(double sim, std::optional<std::int64_t> gap_days, double alpha_per_year,
                   double static_decay) {
    if (!gap_days) return sim * static_decay;
    return sim * std::exp(-alpha_per_year * static_cast<double>(*gap_days) / 365.25);
}

GraphParams GraphParams::from(const EncoderConfig& cfg, double static_decay) {
    return {cfg.delta_t_days, cfg.alpha_per_year, cfg.top_k_neighbors, static_decay};
}

void GraphParams::validate() const {
    if (delta_t_days < 0) throw Error(ErrorKind::Validation, "delta_t_days must be >= 0");
    if (!(alpha_per_year > 0)) throw Error(ErrorKind::Validation, "alpha_per_year must be > 0");
    if (top_k < 1) throw Error(ErrorKind::Validation, "top_k must be >= 1");
    if (!(static_decay > 0 && static_decay <= 1)) {
        throw Error(ErrorKind::Validation, "static_decay must lie in (0, 1]");
    }
}

namespace {

bool heavier(double w1, const std::string& id1, double w2, const std::string& id2) {
    return w1 > w2 || (w1 == w2 && id1 < id2);
}

bool heavier(const Neighbor& x, const Neighbor& y) {
    return heavier(x.weight, x.id, y.weight, y.id);
}

Edge make_edge(const std::string& x, const std::string& y, double w) {
    return x < y ? Edge{x, y, w} : Edge{y, x, w};
}

}  // namespace

EventGraph::EventGraph(GraphParams params, GraphMetadata meta)
    : params_(params), meta_(std::move(meta)) {
    params_.validate();
}

void EventGraph::require_mutable() const {
    if (frozen_) throw Error(ErrorKind::Validation, "event graph is frozen");
}

const DynamicEventUnit& EventGraph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(ErrorKind::Validation, "unknown event id '" + id + "'");
    return it->second;
}

const std::vector<Neighbor>& EventGraph::neighbors(const std::string& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw Error(ErrorKind::Validation, "unknown event id '" + id + "'");
    return it->second;
}

std::optional<double> EventGraph::gated_weight(const DynamicEventUnit& x,
                                               const DynamicEventUnit& y) const {
    const double sim = entity_similarity(x.entities, y.entities);
    if (!(sim > 0.0)) return std::nullopt;
    auto gap = day_distance(x.anchor, y.anchor);
    if (gap && *gap > params_.delta_t_days) return std::nullopt;
    const double w = edge_weight(sim, gap, params_.alpha_per_year, params_.static_decay);
    if (!(w > 0.0)) return std::nullopt;
    return w;
}

void EventGraph::link(const std::string& a, const std::string& b, double w) {
    auto insert_sorted = [](std::vector<Neighbor>& list, Neighbor n) {
        auto pos = std::lower_bound(list.begin(), list.end(), n,
                                    [](const Neighbor& x, const Neighbor& y) { return heavier(x, y); });
        list.insert(pos, std::move(n));
    };
    insert_sorted(adjacency_[a], {b, w});
    insert_sorted(adjacency_[b], {a, w});
}

void EventGraph::unlink(const std::string& a, const std::string& b) {
    auto drop = [](std::vector<Neighbor>& list, const std::string& id) {
        std::erase_if(list, [&](const Neighbor& n) { return n.id == id; });
    };
    drop(adjacency_[a], b);
    drop(adjacency_[b], a);
}

std::vector<Edge> EventGraph::insert_node(DynamicEventUnit deu) {
    require_mutable();
    if (nodes_.contains(deu.event_id)) {
        throw Error(ErrorKind::Validation, "duplicate event id '" + deu.event_id + "'");
    }
    validate(deu);

    std::set<std::string> candidate_ids;
    for (const auto& e : deu.entities) {
        if (auto it = entity_index_.find(e); it != entity_index_.end()) {
            candidate_ids.insert(it->second.begin(), it->second.end());
        }
    }
    std::vector<Neighbor> candidates;
    for (const auto& id : candidate_ids) {
        if (auto w = gated_weight(deu, nodes_.at(id))) candidates.push_back({id, *w});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Neighbor& x, const Neighbor& y) { return heavier(x, y); });
    const auto k = static_cast<std::size_t>(params_.top_k);
    if (candidates.size() > k) candidates.resize(k);

    const std::string id = deu.event_id;
    for (const auto& e : deu.entities) entity_index_[e].insert(id);
    nodes_.emplace(id, std::move(deu));
    adjacency_[id];

    std::vector<Edge> created;
    for (const auto& c : candidates) {
        auto& theirs = adjacency_[c.id];
        if (theirs.size() >= k) {
            const Neighbor weakest = theirs.back();
            if (!heavier(c.weight, id, weakest.weight, weakest.id)) continue;
            unlink(c.id, weakest.id);
        }
        link(id, c.id, c.weight);
        created.push_back(make_edge(id, c.id, c.weight));
    }
    return created;
}

std::set<std::pair<std::string, std::string>> EventGraph::gate_passing_pairs() const {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [id, deu] : nodes_) {
        for (const auto& e : deu.entities) {
            for (const auto& other : entity_index_.at(e)) {
                if (other <= id || out.contains({id, other})) continue;
                if (gated_weight(deu, nodes_.at(other))) out.insert({id, other});
            }
        }
    }
    return out;
}

void EventGraph::rebuild_sparsified() {
    require_mutable();
    std::vector<Edge> pairs;
    for (const auto& [a, b] : gate_passing_pairs()) {
        pairs.push_back({a, b, *gated_weight(nodes_.at(a), nodes_.at(b))});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Edge& x, const Edge& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    for (auto& [_, list] : adjacency_) list.clear();
    const auto k = static_cast<std::size_t>(params_.top_k);
    for (const auto& e : pairs) {
        if (adjacency_[e.a].size() < k && adjacency_[e.b].size() < k) link(e.a, e.b, e.weight);
    }
}

std::vector<Edge> EventGraph::edges() const {
    std::vector<Edge> out;
    for (const auto& [id, list] : adjacency_) {
        for (const auto& n : list) {
            if (id < n.id) out.push_back({id, n.id, n.weight});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t EventGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& [_, list] : adjacency_) twice += list.size();
    return twice / 2;
}

bool operator==(const EventGraph& a, const EventGraph& b) {
    return a.nodes_ == b.nodes_ && a.adjacency_ == b.adjacency_ &&
           a.entity_index_ == b.entity_index_ && a.meta_ == b.meta_ &&
           a.params_.delta_t_days == b.params_.delta_t_days &&
           a.params_.alpha_per_year == b.params_.alpha_per_year &&
           a.params_.top_k == b.params_.top_k && a.params_.static_decay == b.params_.static_decay;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr int kGraphFormatVersion = 1;

}  // namespace

void save_graph(const EventGraph& graph, const std::filesystem::path& path) {
    const auto edges = graph.edges();
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        const auto& p = graph.params();
        const auto& m = graph.metadata();
        json header = {{"version", kGraphFormatVersion},
                       {"d", m.d},
                       {"d_tau", m.d_tau},
                       {"encoder_hash", m.encoder_hash},
                       {"delta_t_days", p.delta_t_days},
                       {"alpha_per_year", p.alpha_per_year},
                       {"static_decay", p.static_decay},
                       {"top_k_neighbors", p.top_k},
                       {"node_count", graph.node_count()},
                       {"edge_count", edges.size()}};
        out << header.dump() << '\n';
        for (const auto& [_, deu] : graph.nodes()) out << deu_to_json(deu).dump() << '\n';
        for (const auto& e : edges) {
            out << "{\"a\":" << json(e.a).dump() << ",\"b\":" << json(e.b).dump()
                << ",\"w\":" << format_double(e.weight) << "}\n";
        }
        if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

EventGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open graph file " + path.string());

    std::string line;
    std::size_t lineno = 0;
    auto next_record = [&]() -> std::optional<json> {
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            try {
                return json::parse(line);
            } catch (const json::exception& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
            }
        }
        return std::nullopt;
    };

    auto header = next_record();
    if (!header) throw ParseError("graph file is empty", 0);
    GraphParams params;
    GraphMetadata meta;
    std::size_t node_count = 0, edge_count = 0;
    try {
        if (header->at("version").get<int>() != kGraphFormatVersion) {
            throw ParseError("unsupported graph format version", lineno);
        }
        meta.d = header->at("d").get<int>();
        meta.d_tau = header->at("d_tau").get<int>();
        meta.encoder_hash = header->value("encoder_hash", std::string());
        params.delta_t_days = header->at("delta_t_days").get<int>();
        params.alpha_per_year = header->at("alpha_per_year").get<double>();
        params.static_decay = header->value("static_decay", 0.5);
        params.top_k = header->at("top_k_neighbors").get<int>();
        node_count = header->at("node_count").get<std::size_t>();
        edge_count = header->at("edge_count").get<std::size_t>();
        params.validate();
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph header: ") + e.what(), lineno);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string("graph header: ") + e.what(), lineno);
    }

    EventGraph graph(params, meta);
    for (std::size_t i = 0; i < node_count; ++i) {
        auto rec = next_record();
        if (!rec) throw ParseError("truncated graph file: expected node record", lineno + 1);
        try {
            auto deu = deu_from_json(*rec);
            if (graph.nodes_.contains(deu.event_id)) {
                throw ParseError("duplicate node '" + deu.event_id + "'", lineno);
            }
            for (const auto& e : deu.entities) graph.entity_index_[e].insert(deu.event_id);
            graph.adjacency_[deu.event_id];
            auto id = deu.event_id;
            graph.nodes_.emplace(std::move(id), std::move(deu));
        } catch (const json::exception& e) {
            throw ParseError(std::string("node record: ") + e.what(), lineno);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(std::string("node record: ") + e.what(), lineno);
        }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < edge_count; ++i) {
        auto rec = next_record();
        if (!rec) throw ParseError("truncated graph file: expected edge record", lineno + 1);
        try {
            auto a = rec->at("a").get<std::string>();
            auto b = rec->at("b").get<std::string>();
            auto w = rec->at("w").get<double>();
            if (!graph.nodes_.contains(a) || !graph.nodes_.contains(b) || a == b) {
                throw ParseError("edge references unknown or identical nodes", lineno);
            }
            if (!(w > 0.0 && w <= 1.0)) throw ParseError("edge weight outside (0, 1]", lineno);
            if (!seen.insert(a < b ? std::pair{a, b} : std::pair{b, a}).second) {
                throw ParseError("duplicate edge", lineno);
            }
            graph.link(a, b, w);
        } catch (const json::exception& e) {
            throw ParseError(std::string("edge record: ") + e.what(), lineno);
        }
    }
    if (next_record()) throw ParseError("unexpected records after the declared edges", lineno);
    return graph;
}

}  // namespace dygrag
