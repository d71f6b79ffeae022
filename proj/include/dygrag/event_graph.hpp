#pragma once

#include "dygrag/core.hpp"
#include "dygrag/temporal_encoding.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dygrag {

/// Jaccard overlap of two normalized entity sets; 0 when both are empty.
double entity_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

/// sim * exp(-alpha * gap / 365.25). A missing gap (static endpoint) uses `static_decay`.
double edge_weight(double sim, std::optional<std::int64_t> gap_days, double alpha_per_year,
                   double static_decay = 0.5);

struct GraphParams {
    int delta_t_days = 1825;
    double alpha_per_year = 0.5;
    int top_k = 10;
    double static_decay = 0.5;

    static GraphParams from(const EncoderConfig& cfg, double static_decay = 0.5);
    void validate() const;
};

/// Index-level metadata carried in the graph file header.
struct GraphMetadata {
    int d = 0;
    int d_tau = 0;
    std::string encoder_hash;

    friend bool operator==(const GraphMetadata&, const GraphMetadata&) = default;
};

struct Neighbor {
    std::string id;
    double weight = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Edge {
    std::string a;  // a < b
    std::string b;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Weighted undirected event graph with top-K sparsified adjacency.
///
/// Edges join events that share at least one entity and, when both are dated, lie within
/// `delta_t_days` of each other. Storage is symmetric: (a, b, w) is kept in both adjacency
/// lists or in neither. Adjacency lists are ordered by descending weight, then event id.
///
/// Incremental insertion gives the new node its K heaviest gate-passing candidates. A
/// counterpart that is already full evicts its lightest edge when the new one beats it, and
/// otherwise rejects the new edge. The result can depend on insertion order;
/// `rebuild_sparsified` recomputes an order-independent edge set.
class EventGraph {
public:
    explicit EventGraph(GraphParams params = {}, GraphMetadata meta = {});

    /// Returns the edges created for the new node. Throws on duplicate ids or after freeze().
    std::vector<Edge> insert_node(DynamicEventUnit deu);

    /// Drops every edge and re-adds gate-passing pairs greedily by descending weight (ties by
    /// id pair) while both endpoints have room. Independent of insertion order.
    void rebuild_sparsified();

    /// After freezing, mutation throws; concurrent readers are safe.
    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    bool contains(const std::string& id) const { return nodes_.contains(id); }
    const DynamicEventUnit& node(const std::string& id) const;
    const std::vector<Neighbor>& neighbors(const std::string& id) const;

    const std::map<std::string, DynamicEventUnit>& nodes() const { return nodes_; }
    const std::map<std::string, std::set<std::string>>& entity_index() const { return entity_index_; }

    /// Every undirected edge once, sorted by (a, b).
    std::vector<Edge> edges() const;
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const;

    /// All pairs (a < b) passing the entity/time gate, found through the entity index.
    std::set<std::pair<std::string, std::string>> gate_passing_pairs() const;

    /// Whether a pair of events passes the gate, and its weight if so.
    std::optional<double> gated_weight(const DynamicEventUnit& x, const DynamicEventUnit& y) const;

    const GraphParams& params() const { return params_; }
    const GraphMetadata& metadata() const { return meta_; }
    void set_metadata(GraphMetadata meta) { meta_ = std::move(meta); }

    friend bool operator==(const EventGraph& a, const EventGraph& b);
    friend EventGraph load_graph(const std::filesystem::path& path);

private:
    void require_mutable() const;
    void link(const std::string& a, const std::string& b, double w);
    void unlink(const std::string& a, const std::string& b);

    GraphParams params_;
    GraphMetadata meta_;
    std::map<std::string, DynamicEventUnit> nodes_;
    std::map<std::string, std::vector<Neighbor>> adjacency_;
    std::map<std::string, std::set<std::string>> entity_index_;
    bool frozen_ = false;
};

/// JSON-lines: a metadata record, then node records, then edge records {a, b, w} with
/// weights printed to 17 significant digits. Written through a temporary file and rename.
void save_graph(const EventGraph& graph, const std::filesystem::path& path);

/// Throws ParseError (with line number) on malformed or truncated files.
EventGraph load_graph(const std::filesystem::path& path);

}  // namespace dygrag
