#pragma once

#include "dygrag/id_map.hpp"
#include "dygrag/temporal_encoding.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dygrag {

struct SearchHit {
    std::string event_id;
    double score = 0.0;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Flat store of time-enhanced embeddings with exact cosine search.
///
/// Rows are stored as [text ; time] without renormalizing the whole vector, so a query's
/// lambda-scaled time segment keeps its meaning. Ties in score are broken by event id.
class VectorIndex {
public:
    VectorIndex(int d, int d_tau, std::string encoder_hash);

    /// Re-upserting an id overwrites its row in place.
    std::size_t upsert(const std::string& event_id, const TimeEnhancedEmbedding& emb);

    /// Exact top-k by cosine. An empty index yields an empty list.
    std::vector<SearchHit> search(std::span<const double> query, std::size_t k) const;

    std::span<const double> row(std::size_t r) const;
    std::size_t size() const { return ids_.size(); }
    int d() const { return d_; }
    int d_tau() const { return d_tau_; }
    std::size_t width() const { return static_cast<std::size_t>(d_ + d_tau_); }
    const std::string& encoder_hash() const { return encoder_hash_; }
    const IdMap& ids() const { return ids_; }

    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    /// One JSON header line, then count * (d + d_tau) little-endian float64 values.
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

    friend bool operator==(const VectorIndex& a, const VectorIndex& b) {
        return a.d_ == b.d_ && a.d_tau_ == b.d_tau_ && a.encoder_hash_ == b.encoder_hash_ &&
               a.ids_.ids() == b.ids_.ids() && a.data_ == b.data_;
    }

private:
    int d_;
    int d_tau_;
    std::string encoder_hash_;
    IdMap ids_;
    std::vector<double> data_;
    std::vector<double> norms_;
    bool frozen_ = false;
};

}  // namespace dygrag
