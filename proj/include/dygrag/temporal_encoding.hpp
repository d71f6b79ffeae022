#pragma once

#include "dygrag/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dygrag {

/// Shared hyperparameters for time encoding, edge construction and traversal.
struct EncoderConfig {
    int d_tau = 16;                     // time segment width, even
    double min_period_days = 30.0;
    double max_period_days = 36500.0;
    double lambda_default = 0.3;        // query time weight
    double alpha_per_year = 0.5;        // edge decay rate
    int delta_t_days = 1825;            // edge window
    int top_k_neighbors = 10;
    int walk_length = 4;

    void validate() const;

    /// Canonical text of the fields that shape stored vectors and edges. Lambda and walk
    /// length are query-time knobs and are left out.
    std::string canonical_index_fields() const;

    /// Hex digest of canonical_index_fields(); indexes built under different values refuse
    /// to load together.
    std::string hash() const;
};

/// Angular frequencies 2*pi/P_k, periods log-spaced over [min_period_days, max_period_days].
/// A single pair (d_tau == 2) uses the longest period.
std::vector<double> fourier_frequencies(const EncoderConfig& cfg);

/// (sin(day*w_k), cos(day*w_k)) pairs, L2-normalized.
std::vector<double> fourier_encode(DayNumber day, const EncoderConfig& cfg);

struct TimeEnhancedEmbedding {
    std::vector<double> text_part;  // unit norm
    std::vector<double> time_part;  // unit norm, or all zeros when is_static
    bool is_static = false;

    std::vector<double> concatenated() const;
};

/// Throws Error(Dimension) when `text_vector` is empty or all zeros.
std::vector<double> l2_normalized(std::span<const double> v);

TimeEnhancedEmbedding embed_deu(std::span<const double> text_vector, const TimeAnchor& anchor,
                                const EncoderConfig& cfg);

/// [text ; lambda * phi(t_q)]. Without a (non-static) t_q the time segment is zero.
std::vector<double> embed_query(std::span<const double> text_vector,
                                const std::optional<TimeAnchor>& t_q, double lambda,
                                const EncoderConfig& cfg);

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace dygrag
