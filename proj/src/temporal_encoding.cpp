#include "dygrag/temporal_encoding.hpp"

#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace dygrag {

void EncoderConfig::validate() const {
    if (d_tau < 2 || d_tau % 2 != 0) throw Error(ErrorKind::Validation, "d_tau must be even and >= 2");
    if (!(min_period_days > 0) || !(min_period_days < max_period_days)) {
        throw Error(ErrorKind::Validation, "need 0 < min_period_days < max_period_days");
    }
    if (!(lambda_default >= 0.0 && lambda_default <= 1.0)) {
        throw Error(ErrorKind::Validation, "lambda must lie in [0, 1]");
    }
    if (!(alpha_per_year > 0)) throw Error(ErrorKind::Validation, "alpha_per_year must be > 0");
    if (delta_t_days < 1) throw Error(ErrorKind::Validation, "delta_t_days must be >= 1");
    if (top_k_neighbors < 1) throw Error(ErrorKind::Validation, "top_k_neighbors must be >= 1");
    if (walk_length < 0) throw Error(ErrorKind::Validation, "walk_length must be >= 0");
}

std::string EncoderConfig::canonical_index_fields() const {
    return fmt::format("d_tau={};min_period_days={:.17g};max_period_days={:.17g};"
                       "alpha_per_year={:.17g};delta_t_days={};top_k_neighbors={}",
                       d_tau, min_period_days, max_period_days, alpha_per_year, delta_t_days,
                       top_k_neighbors);
}

std::string EncoderConfig::hash() const {
    return text::to_hex(text::fnv1a64(canonical_index_fields()));
}

std::vector<double> fourier_frequencies(const EncoderConfig& cfg) {
    const int pairs = cfg.d_tau / 2;
    std::vector<double> omega(static_cast<std::size_t>(pairs));
    if (pairs == 1) {
        omega[0] = 2.0 * std::numbers::pi / cfg.max_period_days;
        return omega;
    }
    const double ratio = cfg.max_period_days / cfg.min_period_days;
    for (int k = 0; k < pairs; ++k) {
        const double period = cfg.min_period_days * std::pow(ratio, double(k) / (pairs - 1));
        omega[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi / period;
    }
    return omega;
}

std::vector<double> fourier_encode(DayNumber day, const EncoderConfig& cfg) {
    if (cfg.d_tau < 2 || cfg.d_tau % 2 != 0) {
        throw Error(ErrorKind::Validation, "d_tau must be even and >= 2");
    }
    const auto omega = fourier_frequencies(cfg);
    std::vector<double> out;
    out.reserve(omega.size() * 2);
    const auto t = static_cast<double>(day);
    for (double w : omega) {
        out.push_back(std::sin(t * w));
        out.push_back(std::cos(t * w));
    }
    double norm = std::sqrt(dot(out, out));
    for (auto& x : out) x = x / norm;
    return out;
}

std::vector<double> TimeEnhancedEmbedding::concatenated() const {
    std::vector<double> out(text_part);
    out.insert(out.end(), time_part.begin(), time_part.end());
    return out;
}

std::vector<double> l2_normalized(std::span<const double> v) {
    double n = std::sqrt(dot(v, v));
    if (v.empty() || !(n > 0.0) || !std::isfinite(n)) {
        throw Error(ErrorKind::Dimension, "text vector cannot be normalized (empty or zero)");
    }
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x = x / n;
    return out;
}

TimeEnhancedEmbedding embed_deu(std::span<const double> text_vector, const TimeAnchor& anchor,
                                const EncoderConfig& cfg) {
    TimeEnhancedEmbedding e;
    e.text_part = l2_normalized(text_vector);
    if (auto day = index_day(anchor)) {
        e.time_part = fourier_encode(*day, cfg);
    } else {
        e.time_part.assign(static_cast<std::size_t>(cfg.d_tau), 0.0);
        e.is_static = true;
    }
    return e;
}

std::vector<double> embed_query(std::span<const double> text_vector,
                                const std::optional<TimeAnchor>& t_q, double lambda,
                                const EncoderConfig& cfg) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorKind::Validation, "lambda must lie in [0, 1]");
    }
    auto out = l2_normalized(text_vector);
    std::optional<DayNumber> day = t_q ? index_day(*t_q) : std::nullopt;
    if (!day) {
        out.resize(out.size() + static_cast<std::size_t>(cfg.d_tau), 0.0);
        return out;
    }
    for (double x : fourier_encode(*day, cfg)) out.push_back(lambda * x);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace dygrag
