#include "dygrag/vector_index.hpp"

#include "dygrag/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace dygrag {

using nlohmann::json;

namespace {

constexpr int kIndexFormatVersion = 1;

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0x00000000000000ffULL) << 56) | ((v & 0x000000000000ff00ULL) << 40) |
            ((v & 0x0000000000ff0000ULL) << 24) | ((v & 0x00000000ff000000ULL) << 8) |
            ((v & 0x000000ff00000000ULL) >> 8) | ((v & 0x0000ff0000000000ULL) >> 24) |
            ((v & 0x00ff000000000000ULL) >> 40) | ((v & 0xff00000000000000ULL) >> 56);
    }
    return v;
}

}  // namespace

VectorIndex::VectorIndex(int d, int d_tau, std::string encoder_hash)
    : d_(d), d_tau_(d_tau), encoder_hash_(std::move(encoder_hash)) {
    if (d < 1 || d_tau < 0) throw Error(ErrorKind::Validation, "invalid vector index dimensions");
}

std::size_t VectorIndex::upsert(const std::string& event_id, const TimeEnhancedEmbedding& emb) {
    if (frozen_) throw Error(ErrorKind::Validation, "vector index is frozen");
    if (emb.text_part.size() != static_cast<std::size_t>(d_) ||
        emb.time_part.size() != static_cast<std::size_t>(d_tau_)) {
        throw Error(ErrorKind::Dimension,
                    "embedding has dimensions (" + std::to_string(emb.text_part.size()) + ", " +
                        std::to_string(emb.time_part.size()) + "), index expects (" +
                        std::to_string(d_) + ", " + std::to_string(d_tau_) + ")");
    }
    const std::size_t r = ids_.assign(event_id);
    if (r == norms_.size()) {
        data_.resize(data_.size() + width());
        norms_.push_back(0.0);
    }
    auto* dst = data_.data() + r * width();
    std::copy(emb.text_part.begin(), emb.text_part.end(), dst);
    std::copy(emb.time_part.begin(), emb.time_part.end(), dst + d_);
    norms_[r] = std::sqrt(dot(row(r), row(r)));
    return r;
}

std::span<const double> VectorIndex::row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * width(), width());
}

std::vector<SearchHit> VectorIndex::search(std::span<const double> query, std::size_t k) const {
    if (query.size() != width()) {
        throw Error(ErrorKind::Dimension, "query has dimension " + std::to_string(query.size()) +
                                              ", index expects " + std::to_string(width()));
    }
    if (k == 0) throw Error(ErrorKind::Validation, "search needs k >= 1");
    const std::size_t n = size();
    if (n == 0) return {};

    const double qn = std::sqrt(dot(query, query));
    std::vector<double> scores(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double denom = qn * norms_[r];
        scores[r] = denom > 0.0 ? dot(query, row(r)) / denom : 0.0;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t x, std::size_t y) {
        if (scores[x] != scores[y]) return scores[x] > scores[y];
        return ids_.id(x) < ids_.id(y);
    };
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      better);
    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) hits.push_back({ids_.id(order[i]), scores[order[i]]});
    return hits;
}

void VectorIndex::save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        json header = {{"version", kIndexFormatVersion}, {"d", d_},
                       {"d_tau", d_tau_},                {"encoder_hash", encoder_hash_},
                       {"count", size()},                {"ids", ids_.ids()}};
        out << header.dump() << '\n';
        for (double v : data_) {
            auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
        if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open vector index " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("vector index is empty", 1);
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("vector index header: ") + e.what(), 1);
    }
    try {
        if (header.at("version").get<int>() != kIndexFormatVersion) {
            throw ParseError("unsupported vector index version", 1);
        }
        VectorIndex idx(header.at("d").get<int>(), header.at("d_tau").get<int>(),
                        header.at("encoder_hash").get<std::string>());
        const auto count = header.at("count").get<std::size_t>();
        const auto ids = header.at("ids").get<std::vector<std::string>>();
        if (ids.size() != count) throw ParseError("vector index id list does not match count", 1);
        for (const auto& id : ids) {
            if (idx.ids_.assign(id) != idx.ids_.size() - 1) {
                throw ParseError("duplicate id '" + id + "' in vector index", 1);
            }
        }
        idx.data_.resize(count * idx.width());
        for (auto& v : idx.data_) {
            std::uint64_t bits = 0;
            if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
                throw ParseError("truncated vector index payload", 0);
            }
            v = std::bit_cast<double>(to_little_endian(bits));
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw ParseError("trailing bytes after vector index payload", 0);
        }
        idx.norms_.resize(count);
        for (std::size_t r = 0; r < count; ++r) idx.norms_[r] = std::sqrt(dot(idx.row(r), idx.row(r)));
        return idx;
    } catch (const json::exception& e) {
        throw ParseError(std::string("vector index header: ") + e.what(), 1);
    }
}

}  // namespace dygrag
