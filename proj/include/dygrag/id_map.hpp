#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dygrag {

/// Bijection between vector-index rows and event ids.
class IdMap {
public:
    /// Existing ids keep their row.
    std::size_t assign(const std::string& event_id) {
        auto [it, inserted] = row_of_.emplace(event_id, ids_.size());
        if (inserted) ids_.push_back(event_id);
        return it->second;
    }

    std::optional<std::size_t> row(const std::string& event_id) const {
        auto it = row_of_.find(event_id);
        if (it == row_of_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id(std::size_t row) const { return ids_.at(row); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> row_of_;
};

}  // namespace dygrag
