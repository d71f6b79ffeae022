#pragma once

#include "dygrag/core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

enum class MentionType { Interval, Date, MonthYear, Year, Relative };

struct TimeMention {
    std::size_t begin = 0;  // byte offsets into the scanned text
    std::size_t end = 0;
    MentionType type = MentionType::Year;
    std::string text;

    bool absolute() const { return type != MentionType::Relative; }
};

/// Finds temporal expressions in English prose, left to right, without overlaps. Longer and
/// more specific forms win: "from 2010 to 2015" is one interval mention, not two years.
std::vector<TimeMention> find_time_expressions(std::string_view text);

/// Parses a complete absolute expression ("March 2008", "2021-06-15", "from 2010 to 2015",
/// "in 1999"). Relative or vague expressions yield nothing.
std::optional<TimeAnchor> parse_absolute_time(std::string_view expr);

/// 1..12 for a month name or common abbreviation, case-insensitive.
std::optional<unsigned> month_from_name(std::string_view name);

/// "two" -> 2, "a" -> 1, "12" -> 12.
std::optional<int> parse_count_word(std::string_view word);

}  // namespace dygrag
