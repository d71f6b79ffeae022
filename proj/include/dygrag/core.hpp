#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

/// Days since 1970-01-01 in the proleptic Gregorian calendar. Negative before the epoch.
using DayNumber = std::int64_t;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

bool is_valid_civil(int year, unsigned month, unsigned day);

/// Throws Error(Validation) for impossible dates such as 2001-02-29.
DayNumber days_from_civil(int year, unsigned month, unsigned day);
CivilDate civil_from_days(DayNumber day);

enum class AnchorKind { Point, Interval, Static };
enum class Granularity { Day, Month, Year };

const char* to_string(AnchorKind kind);
const char* to_string(Granularity g);
std::optional<AnchorKind> anchor_kind_from_string(std::string_view s);
std::optional<Granularity> granularity_from_string(std::string_view s);

/// Rank where lower is finer: day < month < year.
int granularity_rank(Granularity g);

/// First day of the period containing `day` at granularity `g`.
DayNumber snap_to_period(DayNumber day, Granularity g);

/// First day after the period that starts at `start`.
DayNumber period_end_exclusive(DayNumber start, Granularity g);

/// Normalized temporal reference of an event.
///
/// Point and interval anchors carry a start day aligned to their granularity (a month-level
/// anchor always starts on the 1st). Intervals also carry an end day, itself the first day of
/// the closing period. Static anchors carry nothing but their surface text.
class TimeAnchor {
public:
    /// A static anchor.
    TimeAnchor() = default;

    static TimeAnchor point(DayNumber start, Granularity g, std::string surface = {});
    static TimeAnchor interval(DayNumber start, DayNumber end, Granularity g,
                               std::string surface = {});
    static TimeAnchor timeless(std::string surface = {});

    /// Snaps the date to the start of its period at granularity `g`.
    static TimeAnchor point_ymd(int year, unsigned month = 1, unsigned day = 1,
                                Granularity g = Granularity::Day, std::string surface = {});

    AnchorKind kind() const noexcept { return kind_; }
    bool is_static() const noexcept { return kind_ == AnchorKind::Static; }
    std::optional<DayNumber> start_day() const noexcept { return start_; }
    std::optional<DayNumber> end_day() const noexcept { return end_; }
    std::optional<Granularity> granularity() const noexcept { return granularity_; }
    const std::string& surface_text() const noexcept { return surface_; }

    /// Same temporal content; surface text is ignored.
    bool same_time(const TimeAnchor& other) const noexcept;

    friend bool operator==(const TimeAnchor&, const TimeAnchor&) = default;

private:
    AnchorKind kind_ = AnchorKind::Static;
    std::optional<DayNumber> start_;
    std::optional<DayNumber> end_;
    std::optional<Granularity> granularity_;
    std::string surface_;
};

/// Day used for indexing: the start of a point or interval, nothing for static anchors.
std::optional<DayNumber> index_day(const TimeAnchor& anchor);

/// |index_day(a) - index_day(b)|, or nothing when either side is static.
std::optional<std::int64_t> day_distance(const TimeAnchor& a, const TimeAnchor& b);

/// "2008", "2008-03", "2008-03-14", "2010..2015" or "static".
std::string format_timestamp(const TimeAnchor& anchor);

/// Inverse of format_timestamp. Surface text of the result is the label itself.
std::optional<TimeAnchor> parse_timestamp_label(std::string_view label);

/// [first day, last day] covered by an anchor; nothing for static.
std::optional<std::pair<DayNumber, DayNumber>> covered_days(const TimeAnchor& anchor);

/// Trim, case-fold and collapse internal whitespace.
std::string normalize_entity(std::string_view surface);

struct DynamicEventUnit {
    std::string event_id;
    std::string source_id;
    std::string sentence;
    TimeAnchor anchor;
    std::set<std::string> entities;           // normalized, used for matching
    std::vector<std::string> entity_surfaces;  // as written, for display
    int info_score = 0;
    int chunk_index = 0;

    friend bool operator==(const DynamicEventUnit&, const DynamicEventUnit&) = default;
};

/// Throws Error(Validation) when a stored DEU breaks its invariants.
void validate(const DynamicEventUnit& deu);

struct Chunk {
    std::string source_id;
    int chunk_index = 0;
    std::string title;
    std::string text;  // title line followed by the segment text
    std::size_t token_count = 0;
    std::size_t token_begin = 0;  // [token_begin, token_end) in the document's token stream
    std::size_t token_end = 0;
};

}  // namespace dygrag
