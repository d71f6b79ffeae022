#include "dygrag/core.hpp"

#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace dygrag {

namespace chr = std::chrono;

bool is_valid_civil(int year, unsigned month, unsigned day) {
    return chr::year_month_day{chr::year{year}, chr::month{month}, chr::day{day}}.ok();
}

DayNumber days_from_civil(int year, unsigned month, unsigned day) {
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) {
        throw Error(ErrorKind::Validation, "invalid calendar date " + std::to_string(year) + "-" +
                                               std::to_string(month) + "-" + std::to_string(day));
    }
    return chr::sys_days{ymd}.time_since_epoch().count();
}

CivilDate civil_from_days(DayNumber day) {
    chr::year_month_day ymd{chr::sys_days{chr::days{day}}};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day())};
}

const char* to_string(AnchorKind kind) {
    switch (kind) {
    case AnchorKind::Point: return "point";
    case AnchorKind::Interval: return "interval";
    case AnchorKind::Static: return "static";
    }
    return "static";
}

const char* to_string(Granularity g) {
    switch (g) {
    case Granularity::Day: return "day";
    case Granularity::Month: return "month";
    case Granularity::Year: return "year";
    }
    return "day";
}

std::optional<AnchorKind> anchor_kind_from_string(std::string_view s) {
    if (s == "point") return AnchorKind::Point;
    if (s == "interval") return AnchorKind::Interval;
    if (s == "static") return AnchorKind::Static;
    return std::nullopt;
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
    if (s == "day") return Granularity::Day;
    if (s == "month") return Granularity::Month;
    if (s == "year") return Granularity::Year;
    return std::nullopt;
}

int granularity_rank(Granularity g) {
    return static_cast<int>(g);
}

DayNumber snap_to_period(DayNumber day, Granularity g) {
    auto c = civil_from_days(day);
    switch (g) {
    case Granularity::Day: return day;
    case Granularity::Month: return days_from_civil(c.year, c.month, 1);
    case Granularity::Year: return days_from_civil(c.year, 1, 1);
    }
    return day;
}

DayNumber period_end_exclusive(DayNumber start, Granularity g) {
    auto c = civil_from_days(start);
    switch (g) {
    case Granularity::Day: return start + 1;
    case Granularity::Month:
        return c.month == 12 ? days_from_civil(c.year + 1, 1, 1)
                             : days_from_civil(c.year, c.month + 1, 1);
    case Granularity::Year: return days_from_civil(c.year + 1, 1, 1);
    }
    return start + 1;
}

namespace {

void require_aligned(DayNumber day, Granularity g) {
    if (snap_to_period(day, g) != day) {
        throw Error(ErrorKind::Validation, std::string("anchor start is not aligned to ") +
                                               to_string(g) + " granularity");
    }
}

}  // namespace

TimeAnchor TimeAnchor::point(DayNumber start, Granularity g, std::string surface) {
    require_aligned(start, g);
    TimeAnchor a;
    a.kind_ = AnchorKind::Point;
    a.start_ = start;
    a.granularity_ = g;
    a.surface_ = std::move(surface);
    return a;
}

TimeAnchor TimeAnchor::interval(DayNumber start, DayNumber end, Granularity g,
                                std::string surface) {
    require_aligned(start, g);
    if (end < start) throw Error(ErrorKind::Validation, "interval ends before it starts");
    TimeAnchor a;
    a.kind_ = AnchorKind::Interval;
    a.start_ = start;
    a.end_ = end;
    a.granularity_ = g;
    a.surface_ = std::move(surface);
    return a;
}

TimeAnchor TimeAnchor::timeless(std::string surface) {
    TimeAnchor a;
    a.surface_ = std::move(surface);
    return a;
}

TimeAnchor TimeAnchor::point_ymd(int year, unsigned month, unsigned day, Granularity g,
                                 std::string surface) {
    return point(snap_to_period(days_from_civil(year, month, day), g), g, std::move(surface));
}

bool TimeAnchor::same_time(const TimeAnchor& other) const noexcept {
    return kind_ == other.kind_ && start_ == other.start_ && end_ == other.end_ &&
           granularity_ == other.granularity_;
}

std::optional<DayNumber> index_day(const TimeAnchor& anchor) {
    if (anchor.is_static()) return std::nullopt;
    return anchor.start_day();
}

std::optional<std::int64_t> day_distance(const TimeAnchor& a, const TimeAnchor& b) {
    auto da = index_day(a);
    auto db = index_day(b);
    if (!da || !db) return std::nullopt;
    return *da > *db ? *da - *db : *db - *da;
}

namespace {

std::string format_day(DayNumber day, Granularity g) {
    auto c = civil_from_days(day);
    char buf[32];
    switch (g) {
    case Granularity::Year: std::snprintf(buf, sizeof buf, "%04d", c.year); break;
    case Granularity::Month: std::snprintf(buf, sizeof buf, "%04d-%02u", c.year, c.month); break;
    case Granularity::Day:
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
        break;
    }
    return buf;
}

std::optional<std::pair<DayNumber, Granularity>> parse_day_label(std::string_view s) {
    auto read_int = [](std::string_view part, int& out) {
        if (part.empty()) return false;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return ec == std::errc{} && p == part.data() + part.size();
    };
    int y = 0, m = 1, d = 1;
    if (s.size() == 4 && read_int(s, y)) {
        return std::pair{days_from_civil(y, 1, 1), Granularity::Year};
    }
    if (s.size() == 7 && s[4] == '-' && read_int(s.substr(0, 4), y) && read_int(s.substr(5), m) &&
        is_valid_civil(y, m, 1)) {
        return std::pair{days_from_civil(y, m, 1), Granularity::Month};
    }
    if (s.size() == 10 && s[4] == '-' && s[7] == '-' && read_int(s.substr(0, 4), y) &&
        read_int(s.substr(5, 2), m) && read_int(s.substr(8), d) && is_valid_civil(y, m, d)) {
        return std::pair{days_from_civil(y, m, d), Granularity::Day};
    }
    return std::nullopt;
}

}  // namespace

std::string format_timestamp(const TimeAnchor& anchor) {
    switch (anchor.kind()) {
    case AnchorKind::Static: return "static";
    case AnchorKind::Point: return format_day(*anchor.start_day(), *anchor.granularity());
    case AnchorKind::Interval: {
        auto end = *anchor.end_day();
        // The end may be finer than the interval's own granularity.
        auto end_g = snap_to_period(end, *anchor.granularity()) == end ? *anchor.granularity()
                                                                        : Granularity::Day;
        return format_day(*anchor.start_day(), *anchor.granularity()) + ".." +
               format_day(end, end_g);
    }
    }
    return "static";
}

std::optional<TimeAnchor> parse_timestamp_label(std::string_view label) {
    label = text::trim(label);
    if (label == "static") return TimeAnchor::timeless(std::string(label));
    if (auto sep = label.find(".."); sep != std::string_view::npos) {
        auto start = parse_day_label(label.substr(0, sep));
        auto end = parse_day_label(label.substr(sep + 2));
        if (!start || !end || end->first < start->first) return std::nullopt;
        return TimeAnchor::interval(start->first, end->first, start->second, std::string(label));
    }
    auto day = parse_day_label(label);
    if (!day) return std::nullopt;
    return TimeAnchor::point(day->first, day->second, std::string(label));
}

std::optional<std::pair<DayNumber, DayNumber>> covered_days(const TimeAnchor& anchor) {
    if (anchor.is_static()) return std::nullopt;
    auto g = *anchor.granularity();
    auto start = *anchor.start_day();
    if (anchor.kind() == AnchorKind::Point) return std::pair{start, period_end_exclusive(start, g) - 1};
    auto end = *anchor.end_day();
    auto end_g = snap_to_period(end, g) == end ? g : Granularity::Day;
    return std::pair{start, period_end_exclusive(end, end_g) - 1};
}

std::string normalize_entity(std::string_view surface) {
    return text::fold_case(text::collapse_whitespace(surface));
}

void validate(const DynamicEventUnit& deu) {
    if (deu.event_id.empty()) throw Error(ErrorKind::Validation, "DEU without event_id");
    if (text::trim(deu.sentence).empty()) {
        throw Error(ErrorKind::Validation, "DEU " + deu.event_id + " has an empty sentence");
    }
    if (deu.info_score < 1 || deu.info_score > 4) {
        throw Error(ErrorKind::Validation,
                    "DEU " + deu.event_id + " has info_score outside 1..4");
    }
    for (const auto& e : deu.entities) {
        if (e.empty() || normalize_entity(e) != e) {
            throw Error(ErrorKind::Validation, "DEU " + deu.event_id + " has unnormalized entity");
        }
    }
}

}  // namespace dygrag
