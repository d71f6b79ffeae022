#include "dygrag/temporal_text.hpp"

#include "dygrag/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

namespace dygrag {

namespace {

const std::string kMonth =
    "(?:january|february|march|april|may|june|july|august|september|october|november|december|"
    "jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)\\.?";
const std::string kYear = "(?:1[0-9]{3}|20[0-9]{2})";
const std::string kDayNum = "(?:[0-9]{1,2})(?:st|nd|rd|th)?";
const std::string kDash = "(?:-|\xE2\x80\x93|\xE2\x80\x94)";
const std::string kCount =
    "(?:a|an|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|[0-9]{1,3})";

const std::string kDateMdy = kMonth + " " + kDayNum + ",? " + kYear;
const std::string kDateDmy = kDayNum + " " + kMonth + ",? " + kYear;
const std::string kDateIso = "[0-9]{4}-[0-9]{2}-[0-9]{2}";
const std::string kMonthYear = kMonth + "(?: of)? " + kYear;
const std::string kAnyDate = "(?:" + kDateIso + "|" + kDateMdy + "|" + kDateDmy + "|" +
                             kMonthYear + "|" + kYear + ")";

const std::string kIntervalWords = "(?:from|between) " + kAnyDate +
                                   " (?:to|and|until|till|through) " + kAnyDate;
const std::string kIntervalDash = kYear + " ?(?:" + kDash + "|to) ?" + kYear;

const std::string kRelative =
    "(?:(?:earlier|later) (?:that|the same|in the same) (?:year|month)"
    "|(?:that|the same) (?:year|month)"
    "|the (?:following|next|previous|preceding|prior) (?:year|month)"
    "|" + kCount + " (?:years?|months?) (?:later|earlier|after|before|afterwards|afterward|prior)"
    "|recently|currently|nowadays|at the time|formerly|in recent years)";

constexpr auto kFlags = std::regex::icase | std::regex::ECMAScript | std::regex::optimize;

struct Pattern {
    MentionType type;
    std::regex re;
};

const std::vector<Pattern>& finder_patterns() {
    static const std::vector<Pattern> patterns = [] {
        auto word = [](const std::string& p) { return "\\b(?:" + p + ")\\b"; };
        std::vector<Pattern> v;
        v.push_back({MentionType::Interval, std::regex(word(kIntervalWords), kFlags)});
        v.push_back({MentionType::Interval, std::regex(word(kIntervalDash), kFlags)});
        v.push_back({MentionType::Date, std::regex(word(kDateIso), kFlags)});
        v.push_back({MentionType::Date, std::regex(word(kDateMdy), kFlags)});
        v.push_back({MentionType::Date, std::regex(word(kDateDmy), kFlags)});
        v.push_back({MentionType::MonthYear, std::regex(word(kMonthYear), kFlags)});
        v.push_back({MentionType::Relative, std::regex(word(kRelative), kFlags)});
        v.push_back({MentionType::Year, std::regex(word(kYear), kFlags)});
        return v;
    }();
    return patterns;
}

bool overlaps(const std::vector<TimeMention>& taken, std::size_t b, std::size_t e) {
    return std::any_of(taken.begin(), taken.end(),
                       [&](const TimeMention& m) { return b < m.end && m.begin < e; });
}

int to_int(const std::string& s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

struct ParsedDate {
    DayNumber day;
    Granularity granularity;
};

std::optional<ParsedDate> make_date(int y, unsigned m, unsigned d, Granularity g) {
    if (!is_valid_civil(y, m, d)) return std::nullopt;
    return ParsedDate{days_from_civil(y, m, d), g};
}

std::optional<ParsedDate> parse_single_date(std::string_view raw) {
    static const std::regex iso("^([0-9]{4})-([0-9]{2})-([0-9]{2})$", kFlags);
    static const std::regex mdy("^(" + kMonth + ") ([0-9]{1,2})(?:st|nd|rd|th)?,? (" + kYear + ")$",
                                kFlags);
    static const std::regex dmy("^([0-9]{1,2})(?:st|nd|rd|th)? (" + kMonth + "),? (" + kYear + ")$",
                                kFlags);
    static const std::regex my("^(" + kMonth + ")(?: of)? (" + kYear + ")$", kFlags);
    static const std::regex y("^(?:(?:in|by|since|during|of|around|circa|c\\.) )?(" + kYear + ")$",
                              kFlags);

    std::string s = text::collapse_whitespace(raw);
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
    std::smatch m;
    if (std::regex_match(s, m, iso)) {
        return make_date(to_int(m[1]), to_int(m[2]), to_int(m[3]), Granularity::Day);
    }
    if (std::regex_match(s, m, mdy)) {
        return make_date(to_int(m[3]), *month_from_name(m[1].str()), to_int(m[2]),
                         Granularity::Day);
    }
    if (std::regex_match(s, m, dmy)) {
        return make_date(to_int(m[3]), *month_from_name(m[2].str()), to_int(m[1]),
                         Granularity::Day);
    }
    if (std::regex_match(s, m, my)) {
        return make_date(to_int(m[2]), *month_from_name(m[1].str()), 1, Granularity::Month);
    }
    if (std::regex_match(s, m, y)) return make_date(to_int(m[1]), 1, 1, Granularity::Year);
    return std::nullopt;
}

}  // namespace

std::optional<unsigned> month_from_name(std::string_view name) {
    static constexpr std::string_view kFull[] = {"january", "february", "march",     "april",
                                                 "may",     "june",     "july",      "august",
                                                 "september", "october", "november", "december"};
    std::string n = text::fold_case(text::trim(name));
    if (!n.empty() && n.back() == '.') n.pop_back();
    if (n == "sept") return 9u;
    for (unsigned i = 0; i < 12; ++i) {
        if (n == kFull[i]) return i + 1;
        if (n.size() == 3 && kFull[i].substr(0, 3) == n) return i + 1;
    }
    return std::nullopt;
}

std::optional<int> parse_count_word(std::string_view word) {
    static constexpr std::string_view kWords[] = {"one", "two",   "three", "four",
                                                  "five", "six",  "seven", "eight",
                                                  "nine", "ten",  "eleven", "twelve"};
    std::string w = text::fold_case(text::trim(word));
    if (w == "a" || w == "an") return 1;
    for (int i = 0; i < 12; ++i) {
        if (w == kWords[i]) return i + 1;
    }
    int v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec == std::errc{} && p == w.data() + w.size() && !w.empty()) return v;
    return std::nullopt;
}

std::vector<TimeMention> find_time_expressions(std::string_view text) {
    std::vector<TimeMention> found;
    const std::string s(text);
    for (const auto& p : finder_patterns()) {
        for (auto it = std::sregex_iterator(s.begin(), s.end(), p.re); it != std::sregex_iterator();
             ++it) {
            auto b = static_cast<std::size_t>(it->position(0));
            auto e = b + static_cast<std::size_t>(it->length(0));
            if (overlaps(found, b, e)) continue;
            // A year glued to a dash or digit is part of something else (a range, a code).
            if (p.type == MentionType::Year) {
                if ((b > 0 && (s[b - 1] == '-' || s[b - 1] == '/')) ||
                    (e < s.size() && (s[e] == '-' || s[e] == '/'))) {
                    continue;
                }
            }
            found.push_back({b, e, p.type, it->str(0)});
        }
    }
    std::sort(found.begin(), found.end(),
              [](const TimeMention& a, const TimeMention& b) { return a.begin < b.begin; });
    return found;
}

std::optional<TimeAnchor> parse_absolute_time(std::string_view expr) {
    static const std::regex words_interval("^(?:from|between) (.+?) (?:to|and|until|till|through) (.+)$",
                                           kFlags);
    static const std::regex dash_interval("^(?:(?:in|from|during) )?(" + kYear + ") ?(?:" + kDash +
                                              "|to) ?(" + kYear + ")$",
                                          kFlags);
    std::string s = text::collapse_whitespace(expr);
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
    if (s.empty()) return std::nullopt;

    std::smatch m;
    std::optional<ParsedDate> start, end;
    if (std::regex_match(s, m, words_interval) || std::regex_match(s, m, dash_interval)) {
        start = parse_single_date(m[1].str());
        end = parse_single_date(m[2].str());
        if (!start || !end || end->day < start->day) return std::nullopt;
        return TimeAnchor::interval(start->day, end->day, start->granularity, std::string(expr));
    }
    auto single = parse_single_date(s);
    if (!single) return std::nullopt;
    return TimeAnchor::point(single->day, single->granularity, std::string(expr));
}

}  // namespace dygrag
