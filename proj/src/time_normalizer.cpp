#include "dygrag/ingestion.hpp"
#include "dygrag/temporal_text.hpp"
#include "dygrag/text_util.hpp"

#include <regex>

namespace dygrag {

void TimeStack::push(std::size_t position, TimeAnchor anchor) {
    entries_.push_back({position, std::move(anchor)});
}

const TimeAnchor* TimeStack::top() const {
    return entries_.empty() ? nullptr : &entries_.back().anchor;
}

namespace {

constexpr auto kFlags = std::regex::icase | std::regex::ECMAScript | std::regex::optimize;

DayNumber add_months(DayNumber day, int months) {
    auto c = civil_from_days(day);
    int total = c.year * 12 + static_cast<int>(c.month) - 1 + months;
    int y = total >= 0 ? total / 12 : (total - 11) / 12;
    auto m = static_cast<unsigned>(total - y * 12 + 1);
    unsigned d = c.day;
    while (d > 28 && !is_valid_civil(y, m, d)) --d;
    return days_from_civil(y, m, d);
}

struct Reference {
    DayNumber start;
    Granularity granularity;
};

std::optional<TimeAnchor> shifted(const Reference& ref, int months, Granularity g,
                                  std::string_view surface) {
    auto day = snap_to_period(add_months(ref.start, months), g);
    return TimeAnchor::point(day, g, std::string(surface));
}

// Relative phrases resolved against the most recent absolute anchor:
//   "(earlier|later) that year", "the same year"   -> year of the reference
//   "that month", "later that month"               -> month of the reference
//   "the following/previous year|month"            -> reference +/- one period
//   "N years/months later|earlier"                 -> arithmetic, reference granularity kept
std::optional<TimeAnchor> resolve_relative(std::string_view expr, const TimeStack& stack) {
    static const std::regex same_year(
        "^(?:(?:earlier|later) )?(?:in )?(?:that|the same) year$", kFlags);
    static const std::regex same_month(
        "^(?:(?:earlier|later) )?(?:in )?(?:that|the same) month$", kFlags);
    static const std::regex step("^(?:in )?the (following|next|previous|preceding|prior) (year|month)$",
                                 kFlags);
    static const std::regex offset(
        "^(\\S+) (years?|months?) (later|after|afterwards|afterward|earlier|before|prior)$", kFlags);

    const TimeAnchor* top = stack.top();
    if (!top) return std::nullopt;
    Reference ref{*top->start_day(), *top->granularity()};
    std::string s = text::fold_case(text::collapse_whitespace(expr));
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();

    std::smatch m;
    if (std::regex_match(s, m, same_year)) return shifted(ref, 0, Granularity::Year, expr);
    if (std::regex_match(s, m, same_month)) {
        auto g = ref.granularity == Granularity::Year ? Granularity::Year : Granularity::Month;
        return shifted(ref, 0, g, expr);
    }
    if (std::regex_match(s, m, step)) {
        const bool forward = m[1] == "following" || m[1] == "next";
        if (m[2] == "year") return shifted(ref, forward ? 12 : -12, Granularity::Year, expr);
        if (ref.granularity == Granularity::Year) return std::nullopt;
        return shifted(ref, forward ? 1 : -1, Granularity::Month, expr);
    }
    if (std::regex_match(s, m, offset)) {
        auto count = parse_count_word(m[1].str());
        if (!count) return std::nullopt;
        const bool forward = m[3] == "later" || m[3] == "after" || m[3] == "afterwards" ||
                             m[3] == "afterward";
        const bool years = m[2].str().rfind("year", 0) == 0;
        if (!years && ref.granularity == Granularity::Year) return std::nullopt;
        int months = (years ? 12 : 1) * *count * (forward ? 1 : -1);
        return shifted(ref, months, ref.granularity, expr);
    }
    return std::nullopt;
}

struct Resolved {
    TimeAnchor anchor;
    bool absolute;
};

std::optional<Resolved> resolve(std::string_view expr, const TimeStack& stack) {
    if (auto abs = parse_absolute_time(expr)) return Resolved{std::move(*abs), true};
    if (auto rel = resolve_relative(expr, stack)) return Resolved{std::move(*rel), false};
    return std::nullopt;
}

std::optional<TimeAnchor> first_absolute_in(std::string_view context) {
    if (context.empty()) return std::nullopt;
    for (const auto& mention : find_time_expressions(context)) {
        if (!mention.absolute()) continue;
        if (auto a = parse_absolute_time(mention.text)) return a;
    }
    return std::nullopt;
}

}  // namespace

TimeAnchor normalize_time(std::string_view expr, TimeStack& stack,
                          std::string_view fallback_context, std::size_t position) {
    if (auto r = resolve(expr, stack)) {
        if (r->absolute) stack.push(position, r->anchor);
        return r->anchor;
    }
    if (auto a = first_absolute_in(fallback_context)) {
        stack.push(position, *a);
        return *a;
    }
    return TimeAnchor::timeless(std::string(text::trim(expr)));
}

TimeAnchor select_anchor(const std::vector<std::string>& expressions, TimeStack& stack,
                         std::string_view fallback_context, std::size_t position) {
    std::optional<Resolved> best;
    for (const auto& e : expressions) {
        auto r = resolve(e, stack);
        if (!r) continue;
        if (!best || granularity_rank(*r->anchor.granularity()) <
                         granularity_rank(*best->anchor.granularity())) {
            best = std::move(r);
        }
    }
    if (best) {
        if (best->absolute) stack.push(position, best->anchor);
        return best->anchor;
    }
    std::string surface = expressions.empty() ? std::string() : expressions.front();
    return normalize_time(surface, stack, fallback_context, position);
}

}  // namespace dygrag
