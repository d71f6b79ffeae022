#include "dygrag/core.hpp"
#include "dygrag/error.hpp"

#include <gtest/gtest.h>

#include <random>

namespace dygrag {
namespace {

// Counts days one at a time from the epoch; slow but independent of the library.
DayNumber brute_force_days(int year, unsigned month, unsigned day) {
    auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
    const int month_len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    DayNumber n = 0;
    if (year >= 1970) {
        for (int y = 1970; y < year; ++y) n += leap(y) ? 366 : 365;
    } else {
        for (int y = year; y < 1970; ++y) n -= leap(y) ? 366 : 365;
    }
    for (unsigned m = 1; m < month; ++m) n += month_len[m - 1] + ((m == 2 && leap(year)) ? 1 : 0);
    return n + static_cast<DayNumber>(day) - 1;
}

TEST(Calendar, MatchesBruteForceCounter) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> year(1800, 2200);
    std::uniform_int_distribution<unsigned> month(1, 12), day(1, 28);
    for (int i = 0; i < 2000; ++i) {
        int y = year(rng);
        unsigned m = month(rng), d = day(rng);
        ASSERT_EQ(days_from_civil(y, m, d), brute_force_days(y, m, d)) << y << "-" << m << "-" << d;
        auto back = civil_from_days(days_from_civil(y, m, d));
        EXPECT_EQ(back, (CivilDate{y, m, d}));
    }
}

TEST(Calendar, RejectsImpossibleDates) {
    EXPECT_THROW(days_from_civil(2001, 2, 29), Error);
    EXPECT_THROW(days_from_civil(2000, 13, 1), Error);
    EXPECT_EQ(days_from_civil(2000, 2, 29), brute_force_days(2000, 2, 29));
}

TEST(IndexDay, IntervalUsesEarliestPoint) {
    auto a = TimeAnchor::interval(days_from_civil(2010, 1, 1), days_from_civil(2015, 1, 1), Granularity::Year);
    EXPECT_EQ(index_day(a), 14610);
    EXPECT_EQ(brute_force_days(2010, 1, 1), 14610);
}

TEST(IndexDay, StaticAndEpoch) {
    EXPECT_FALSE(index_day(TimeAnchor::timeless()).has_value());
    EXPECT_EQ(index_day(TimeAnchor::point(0, Granularity::Day)), 0);
}

TEST(IndexDay, MonotoneOverRandomDates) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<DayNumber> day(-50000, 50000);
    for (int i = 0; i < 1000; ++i) {
        auto x = day(rng), y = day(rng);
        if (x == y) continue;
        auto a = TimeAnchor::point(std::min(x, y), Granularity::Day);
        auto b = TimeAnchor::point(std::max(x, y), Granularity::Day);
        EXPECT_LT(*index_day(a), *index_day(b));
    }
}

TEST(DayDistance, Examples) {
    auto p = TimeAnchor::point_ymd(2008, 3, 1);
    EXPECT_EQ(day_distance(p, p), 0);
    auto a = TimeAnchor::point_ymd(2010, 1, 1);
    auto b = TimeAnchor::interval(days_from_civil(2012, 1, 1), days_from_civil(2013, 1, 1), Granularity::Day);
    EXPECT_EQ(day_distance(a, b), 730);
    EXPECT_EQ(day_distance(b, a), 730);
    EXPECT_FALSE(day_distance(TimeAnchor::timeless(), a).has_value());
}

TEST(DayDistance, SymmetricOverRandomAnchors) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<DayNumber> day(-20000, 40000);
    for (int i = 0; i < 500; ++i) {
        auto a = TimeAnchor::point(day(rng), Granularity::Day);
        auto b = TimeAnchor::point(day(rng), Granularity::Day);
        EXPECT_EQ(day_distance(a, b), day_distance(b, a));
        EXPECT_EQ(day_distance(a, a), 0);
    }
}

TEST(TimeAnchor, EnforcesAlignmentAndOrder) {
    EXPECT_THROW(TimeAnchor::point(days_from_civil(2008, 3, 5), Granularity::Month), Error);
    EXPECT_THROW(TimeAnchor::point(days_from_civil(2008, 3, 1), Granularity::Year), Error);
    EXPECT_THROW(TimeAnchor::interval(100, 50, Granularity::Day), Error);
    auto m = TimeAnchor::point_ymd(2008, 3, 17, Granularity::Month);
    EXPECT_EQ(m.start_day(), days_from_civil(2008, 3, 1));
    auto s = TimeAnchor::timeless("recently");
    EXPECT_TRUE(s.is_static());
    EXPECT_FALSE(s.start_day() || s.end_day() || s.granularity());
}

TEST(TimeAnchor, SameTimeIgnoresSurface) {
    auto a = TimeAnchor::point_ymd(2009, 1, 20, Granularity::Day, "January 20, 2009");
    auto b = TimeAnchor::point_ymd(2009, 1, 20, Granularity::Day, "20 January 2009");
    EXPECT_TRUE(a.same_time(b));
    EXPECT_NE(a, b);
}

TEST(Timestamp, FormatsAtStoredGranularity) {
    EXPECT_EQ(format_timestamp(TimeAnchor::point_ymd(2008, 1, 1, Granularity::Year)), "2008");
    EXPECT_EQ(format_timestamp(TimeAnchor::point_ymd(2008, 3, 1, Granularity::Month)), "2008-03");
    EXPECT_EQ(format_timestamp(TimeAnchor::point_ymd(2008, 3, 14)), "2008-03-14");
    EXPECT_EQ(format_timestamp(TimeAnchor::timeless()), "static");
    auto iv = TimeAnchor::interval(days_from_civil(2010, 1, 1), days_from_civil(2015, 1, 1), Granularity::Year);
    EXPECT_EQ(format_timestamp(iv), "2010..2015");
}

TEST(Timestamp, LabelsRoundTrip) {
    for (const auto& a : {TimeAnchor::point_ymd(1999, 1, 1, Granularity::Year),
                          TimeAnchor::point_ymd(1999, 7, 1, Granularity::Month),
                          TimeAnchor::point_ymd(1969, 12, 31),
                          TimeAnchor::interval(days_from_civil(2012, 5, 1), days_from_civil(2014, 2, 1),
                                               Granularity::Month)}) {
        auto back = parse_timestamp_label(format_timestamp(a));
        ASSERT_TRUE(back.has_value());
        EXPECT_TRUE(back->same_time(a)) << format_timestamp(a);
    }
    EXPECT_FALSE(parse_timestamp_label("unspecified").has_value());
}

TEST(CoveredDays, SpansWholePeriods) {
    auto y = covered_days(TimeAnchor::point_ymd(2013, 1, 1, Granularity::Year));
    EXPECT_EQ(y->first, days_from_civil(2013, 1, 1));
    EXPECT_EQ(y->second, days_from_civil(2013, 12, 31));
    auto iv = covered_days(TimeAnchor::interval(days_from_civil(2012, 1, 1), days_from_civil(2014, 1, 1),
                                                Granularity::Year));
    EXPECT_EQ(iv->second, days_from_civil(2014, 12, 31));
}

TEST(Entities, NormalizedForMatching) {
    EXPECT_EQ(normalize_entity("  S.S.   Lazio "), "s.s. lazio");
}

TEST(Deu, ValidateEnforcesInvariants) {
    DynamicEventUnit d;
    d.event_id = "x";
    d.sentence = "Something happened.";
    d.info_score = 1;
    d.entities = {"obama"};
    EXPECT_NO_THROW(validate(d));
    d.info_score = 0;
    EXPECT_THROW(validate(d), Error);
    d.info_score = 1;
    d.sentence = " ";
    EXPECT_THROW(validate(d), Error);
    d.sentence = "ok.";
    d.entities = {"Obama"};
    EXPECT_THROW(validate(d), Error);
}

}  // namespace
}  // namespace dygrag
