#include "dygrag/text_util.hpp"
#include "dygrag/error.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>
#include <cstdio>

namespace dygrag {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Compat: return "compat";
    case ErrorKind::Io: return "io";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Protocol: return "protocol";
    }
    return "unknown";
}

}  // namespace dygrag

namespace dygrag::text {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

constexpr std::string_view kStopwords[] = {
    "a",      "about", "above",   "after", "again",  "against", "all",    "am",     "an",
    "and",    "any",   "are",     "as",    "at",     "be",      "been",   "before", "being",
    "below",  "between", "both",  "but",   "by",     "can",     "did",    "do",     "does",
    "doing",  "down",  "during",  "each",  "few",    "for",     "from",   "further", "had",
    "has",    "have",  "having",  "he",    "her",    "here",    "hers",   "him",    "his",
    "how",    "i",     "if",      "in",    "into",   "is",      "it",     "its",    "itself",
    "just",   "me",    "more",    "most",  "my",     "no",      "nor",    "not",    "now",
    "of",     "off",   "on",      "once",  "only",   "or",      "other",  "our",    "out",
    "over",   "own",   "same",    "she",   "should", "so",      "some",   "such",   "than",
    "that",   "the",   "their",   "them",  "then",   "there",   "these",  "they",   "this",
    "those",  "through", "to",    "too",   "under",  "until",   "up",     "very",   "was",
    "we",     "were",  "what",    "when",  "where",  "which",   "while",  "who",    "whom",
    "why",    "will",  "with",    "you",   "would"};

constexpr std::string_view kMonthWords[] = {
    "january", "february", "march", "april", "may",  "june", "july", "august",
    "september", "october", "november", "december", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"};

}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string fold_case(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = lower(c);
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            pending = true;
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && equals_icase(s.substr(0, prefix.size()), prefix);
}

bool equals_icase(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(),
                      [](char x, char y) { return lower(x) == lower(y); });
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_alnum(c)) {
            cur.push_back(lower(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool is_stopword(std::string_view w) {
    return std::find(std::begin(kStopwords), std::end(kStopwords), w) != std::end(kStopwords);
}

bool is_month_word(std::string_view w) {
    return std::find(std::begin(kMonthWords), std::end(kMonthWords), w) != std::end(kMonthWords);
}

std::vector<std::string> content_words(std::string_view s) {
    std::vector<std::string> out;
    for (auto& w : words(s)) {
        if (is_stopword(w) || is_month_word(w)) continue;
        if (std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
        out.push_back(std::move(w));
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string_view extract_json_object(std::string_view s) {
    auto open = s.find('{');
    auto close = s.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return trim(s);
    }
    return s.substr(open, close - open + 1);
}

}  // namespace dygrag::text

#include "dygrag/lexical.hpp"

#include <set>

namespace dygrag {

namespace {

// Crude suffix stripping so "played" meets "play" and "acquired" meets "acquire".
std::string stem(std::string w) {
    for (std::string_view suffix : {"ing", "ed", "es", "s"}) {
        if (w.size() > suffix.size() + 3 && w.ends_with(suffix)) {
            w = w.substr(0, w.size() - suffix.size());
            break;
        }
    }
    if (w.size() > 4 && w.back() == 'e') w.pop_back();
    return w;
}

std::set<std::string> stemmed_content(std::string_view s) {
    std::set<std::string> out;
    for (auto& w : text::content_words(s)) out.insert(stem(std::move(w)));
    return out;
}

}  // namespace

double lexical_overlap(std::string_view question, std::string_view passage) {
    auto qs = stemmed_content(question);
    if (qs.empty()) return 0.0;
    auto ps = stemmed_content(passage);
    std::size_t hit = 0;
    for (const auto& w : qs) hit += ps.count(w);
    return static_cast<double>(hit) / static_cast<double>(qs.size());
}

}  // namespace dygrag
