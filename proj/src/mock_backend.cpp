#include "dygrag/mock_backend.hpp"

#include "dygrag/core.hpp"
#include "dygrag/error.hpp"
#include "dygrag/lexical.hpp"
#include "dygrag/temporal_text.hpp"
#include "dygrag/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

namespace dygrag {

using nlohmann::json;

namespace mock {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool in_list(std::string_view w, std::initializer_list<std::string_view> list) {
    return std::find(list.begin(), list.end(), w) != list.end();
}

bool is_abbreviation(std::string_view word) {
    // `word` includes its final '.'
    auto core = word.substr(0, word.size() - 1);
    while (!core.empty() && (core.front() == '(' || core.front() == '"')) core.remove_prefix(1);
    if (core.empty()) return false;
    if (core.find('.') != std::string_view::npos) return true;
    if (core.size() == 1 && is_upper(core[0])) return true;
    return in_list(core, {"Mr", "Mrs", "Ms", "Dr", "St", "Jr", "Sr", "Inc", "Ltd", "Co", "Corp",
                          "vs", "etc", "Gen", "Gov", "Sen", "Rep", "Prof", "No", "Jan", "Feb",
                          "Mar", "Apr", "Jun", "Jul", "Aug", "Sep", "Sept", "Oct", "Nov", "Dec",
                          "Mt", "Ft"});
}

bool excluded_capital(std::string_view core) {
    static const std::set<std::string, std::less<>> words = {
        "the", "a", "an", "in", "on", "at", "he", "she", "it", "they", "his", "her", "their",
        "its", "this", "that", "these", "those", "after", "before", "during", "from", "by",
        "later", "earlier", "when", "while", "since", "until", "as", "also", "however",
        "meanwhile", "then", "there", "we", "i", "our", "what", "which", "who", "whom", "where",
        "why", "how", "did", "does", "do", "is", "was", "were", "are", "and", "but", "or", "for",
        "with", "to", "of", "following", "despite", "under", "over", "between", "among", "both",
        "each", "some", "many", "most", "one", "two", "three", "several", "although", "though",
        "because", "if", "once", "today", "yesterday", "tomorrow", "monday", "tuesday",
        "wednesday", "thursday", "friday", "saturday", "sunday", "happened", "first", "last",
        "in", "around", "about", "answer", "event", "no", "not", "all", "any", "other"};
    auto lower = text::fold_case(core);
    return words.contains(lower) || text::is_month_word(lower);
}

struct WordToken {
    std::size_t begin;   // offset of `core` in the sentence
    std::string core;    // token without surrounding punctuation or possessive
    bool breaks_after;   // punctuation ends a name run here
};

std::vector<WordToken> word_tokens(std::string_view sentence) {
    std::vector<WordToken> out;
    for (auto raw : text::split_whitespace(sentence)) {
        std::size_t begin = static_cast<std::size_t>(raw.data() - sentence.data());
        std::string_view core = raw;
        while (!core.empty() && std::string_view("\"'([{").find(core.front()) != std::string_view::npos) {
            core.remove_prefix(1);
            ++begin;
        }
        bool breaks = false;
        while (!core.empty() && std::string_view(",;:!?\"')]}").find(core.back()) != std::string_view::npos) {
            core.remove_suffix(1);
            breaks = true;
        }
        if (!core.empty() && core.back() == '.') {
            if (!is_abbreviation(core)) {
                core.remove_suffix(1);
                breaks = true;
            }
        }
        if (core.size() > 2 && (core.ends_with("'s") || core.ends_with("\xE2\x80\x99s"))) {
            core = core.substr(0, core.rfind(core.ends_with("'s") ? "'s" : "\xE2\x80\x99s"));
            breaks = true;
        }
        out.push_back({begin, std::string(core), breaks});
    }
    return out;
}

bool capitalized_name(const std::string& core) {
    return !core.empty() && is_upper(core[0]) && !excluded_capital(core);
}

bool connector(const std::string& core) {
    return in_list(core, {"of", "de", "du", "da", "del", "van", "von", "der", "la", "le"});
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        auto line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        auto line = text.substr(line_start, line_end - line_start);
        std::size_t start = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (c != '.' && c != '!' && c != '?') continue;
            if (i + 1 < line.size() && line[i + 1] != ' ' && line[i + 1] != '"') continue;
            if (c == '.') {
                auto word_start = line.rfind(' ', i);
                word_start = word_start == std::string_view::npos ? 0 : word_start + 1;
                if (is_abbreviation(line.substr(word_start, i - word_start + 1))) continue;
            }
            std::size_t j = i + 1;
            while (j < line.size() && (line[j] == ' ' || line[j] == '"')) ++j;
            if (j < line.size() && !is_upper(line[j]) && !is_digit(line[j])) continue;
            auto s = text::trim(line.substr(start, i + 1 - start));
            if (!s.empty()) out.emplace_back(s);
            start = i + 1;
        }
        auto rest = text::trim(line.substr(std::min(start, line.size())));
        if (!rest.empty()) out.emplace_back(rest);
        line_start = line_end + 1;
    }
    return out;
}

std::vector<std::string> find_entities(std::string_view sentence) {
    auto tokens = word_tokens(sentence);
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::vector<std::string> run;
    auto flush = [&] {
        while (!run.empty() && connector(run.back())) run.pop_back();
        if (!run.empty()) {
            std::string name = run.front();
            for (std::size_t i = 1; i < run.size(); ++i) name += " " + run[i];
            if (seen.insert(normalize_entity(name)).second) out.push_back(name);
        }
        run.clear();
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        const bool numeric = !t.core.empty() && std::all_of(t.core.begin(), t.core.end(), [](char c) {
            return is_digit(c) || c == ',' || c == '.';
        });
        if (!numeric && capitalized_name(t.core)) {
            run.push_back(t.core);
        } else if (connector(t.core) && !run.empty() && i + 1 < tokens.size() &&
                   capitalized_name(tokens[i + 1].core) && !tokens[i - 1].breaks_after) {
            run.push_back(t.core);
        } else {
            flush();
        }
        if (t.breaks_after) flush();
    }
    flush();
    return out;
}

bool has_state_change(std::string_view sentence) {
    static const std::set<std::string, std::less<>> verbs = {
        "became", "become", "becomes", "resigned", "resigns", "launched", "launches", "joined",
        "joins", "left", "founded", "elected", "appointed", "won", "wins", "lost", "signed",
        "married", "died", "born", "moved", "transferred", "released", "acquired", "announced",
        "retired", "started", "ended", "began", "established", "created", "introduced", "named",
        "promoted", "replaced", "succeeded", "defeated", "scored", "published", "hired", "sold",
        "bought", "opened", "closed", "merged", "graduated", "received", "awarded", "played",
        "served", "led", "managed", "coached", "elected", "returned", "departed", "inaugurated",
        "built", "completed", "discovered", "invented", "formed", "dissolved", "captured",
        "invaded", "signed", "expanded", "renamed", "relocated", "headed", "chaired", "won"};
    for (const auto& w : text::words(sentence)) {
        if (verbs.contains(w)) return true;
    }
    auto lower = text::fold_case(sentence);
    return lower.find("took office") != std::string::npos ||
           lower.find("stepped down") != std::string::npos;
}

bool has_result_or_quantity(std::string_view sentence) {
    std::string masked(sentence);
    for (const auto& m : find_time_expressions(sentence)) {
        std::fill(masked.begin() + static_cast<std::ptrdiff_t>(m.begin),
                  masked.begin() + static_cast<std::ptrdiff_t>(m.end), ' ');
    }
    if (std::any_of(masked.begin(), masked.end(), [](char c) { return is_digit(c); })) return true;
    if (masked.find('%') != std::string::npos || masked.find('$') != std::string::npos ||
        masked.find("\xE2\x82\xAC") != std::string::npos ||
        masked.find("\xC2\xA3") != std::string::npos) {
        return true;
    }
    for (const auto& w : text::words(masked)) {
        if (in_list(w, {"million", "billion", "thousand", "hundred", "percent", "dozen"})) return true;
    }
    return false;
}

json extract_events(std::string_view passage, std::string_view title) {
    auto body = passage;
    auto first_nl = body.find('\n');
    if (!title.empty() && text::trim(body.substr(0, first_nl)) == text::trim(title)) {
        body = first_nl == std::string_view::npos ? std::string_view() : body.substr(first_nl + 1);
    }
    json events = json::array();
    for (const auto& s : split_sentences(body)) {
        auto mentions = find_time_expressions(s);
        std::vector<std::string> exprs;
        bool month_precision = false;
        for (const auto& m : mentions) {
            exprs.push_back(m.text);
            if (m.type == MentionType::Date || m.type == MentionType::MonthYear) {
                month_precision = true;
            } else if (m.type == MentionType::Interval) {
                auto a = parse_absolute_time(m.text);
                if (a && a->granularity() != Granularity::Year) month_precision = true;
            }
        }
        auto entities = find_entities(s);
        events.push_back({{"sentence", s},
                          {"temporal_expressions", exprs},
                          {"entities", entities},
                          {"has_entity", !entities.empty()},
                          {"has_state_change", has_state_change(s)},
                          {"has_result_or_quantity", has_result_or_quantity(s)},
                          {"has_month_precision_anchor", month_precision}});
    }
    return {{"events", std::move(events)}};
}

json resolve_coreference(const json& request) {
    std::optional<std::string> previous_subject;
    json rows = json::array();
    for (const auto& row : request.at("sentences")) {
        std::string sentence = row.at("sentence").get<std::string>();
        auto entities = row.value("entities", std::vector<std::string>{});

        auto first_entity_before = [&](std::size_t limit) -> std::optional<std::string> {
            std::optional<std::string> best;
            std::size_t best_pos = limit;
            for (const auto& e : entities) {
                auto p = sentence.find(e);
                if (p != std::string::npos && p < best_pos) {
                    best_pos = p;
                    best = e;
                }
            }
            return best;
        };

        std::string out;
        std::size_t copied = 0;
        bool changed = false;
        for (const auto& t : word_tokens(sentence)) {
            auto lower = text::fold_case(t.core);
            const bool subject = in_list(lower, {"he", "she", "they"});
            const bool possessive =
                in_list(lower, {"his", "their", "its"}) || (t.core == "Her" && t.begin == 0);
            if (!subject && !possessive) continue;
            auto referent = first_entity_before(t.begin);
            if (!referent) referent = previous_subject;
            if (!referent) continue;
            out += sentence.substr(copied, t.begin - copied);
            out += possessive ? *referent + "'s" : *referent;
            copied = t.begin + t.core.size();
            changed = true;
            if (std::none_of(entities.begin(), entities.end(),
                             [&](const std::string& e) { return normalize_entity(e) == normalize_entity(*referent); })) {
                entities.push_back(*referent);
            }
        }
        if (changed) {
            out += sentence.substr(copied);
            sentence = std::move(out);
        }
        if (auto subject = first_entity_before(sentence.size() + 1)) previous_subject = subject;
        rows.push_back({{"sentence", sentence}, {"entities", entities}});
    }
    return {{"sentences", std::move(rows)}};
}

std::string classify_question(std::string_view question, bool has_time_constraint) {
    auto lower = text::fold_case(question);
    auto ws = text::words(question);
    auto has_word = [&](std::initializer_list<std::string_view> list) {
        return std::any_of(ws.begin(), ws.end(), [&](const std::string& w) { return in_list(w, list); });
    };
    if (lower.find("how many") != std::string::npos || lower.find("how often") != std::string::npos ||
        lower.find("number of") != std::string::npos || has_word({"count", "list", "total"})) {
        return "aggregate";
    }
    if (has_word({"first", "last", "earliest", "latest", "before", "after", "when", "began",
                  "start", "started", "ended", "end", "initially", "finally"})) {
        return "boundary";
    }
    if (has_time_constraint &&
        has_word({"play", "played", "playing", "work", "worked", "working", "serve", "served",
                  "serving", "hold", "held", "member", "coach", "coached", "president", "lead",
                  "led", "manage", "managed", "head", "headed", "chair", "own", "owned", "team",
                  "club", "employer", "position", "office", "live", "lived", "attend",
                  "attended", "edit", "edited", "editor", "ride", "rode", "riding", "was", "were",
                  "is"})) {
        return "continuity";
    }
    return "other";
}

json parse_query(std::string_view question) {
    auto mentions = find_time_expressions(question);
    const TimeMention* chosen = nullptr;
    for (const auto& m : mentions) {
        if (m.absolute()) {
            chosen = &m;
            break;
        }
    }
    if (!chosen && !mentions.empty()) chosen = &mentions.front();
    json out;
    out["temporal_expression"] = chosen ? json(chosen->text) : json(nullptr);
    out["question_class"] = classify_question(question, chosen && chosen->absolute());
    return out;
}

namespace {

struct PromptEvent {
    int index;
    std::string label;
    std::string sentence;
    std::optional<std::pair<DayNumber, DayNumber>> span;  // nothing for static
    double overlap = 0.0;
};

}  // namespace

std::string answer_time_cot(std::string_view user_message) {
    static const std::regex event_line("^Event # ([0-9]+) \\[([^\\]]+)\\]: (.*)$");
    std::vector<PromptEvent> events;
    std::string question, qclass = "other", scope_label = "unspecified";
    std::istringstream in{std::string(user_message)};
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (std::regex_match(line, m, event_line)) {
            PromptEvent e{std::stoi(m[1]), m[2], m[3], std::nullopt};
            if (auto a = parse_timestamp_label(e.label)) e.span = covered_days(*a);
            events.push_back(std::move(e));
        } else if (line.rfind("Question: ", 0) == 0) {
            question = line.substr(10);
        } else if (line.rfind("Question class: ", 0) == 0) {
            qclass = line.substr(16);
        } else if (line.rfind("Time scope: ", 0) == 0) {
            scope_label = line.substr(12);
        }
    }
    if (events.empty()) {
        return "No timeline events are available for this question.\nANSWER: insufficient evidence";
    }

    std::optional<std::pair<DayNumber, DayNumber>> scope;
    if (auto a = parse_timestamp_label(scope_label)) scope = covered_days(*a);

    double best = 0.0;
    for (auto& e : events) {
        e.overlap = lexical_overlap(question, e.sentence);
        best = std::max(best, e.overlap);
    }
    std::vector<const PromptEvent*> relevant;
    for (const auto& e : events) {
        if (best == 0.0 || e.overlap >= best / 2.0) relevant.push_back(&e);
    }
    auto in_scope = [&](const PromptEvent& e) {
        if (!scope || !e.span) return true;
        return e.span->first <= scope->second && scope->first <= e.span->second;
    };
    // Highest overlap wins; ties go to the earlier timeline entry.
    auto best_of = [](const std::vector<const PromptEvent*>& v) -> const PromptEvent* {
        const PromptEvent* pick = nullptr;
        for (const auto* e : v) {
            if (!pick || e->overlap > pick->overlap) pick = e;
        }
        return pick;
    };

    const PromptEvent* pick = nullptr;
    std::string answer;
    if (qclass == "continuity" && scope) {
        // A state can be described with few of the question's words, so any overlap counts.
        for (const auto& ev : events) {
            const auto* e = &ev;
            if (e->overlap == 0.0) continue;
            if (!e->span || e->span->first > scope->second) continue;
            if (!pick || e->span->first > pick->span->first ||
                (e->span->first == pick->span->first && e->overlap > pick->overlap)) {
                pick = e;
            }
        }
    } else if (qclass == "boundary") {
        auto lower = text::fold_case(question);
        const bool latest = lower.find("last") != std::string::npos ||
                            lower.find("latest") != std::string::npos ||
                            lower.find("most recent") != std::string::npos;
        std::vector<const PromptEvent*> dated;
        for (const auto* e : relevant) {
            if (e->span && in_scope(*e)) dated.push_back(e);
        }
        const double top = dated.empty() ? 0.0 : best_of(dated)->overlap;
        for (const auto* e : dated) {
            if (e->overlap < top) continue;
            if (!pick || (latest ? e->span->first > pick->span->first
                                 : e->span->first < pick->span->first)) {
                pick = e;
            }
        }
    } else if (qclass == "aggregate") {
        std::vector<const PromptEvent*> hits;
        for (const auto* e : relevant) {
            if (in_scope(*e)) hits.push_back(e);
        }
        if (!hits.empty()) {
            pick = hits.front();
            for (const auto* e : hits) answer += (answer.empty() ? "" : "; ") + e->sentence;
        }
    }
    if (!pick) {
        // Dated events inside the scope beat background facts that merely mention the subject.
        std::vector<const PromptEvent*> dated, scoped;
        for (const auto* e : relevant) {
            if (!in_scope(*e)) continue;
            scoped.push_back(e);
            if (scope && e->span) dated.push_back(e);
        }
        pick = best_of(!dated.empty() ? dated : !scoped.empty() ? scoped : relevant);
    }
    if (answer.empty()) answer = pick->sentence;

    std::string out = "Step 1: the time scope is " + scope_label + ".\n";
    out += "Step 2: in-scope events:";
    bool any = false;
    for (const auto& e : events) {
        if (in_scope(e)) {
            out += (any ? ", " : " ") + std::string("Event # ") + std::to_string(e.index) + " [" + e.label + "]";
            any = true;
        }
    }
    if (!any) out += " none";
    out += ".\nStep 3: events are checked in timeline order.\n";
    out += "Step 4: applied the " + qclass + " heuristic.\n";
    out += "Step 5: Event # " + std::to_string(pick->index) + " [" + pick->label + "] supports the answer.\n";
    out += "ANSWER: " + answer;
    return out;
}

std::vector<double> embed_text(std::string_view text, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    const auto udim = static_cast<std::uint64_t>(dim);
    for (const auto& w : text::words(text)) {
        if (text::is_stopword(w)) continue;
        const auto h = text::fnv1a64(w);
        v[h % udim] += (h >> 63) ? -1.0 : 1.0;
    }
    const auto h = text::fnv1a64(text, 0x9e3779b97f4a7c15ULL);
    v[h % udim] += 0.25;
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) {
        v[h % udim] = 1.0;
        return v;
    }
    for (auto& x : v) x = x / n;
    return v;
}

}  // namespace mock

MockGateway::MockGateway(int embedding_dim, int max_concurrency)
    : ModelGateway(max_concurrency), dim_(embedding_dim) {
    if (dim_ < 1) throw Error(ErrorKind::Validation, "mock embedding dimension must be >= 1");
}

std::string MockGateway::do_chat(std::span<const ChatMessage> messages, const ChatOptions&) {
    auto task = task_of(messages).value_or("");
    std::string user;
    for (const auto& m : messages) {
        if (m.role == "user") {
            user = m.content;
            break;
        }
    }
    if (task == task::kExtractEvents) {
        std::string title;
        if (user.rfind("Title: ", 0) == 0) title = user.substr(7, user.find('\n') - 7);
        auto open = user.find("<<<PASSAGE\n");
        auto close = user.rfind("\nPASSAGE>>>");
        if (open == std::string::npos || close == std::string::npos || close < open + 11) {
            return mock::extract_events(user, title).dump();
        }
        return mock::extract_events(std::string_view(user).substr(open + 11, close - open - 11), title)
            .dump();
    }
    if (task == task::kResolveCoreference) {
        return mock::resolve_coreference(json::parse(text::extract_json_object(user))).dump();
    }
    if (task == task::kParseQuery) return mock::parse_query(user).dump();
    if (task == task::kRerank) {
        auto req = json::parse(text::extract_json_object(user));
        json scores = json::array();
        auto q = req.at("question").get<std::string>();
        for (const auto& p : req.at("passages")) scores.push_back(lexical_overlap(q, p.get<std::string>()));
        return json{{"scores", scores}}.dump();
    }
    if (task == task::kTimeCotAnswer) return mock::answer_time_cot(user);
    return "ANSWER: " + std::string(text::trim(user));
}

std::vector<std::vector<double>> MockGateway::do_embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(mock::embed_text(t, dim_));
    return out;
}

}  // namespace dygrag
