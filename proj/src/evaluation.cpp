#include "dygrag/evaluation.hpp"

#include "dygrag/detail/parallel_for.hpp"
#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>

namespace dygrag {

using nlohmann::json;

void QaItem::validate() const {
    if (text::trim(question).empty()) throw Error(ErrorKind::Validation, "QA item has an empty question");
    if (gold_answers.empty()) throw Error(ErrorKind::Validation, "QA item has no gold answers");
    for (const auto& g : gold_answers) {
        if (text::trim(g).empty()) throw Error(ErrorKind::Validation, "QA item has an empty gold answer");
    }
}

std::vector<QaItem> load_qa(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read QA file " + path.string());
    std::vector<QaItem> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            QaItem item;
            item.question = j.at("question").get<std::string>();
            item.gold_answers = j.at("answers").get<std::vector<std::string>>();
            item.type = j.value("type", std::string());
            item.validate();
            out.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ": " + e.what(), n);
        } catch (const Error& e) {
            throw ParseError(path.string() + ": " + e.what(), n);
        }
    }
    return out;
}

std::vector<std::string> metric_tokens(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::ispunct(u)) continue;
        cleaned += (u < 0x80) ? static_cast<char>(std::tolower(u)) : c;
    }
    std::vector<std::string> out;
    for (auto w : text::split_whitespace(cleaned)) out.emplace_back(w);
    return out;
}

TokenScores token_metrics(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw Error(ErrorKind::Validation, "token_metrics needs at least one gold answer");
    const auto pred = metric_tokens(prediction);
    std::map<std::string, int> pred_counts;
    for (const auto& t : pred) ++pred_counts[t];

    TokenScores best;
    bool have = false;
    for (std::size_t g = 0; g < golds.size(); ++g) {
        const auto gold = metric_tokens(golds[g]);
        std::map<std::string, int> gold_counts;
        for (const auto& t : gold) ++gold_counts[t];
        std::size_t overlap = 0;
        for (const auto& [tok, c] : gold_counts) {
            auto it = pred_counts.find(tok);
            if (it != pred_counts.end()) overlap += static_cast<std::size_t>(std::min(c, it->second));
        }
        TokenScores s;
        s.best_gold = g;
        s.accuracy = pred.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(pred.size());
        s.recall = gold.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(gold.size());
        if (!have || s.recall > best.recall || (s.recall == best.recall && s.accuracy > best.accuracy)) {
            best = s;
            have = true;
        }
    }
    return best;
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
    const auto pred = metric_tokens(prediction);
    return std::any_of(golds.begin(), golds.end(),
                       [&](const std::string& g) { return metric_tokens(g) == pred; });
}

void EvalReport::finalize() {
    mean_accuracy = mean_recall = mean_exact_match = mean_query_time_seconds = 0.0;
    failed_items = 0;
    if (items.empty()) return;
    for (const auto& r : items) {
        mean_accuracy += r.accuracy;
        mean_recall += r.recall;
        mean_exact_match += r.exact ? 1.0 : 0.0;
        mean_query_time_seconds += r.query_seconds;
        if (r.failed) ++failed_items;
    }
    const auto n = static_cast<double>(items.size());
    mean_accuracy /= n;
    mean_recall /= n;
    mean_exact_match /= n;
    mean_query_time_seconds /= n;
}

json EvalReport::to_json(bool include_timing) const {
    json rows = json::array();
    for (const auto& r : items) {
        json row = {{"question", r.question},     {"prediction", r.prediction},
                    {"best_gold", r.best_gold},   {"accuracy", r.accuracy},
                    {"recall", r.recall},         {"exact_match", r.exact},
                    {"failed", r.failed}};
        if (r.failed) row["error"] = r.error;
        if (!r.details.is_null()) row["details"] = r.details;
        if (include_timing) row["query_seconds"] = r.query_seconds;
        rows.push_back(std::move(row));
    }
    json out = {{"metric",
                 "token overlap: accuracy = overlap / prediction tokens, recall = overlap / gold "
                 "tokens, best gold by recall then accuracy"},
                {"item_count", items.size()},
                {"failed_items", failed_items},
                {"mean_accuracy", mean_accuracy},
                {"mean_recall", mean_recall},
                {"mean_exact_match", mean_exact_match},
                {"warnings", warnings},
                {"items", std::move(rows)}};
    if (include_timing) out["timing"] = timing_json();
    return out;
}

json EvalReport::timing_json() const {
    return {{"index_time_seconds", index_time_seconds},
            {"mean_query_time_seconds", mean_query_time_seconds}};
}

std::string EvalReport::summary_table() const {
    std::string out = fmt::format("{:<6} {:>8} {:>8} {:>6}  {}\n", "item", "acc", "recall", "em", "question");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& r = items[i];
        auto q = r.question.size() > 60 ? r.question.substr(0, 57) + "..." : r.question;
        out += fmt::format("{:<6} {:>8.4f} {:>8.4f} {:>6} {}{}\n", i + 1, r.accuracy, r.recall,
                           r.exact ? "yes" : "no", r.failed ? "[failed] " : " ", q);
    }
    out += fmt::format("{:<6} {:>8.4f} {:>8.4f} {:>6.4f}  items={} failed={}\n", "mean",
                       mean_accuracy, mean_recall, mean_exact_match, items.size(), failed_items);
    return out;
}

EvalReport score_items(const std::vector<QaItem>& items,
                       const std::function<Prediction(const QaItem&)>& answer_fn,
                       std::size_t concurrency) {
    EvalReport report;
    report.items.resize(items.size());
    parallel_for(items.size(), concurrency, [&](std::size_t i) {
        const auto& item = items[i];
        auto& row = report.items[i];
        row.question = item.question;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto pred = answer_fn(item);
            row.prediction = std::move(pred.answer);
            row.details = std::move(pred.details);
            auto s = token_metrics(row.prediction, item.gold_answers);
            row.accuracy = s.accuracy;
            row.recall = s.recall;
            row.best_gold = item.gold_answers[s.best_gold];
            row.exact = exact_match(row.prediction, item.gold_answers);
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            row.best_gold = item.gold_answers.empty() ? "" : item.gold_answers.front();
        }
        row.query_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    if (items.empty()) {
        report.warnings.push_back("QA set is empty; aggregates are reported as 0");
        spdlog::warn("QA set is empty; aggregates are reported as 0");
    }
    for (const auto& r : report.items) {
        if (r.failed) spdlog::warn("item failed: {}: {}", r.question, r.error);
    }
    report.finalize();
    return report;
}

}  // namespace dygrag
