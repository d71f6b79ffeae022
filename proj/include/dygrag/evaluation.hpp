#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

struct QaItem {
    std::string question;
    std::vector<std::string> gold_answers;
    std::string type;  // optional label from the dataset

    void validate() const;
};

/// JSON lines {question, answers: [string], type?}. Throws ParseError with the line number.
std::vector<QaItem> load_qa(const std::filesystem::path& path);

/// Case-folded, ASCII punctuation removed, split on whitespace.
std::vector<std::string> metric_tokens(std::string_view s);

struct TokenScores {
    double accuracy = 0.0;  // overlap / |prediction tokens|
    double recall = 0.0;    // overlap / |gold tokens|
    std::size_t best_gold = 0;

    friend bool operator==(const TokenScores&, const TokenScores&) = default;
};

/// Multiset token overlap against each gold; keeps the gold with the best recall, then the
/// best accuracy. Throws Error(Validation) when `golds` is empty.
TokenScores token_metrics(std::string_view prediction, const std::vector<std::string>& golds);

/// Same token sequence as some gold after metric tokenization.
bool exact_match(std::string_view prediction, const std::vector<std::string>& golds);

struct ItemResult {
    std::string question;
    std::string prediction;
    std::string best_gold;
    double accuracy = 0.0;
    double recall = 0.0;
    bool exact = false;
    bool failed = false;
    std::string error;
    double query_seconds = 0.0;
    nlohmann::json details;  // pipeline trace for the item, if any
};

struct EvalReport {
    std::vector<ItemResult> items;
    double mean_accuracy = 0.0;
    double mean_recall = 0.0;
    double mean_exact_match = 0.0;
    std::size_t failed_items = 0;
    double index_time_seconds = 0.0;
    double mean_query_time_seconds = 0.0;
    std::vector<std::string> warnings;

    /// Recomputes the aggregates from `items`; all zero when there are none.
    void finalize();

    /// Timing is left out unless asked for, so reports stay byte-stable across runs.
    nlohmann::json to_json(bool include_timing = false) const;
    nlohmann::json timing_json() const;
    std::string summary_table() const;
};

struct Prediction {
    std::string answer;
    nlohmann::json details;
};

/// Runs `answer_fn` over the items on up to `concurrency` threads. An item whose call throws
/// scores (0, 0) and is flagged; the others are unaffected. Rows keep input order.
EvalReport score_items(const std::vector<QaItem>& items,
                       const std::function<Prediction(const QaItem&)>& answer_fn,
                       std::size_t concurrency);

}  // namespace dygrag
