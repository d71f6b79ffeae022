#pragma once

#include "dygrag/model_gateway.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

/// Offline heuristics that answer every prompt the pipeline sends. They are deliberately
/// simple and fully deterministic so the whole system can be tested without a network.
namespace mock {

std::vector<std::string> split_sentences(std::string_view text);

/// Runs of capitalized words, minus sentence-initial function words, month and day names.
std::vector<std::string> find_entities(std::string_view sentence);

bool has_state_change(std::string_view sentence);

/// Digits outside temporal expressions, currency or percent signs, or quantity words.
bool has_result_or_quantity(std::string_view sentence);

/// Reply to an extraction prompt: one record per sentence of the passage.
nlohmann::json extract_events(std::string_view passage, std::string_view title);

/// Pronouns are replaced with the leading entity of the nearest earlier sentence (or an
/// entity earlier in the same sentence).
nlohmann::json resolve_coreference(const nlohmann::json& request);

/// "boundary", "continuity", "aggregate" or "other" from keyword tables.
std::string classify_question(std::string_view question, bool has_time_constraint);

nlohmann::json parse_query(std::string_view question);

/// Reads the timeline and question out of a Time-CoT prompt and answers with the sentence of
/// the best-matching in-scope event, citing it.
std::string answer_time_cot(std::string_view user_message);

/// Signed feature hashing of lower-cased words, L2-normalized.
std::vector<double> embed_text(std::string_view text, int dim);

}  // namespace mock

class MockGateway : public ModelGateway {
public:
    explicit MockGateway(int embedding_dim = 256, int max_concurrency = 32);

    int embedding_dim() const noexcept { return dim_; }

protected:
    std::string do_chat(std::span<const ChatMessage> messages, const ChatOptions& opts) override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    int dim_;
};

}  // namespace dygrag
