#pragma once

#include "dygrag/model_gateway.hpp"
#include "dygrag/retrieval.hpp"
#include "dygrag/tokenizer.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

/// Sections of a reasoning template asset: `[name]` headers, `#` comment lines ignored,
/// bodies trimmed.
std::map<std::string, std::string> parse_template_sections(std::string_view asset);

struct TimeCotPrompt {
    std::string system_preamble;
    std::string timeline_block;
    std::vector<std::string> reasoning_steps;  // fixed order, class heuristic is step 4
    std::string question_block;
    QuestionClass class_hint = QuestionClass::Other;

    std::string user_message() const;
    std::vector<ChatMessage> messages() const;

    /// System and user text as sent, separated by a blank line.
    std::string render() const;
};

/// "2013-05", "2010..2015", or "unspecified" without a query time.
std::string time_scope_label(const QueryPlan& plan);

/// Deterministic instantiation of the reasoning template. When the prompt exceeds
/// `context_cap_tokens`, timeline entries are dropped (lowest priority first) and the prompt
/// rebuilt; throws Error(Validation) if even an empty timeline does not fit.
TimeCotPrompt assemble_prompt(const QueryPlan& plan, EventTimeline& timeline,
                              std::size_t context_cap_tokens,
                              const Tokenizer& tokenizer = default_tokenizer());

struct GeneratedAnswer {
    std::string answer;
    std::string raw_reasoning;
    bool marker_missing = false;
};

/// Text after the last line starting with "ANSWER:", trimmed. Without the marker the whole
/// reply is the answer and `marker_missing` is set.
GeneratedAnswer extract_answer(std::string_view raw);

/// One chat completion. Gateway errors propagate to the caller.
GeneratedAnswer generate_answer(const TimeCotPrompt& prompt, ModelGateway& gateway);

}  // namespace dygrag
