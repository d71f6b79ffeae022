#include "dygrag/generation.hpp"

#include "dygrag/assets.hpp"
#include "dygrag/error.hpp"
#include "dygrag/text_util.hpp"

#include <spdlog/spdlog.h>

#include <sstream>

namespace dygrag {

std::map<std::string, std::string> parse_template_sections(std::string_view asset) {
    std::map<std::string, std::string> out;
    std::string current;
    std::string body;
    auto flush = [&] {
        if (!current.empty()) out[current] = std::string(text::trim(body));
        body.clear();
    };
    std::istringstream in{std::string(asset)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) continue;
        auto t = text::trim(line);
        if (t.size() > 2 && t.front() == '[' && t.back() == ']' && t.find(' ') == std::string_view::npos) {
            flush();
            current = std::string(t.substr(1, t.size() - 2));
            continue;
        }
        body += line;
        body += '\n';
    }
    flush();
    return out;
}

namespace {

const std::map<std::string, std::string>& sections() {
    static const auto parsed = parse_template_sections(assets::get("time_cot"));
    return parsed;
}

const std::string& section(const std::string& name) {
    auto it = sections().find(name);
    if (it == sections().end()) {
        throw Error(ErrorKind::Validation, "reasoning template lacks section [" + name + "]");
    }
    return it->second;
}

std::string fill(std::string s, const QueryPlan& plan) {
    s = text::replace_all(std::move(s), "{{time_scope}}", time_scope_label(plan));
    s = text::replace_all(std::move(s), "{{question_class}}", to_string(plan.question_class));
    return text::replace_all(std::move(s), "{{question}}", plan.question);
}

TimeCotPrompt build(const QueryPlan& plan, const EventTimeline& timeline) {
    TimeCotPrompt p;
    p.class_hint = plan.question_class;
    p.system_preamble = fill(section("preamble"), plan);
    p.timeline_block = section("timeline_header") + "\n" +
                       (timeline.empty() ? section("timeline_empty") : timeline.rendered);
    p.reasoning_steps = {
        fill(section("step.scope"), plan),
        fill(section("step.in_scope"), plan),
        fill(section("step.order"), plan),
        fill(section(std::string("heuristic.") + to_string(plan.question_class)), plan),
        fill(section(timeline.empty() ? "step.answer_empty" : "step.answer"), plan),
    };
    p.question_block = fill(section("question"), plan);
    return p;
}

std::size_t prompt_tokens(const TimeCotPrompt& p, const Tokenizer& tokenizer) {
    return tokenizer.count(p.system_preamble) + tokenizer.count(p.user_message());
}

}  // namespace

std::string TimeCotPrompt::user_message() const {
    std::string out = timeline_block + "\n\n" + section("steps_header") + "\n";
    for (std::size_t i = 0; i < reasoning_steps.size(); ++i) {
        out += std::to_string(i + 1) + ". " + reasoning_steps[i] + "\n";
    }
    return out + "\n" + question_block + "\n";
}

std::vector<ChatMessage> TimeCotPrompt::messages() const {
    return {{"system", system_preamble}, {"user", user_message()}};
}

std::string TimeCotPrompt::render() const {
    return system_preamble + "\n\n" + user_message();
}

std::string time_scope_label(const QueryPlan& plan) {
    return plan.t_q ? format_timestamp(*plan.t_q) : "unspecified";
}

TimeCotPrompt assemble_prompt(const QueryPlan& plan, EventTimeline& timeline,
                              std::size_t context_cap_tokens, const Tokenizer& tokenizer) {
    plan.validate();
    auto prompt = build(plan, timeline);
    auto tokens = prompt_tokens(prompt, tokenizer);
    while (tokens > context_cap_tokens) {
        if (timeline.empty()) {
            throw Error(ErrorKind::Validation,
                        "context cap of " + std::to_string(context_cap_tokens) +
                            " tokens cannot hold the reasoning template");
        }
        const auto timeline_tokens = tokenizer.count(timeline.rendered);
        const auto excess = tokens - context_cap_tokens;
        truncate_timeline(timeline, timeline_tokens > excess ? timeline_tokens - excess : 0, tokenizer);
        prompt = build(plan, timeline);
        tokens = prompt_tokens(prompt, tokenizer);
    }
    return prompt;
}

GeneratedAnswer extract_answer(std::string_view raw) {
    GeneratedAnswer out;
    out.raw_reasoning = std::string(raw);
    std::optional<std::string> found;
    std::istringstream in{std::string(raw)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.starts_with("ANSWER:")) found = std::string(text::trim(t.substr(7)));
    }
    if (found) {
        out.answer = *found;
    } else {
        out.answer = std::string(text::trim(raw));
        out.marker_missing = true;
    }
    return out;
}

GeneratedAnswer generate_answer(const TimeCotPrompt& prompt, ModelGateway& gateway) {
    auto out = extract_answer(gateway.chat(prompt.messages()));
    if (out.marker_missing) spdlog::warn("model reply has no ANSWER: line; using the full text");
    return out;
}

}  // namespace dygrag
