#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatOptions {
    double temperature = 0.0;
    int max_tokens = 2048;
};

struct GatewayConfig {
    std::string backend = "mock";  // "mock" or "remote"
    std::string base_url = "http://127.0.0.1:8000";
    std::string api_key_env = "OPENAI_API_KEY";
    std::string chat_model = "Qwen2.5-14B-Instruct";
    std::string embed_model = "bge-m3";
    int max_concurrency = 32;
    int retry_count = 3;
    double timeout_seconds = 120.0;
    int embed_batch_size = 32;
    int backoff_initial_ms = 500;
    int backoff_max_ms = 8000;
    int mock_embedding_dim = 256;

    void validate() const;
};

/// Chat-completion and embedding access with a shared in-flight bound.
///
/// Callers use `chat` and `embed`; both block while `max_concurrency` requests are already
/// running. Implementations override the `do_*` hooks.
class ModelGateway {
public:
    explicit ModelGateway(int max_concurrency);
    virtual ~ModelGateway() = default;

    ModelGateway(const ModelGateway&) = delete;
    ModelGateway& operator=(const ModelGateway&) = delete;

    std::string chat(std::span<const ChatMessage> messages, const ChatOptions& opts = {});
    std::vector<std::vector<double>> embed(std::span<const std::string> texts);

    int max_concurrency() const noexcept { return max_concurrency_; }

    /// Number of chat/embed calls accepted so far.
    std::size_t call_count() const noexcept { return calls_.load(); }

protected:
    virtual std::string do_chat(std::span<const ChatMessage> messages,
                                const ChatOptions& opts) = 0;
    virtual std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) = 0;

private:
    int max_concurrency_;
    std::counting_semaphore<> slots_;
    std::atomic<std::size_t> calls_{0};
};

std::unique_ptr<ModelGateway> make_gateway(const GatewayConfig& cfg);

/// Task tags carried on the first line of every system prompt. The mock backend dispatches
/// on them; remote models simply read them as part of the instructions.
namespace task {
inline constexpr std::string_view kExtractEvents = "extract_events";
inline constexpr std::string_view kResolveCoreference = "resolve_coreference";
inline constexpr std::string_view kParseQuery = "parse_query";
inline constexpr std::string_view kRerank = "rerank";
inline constexpr std::string_view kTimeCotAnswer = "time_cot_answer";
}  // namespace task

std::string task_header(std::string_view task);
std::optional<std::string> task_of(std::span<const ChatMessage> messages);

class RemoteGateway final : public ModelGateway {
public:
    explicit RemoteGateway(GatewayConfig cfg);

protected:
    std::string do_chat(std::span<const ChatMessage> messages, const ChatOptions& opts) override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    std::string post_json(const std::string& endpoint, const std::string& body);

    GatewayConfig cfg_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string api_key_;
};

}  // namespace dygrag
