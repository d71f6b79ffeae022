#include "dygrag/model_gateway.hpp"

#include "dygrag/error.hpp"
#include "dygrag/mock_backend.hpp"
#include "dygrag/text_util.hpp"

namespace dygrag {

void GatewayConfig::validate() const {
    if (backend != "mock" && backend != "remote") {
        throw Error(ErrorKind::Validation, "gateway backend must be 'mock' or 'remote'");
    }
    if (max_concurrency < 1) throw Error(ErrorKind::Validation, "max_concurrency must be >= 1");
    if (retry_count < 0) throw Error(ErrorKind::Validation, "retry_count must be >= 0");
    if (embed_batch_size < 1) throw Error(ErrorKind::Validation, "embed_batch_size must be >= 1");
    if (backend == "remote") {
        if (base_url.empty()) throw Error(ErrorKind::Validation, "remote backend needs base_url");
        if (timeout_seconds <= 0) throw Error(ErrorKind::Validation, "timeout_seconds must be > 0");
    }
    if (mock_embedding_dim < 1) throw Error(ErrorKind::Validation, "mock_embedding_dim must be >= 1");
}

ModelGateway::ModelGateway(int max_concurrency)
    : max_concurrency_(max_concurrency < 1 ? 1 : max_concurrency), slots_(max_concurrency_) {}

namespace {

struct SlotGuard {
    explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
    std::counting_semaphore<>& sem;
};

}  // namespace

std::string ModelGateway::chat(std::span<const ChatMessage> messages, const ChatOptions& opts) {
    calls_.fetch_add(1);
    SlotGuard guard(slots_);
    return do_chat(messages, opts);
}

std::vector<std::vector<double>> ModelGateway::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw Error(ErrorKind::Validation, "embed called with an empty batch");
    calls_.fetch_add(1);
    SlotGuard guard(slots_);
    auto out = do_embed(texts);
    if (out.size() != texts.size()) {
        throw GatewayError(ErrorKind::Protocol, "embedding count does not match input count");
    }
    return out;
}

std::string task_header(std::string_view task) {
    return "TASK: " + std::string(task);
}

std::optional<std::string> task_of(std::span<const ChatMessage> messages) {
    for (const auto& m : messages) {
        if (m.role != "system") continue;
        auto line = std::string_view(m.content).substr(0, m.content.find('\n'));
        if (text::starts_with_icase(line, "TASK:")) {
            return std::string(text::trim(line.substr(5)));
        }
    }
    return std::nullopt;
}

std::unique_ptr<ModelGateway> make_gateway(const GatewayConfig& cfg) {
    cfg.validate();
    if (cfg.backend == "remote") return std::make_unique<RemoteGateway>(cfg);
    return std::make_unique<MockGateway>(cfg.mock_embedding_dim, cfg.max_concurrency);
}

}  // namespace dygrag
