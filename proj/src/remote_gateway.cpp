#include "dygrag/error.hpp"
#include "dygrag/model_gateway.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace dygrag {

using nlohmann::json;

namespace {

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 300;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool is_transient_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

RemoteGateway::RemoteGateway(GatewayConfig cfg)
    : ModelGateway(cfg.max_concurrency), cfg_(std::move(cfg)) {
    auto scheme_end = cfg_.base_url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = cfg_.base_url.find('/', host_start);
    if (path_start == std::string::npos) {
        scheme_host_port_ = cfg_.base_url;
    } else {
        scheme_host_port_ = cfg_.base_url.substr(0, path_start);
        path_prefix_ = cfg_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string RemoteGateway::post_json(const std::string& endpoint, const std::string& body) {
    const std::string path = path_prefix_ + endpoint;
    std::string last_problem;
    int last_status = 0;
    for (int attempt = 0; attempt <= cfg_.retry_count; ++attempt) {
        if (attempt > 0) {
            auto delay = std::min<long long>(
                static_cast<long long>(cfg_.backoff_initial_ms) << std::min(attempt - 1, 20),
                cfg_.backoff_max_ms);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client client(scheme_host_port_);
        auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_problem = httplib::to_string(res.error());
            last_status = 0;
            spdlog::warn("gateway POST {} failed: {} (attempt {})", path, last_problem, attempt + 1);
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        if (!is_transient_status(res->status)) {
            throw GatewayError(ErrorKind::Protocol,
                               "HTTP " + std::to_string(res->status) + " from " + path + ": " +
                                   excerpt(res->body),
                               res->status, excerpt(res->body));
        }
        last_status = res->status;
        last_problem = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
        spdlog::warn("gateway POST {} got {} (attempt {})", path, res->status, attempt + 1);
    }
    throw GatewayError(ErrorKind::Transport,
                       "retries exhausted for " + path + ": " + last_problem, last_status);
}

std::string RemoteGateway::do_chat(std::span<const ChatMessage> messages,
                                   const ChatOptions& opts) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    json req = {{"model", cfg_.chat_model},
                {"messages", std::move(msgs)},
                {"temperature", opts.temperature},
                {"max_tokens", opts.max_tokens}};
    auto body = post_json("/v1/chat/completions", req.dump());
    try {
        auto res = json::parse(body);
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw GatewayError(ErrorKind::Protocol,
                           std::string("malformed chat completion response: ") + e.what(), 200,
                           excerpt(body));
    }
}

std::vector<std::vector<double>> RemoteGateway::do_embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    const auto batch = static_cast<std::size_t>(cfg_.embed_batch_size);
    for (std::size_t i = 0; i < texts.size(); i += batch) {
        auto part = texts.subspan(i, std::min(batch, texts.size() - i));
        json req = {{"model", cfg_.embed_model},
                    {"input", std::vector<std::string>(part.begin(), part.end())}};
        auto body = post_json("/v1/embeddings", req.dump());
        try {
            auto res = json::parse(body);
            const auto& data = res.at("data");
            if (data.size() != part.size()) {
                throw GatewayError(ErrorKind::Protocol, "embedding batch size mismatch", 200,
                                   excerpt(body));
            }
            std::vector<std::vector<double>> rows(part.size());
            for (std::size_t k = 0; k < data.size(); ++k) {
                auto idx = data[k].contains("index") ? data[k]["index"].get<std::size_t>() : k;
                if (idx >= rows.size()) {
                    throw GatewayError(ErrorKind::Protocol, "embedding index out of range");
                }
                rows[idx] = data[k].at("embedding").get<std::vector<double>>();
            }
            for (auto& r : rows) out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw GatewayError(ErrorKind::Protocol,
                               std::string("malformed embeddings response: ") + e.what(), 200,
                               excerpt(body));
        }
    }
    return out;
}

}  // namespace dygrag
