#include "dygrag/error.hpp"
#include "dygrag/model_gateway.hpp"
#include "test_support.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

namespace dygrag {
namespace {

using nlohmann::json;

/// Local HTTP server answering /v1/chat/completions and /v1/embeddings.
class StubServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    StubServer(Handler chat, Handler embed) {
        server_.Post("/v1/chat/completions", [this, chat](const auto& req, auto& res) {
            track([&] { chat(req, res); });
        });
        server_.Post("/v1/embeddings", [this, embed](const auto& req, auto& res) {
            track([&] { embed(req, res); });
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    GatewayConfig config() const {
        GatewayConfig cfg;
        cfg.backend = "remote";
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
        cfg.api_key_env = "";
        cfg.backoff_initial_ms = 1;
        cfg.backoff_max_ms = 4;
        cfg.timeout_seconds = 10;
        return cfg;
    }

    int requests() const { return requests_.load(); }
    int high_watermark() const { return high_.load(); }

private:
    template <typename F>
    void track(F&& f) {
        ++requests_;
        int now = ++in_flight_;
        int prev = high_.load();
        while (now > prev && !high_.compare_exchange_weak(prev, now)) {
        }
        f();
        --in_flight_;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> high_{0};
};

void chat_ok(const httplib::Request&, httplib::Response& res) {
    json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "hello"}}}}}}};
    res.set_content(body.dump(), "application/json");
}

void embed_echo(const httplib::Request& req, httplib::Response& res) {
    auto in = json::parse(req.body).at("input");
    json data = json::array();
    // Reverse order with explicit indexes; the client must put rows back in input order.
    for (std::size_t i = in.size(); i-- > 0;) {
        double tag = std::stod(in[i].get<std::string>());
        data.push_back({{"index", i}, {"embedding", {tag, 1.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
}

const std::vector<ChatMessage> kHello = {{"user", "hi"}};

TEST(RemoteGateway, RetriesTransientStatus) {
    std::atomic<int> calls{0};
    StubServer stub(
        [&](const auto& req, auto& res) {
            if (calls++ == 0) {
                res.status = 429;
                res.set_content("slow down", "text/plain");
                return;
            }
            chat_ok(req, res);
        },
        embed_echo);
    RemoteGateway gw(stub.config());
    EXPECT_EQ(gw.chat(kHello), "hello");
    EXPECT_EQ(stub.requests(), 2);
}

TEST(RemoteGateway, NonTransientStatusFailsImmediately) {
    StubServer stub(
        [](const auto&, auto& res) {
            res.status = 401;
            res.set_content("bad key", "text/plain");
        },
        embed_echo);
    RemoteGateway gw(stub.config());
    try {
        gw.chat(kHello);
        FAIL();
    } catch (const GatewayError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Protocol);
        EXPECT_EQ(e.status(), 401);
        EXPECT_EQ(e.body_excerpt(), "bad key");
    }
    EXPECT_EQ(stub.requests(), 1);
}

TEST(RemoteGateway, ExhaustedRetriesAreTransportErrors) {
    StubServer stub([](const auto&, auto& res) { res.status = 503; }, embed_echo);
    auto cfg = stub.config();
    cfg.retry_count = 2;
    RemoteGateway gw(cfg);
    try {
        gw.chat(kHello);
        FAIL();
    } catch (const GatewayError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Transport);
    }
    EXPECT_EQ(stub.requests(), 3);
}

TEST(RemoteGateway, UnreachableEndpointIsTransport) {
    GatewayConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.api_key_env = "";
    cfg.retry_count = 1;
    cfg.backoff_initial_ms = 1;
    cfg.timeout_seconds = 2;
    RemoteGateway gw(cfg);
    try {
        gw.chat(kHello);
        FAIL();
    } catch (const GatewayError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Transport);
    }
}

TEST(RemoteGateway, EmbeddingsAreBatchedInOrder) {
    StubServer stub(chat_ok, embed_echo);
    auto cfg = stub.config();
    cfg.embed_batch_size = 32;
    RemoteGateway gw(cfg);
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back(std::to_string(i));
    auto rows = gw.embed(texts);
    ASSERT_EQ(rows.size(), 100u);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(rows[static_cast<std::size_t>(i)][0], i);
    EXPECT_EQ(stub.requests(), 4);
}

TEST(RemoteGateway, MalformedBodyIsProtocolError) {
    StubServer stub([](const auto&, auto& res) { res.set_content("{\"choices\": []}", "application/json"); },
                    embed_echo);
    RemoteGateway gw(stub.config());
    try {
        gw.chat(kHello);
        FAIL();
    } catch (const GatewayError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Protocol);
    }
}

TEST(RemoteGateway, InFlightRequestsRespectTheBound) {
    StubServer stub(
        [](const auto& req, auto& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            chat_ok(req, res);
        },
        embed_echo);
    auto cfg = stub.config();
    cfg.max_concurrency = 3;
    RemoteGateway gw(cfg);
    std::vector<std::thread> threads;
    for (int i = 0; i < 24; ++i) threads.emplace_back([&] { gw.chat(kHello); });
    for (auto& t : threads) t.join();
    EXPECT_EQ(stub.requests(), 24);
    EXPECT_LE(stub.high_watermark(), 3);
    EXPECT_GE(stub.high_watermark(), 2);
}

TEST(GatewayConfig, Validates) {
    GatewayConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.max_concurrency = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.backend = "carrier-pigeon";
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(Gateway, FactoryAndTaskTags) {
    GatewayConfig cfg;
    auto gw = make_gateway(cfg);
    ASSERT_TRUE(dynamic_cast<MockGateway*>(gw.get()));
    std::vector<ChatMessage> msgs = {{"system", task_header(task::kParseQuery) + "\nmore"}};
    EXPECT_EQ(task_of(msgs), std::string(task::kParseQuery));
    EXPECT_EQ(task_of(kHello), std::nullopt);
    EXPECT_EQ(gw->call_count(), 0u);
    gw->chat(kHello);
    EXPECT_EQ(gw->call_count(), 1u);
}

}  // namespace
}  // namespace dygrag
