#include "test_support.hpp"

#include "dygrag/commands.hpp"
#include "dygrag/error.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace dygrag::testing {

std::filesystem::path data_path(const std::string& relative) {
    return std::filesystem::path(DYGRAG_TEST_DATA) / relative;
}

TempDir::TempDir(const std::string& prefix) {
    std::random_device rd;
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / (prefix + "-" + std::to_string(rd()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

DynamicEventUnit make_deu(const std::string& id, const std::set<std::string>& entities,
                          TimeAnchor anchor, const std::string& sentence) {
    DynamicEventUnit d;
    d.event_id = id;
    d.source_id = "test";
    d.sentence = sentence.empty() ? "Event " + id + " happened." : sentence;
    d.anchor = std::move(anchor);
    d.entities = entities;
    d.entity_surfaces.assign(entities.begin(), entities.end());
    d.info_score = 1;
    return d;
}

TimeAnchor year_anchor(int year) {
    return TimeAnchor::point_ymd(year, 1, 1, Granularity::Year);
}

TimeAnchor day_anchor(DayNumber day) {
    return TimeAnchor::point(day, Granularity::Day);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

bool is_task(std::span<const ChatMessage> messages, std::string_view task) {
    auto t = task_of(messages);
    return t && *t == task;
}

std::string ScriptedGateway::do_chat(std::span<const ChatMessage> messages, const ChatOptions& opts) {
    if (fail_chat_ && fail_chat_(messages)) {
        throw GatewayError(ErrorKind::Transport, "scripted failure");
    }
    if (override_ && override_(messages)) return reply_;
    return MockGateway::do_chat(messages, opts);
}

std::vector<std::vector<double>> ScriptedGateway::do_embed(std::span<const std::string> texts) {
    if (fail_embed_) throw GatewayError(ErrorKind::Transport, "scripted embed failure");
    return MockGateway::do_embed(texts);
}

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

}  // namespace dygrag::testing
