#include "dygrag/commands.hpp"

#include "dygrag/config.hpp"
#include "dygrag/error.hpp"
#include "dygrag/json_io.hpp"
#include "dygrag/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>

namespace dygrag {

using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string log_level = "warn";
};

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Validation: return kExitUsage;
        case ErrorKind::Transport:
        case ErrorKind::Protocol: return kExitGateway;
        case ErrorKind::Parse:
        case ErrorKind::Dimension:
        case ErrorKind::Compat:
        case ErrorKind::Io: return kExitData;
    }
    return kExitData;
}

RunConfig make_config(const GlobalOptions& g) {
    std::optional<std::filesystem::path> file;
    if (!g.config_path.empty()) file = g.config_path;
    auto cfg = load_config(file);
    if (g.seed) {
        cfg.retrieval.rng_seed = *g.seed;
        cfg.finalize();
    }
    return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void print_build(std::ostream& out, const BuildStats& s) {
    out << fmt::format(
        "documents: {}\nchunks processed: {}\nfailed chunks: {}\nnew events: {}\nnodes: {}\n"
        "edges: {}\nmodel calls: {}\nindex time: {:.3f} s\n",
        s.documents, s.chunks_processed, s.failed_chunks, s.new_events, s.nodes, s.edges,
        s.model_calls, s.seconds);
}

int cmd_index(const RunConfig& cfg, const std::string& corpus, const std::string& out_dir,
              std::ostream& out) {
    auto docs = load_corpus(corpus);
    auto gateway = make_gateway(cfg.gateway);
    auto stats = build_index(docs, cfg, *gateway, out_dir);
    print_build(out, stats);
    return kExitOk;
}

int cmd_query(const RunConfig& cfg, const std::string& index_dir, const std::string& question,
              std::optional<double> lambda, const std::string& audit_path, std::ostream& out,
              std::ostream& err) {
    if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) {
        err << "error: --lambda must lie in [0, 1]\n";
        return kExitUsage;
    }
    auto index = load_index(index_dir, cfg);
    auto gateway = make_gateway(cfg.gateway);
    QueryEngine engine(index, cfg, *gateway);
    auto run = engine.run(question, lambda);
    if (!audit_path.empty()) write_file(audit_path, run.report(true).dump(2) + "\n");
    out << "Timeline:\n" << (run.timeline.empty() ? "(empty)" : run.timeline.rendered) << "\n\n";
    if (run.error) {
        err << "error: " << *run.error << "\n";
        return kExitGateway;
    }
    out << "Answer: " << run.answer.answer << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& index_dir, const std::string& qa_path,
             const std::string& out_path, const std::string& corpus, std::ostream& out) {
    auto items = load_qa(qa_path);
    std::optional<double> index_seconds;
    auto gateway = make_gateway(cfg.gateway);
    if (!corpus.empty()) {
        auto stats = build_index(load_corpus(corpus), cfg, *gateway, index_dir);
        index_seconds = stats.seconds;
    }
    auto index = load_index(index_dir, cfg);
    if (!index_seconds) index_seconds = index.index_time_seconds;
    QueryEngine engine(index, cfg, *gateway);
    auto report = run_benchmark(engine, items, cfg);
    report.index_time_seconds = index_seconds.value_or(0.0);

    write_file(out_path, report.to_json(false).dump(2) + "\n");
    std::filesystem::path timing = out_path;
    timing.replace_extension(".timing.json");
    write_file(timing, report.timing_json().dump(2) + "\n");

    out << report.summary_table();
    out << fmt::format("index time: {:.3f} s\nmean query time: {:.3f} s\n",
                       report.index_time_seconds, report.mean_query_time_seconds);
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    return kExitOk;
}

int cmd_inspect(const RunConfig& cfg, const std::string& index_dir, const std::string& node_id,
                bool list_edges, std::ostream& out, std::ostream& err) {
    auto index = load_index(index_dir, cfg);
    const auto& g = index.graph;
    if (!node_id.empty()) {
        if (!g.contains(node_id)) {
            err << "error: no event " << node_id << "\n";
            return kExitData;
        }
        out << deu_to_json(g.node(node_id)).dump(2) << "\n";
        out << "neighbors:\n";
        for (const auto& n : g.neighbors(node_id)) {
            out << "  " << n.id << "\t" << format_double(n.weight) << "\n";
        }
        return kExitOk;
    }
    if (list_edges) {
        for (const auto& e : g.edges()) out << e.a << "\t" << e.b << "\t" << format_double(e.weight) << "\n";
        return kExitOk;
    }
    std::size_t dated = 0, isolated = 0, max_degree = 0;
    for (const auto& [id, deu] : g.nodes()) {
        if (!deu.anchor.is_static()) ++dated;
        const auto deg = g.neighbors(id).size();
        if (deg == 0) ++isolated;
        max_degree = std::max(max_degree, deg);
    }
    std::map<std::string, int> status_counts;
    for (const auto& r : index.manifest) ++status_counts[to_string(r.status)];
    json summary = {{"nodes", g.node_count()},
                    {"dated_nodes", dated},
                    {"static_nodes", g.node_count() - dated},
                    {"edges", g.edge_count()},
                    {"isolated_nodes", isolated},
                    {"max_degree", max_degree},
                    {"text_dimension", g.metadata().d},
                    {"time_dimension", g.metadata().d_tau},
                    {"encoder_hash", g.metadata().encoder_hash},
                    {"chunks", status_counts}};
    out << summary.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-centric temporal retrieval and question answering"};
    app.name("dygrag");
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master random seed");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

    std::string corpus, out_dir, index_dir, question, audit, qa, report_path, node_id;
    std::optional<double> lambda;
    bool list_edges = false;

    auto* index = app.add_subcommand("index", "extract events and build the graph and vector index");
    index->add_option("--corpus", corpus, "documents as JSON lines {doc_id, title, text}")
        ->required()
        ->check(CLI::ExistingFile);
    index->add_option("--out", out_dir, "index directory")->required();

    auto* query = app.add_subcommand("query", "answer one question from an index");
    query->add_option("--index", index_dir, "index directory")->required();
    query->add_option("question", question, "question text")->required();
    query->add_option("--lambda", lambda, "weight of the query time segment");
    query->add_option("--audit", audit, "write the full run report to this file");

    auto* eval = app.add_subcommand("eval", "score a QA set against an index");
    eval->add_option("--index", index_dir, "index directory")->required();
    eval->add_option("--qa", qa, "QA items as JSON lines {question, answers, type?}")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--out", report_path, "report file")->required();
    eval->add_option("--corpus", corpus, "build or resume the index from this corpus first")
        ->check(CLI::ExistingFile);

    auto* inspect = app.add_subcommand("inspect", "show index statistics, a node or all edges");
    inspect->add_option("--index", index_dir, "index directory")->required();
    inspect->add_option("--node", node_id, "event id to show with its neighbors");
    inspect->add_flag("--edges", list_edges, "list every edge");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    auto level = spdlog::level::from_str(g.log_level);
    if (level == spdlog::level::off && g.log_level != "off") {
        err << "error: unknown log level " << g.log_level << "\n";
        return kExitUsage;
    }
    spdlog::set_level(level);

    try {
        RunConfig cfg;
        try {
            cfg = make_config(g);
        } catch (const Error& e) {
            err << "config error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (*index) return cmd_index(cfg, corpus, out_dir, out);
        if (*query) return cmd_query(cfg, index_dir, question, lambda, audit, out, err);
        if (*eval) return cmd_eval(cfg, index_dir, qa, report_path, corpus, out);
        if (*inspect) return cmd_inspect(cfg, index_dir, node_id, list_edges, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error (io): " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace dygrag
