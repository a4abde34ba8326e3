#include <csignal>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lectern/errors.hpp"
#include "lectern/index/store.hpp"
#include "lectern/ingest/segments.hpp"
#include "lectern/retrieval/retrieval.hpp"
#include "lectern/service/bench.hpp"
#include "lectern/service/config.hpp"
#include "lectern/service/server.hpp"
#include "lectern/util/text.hpp"

namespace fs = std::filesystem;
using namespace lectern;

namespace {

service::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::string excerpt(const std::string& text, std::size_t width) {
    if (text.size() <= width) return text;
    return qa::truncate_utf8(text, width - 3) + "...";
}

int cmd_ingest(const fs::path& srt, const std::string& lecture, double max_span, const fs::path& out,
               const std::string& embedder_kind, std::size_t dimension) {
    ingest::SegmentationConfig seg{max_span};
    auto result = ingest::ingest_lecture(srt, lecture, seg);
    for (const auto& w : result.warnings) spdlog::warn("{}: {}", srt.string(), w);

    index::RagStore base;
    if (fs::exists(out / "meta.json")) base = index::load_store(out);

    std::unique_ptr<index::Embedder> embedder;
    if (!base.empty()) {
        embedder = service::builtin_embedder(base.metadata().embedder_name, base.metadata().dimension);
    } else {
        service::AdapterSpec spec;
        spec.kind = embedder_kind;
        spec.dimension = dimension;
        embedder = service::make_embedder(spec, dimension);
    }
    const auto store = index::add_lecture(base, result.segments, *embedder, max_span);
    index::save_store(store, out);
    fmt::print("{}: {} segments from {} -> {} ({} segments, {} lectures)\n", lecture, result.segments.size(),
               srt.string(), out.string(), store.size(), store.metadata().lecture_ids.size());
    return 0;
}

int cmd_query(const fs::path& store_dir, const std::string& question, double pause_time,
              const retrieval::RetrievalConfig& cfg, const std::string& lecture) {
    const auto store = index::load_store(store_dir);
    auto embedder = service::builtin_embedder(store.metadata().embedder_name, store.metadata().dimension);
    retrieval::QueryContext ctx{question, pause_time, std::nullopt};
    if (!lecture.empty()) ctx.lecture_id = lecture;
    const auto results = retrieval::retrieve(store, *embedder, ctx, cfg);
    fmt::print("{:<16} {:<13} {:>9} {:>9}  {}\n", "segment_id", "start-end", "d", "d~", "text");
    for (const auto& r : results) {
        fmt::print("{:<16} {:<13} {:>9.4f} {:>9.4f}  {}\n", r.segment.segment_id,
                   format_mm_ss(r.segment.start) + "-" + format_mm_ss(r.segment.end), r.semantic_score,
                   r.adjusted_score, excerpt(r.segment.text, 60));
    }
    if (results.empty()) fmt::print("(no segments)\n");
    return 0;
}

int cmd_serve(const fs::path& store_dir, int port, const std::string& adapters_path, const std::string& bind,
              const std::string& static_dir) {
    service::ServiceConfig cfg = adapters_path.empty() ? service::ServiceConfig{} : service::load_config(adapters_path);
    if (port > 0) cfg.port = port;
    if (!bind.empty()) cfg.bind = bind;
    if (!static_dir.empty()) cfg.static_dir = static_dir;

    if (!fs::exists(store_dir / "meta.json")) {
        throw ConfigError("no store at " + store_dir.string() + "; build one with `lectern ingest --out " +
                          store_dir.string() + " ...`");
    }
    auto store = std::make_shared<const index::RagStore>(index::load_store(store_dir));
    auto adapters = service::make_adapters(cfg, store->metadata());
    service::Server server(cfg, store, std::move(adapters));
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("serving {} segments ({} lectures) on http://{}:{}", store->size(),
                 store->metadata().lecture_ids.size(), cfg.bind, cfg.port);
    const bool ok = server.listen(cfg.bind, cfg.port);
    g_server = nullptr;
    if (!ok) {
        spdlog::error("could not listen on {}:{}", cfg.bind, cfg.port);
        return 1;
    }
    return 0;
}

int cmd_bench(const std::string& store_dir, std::size_t synthetic, std::size_t queries,
              const retrieval::RetrievalConfig& cfg, bool with_avatar) {
    index::RagStore store;
    if (synthetic > 0) {
        store = service::make_synthetic_store(synthetic);
    } else {
        if (store_dir.empty()) throw ConfigError("bench needs --store <dir> or --synthetic <n>");
        if (!fs::exists(fs::path(store_dir) / "meta.json")) throw ConfigError("no store at " + store_dir);
        store = index::load_store(store_dir);
    }
    auto embedder = service::builtin_embedder(store.metadata().embedder_name, store.metadata().dimension);
    qa::EchoLanguageModel llm;
    service::BenchOptions opts;
    opts.queries = queries;
    opts.retrieval = cfg;
    opts.temp_root = fs::temp_directory_path();
    std::unique_ptr<avatar::StubSynthesizer> synth;
    if (with_avatar) {
        synth = std::make_unique<avatar::StubSynthesizer>(opts.temp_root);
        opts.synth = synth.get();
    }
    const auto report = service::run_bench(store, *embedder, llm, opts);
    fmt::print("{} queries over {} segments (d={})\n", queries, store.size(), store.metadata().dimension);
    fmt::print("{}", service::format_bench(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Timestamp-aware lecture question answering engine"};
    app.require_subcommand(1);

    std::string srt, lecture_id, out, embedder_kind = "hashed-bow";
    double max_span = 20.0;
    std::size_t dimension = 384;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse an SRT file, segment it and add it to a store");
    ingest_cmd->add_option("--srt", srt, "SRT subtitle file")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--lecture-id", lecture_id, "Lecture slug used as segment id prefix")->required();
    ingest_cmd->add_option("--max-span", max_span, "Maximum segment span in seconds")->capture_default_str();
    ingest_cmd->add_option("--out", out, "Store directory (created or extended)")->required();
    ingest_cmd->add_option("--embedder", embedder_kind, "Built-in embedder for a new store")
        ->check(CLI::IsMember({"stub", "hashed-bow"}))
        ->capture_default_str();
    ingest_cmd->add_option("--dimension", dimension, "Embedding dimension for a new store")->capture_default_str();

    std::string store_dir, question, lecture;
    double pause_time = 0.0;
    retrieval::RetrievalConfig rcfg;
    auto add_retrieval_options = [&](CLI::App* cmd) {
        cmd->add_option("--lambda", rcfg.lambda, "Score penalty per minute from the pause time")->capture_default_str();
        cmd->add_option("--top-K", rcfg.top_K, "Semantic candidates")->capture_default_str();
        cmd->add_option("--top-k", rcfg.top_k, "Segments kept after rescoring")->capture_default_str();
    };
    auto* query_cmd = app.add_subcommand("query", "Retrieve evidence for a question at a pause time");
    query_cmd->add_option("--store", store_dir, "Store directory")->required();
    query_cmd->add_option("--question", question, "Student question")->required();
    query_cmd->add_option("--pause-time", pause_time, "Lecture position in seconds")->required();
    query_cmd->add_option("--lecture", lecture, "Restrict to one lecture");
    add_retrieval_options(query_cmd);

    int port = 0;
    std::string adapters_path, bind, static_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP service");
    serve_cmd->add_option("--store", store_dir, "Store directory")->required();
    serve_cmd->add_option("--port", port, "Listening port (default from config, else 8080)");
    serve_cmd->add_option("--adapters", adapters_path, "JSON config selecting adapters and defaults");
    serve_cmd->add_option("--bind", bind, "Bind address (default 127.0.0.1)");
    serve_cmd->add_option("--static", static_dir, "Directory of browser assets to serve at /");

    std::size_t queries = 200, synthetic = 0;
    bool with_avatar = false;
    auto* bench_cmd = app.add_subcommand("bench", "Measure per-stage latency percentiles");
    bench_cmd->add_option("--store", store_dir, "Store directory");
    bench_cmd->add_option("--synthetic", synthetic, "Benchmark a generated store with this many segments instead");
    bench_cmd->add_option("--queries", queries, "Number of queries")->capture_default_str();
    bench_cmd->add_flag("--avatar", with_avatar, "Also time stub synthesis of the first answer clip");
    add_retrieval_options(bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) return cmd_ingest(srt, lecture_id, max_span, out, embedder_kind, dimension);
        if (*query_cmd) return cmd_query(store_dir, question, pause_time, rcfg, lecture);
        if (*serve_cmd) return cmd_serve(store_dir, port, adapters_path, bind, static_dir);
        if (*bench_cmd) return cmd_bench(store_dir, synthetic, queries, rcfg, with_avatar);
    } catch (const lectern::Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("unexpected failure: {}", e.what());
        return 3;
    }
    return 0;
}
