#include "lectern/service/server.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "lectern/avatar/sentences.hpp"
#include "lectern/errors.hpp"
#include "lectern/qa/qa.hpp"
#include "lectern/service/latency.hpp"
#include "lectern/util/text.hpp"

namespace lectern::service {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message, const std::string& stage = "") {
    json body{{"error", message}};
    if (!stage.empty()) body["stage"] = stage;
    reply(res, status, body);
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) {
            fail(res, 400, "request body must be a JSON object");
            return std::nullopt;
        }
        return j;
    } catch (const json::parse_error& e) {
        fail(res, 400, std::string("invalid JSON: ") + e.what());
        return std::nullopt;
    }
}

json evidence_json(const std::vector<retrieval::ScoredSegment>& evidence) {
    json arr = json::array();
    for (const auto& e : evidence) {
        arr.push_back({{"segment_id", e.segment.segment_id},
                       {"lecture_id", e.segment.lecture_id},
                       {"start", e.segment.start},
                       {"end", e.segment.end},
                       {"text", e.segment.text},
                       {"semantic_score", e.semantic_score},
                       {"adjusted_score", e.adjusted_score}});
    }
    return arr;
}

// Applies {"lambda", "top_K", "top_k"} overrides; throws ConfigError.
retrieval::RetrievalConfig with_overrides(retrieval::RetrievalConfig cfg, const json& body) {
    if (!body.contains("config")) return cfg;
    const auto& o = body["config"];
    if (!o.is_object()) throw ConfigError("config must be an object");
    try {
        for (const auto& [key, value] : o.items()) {
            if (key == "lambda") {
                cfg.lambda = value.get<double>();
            } else if (key == "top_K") {
                cfg.top_K = value.get<std::size_t>();
            } else if (key == "top_k") {
                cfg.top_k = value.get<std::size_t>();
            } else {
                throw ConfigError("unknown config override '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config override: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::optional<double> as_pause_time(const json& v) {
    if (!v.is_number()) return std::nullopt;
    const double t = v.get<double>();
    if (!(t >= 0.0) || !std::isfinite(t)) return std::nullopt;
    return t;
}

std::optional<double> parse_pause_time(const std::string& s) {
    try {
        std::size_t used = 0;
        const double t = std::stod(s, &used);
        if (used != s.size() || !(t >= 0.0) || !std::isfinite(t)) return std::nullopt;
        return t;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("media file missing: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Server::Server(ServiceConfig cfg, std::shared_ptr<const index::RagStore> store, Adapters adapters,
               std::shared_ptr<const avatar::Clock> clock)
    : cfg_(std::move(cfg)),
      store_(std::move(store)),
      adapters_(std::move(adapters)),
      clock_(std::move(clock)),
      http_(std::make_unique<httplib::Server>()) {
    if (!store_) throw ConfigError("server needs a loaded store");
    sessions_ = std::make_unique<SessionManager>(cfg_.temp_root, *adapters_.synth, cfg_.avatar, cfg_.session_ttl,
                                                 *clock_);
    const auto ttl_ms = std::chrono::duration_cast<std::chrono::milliseconds>(cfg_.session_ttl);
    sessions_->start_reaper(std::clamp(ttl_ms / 4, std::chrono::milliseconds(1000), std::chrono::milliseconds(30000)));
    routes();
}

Server::~Server() {
    stop();
    sessions_.reset();
}

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
    if (http_) http_->stop();
}

void Server::wait_until_ready() const { http_->wait_until_ready(); }

void Server::routes() {
    auto& http = *http_;

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            spdlog::error("unhandled error: {}", e.what());
            fail(res, 500, e.what());
        } catch (...) {
            fail(res, 500, "unknown error");
        }
    });

    http.Post("/api/ask", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        if (!body->contains("lecture_id") || !(*body)["lecture_id"].is_string()) {
            return fail(res, 422, "lecture_id (string) is required");
        }
        const std::string lecture = (*body)["lecture_id"];
        if (!store_->has_lecture(lecture)) return fail(res, 404, "unknown lecture '" + lecture + "'");
        const std::string question = body->value("question", std::string());
        if (trim(question).empty()) return fail(res, 422, "question is empty");
        const auto pause = body->contains("pause_time") ? as_pause_time((*body)["pause_time"]) : std::nullopt;
        if (!pause) return fail(res, 422, "pause_time must be a non-negative number of seconds");

        retrieval::RetrievalConfig rcfg;
        try {
            rcfg = with_overrides(cfg_.retrieval, *body);
        } catch (const ConfigError& e) {
            return fail(res, 422, e.what());
        }

        const retrieval::QueryContext ctx{question, *pause, lecture};
        const auto answer = qa::answer_question(*store_, *adapters_.embedder, *adapters_.llm, ctx, rcfg);
        if (!answer.ok()) return fail(res, 502, answer.error->message, answer.error->stage);

        LatencyReport timings;
        timings.set(Stage::retrieval, answer.timings.retrieval);
        timings.set(Stage::llm, answer.timings.llm);
        reply(res, 200,
              {{"answer", answer.text},
               {"evidence", evidence_json(answer.evidence)},
               {"evidence_ids", answer.evidence_ids},
               {"timings", timings.to_json()}});
    });

    http.Post("/api/voice", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("audio")) {
            return fail(res, 422, "multipart field 'audio' is required");
        }
        const std::string lecture = req.has_file("lecture_id") ? req.get_file_value("lecture_id").content : "";
        if (!store_->has_lecture(lecture)) return fail(res, 404, "unknown lecture '" + lecture + "'");
        const auto pause =
            req.has_file("pause_time") ? parse_pause_time(trim(req.get_file_value("pause_time").content)) : std::nullopt;
        if (!pause) return fail(res, 422, "pause_time must be a non-negative number of seconds");

        qa::VoiceQuery voice;
        try {
            voice = qa::transcribe_voice_query(*adapters_.asr, req.get_file_value("audio").content);
        } catch (const FormatError& e) {
            return fail(res, 415, e.what());
        } catch (const AdapterError& e) {
            return fail(res, 502, e.what(), "asr");
        }

        LatencyReport timings;
        timings.set(Stage::asr, voice.seconds);
        if (voice.no_speech) {
            return reply(res, 200, {{"no_speech", true}, {"timings", timings.to_json()}});
        }

        const retrieval::QueryContext ctx{voice.text, *pause, lecture};
        const auto answer = qa::answer_question(*store_, *adapters_.embedder, *adapters_.llm, ctx, cfg_.retrieval);
        if (!answer.ok()) return fail(res, 502, answer.error->message, answer.error->stage);
        timings.set(Stage::retrieval, answer.timings.retrieval);
        timings.set(Stage::llm, answer.timings.llm);
        reply(res, 200,
              {{"transcript", voice.text},
               {"answer", answer.text},
               {"evidence", evidence_json(answer.evidence)},
               {"evidence_ids", answer.evidence_ids},
               {"timings", timings.to_json()}});
    });

    http.Post("/api/avatar", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        const std::string text = body->value("answer_text", std::string());
        if (trim(text).empty()) return fail(res, 422, "answer_text is empty");

        std::shared_ptr<AvatarSession> session;
        if (body->contains("session_id") && !(*body)["session_id"].is_null()) {
            session = sessions_->find(body->value("session_id", std::string()));
            if (!session) return fail(res, 404, "unknown session");
        } else {
            std::optional<std::string> lecture;
            if (body->contains("lecture_id") && (*body)["lecture_id"].is_string()) lecture = (*body)["lecture_id"];
            session = sessions_->create(lecture);
        }

        const auto texts = avatar::split_sentences(text);
        session->start_plan(texts);
        json segs = json::array();
        for (std::size_t i = 0; i < texts.size(); ++i) segs.push_back({{"seq", i}, {"text", texts[i]}});
        reply(res, 200, {{"session_id", session->id()}, {"segments", segs}});
    });

    http.Get(R"(/api/avatar/([0-9a-f]{32})/events)", [this](const httplib::Request& req, httplib::Response& res) {
        auto session = sessions_->find(req.matches[1]);
        if (!session) return fail(res, 404, "unknown session");
        reply(res, 200, session->describe());
    });

    http.Get(R"(/api/avatar/([0-9a-f]{32})/(\d{1,6}))", [this](const httplib::Request& req, httplib::Response& res) {
        auto session = sessions_->find(req.matches[1]);
        if (!session) return fail(res, 404, "unknown session");
        const auto lookup = session->media(std::stoul(req.matches[2]));
        switch (lookup.state) {
            case MediaLookup::State::unknown: return fail(res, 404, "unknown segment");
            case MediaLookup::State::failed: return fail(res, 410, "segment synthesis failed");
            case MediaLookup::State::pending:
                res.set_header("Retry-After", "1");
                return reply(res, 202, {{"status", lookup.status}});
            case MediaLookup::State::ready:
                // Status left unset so the server answers 206 to range requests.
                res.set_content(read_file(lookup.path), "video/mp4");
                return;
        }
    });

    http.Post(R"(/api/avatar/([0-9a-f]{32})/played)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        auto session = sessions_->find(req.matches[1]);
        if (!session) return fail(res, 404, "unknown session");
        if (!body->contains("seq") || !(*body)["seq"].is_number_unsigned()) {
            return fail(res, 422, "seq (non-negative integer) is required");
        }
        const std::string event = body->value("event", std::string("start"));
        if (event != "start" && event != "end") return fail(res, 422, "event must be 'start' or 'end'");
        try {
            const auto requested = session->played((*body)["seq"].get<std::size_t>(), event == "end");
            reply(res, 200, {{"requested", requested}});
        } catch (const ContractError& e) {
            fail(res, 409, e.what());
        }
    });

    http.Post("/api/cleanup", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        const std::string sid = body->value("session_id", std::string());
        const auto report = sessions_->cleanup(sid);
        reply(res, 200,
              {{"deleted", report.deleted}, {"already_absent", report.already_absent}, {"warnings", report.warnings}});
    });

    http.Get(R"(/api/lecture/([A-Za-z0-9._\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string lecture = req.matches[1];
        if (!store_->has_lecture(lecture)) return fail(res, 404, "unknown lecture '" + lecture + "'");
        std::size_t count = 0;
        double duration = 0.0;
        for (const auto& s : store_->segments()) {
            if (s.lecture_id != lecture) continue;
            ++count;
            duration = std::max(duration, s.end);
        }
        const auto& m = store_->metadata();
        reply(res, 200,
              {{"lecture_id", lecture},
               {"segments", count},
               {"duration", duration},
               {"metadata",
                {{"embedder_name", m.embedder_name},
                 {"dimension", m.dimension},
                 {"max_span", m.max_span},
                 {"created_at", m.created_at},
                 {"lecture_ids", m.lecture_ids},
                 {"format_version", m.format_version}}}});
    });

    http.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        json adapters{{"embedder", adapters_.embedder->health()},
                      {"llm", adapters_.llm->health()},
                      {"asr", adapters_.asr->health()},
                      {"synth", adapters_.synth->health()}};
        bool ok = true;
        for (auto& [name, state] : adapters.items()) {
            if (state != "ok") {
                ok = false;
                state = "degraded: " + state.get<std::string>();
            }
        }
        reply(res, 200,
              {{"status", ok ? "ok" : "degraded"},
               {"adapters", adapters},
               {"store", {{"segments", store_->size()}, {"lectures", store_->metadata().lecture_ids}}},
               {"sessions", sessions_->size()}});
    });

    if (cfg_.static_dir) {
        if (!http.set_mount_point("/", cfg_.static_dir->string())) {
            throw ConfigError("static directory not found: " + cfg_.static_dir->string());
        }
    }
}

}  // namespace lectern::service
