#include <gtest/gtest.h>

#include <thread>

#include "lectern/errors.hpp"
#include "lectern/service/bench.hpp"
#include "lectern/service/latency.hpp"
#include "lectern/service/sessions.hpp"
#include "lectern/util/http_transport.hpp"
#include "server_harness.hpp"

using namespace lectern;
using namespace lectern::service;
using lectern::testing::TempDir;
using lectern::testing::TestServer;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kFiveSentences =
    "Gradient descent moves parameters against the gradient direction. "
    "The learning rate scales every single step that the optimiser takes. "
    "Momentum keeps a running average of the recent gradient vectors. "
    "Backpropagation obtains those gradients through the chain rule. "
    "Together these pieces make up most practical training loops today.";

std::shared_ptr<const index::RagStore> fixture_store() {
    index::StubEmbedder e(64);
    auto store = index::add_lecture(index::RagStore{}, lectern::testing::lecture_fixture("lec01"), e, 20.0);
    store = index::add_lecture(store, lectern::testing::lecture_fixture("lec02"), e, 20.0);
    return std::make_shared<const index::RagStore>(std::move(store));
}

class ThrowingModel final : public qa::LanguageModel {
public:
    std::string name() const override { return "throwing"; }
    std::string complete(const std::string&) override { throw AdapterError("llm", "model offline"); }
};

class FlakySynth final : public avatar::Synthesizer {
public:
    FlakySynth(fs::path root, std::size_t bad) : inner_(std::move(root)), bad_(bad) {}
    std::string name() const override { return "flaky"; }
    avatar::SynthResult synthesize(const avatar::SynthRequest& req) override {
        if (req.seq == bad_) throw AdapterError("avatar", "renderer crashed");
        return inner_.synthesize(req);
    }

private:
    avatar::StubSynthesizer inner_;
    std::size_t bad_;
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

class ServiceTest : public ::testing::Test {
protected:
    TempDir tmp;
    std::shared_ptr<const index::RagStore> store = fixture_store();
};

}  // namespace

TEST_F(ServiceTest, AskReturnsGroundedAnswer) {
    TestServer s(store, tmp.path());
    ConnectionLog::clear();
    auto r = s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "Backpropagation computes gradients with the chain rule."},
                                 {"pause_time", 85.0}});
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    const auto j = body_of(r);
    EXPECT_EQ(j["answer"], "Backpropagation computes gradients with the chain rule.");
    ASSERT_EQ(j["evidence_ids"].size(), 4u);
    EXPECT_EQ(j["evidence_ids"][0], "lec01-0004");
    EXPECT_EQ(j["evidence"][0]["lecture_id"], "lec01");
    for (const auto& e : j["evidence"]) EXPECT_EQ(e["lecture_id"], "lec01");
    EXPECT_TRUE(j["timings"].contains("retrieval"));
    EXPECT_TRUE(j["timings"].contains("llm"));
    EXPECT_FALSE(j["timings"].contains("asr"));
    EXPECT_TRUE(ConnectionLog::snapshot().empty());

    r = s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "rate"}, {"pause_time", 0}, {"config", {{"top_k", 1}}}});
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(body_of(r)["evidence_ids"].size(), 1u);
}

TEST_F(ServiceTest, AskValidation) {
    TestServer s(store, tmp.path());
    auto& c = s.client();
    EXPECT_EQ(c.Post("/api/ask", "{not json", "application/json")->status, 400);
    EXPECT_EQ(s.post("/api/ask", {{"question", "q"}, {"pause_time", 1}})->status, 422);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "nope"}, {"question", "q"}, {"pause_time", 1}})->status, 404);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "  "}, {"pause_time", 1}})->status, 422);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}, {"pause_time", -3}})->status, 422);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}})->status, 422);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}, {"pause_time", 1},
                                  {"config", {{"top_k", 50}}}})->status,
              422);
    EXPECT_EQ(s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}, {"pause_time", 1},
                                  {"config", {{"gamma", 1}}}})->status,
              422);
}

TEST_F(ServiceTest, LlmFailureIs502WithStage) {
    TestServer::Overrides o;
    o.llm = std::make_unique<ThrowingModel>();
    TestServer s(store, tmp.path(), std::move(o));
    const auto r = s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}, {"pause_time", 1}});
    ASSERT_EQ(r->status, 502);
    EXPECT_EQ(body_of(r)["stage"], "llm");
}

TEST_F(ServiceTest, VoiceQueries) {
    TestServer s(store, tmp.path());
    auto& c = s.client();
    auto send = [&](const std::string& audio) {
        httplib::MultipartFormDataItems items = {{"audio", audio, "q.wav", "audio/wav"},
                                                 {"lecture_id", "lec01", "", ""},
                                                 {"pause_time", "80", "", ""}};
        return c.Post("/api/voice", items);
    };
    auto r = send(lectern::testing::speech_fixture());
    ASSERT_EQ(r->status, 200) << r->body;
    auto j = body_of(r);
    EXPECT_EQ(j["transcript"], lectern::testing::kSpeechTranscript);
    EXPECT_FALSE(j["answer"].get<std::string>().empty());
    EXPECT_TRUE(j["timings"].contains("asr"));

    r = send(lectern::testing::silence_fixture());
    ASSERT_EQ(r->status, 200);
    j = body_of(r);
    EXPECT_EQ(j["no_speech"], true);
    EXPECT_FALSE(j.contains("answer"));

    const auto speech = lectern::testing::speech_fixture();
    EXPECT_EQ(send(speech.substr(0, speech.size() / 2))->status, 415);
    EXPECT_EQ(send("RIFF....WAVEjunk")->status, 415);

    httplib::MultipartFormDataItems missing = {{"lecture_id", "lec01", "", ""}, {"pause_time", "1", "", ""}};
    EXPECT_EQ(c.Post("/api/voice", missing)->status, 422);
}

TEST_F(ServiceTest, AvatarSessionLifecycle) {
    TestServer s(store, tmp.path());
    auto r = s.post("/api/avatar", {{"lecture_id", "lec01"}, {"answer_text", kFiveSentences}});
    ASSERT_EQ(r->status, 200) << r->body;
    auto j = body_of(r);
    const std::string sid = j["session_id"];
    ASSERT_EQ(sid.size(), 32u);
    ASSERT_EQ(j["segments"].size(), 5u);

    // Segment 4 is outside the preload window and not yet due.
    r = s.client().Get("/api/avatar/" + sid + "/4");
    EXPECT_EQ(r->status, 202);
    EXPECT_EQ(r->get_header_value("Retry-After"), "1");

    r = s.wait_for_clip(sid, 0);
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Content-Type"), "video/mp4");
    EXPECT_EQ(r->body.substr(4, 4), "ftyp");

    httplib::Headers range = {{"Range", "bytes=0-3"}};
    r = s.client().Get("/api/avatar/" + sid + "/0", range);
    EXPECT_EQ(r->status, 206);
    EXPECT_EQ(r->body.size(), 4u);

    EXPECT_EQ(s.post("/api/avatar/" + sid + "/played", {{"seq", 2}})->status, 409);
    r = s.post("/api/avatar/" + sid + "/played", {{"seq", 0}});
    ASSERT_EQ(r->status, 200) << r->body;
    EXPECT_EQ(body_of(r)["requested"], json::array({2}));
    j = body_of(s.client().Get("/api/avatar/" + sid + "/events"));
    bool saw_request_2 = false;
    for (const auto& e : j["events"]) saw_request_2 |= e["kind"] == "request_synth" && e["seq"] == 2;
    EXPECT_TRUE(saw_request_2);

    EXPECT_EQ(s.client().Get("/api/avatar/" + sid + "/99")->status, 404);
    EXPECT_EQ(s.client().Get("/api/avatar/0123456789abcdef0123456789abcdef/0")->status, 404);
    EXPECT_EQ(s.post("/api/avatar", {{"session_id", "0123456789abcdef0123456789abcdef"}, {"answer_text", "x"}})->status,
              404);

    const auto dir = avatar::session_dir(tmp.path(), sid);
    EXPECT_TRUE(fs::exists(dir));
    r = s.post("/api/cleanup", {{"session_id", sid}});
    ASSERT_EQ(r->status, 200);
    EXPECT_GE(body_of(r)["deleted"].get<int>(), 1);
    EXPECT_FALSE(fs::exists(dir));
    r = s.post("/api/cleanup", {{"session_id", sid}});
    EXPECT_EQ(body_of(r)["deleted"], 0);
    EXPECT_EQ(s.client().Get("/api/avatar/" + sid + "/events")->status, 404);
}

TEST_F(ServiceTest, FailedSegmentIsGone) {
    TestServer::Overrides o;
    o.synth = std::make_unique<FlakySynth>(tmp.path(), 1);
    TestServer s(store, tmp.path(), std::move(o));
    const auto j = body_of(s.post("/api/avatar", {{"answer_text", kFiveSentences}}));
    const std::string sid = j["session_id"];
    EXPECT_EQ(s.wait_for_clip(sid, 1)->status, 410);
    EXPECT_EQ(s.wait_for_clip(sid, 0)->status, 200);
}

TEST_F(ServiceTest, LectureAndHealth) {
    TestServer s(store, tmp.path());
    auto r = s.client().Get("/api/lecture/lec02");
    ASSERT_EQ(r->status, 200);
    auto j = body_of(r);
    EXPECT_EQ(j["segments"], 6);
    EXPECT_EQ(j["duration"], 120.0);
    EXPECT_EQ(j["metadata"]["lecture_ids"].size(), 2u);
    EXPECT_EQ(s.client().Get("/api/lecture/lec09")->status, 404);

    j = body_of(s.client().Get("/api/health"));
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["adapters"]["llm"], "ok");
}

TEST_F(ServiceTest, HealthDegradedWhenAdapterUnreachable) {
    TestServer::Overrides o;
    o.llm = std::make_unique<qa::HttpLanguageModel>(parse_endpoint("http://127.0.0.1:1/complete"), 100,
                                                    std::chrono::milliseconds(200));
    TestServer s(store, tmp.path(), std::move(o));
    const auto j = body_of(s.client().Get("/api/health"));
    EXPECT_EQ(j["status"], "degraded");
    EXPECT_NE(j["adapters"]["llm"].get<std::string>().find("degraded"), std::string::npos);
    const auto r = s.post("/api/ask", {{"lecture_id", "lec01"}, {"question", "q"}, {"pause_time", 1}});
    EXPECT_EQ(r->status, 502);
    EXPECT_EQ(body_of(r)["stage"], "llm");
}

TEST(Sessions, IdleSessionsExpire) {
    TempDir tmp;
    avatar::ManualClock clock;
    avatar::StubSynthesizer synth(tmp.path());
    SessionManager mgr(tmp.path(), synth, AvatarConfig{}, std::chrono::seconds(60), clock);
    auto a = mgr.create();
    auto b = mgr.create();
    a->start_plan({"first clip text", "second clip text"});
    b->start_plan({"other session"});
    const auto dir_a = avatar::session_dir(tmp.path(), a->id());
    for (int i = 0; i < 500 && !(a->media(0).state == MediaLookup::State::ready); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    EXPECT_TRUE(fs::exists(dir_a));

    clock.advance(std::chrono::seconds(30));
    ASSERT_TRUE(mgr.find(b->id()));  // touches b
    clock.advance(std::chrono::seconds(31));
    EXPECT_EQ(mgr.expire_idle(), 1u);
    EXPECT_FALSE(mgr.find(a->id()));
    EXPECT_TRUE(mgr.find(b->id()));
    EXPECT_FALSE(fs::exists(dir_a));
    EXPECT_EQ(mgr.cleanup("unknown").deleted, 0u);
    EXPECT_NE(new_session_id(), new_session_id());
}

TEST(Config, ParsesAndRejects) {
    const auto cfg = parse_config(json::parse(R"({
        "port": 9000, "session_ttl_seconds": 60,
        "retrieval": {"lambda": 0.2, "top_K": 10, "top_k": 3},
        "avatar": {"lookahead": 3, "workers": 1},
        "adapters": {"llm": {"kind": "http", "url": "http://127.0.0.1:8081/complete"},
                     "asr": {"kind": "stub", "table": {"00000000000000ff": {"text": "hi"}}}}
    })"));
    EXPECT_EQ(cfg.port, 9000);
    EXPECT_EQ(cfg.session_ttl, std::chrono::seconds(60));
    EXPECT_EQ(cfg.retrieval.top_K, 10u);
    EXPECT_EQ(cfg.avatar.lookahead, 3u);
    EXPECT_EQ(cfg.llm.kind, "http");
    EXPECT_THROW(parse_config(json::parse(R"({"prot": 1})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"retrieval": {"top_k": 30}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"adapters": {"llm": {"kind": "http"}}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"adapters": {"llm": {"kind": "gpt"}}})")), ConfigError);
    EXPECT_THROW(builtin_embedder("mystery", 8), ConfigError);
    EXPECT_THROW(parse_endpoint("ftp://x"), ConfigError);
}

TEST(Latency, ReportAndPercentiles) {
    LatencyReport r;
    r.set(Stage::llm, 0.5);
    const auto j = r.to_json();
    EXPECT_EQ(j.size(), 1u);
    EXPECT_EQ(j["llm"], 0.5);
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(i);
    const auto p = percentiles(xs);
    EXPECT_EQ(p.count, 100u);
    EXPECT_EQ(p.p50, 50.0);
    EXPECT_EQ(p.p95, 95.0);
    EXPECT_EQ(p.p99, 99.0);
    EXPECT_EQ(percentiles({}).count, 0u);
}

TEST(Bench, SyntheticStoreAndReport) {
    const auto store = make_synthetic_store(400, 32, 3, 100);
    EXPECT_EQ(store.size(), 400u);
    EXPECT_EQ(store.metadata().lecture_ids.size(), 4u);
    index::StubEmbedder e(32);
    qa::EchoLanguageModel llm;
    BenchOptions opts;
    opts.queries = 20;
    const auto report = run_bench(store, e, llm, opts);
    EXPECT_EQ(report.total.count, 20u);
    EXPECT_EQ(report.stages.count(Stage::retrieval), 1u);
    EXPECT_EQ(report.stages.count(Stage::asr), 0u);
    const auto table = format_bench(report);
    EXPECT_NE(table.find("retrieval"), std::string::npos);
    EXPECT_NE(table.find("n/a"), std::string::npos);
}
