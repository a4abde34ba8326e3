#include <gtest/gtest.h>

#include "lectern/avatar/cleanup.hpp"
#include "lectern/avatar/scheduler.hpp"
#include "lectern/avatar/sentences.hpp"
#include "lectern/avatar/simulation.hpp"
#include "lectern/avatar/synth.hpp"
#include "lectern/errors.hpp"
#include "lectern/qa/wav.hpp"
#include "lectern/util/text.hpp"
#include "test_support.hpp"

using namespace lectern;
using namespace lectern::avatar;
using lectern::testing::ScriptedSynthesizer;
using lectern::testing::TempDir;
using lectern::testing::TraceSegment;
using Seqs = std::vector<std::size_t>;

namespace {

std::vector<TraceSegment> uniform_trace(std::size_t n, int latency_ms, int duration_ms) {
    return std::vector<TraceSegment>(n, TraceSegment{Millis{latency_ms}, Millis{duration_ms}, false});
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
    return out;
}

}  // namespace

TEST(SplitSentences, Examples) {
    EXPECT_EQ(split_sentences("A. B! C?"), (std::vector<std::string>{"A. B! C?"}));
    const std::string one = "A single long sentence without any terminator that goes on and on";
    EXPECT_EQ(split_sentences(one), (std::vector<std::string>{one}));
    EXPECT_EQ(split_sentences("Filtered backprojection applies a ramp filter. Then projections are smeared back "
                              "across the image grid."),
              (std::vector<std::string>{"Filtered backprojection applies a ramp filter.",
                                        "Then projections are smeared back across the image grid."}));
}

TEST(SplitSentences, AbbreviationsAndClosers) {
    EXPECT_EQ(sentence_units("See Fig. 3 and e.g. the table. Dr. Smith agrees."),
              (std::vector<std::string>{"See Fig. 3 and e.g. the table.", "Dr. Smith agrees."}));
    EXPECT_EQ(sentence_units("He said \"stop.\" Then left!? Ok"),
              (std::vector<std::string>{"He said \"stop.\"", "Then left!?", "Ok"}));
    EXPECT_EQ(sentence_units("Version 2.5 is out."), (std::vector<std::string>{"Version 2.5 is out."}));
}

TEST(SplitSentences, ShortTailJoinsPrevious) {
    const auto segs = split_sentences("This first sentence is comfortably longer than forty chars. Short end.");
    EXPECT_EQ(segs, (std::vector<std::string>{"This first sentence is comfortably longer than forty chars. Short end."}));
}

TEST(SplitSentences, JoinReconstructsInput) {
    std::mt19937_64 rng(4);
    const std::vector<std::string> words = {"alpha", "beta.", "gamma!", "delta?", "e.g.", "Fig.", "(eps.)", "zeta"};
    for (int round = 0; round < 300; ++round) {
        std::string text;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) text += words[rng() % words.size()] + std::string(1 + rng() % 2, ' ');
        const auto segs = split_sentences(text);
        EXPECT_EQ(join(segs), normalize_whitespace(text));
        for (std::size_t i = 0; i + 1 < segs.size(); ++i) EXPECT_GE(segs[i].size(), kMinSegmentChars);
    }
}

TEST(PlanPlayback, FiveSegmentTrace) {
    PlaybackScheduler s(plan_playback(lectern::testing::segment_texts(5), 2, 2));
    EXPECT_EQ(s.start(Millis{0}), (Seqs{0, 1}));
    s.on_synth_ready(0, "m0", 1.0, Millis{10});
    s.on_synth_ready(1, "m1", 1.0, Millis{10});
    EXPECT_EQ(s.next_to_play(), std::optional<std::size_t>{0});
    EXPECT_EQ(s.on_play_start(0, Millis{10}), (Seqs{2}));
    EXPECT_EQ(s.on_play_end(0, Millis{20}), Seqs{});
    EXPECT_EQ(s.on_play_start(1, Millis{20}), (Seqs{3}));
    s.on_synth_ready(2, "m2", 1.0, Millis{25});
    EXPECT_EQ(s.on_play_start(2, Millis{30}), (Seqs{4}));
    EXPECT_EQ(s.plan().segments[1].status, SegmentStatus::done);
    EXPECT_EQ(s.plan().playing_index, std::optional<std::size_t>{2});
}

TEST(PlanPlayback, SingleSegmentAndEmpty) {
    PlaybackScheduler s(plan_playback({"only"}, 2, 2));
    EXPECT_EQ(s.start(Millis{0}), (Seqs{0}));
    EXPECT_THROW(plan_playback({}), ContractError);
}

TEST(PlanPlayback, LookaheadZeroIsSerial) {
    PlaybackScheduler s(plan_playback(lectern::testing::segment_texts(5), 0, 2));
    EXPECT_EQ(s.start(Millis{0}), (Seqs{0}));
    for (std::size_t i = 0; i < 5; ++i) {
        s.on_synth_ready(i, "m", 1.0, Millis{0});
        EXPECT_EQ(s.on_play_start(i, Millis{0}), Seqs{});
        EXPECT_EQ(s.in_flight_beyond_turn(), 0u);
        const auto next = s.on_play_end(i, Millis{0});
        if (i + 1 < 5) {
            EXPECT_EQ(next, (Seqs{i + 1}));
        } else {
            EXPECT_TRUE(next.empty());
        }
    }
    EXPECT_TRUE(s.finished());
}

TEST(PlanPlayback, IllegalReportsRejected) {
    PlaybackScheduler s(plan_playback(lectern::testing::segment_texts(3)));
    EXPECT_THROW(s.on_play_start(0, Millis{0}), ContractError);
    s.start(Millis{0});
    EXPECT_THROW(s.on_play_start(0, Millis{0}), ContractError);  // not ready
    s.on_synth_ready(0, "m0", 1, Millis{1});
    s.on_synth_ready(1, "m1", 1, Millis{1});
    EXPECT_THROW(s.on_play_start(1, Millis{1}), ContractError);  // out of order
    EXPECT_THROW(s.on_synth_ready(0, "again", 1, Millis{1}), ContractError);
    s.on_play_start(0, Millis{1});
    // A start of the next segment implicitly ends the current one.
    s.on_play_start(1, Millis{2});
    EXPECT_EQ(s.plan().segments[0].status, SegmentStatus::done);
    EXPECT_THROW(s.on_play_end(0, Millis{3}), ContractError);
}

TEST(PlanPlayback, MediaRefOnlyWhenPlayable) {
    PlaybackScheduler s(plan_playback(lectern::testing::segment_texts(3)));
    s.start(Millis{0});
    s.on_synth_ready(0, "m0", 1, Millis{1});
    s.on_synth_failed(1, Millis{1});
    for (const auto& seg : s.plan().segments) {
        const bool playable = seg.status == SegmentStatus::ready || seg.status == SegmentStatus::playing ||
                              seg.status == SegmentStatus::done;
        EXPECT_EQ(seg.media_ref.has_value(), playable) << seg.seq;
    }
}

TEST(RunSchedule, FailedSegmentSkipped) {
    auto trace = uniform_trace(4, 1000, 3000);
    trace[2].fails = true;
    ScriptedSynthesizer synth(trace);
    ManualClock clock;
    const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(4)), synth, clock);
    EXPECT_EQ(r.play_order, (Seqs{0, 1, 3}));
    const auto skip = std::find_if(r.events.begin(), r.events.end(),
                                   [](const ScheduleEvent& e) { return e.kind == EventKind::failed_skip; });
    ASSERT_NE(skip, r.events.end());
    EXPECT_EQ(skip->seq, 2u);
    EXPECT_EQ(r.final_plan.segments[2].status, SegmentStatus::failed);
}

TEST(RunSchedule, NoStallWhenSynthesisKeepsUp) {
    ScriptedSynthesizer synth(uniform_trace(5, 1000, 3000));
    ManualClock clock;
    const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(5)), synth, clock);
    EXPECT_TRUE(r.stalls.empty());
    EXPECT_EQ(r.play_order, (Seqs{0, 1, 2, 3, 4}));
    // Frozen from the event-queue oracle: playback starts at 1 s and runs
    // back to back for 5 x 3 s.
    EXPECT_EQ(clock.now(), Millis{16000});
    const auto oracle = lectern::testing::schedule_oracle(uniform_trace(5, 1000, 3000), 2, 2, 2);
    EXPECT_EQ(lectern::testing::sorted_events(r.events), oracle.events);
}

TEST(RunSchedule, SlowSynthesisMatchesOracle) {
    const auto trace = uniform_trace(5, 8000, 3000);
    ScriptedSynthesizer synth(trace);
    ManualClock clock;
    const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(5)), synth, clock);
    const auto oracle = lectern::testing::schedule_oracle(trace, 2, 2, 2);
    EXPECT_EQ(lectern::testing::sorted_events(r.events), oracle.events);
    EXPECT_EQ(r.stalls, oracle.stalls);
    EXPECT_FALSE(r.stalls.empty());
}

TEST(RunSchedule, StartupBound) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
        std::vector<TraceSegment> trace;
        const std::size_t n = 1 + rng() % 8;
        for (std::size_t s = 0; s < n; ++s) trace.push_back({Millis{100 + static_cast<int>(rng() % 5000)}, Millis{1000}, false});
        ScriptedSynthesizer synth(trace);
        ManualClock clock;
        const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(n)), synth, clock);
        std::optional<Millis> ready0, start0;
        for (const auto& e : r.events) {
            if (e.seq == 0 && e.kind == EventKind::ready) ready0 = e.time;
            if (e.seq == 0 && e.kind == EventKind::play_start) start0 = e.time;
        }
        ASSERT_TRUE(ready0 && start0);
        EXPECT_EQ(*start0, *ready0);
        EXPECT_EQ(*start0, trace[0].latency);
    }
}

TEST(RunSchedule, AllFailedStillCleanable) {
    TempDir tmp;
    auto trace = uniform_trace(3, 500, 1000);
    for (auto& t : trace) t.fails = true;
    ScriptedSynthesizer synth(trace, tmp.path());
    ManualClock clock;
    TempResourceRegistry reg{"sim", session_dir(tmp.path(), "sim"), {}};
    ScheduleOptions opts;
    opts.registry = &reg;
    const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(3)), synth, clock, opts);
    EXPECT_TRUE(r.play_order.empty());
    cleanup_session(reg);
    EXPECT_FALSE(std::filesystem::exists(session_dir(tmp.path(), "sim")));
}

TEST(RunSchedule, RandomTracesMatchOracle) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 1 + rng() % 12;
        const std::size_t la = rng() % 4, pre = rng() % 5, workers = 1 + rng() % 3;
        std::vector<TraceSegment> trace;
        for (std::size_t s = 0; s < n; ++s) {
            trace.push_back({Millis{static_cast<int>(rng() % 6000)}, Millis{500 + static_cast<int>(rng() % 4000)},
                             rng() % 8 == 0});
        }
        ScriptedSynthesizer synth(trace);
        ManualClock clock;
        ScheduleOptions opts;
        opts.workers = workers;
        const auto r = run_schedule(plan_playback(lectern::testing::segment_texts(n), la, pre), synth, clock, opts);
        const auto oracle = lectern::testing::schedule_oracle(trace, la, pre, workers);
        ASSERT_EQ(lectern::testing::sorted_events(r.events), oracle.events) << "round " << round;
        EXPECT_EQ(r.stalls, oracle.stalls);
        EXPECT_EQ(r.play_order, oracle.play_order);
        EXPECT_LE(r.max_in_flight_beyond_turn, la);
    }
}

TEST(StallIntervals, CountsOnlyAfterFirstStart) {
    const std::vector<ScheduleEvent> ev = {
        {Millis{0}, EventKind::request_synth, 0}, {Millis{900}, EventKind::play_start, 0},
        {Millis{1000}, EventKind::play_end, 0},   {Millis{1500}, EventKind::play_start, 1},
        {Millis{2000}, EventKind::play_end, 1},   {Millis{2000}, EventKind::play_start, 2},
    };
    EXPECT_EQ(stall_intervals(ev), (std::vector<StallInterval>{{1, Millis{1000}, Millis{1500}}}));
}

TEST(Cleanup, DeletesIdempotentlyAndTolerates) {
    TempDir tmp;
    const auto root = tmp.path() / "alive" / "s1";
    std::filesystem::create_directories(root);
    TempResourceRegistry reg{"s1", root, {}};
    for (int i = 0; i < 3; ++i) {
        const auto p = root / ("seg_" + std::to_string(i) + ".mp4");
        lectern::testing::write_file(p, "x");
        reg.paths.insert(p.string());
    }
    auto copy = reg;
    auto report = cleanup_session(reg);
    EXPECT_EQ(report.deleted, 3u);
    EXPECT_TRUE(reg.paths.empty());
    EXPECT_FALSE(std::filesystem::exists(root));
    report = cleanup_session(reg);
    EXPECT_EQ(report.deleted, 0u);

    std::filesystem::create_directories(root);
    for (const auto& p : copy.paths) lectern::testing::write_file(p, "x");
    std::filesystem::remove(*copy.paths.begin());
    report = cleanup_session(copy);
    EXPECT_EQ(report.deleted, 2u);
    EXPECT_EQ(report.already_absent, 1u);
}

TEST(Cleanup, UndeletableObjectBecomesWarning) {
    TempDir tmp;
    const auto stubborn = tmp.path() / "dir";
    std::filesystem::create_directories(stubborn / "child");
    TempResourceRegistry reg{"s", {}, {stubborn.string()}};
    const auto report = cleanup_session(reg);
    EXPECT_EQ(report.warnings.size(), 1u);
    EXPECT_TRUE(reg.paths.empty());
}

TEST(StubSynth, WritesPlaceholderClip) {
    TempDir tmp;
    StubSynthesizer synth(tmp.path());
    const auto r = synth.synthesize({"abc123", 4, "twenty characters!!!"});
    EXPECT_EQ(r.media_ref, segment_media_path(tmp.path(), "abc123", 4).string());
    EXPECT_DOUBLE_EQ(r.duration, 20 * kStubSecondsPerChar);
    const auto bytes = lectern::testing::read_file(r.media_ref);
    EXPECT_EQ(bytes.substr(4, 4), "ftyp");
    EXPECT_EQ(bytes.substr(24, 4), "mdat");
    const auto pcm = qa::decode_wav(std::string_view(bytes).substr(28));
    EXPECT_NEAR(pcm.duration_seconds(), r.duration, 1e-4);
    EXPECT_THROW(session_dir(tmp.path(), "../escape"), ContractError);
}
