#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lectern/avatar/clock.hpp"

namespace lectern::avatar {

enum class SegmentStatus { pending, synthesizing, ready, playing, done, failed };

const char* to_string(SegmentStatus s);

struct ResponseSegment {
    std::size_t seq = 0;
    std::string text;
    SegmentStatus status = SegmentStatus::pending;
    std::optional<std::string> media_ref;  // set iff ready, playing or done
    std::optional<double> duration;        // seconds
};

struct PlaybackPlan {
    std::vector<ResponseSegment> segments;
    std::optional<std::size_t> playing_index;  // last segment that started playing
    std::size_t lookahead = 2;
    std::size_t preload_count = 2;
};

/// All segments pending. Throws ContractError on an empty list.
PlaybackPlan plan_playback(const std::vector<std::string>& texts, std::size_t lookahead = 2,
                           std::size_t preload_count = 2);

/// Number of segments requested before playback starts:
/// clamp(preload_count, 1, lookahead + 1), capped at the segment count.
std::size_t effective_preload(const PlaybackPlan& plan);

enum class EventKind { request_synth, ready, play_start, play_end, failed_skip };

const char* to_string(EventKind k);

struct ScheduleEvent {
    Millis time{0};
    EventKind kind = EventKind::request_synth;
    std::size_t seq = 0;

    bool operator==(const ScheduleEvent&) const = default;
};

/// Sequential-playback state machine with progressive preloading.
///
/// The "turn" is the segment currently playing or, between segments, the
/// next one due. Scheduling rules:
///  - start(): request segments [0, effective_preload).
///  - play start of i: request every not-yet-requested segment in (i, i + lookahead].
///  - turn reaches a segment never requested: request it on demand.
///  - turn reaches a failed segment: log failed_skip and move on.
/// Invariant: synthesizing segments with seq > turn never exceed lookahead.
///
/// The scheduler performs no I/O; callers execute the returned synthesis
/// requests and feed results back. Not thread-safe.
class PlaybackScheduler {
public:
    explicit PlaybackScheduler(PlaybackPlan plan);

    std::vector<std::size_t> start(Millis now);
    std::vector<std::size_t> on_synth_ready(std::size_t seq, std::string media_ref, double duration, Millis now);
    std::vector<std::size_t> on_synth_failed(std::size_t seq, Millis now);

    /// `seq` must be ready and every segment between the turn and `seq`
    /// must be finished or failed. A segment still playing is ended
    /// implicitly (clients may report only starts).
    std::vector<std::size_t> on_play_start(std::size_t seq, Millis now);
    std::vector<std::size_t> on_play_end(std::size_t seq, Millis now);

    /// Ask for a segment the client is about to need; only the current turn
    /// or the one right after a playing segment is honoured.
    std::vector<std::size_t> on_demand(std::size_t seq, Millis now);

    /// The turn segment when nothing is playing and it is ready.
    std::optional<std::size_t> next_to_play() const;
    bool finished() const;
    bool started() const { return started_; }

    std::size_t turn() const { return turn_; }
    std::size_t in_flight_beyond_turn() const;

    const PlaybackPlan& plan() const { return plan_; }
    const std::vector<ScheduleEvent>& events() const { return events_; }

private:
    ResponseSegment& segment(std::size_t seq);
    void transition(ResponseSegment& seg, SegmentStatus to);
    void request(std::size_t seq, Millis now, std::vector<std::size_t>& out);
    void advance_turn(Millis now, std::vector<std::size_t>& out);

    PlaybackPlan plan_;
    std::vector<ScheduleEvent> events_;
    std::size_t turn_ = 0;
    bool playing_ = false;
    bool started_ = false;
};

}  // namespace lectern::avatar
