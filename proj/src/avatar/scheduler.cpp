#include "lectern/avatar/scheduler.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lectern/errors.hpp"

namespace lectern::avatar {

const char* to_string(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::pending: return "pending";
        case SegmentStatus::synthesizing: return "synthesizing";
        case SegmentStatus::ready: return "ready";
        case SegmentStatus::playing: return "playing";
        case SegmentStatus::done: return "done";
        case SegmentStatus::failed: return "failed";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::request_synth: return "request_synth";
        case EventKind::ready: return "ready";
        case EventKind::play_start: return "play_start";
        case EventKind::play_end: return "play_end";
        case EventKind::failed_skip: return "failed_skip";
    }
    return "?";
}

PlaybackPlan plan_playback(const std::vector<std::string>& texts, std::size_t lookahead, std::size_t preload_count) {
    if (texts.empty()) throw ContractError("plan_playback: no segments");
    PlaybackPlan plan;
    plan.lookahead = lookahead;
    plan.preload_count = preload_count;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ResponseSegment seg;
        seg.seq = i;
        seg.text = texts[i];
        plan.segments.push_back(std::move(seg));
    }
    return plan;
}

std::size_t effective_preload(const PlaybackPlan& plan) {
    const std::size_t p = std::clamp<std::size_t>(plan.preload_count, 1, plan.lookahead + 1);
    return std::min(p, plan.segments.size());
}

PlaybackScheduler::PlaybackScheduler(PlaybackPlan plan) : plan_(std::move(plan)) {
    if (plan_.segments.empty()) throw ContractError("playback scheduler: empty plan");
}

ResponseSegment& PlaybackScheduler::segment(std::size_t seq) {
    if (seq >= plan_.segments.size()) {
        throw ContractError(fmt::format("segment {} out of range (plan has {})", seq, plan_.segments.size()));
    }
    return plan_.segments[seq];
}

void PlaybackScheduler::transition(ResponseSegment& seg, SegmentStatus to) {
    const auto from = seg.status;
    const bool legal = to == SegmentStatus::failed
                           ? from != SegmentStatus::failed && from != SegmentStatus::done
                           : static_cast<int>(to) == static_cast<int>(from) + 1 && from != SegmentStatus::failed;
    if (!legal) {
        throw ContractError(fmt::format("segment {}: illegal transition {} -> {}", seg.seq, to_string(from), to_string(to)));
    }
    seg.status = to;
    if (to == SegmentStatus::failed) seg.media_ref.reset();
}

void PlaybackScheduler::request(std::size_t seq, Millis now, std::vector<std::size_t>& out) {
    auto& seg = segment(seq);
    if (seg.status != SegmentStatus::pending) return;
    transition(seg, SegmentStatus::synthesizing);
    events_.push_back({now, EventKind::request_synth, seq});
    out.push_back(seq);
}

void PlaybackScheduler::advance_turn(Millis now, std::vector<std::size_t>& out) {
    while (turn_ < plan_.segments.size()) {
        auto& seg = plan_.segments[turn_];
        if (seg.status == SegmentStatus::failed) {
            events_.push_back({now, EventKind::failed_skip, turn_});
            ++turn_;
            continue;
        }
        if (seg.status == SegmentStatus::pending) request(turn_, now, out);
        break;
    }
}

std::vector<std::size_t> PlaybackScheduler::start(Millis now) {
    if (started_) throw ContractError("playback scheduler already started");
    started_ = true;
    std::vector<std::size_t> out;
    const std::size_t n = effective_preload(plan_);
    for (std::size_t i = 0; i < n; ++i) request(i, now, out);
    return out;
}

std::vector<std::size_t> PlaybackScheduler::on_synth_ready(std::size_t seq, std::string media_ref, double duration,
                                                           Millis now) {
    auto& seg = segment(seq);
    transition(seg, SegmentStatus::ready);
    seg.media_ref = std::move(media_ref);
    seg.duration = duration;
    events_.push_back({now, EventKind::ready, seq});
    return {};
}

std::vector<std::size_t> PlaybackScheduler::on_synth_failed(std::size_t seq, Millis now) {
    transition(segment(seq), SegmentStatus::failed);
    std::vector<std::size_t> out;
    if (!playing_ && seq == turn_) advance_turn(now, out);
    return out;
}

std::vector<std::size_t> PlaybackScheduler::on_play_start(std::size_t seq, Millis now) {
    if (!started_) throw ContractError("playback has not started");
    auto& seg = segment(seq);
    std::vector<std::size_t> out;
    if (playing_) {
        if (seq <= turn_) throw ContractError(fmt::format("segment {} already played", seq));
        auto more = on_play_end(turn_, now);
        out.insert(out.end(), more.begin(), more.end());
    }
    if (seq != turn_) {
        throw ContractError(fmt::format("segment {} cannot play before segment {}", seq, turn_));
    }
    if (seg.status != SegmentStatus::ready) {
        throw ContractError(fmt::format("segment {} is {}, not ready", seq, to_string(seg.status)));
    }
    transition(seg, SegmentStatus::playing);
    playing_ = true;
    plan_.playing_index = seq;
    events_.push_back({now, EventKind::play_start, seq});
    const std::size_t last = std::min(seq + plan_.lookahead, plan_.segments.size() - 1);
    for (std::size_t i = seq + 1; i <= last; ++i) request(i, now, out);
    return out;
}

std::vector<std::size_t> PlaybackScheduler::on_play_end(std::size_t seq, Millis now) {
    if (!playing_ || seq != turn_) throw ContractError(fmt::format("segment {} is not playing", seq));
    transition(segment(seq), SegmentStatus::done);
    playing_ = false;
    events_.push_back({now, EventKind::play_end, seq});
    ++turn_;
    std::vector<std::size_t> out;
    advance_turn(now, out);
    return out;
}

std::vector<std::size_t> PlaybackScheduler::on_demand(std::size_t seq, Millis now) {
    std::vector<std::size_t> out;
    if (!started_ || seq >= plan_.segments.size()) return out;
    if (plan_.segments[seq].status != SegmentStatus::pending) return out;
    if (playing_ && seq == turn_ + 1) {
        // Only reachable with lookahead 0: the client is fetching the next
        // segment, so the current one has finished.
        return on_play_end(turn_, now);
    }
    if (!playing_ && seq == turn_) request(seq, now, out);
    return out;
}

std::optional<std::size_t> PlaybackScheduler::next_to_play() const {
    if (playing_ || turn_ >= plan_.segments.size()) return std::nullopt;
    if (plan_.segments[turn_].status != SegmentStatus::ready) return std::nullopt;
    return turn_;
}

bool PlaybackScheduler::finished() const { return started_ && !playing_ && turn_ >= plan_.segments.size(); }

std::size_t PlaybackScheduler::in_flight_beyond_turn() const {
    return static_cast<std::size_t>(std::count_if(plan_.segments.begin(), plan_.segments.end(), [&](const auto& s) {
        return s.status == SegmentStatus::synthesizing && s.seq > turn_;
    }));
}

}  // namespace lectern::avatar
