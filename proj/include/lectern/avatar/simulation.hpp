#pragma once

#include <vector>

#include "lectern/avatar/cleanup.hpp"
#include "lectern/avatar/clock.hpp"
#include "lectern/avatar/scheduler.hpp"
#include "lectern/avatar/synth.hpp"

namespace lectern::avatar {

struct StallInterval {
    std::size_t before_seq = 0;  // segment whose start ended the stall
    Millis begin{0};
    Millis end{0};

    bool operator==(const StallInterval&) const = default;
};

struct ScheduleOptions {
    std::string session_id = "sim";
    std::size_t workers = 2;                 // concurrent synthesis slots
    TempResourceRegistry* registry = nullptr;  // receives every produced file when set
};

struct ScheduleReport {
    std::vector<ScheduleEvent> events;
    std::vector<StallInterval> stalls;     // waits after the first play_start
    std::vector<std::size_t> play_order;
    std::size_t max_in_flight_beyond_turn = 0;
    PlaybackPlan final_plan;
};

/// Gaps between the end of one segment and the start of the next, counted
/// only after the first play_start.
std::vector<StallInterval> stall_intervals(const std::vector<ScheduleEvent>& events);

/// Play the plan to completion on `clock`.
///
/// Synthesis requests queue FIFO for `workers` slots. A request runs
/// synth.synthesize() when it gets a slot and completes latency_hint()
/// seconds later on the clock (0 when absent); a throwing synthesize()
/// marks the segment failed at that completion time. A segment starts
/// playing as soon as it is the turn and ready, and ends after its duration.
ScheduleReport run_schedule(PlaybackPlan plan, Synthesizer& synth, ManualClock& clock,
                            const ScheduleOptions& options = {});

Millis to_millis(double seconds);

}  // namespace lectern::avatar
