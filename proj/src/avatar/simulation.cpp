#include "lectern/avatar/simulation.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>

#include "lectern/errors.hpp"

namespace lectern::avatar {

Millis to_millis(double seconds) { return Millis{std::llround(std::max(0.0, seconds) * 1000.0)}; }

std::vector<StallInterval> stall_intervals(const std::vector<ScheduleEvent>& events) {
    std::vector<StallInterval> out;
    bool started = false;
    std::optional<Millis> idle_since;
    for (const auto& e : events) {
        if (e.kind == EventKind::play_end) {
            idle_since = e.time;
        } else if (e.kind == EventKind::play_start) {
            if (started && idle_since && e.time > *idle_since) out.push_back({e.seq, *idle_since, e.time});
            started = true;
            idle_since.reset();
        }
    }
    return out;
}

namespace {

struct Outcome {
    std::optional<SynthResult> result;
};

class Simulation {
public:
    Simulation(PlaybackPlan plan, Synthesizer& synth, ManualClock& clock, const ScheduleOptions& opts)
        : sched_(std::move(plan)), synth_(synth), clock_(clock), opts_(opts) {
        if (opts_.workers == 0) throw ContractError("run_schedule: at least one worker is required");
    }

    ScheduleReport run() {
        enqueue(sched_.start(clock_.now()));
        settle();
        while (!timers_.empty()) {
            auto it = timers_.begin();
            const Millis t = it->first.first;
            auto fn = std::move(it->second);
            timers_.erase(it);
            clock_.set(t);
            fn();
            settle();
        }
        if (!sched_.finished()) throw Error("simulation stopped before the plan finished");

        ScheduleReport report;
        report.events = sched_.events();
        report.stalls = stall_intervals(report.events);
        for (const auto& e : report.events) {
            if (e.kind == EventKind::play_start) report.play_order.push_back(e.seq);
        }
        report.max_in_flight_beyond_turn = max_in_flight_;
        report.final_plan = sched_.plan();
        return report;
    }

private:
    void at(Millis t, std::function<void()> fn) { timers_.emplace(std::make_pair(t, next_timer_++), std::move(fn)); }

    void enqueue(const std::vector<std::size_t>& seqs) {
        for (auto s : seqs) queue_.push_back(s);
        observe();
    }

    void observe() { max_in_flight_ = std::max(max_in_flight_, sched_.in_flight_beyond_turn()); }

    // Zero-time work: hand queued requests to free workers and start the
    // turn segment if it is ready.
    void settle() {
        bool progress = true;
        while (progress) {
            progress = false;
            while (busy_ < opts_.workers && !queue_.empty()) {
                const auto seq = queue_.front();
                queue_.pop_front();
                dispatch(seq);
                progress = true;
            }
            if (auto next = sched_.next_to_play()) {
                const auto seq = *next;
                enqueue(sched_.on_play_start(seq, clock_.now()));
                const double duration = sched_.plan().segments[seq].duration.value_or(0.0);
                at(clock_.now() + to_millis(duration), [this, seq] { enqueue(sched_.on_play_end(seq, clock_.now())); });
                progress = true;
            }
        }
        observe();
    }

    void dispatch(std::size_t seq) {
        ++busy_;
        const auto& seg = sched_.plan().segments[seq];
        const SynthRequest req{opts_.session_id, seq, seg.text};
        std::optional<SynthResult> result;
        try {
            result = synth_.synthesize(req);
        } catch (const std::exception&) {
            result.reset();
        }
        if (result && opts_.registry) {
            opts_.registry->paths.insert(result->media_ref);
            for (const auto& f : result->temp_files) opts_.registry->paths.insert(f);
        }
        const Millis latency = to_millis(synth_.latency_hint(req).value_or(0.0));
        at(clock_.now() + latency, [this, seq, result = std::move(result)]() mutable {
            --busy_;
            if (result) {
                enqueue(sched_.on_synth_ready(seq, result->media_ref, result->duration, clock_.now()));
            } else {
                enqueue(sched_.on_synth_failed(seq, clock_.now()));
            }
        });
    }

    PlaybackScheduler sched_;
    Synthesizer& synth_;
    ManualClock& clock_;
    ScheduleOptions opts_;
    std::map<std::pair<Millis, std::uint64_t>, std::function<void()>> timers_;
    std::uint64_t next_timer_ = 0;
    std::deque<std::size_t> queue_;
    std::size_t busy_ = 0;
    std::size_t max_in_flight_ = 0;
};

}  // namespace

ScheduleReport run_schedule(PlaybackPlan plan, Synthesizer& synth, ManualClock& clock, const ScheduleOptions& options) {
    Simulation sim(std::move(plan), synth, clock, options);
    return sim.run();
}

}  // namespace lectern::avatar
