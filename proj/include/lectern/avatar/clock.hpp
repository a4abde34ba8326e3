#pragma once

#include <atomic>
#include <chrono>

namespace lectern::avatar {

using Millis = std::chrono::milliseconds;

class Clock {
public:
    virtual ~Clock() = default;
    virtual Millis now() const = 0;
};

/// Monotonic wall clock, zero at construction.
class SteadyClock final : public Clock {
public:
    SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
    Millis now() const override {
        return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - origin_);
    }

private:
    std::chrono::steady_clock::time_point origin_;
};

/// Test and simulation clock; only moves when told to.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Millis start = Millis{0}) : now_(start.count()) {}
    Millis now() const override { return Millis{now_.load()}; }
    void set(Millis t) { now_.store(t.count()); }
    void advance(Millis d) { now_.fetch_add(d.count()); }

private:
    std::atomic<Millis::rep> now_;
};

}  // namespace lectern::avatar
