#include "lectern/service/sessions.hpp"

#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lectern/errors.hpp"

namespace lectern::service {

namespace fs = std::filesystem;
using avatar::SegmentStatus;

std::string new_session_id() {
    static std::mutex m;
    static std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::lock_guard lock(m);
    return fmt::format("{:016x}{:016x}", rng(), rng());
}

AvatarSession::AvatarSession(std::string id, std::optional<std::string> lecture_id, fs::path temp_root,
                             avatar::Synthesizer& synth, AvatarConfig cfg, const avatar::Clock& clock)
    : id_(std::move(id)),
      lecture_id_(std::move(lecture_id)),
      temp_root_(std::move(temp_root)),
      synth_(synth),
      cfg_(cfg),
      clock_(clock),
      last_active_(clock.now()) {
    registry_.session_id = id_;
    registry_.root = avatar::session_dir(temp_root_, id_);
}

AvatarSession::~AvatarSession() { close(); }

void AvatarSession::touch() {
    std::lock_guard lock(mutex_);
    last_active_ = clock_.now();
}

avatar::Millis AvatarSession::last_active() const {
    std::lock_guard lock(mutex_);
    return last_active_;
}

void AvatarSession::stop_workers(std::unique_lock<std::mutex>& lock) {
    stop_ = true;
    cv_.notify_all();
    auto workers = std::move(workers_);
    workers_.clear();
    lock.unlock();
    for (auto& w : workers) w.join();
    lock.lock();
    queue_.clear();
}

void AvatarSession::enqueue(const std::vector<std::size_t>& seqs) {
    for (auto s : seqs) queue_.push_back(s);
    if (!seqs.empty()) cv_.notify_all();
}

void AvatarSession::start_plan(const std::vector<std::string>& texts) {
    auto plan = avatar::plan_playback(texts, cfg_.lookahead, cfg_.preload_count);
    std::unique_lock lock(mutex_);
    if (closed_) throw ContractError("session " + id_ + " is closed");
    last_active_ = clock_.now();
    stop_workers(lock);
    if (scheduler_) avatar::cleanup_session(registry_);
    synth_timings_.clear();

    scheduler_.emplace(std::move(plan));
    stop_ = false;
    for (std::size_t i = 0; i < cfg_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
    enqueue(scheduler_->start(clock_.now()));
}

void AvatarSession::worker_loop() {
    std::unique_lock lock(mutex_);
    for (;;) {
        cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
        if (stop_) return;
        const std::size_t seq = queue_.front();
        queue_.pop_front();
        const avatar::SynthRequest req{id_, seq, scheduler_->plan().segments[seq].text};
        lock.unlock();

        std::optional<avatar::SynthResult> result;
        std::string failure;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            result = synth_.synthesize(req);
        } catch (const std::exception& e) {
            failure = e.what();
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        lock.lock();
        if (result) {
            registry_.paths.insert(result->media_ref);
            for (const auto& f : result->temp_files) registry_.paths.insert(f);
            nlohmann::json t{{"total", elapsed}};
            if (result->tts_seconds) t["tts"] = *result->tts_seconds;
            if (result->avatar_seconds) t["avatar"] = *result->avatar_seconds;
            synth_timings_[seq] = std::move(t);
        }
        if (stop_) return;
        try {
            if (result) {
                enqueue(scheduler_->on_synth_ready(seq, result->media_ref, result->duration, clock_.now()));
            } else {
                spdlog::warn("session {}: synthesis of segment {} failed: {}", id_, seq, failure);
                enqueue(scheduler_->on_synth_failed(seq, clock_.now()));
            }
        } catch (const std::exception& e) {
            spdlog::error("session {}: scheduler rejected synthesis result for segment {}: {}", id_, seq, e.what());
        }
    }
}

MediaLookup AvatarSession::media(std::size_t seq) {
    std::lock_guard lock(mutex_);
    last_active_ = clock_.now();
    MediaLookup out;
    if (!scheduler_ || seq >= scheduler_->plan().segments.size()) return out;
    enqueue(scheduler_->on_demand(seq, clock_.now()));
    const auto& seg = scheduler_->plan().segments[seq];
    out.status = avatar::to_string(seg.status);
    switch (seg.status) {
        case SegmentStatus::ready:
        case SegmentStatus::playing:
        case SegmentStatus::done:
            out.state = MediaLookup::State::ready;
            out.path = seg.media_ref.value_or("");
            break;
        case SegmentStatus::failed:
            out.state = MediaLookup::State::failed;
            break;
        default:
            out.state = MediaLookup::State::pending;
    }
    return out;
}

std::vector<std::size_t> AvatarSession::played(std::size_t seq, bool ended) {
    std::lock_guard lock(mutex_);
    last_active_ = clock_.now();
    if (!scheduler_) throw ContractError("session has no avatar plan");
    auto requested = ended ? scheduler_->on_play_end(seq, clock_.now()) : scheduler_->on_play_start(seq, clock_.now());
    enqueue(requested);
    return requested;
}

nlohmann::json AvatarSession::describe() const {
    std::lock_guard lock(mutex_);
    nlohmann::json j{{"session_id", id_}, {"closed", closed_}};
    if (!scheduler_) return j;
    const auto& plan = scheduler_->plan();
    j["lookahead"] = plan.lookahead;
    j["preload_count"] = plan.preload_count;
    j["turn"] = scheduler_->turn();
    j["in_flight_beyond_turn"] = scheduler_->in_flight_beyond_turn();
    auto& segs = j["segments"] = nlohmann::json::array();
    for (const auto& s : plan.segments) {
        nlohmann::json e{{"seq", s.seq}, {"status", avatar::to_string(s.status)}};
        if (s.duration) e["duration"] = *s.duration;
        if (auto it = synth_timings_.find(s.seq); it != synth_timings_.end()) e["synthesis"] = it->second;
        segs.push_back(std::move(e));
    }
    auto& events = j["events"] = nlohmann::json::array();
    for (const auto& e : scheduler_->events()) {
        events.push_back({{"time_ms", e.time.count()}, {"kind", avatar::to_string(e.kind)}, {"seq", e.seq}});
    }
    return j;
}

avatar::CleanupReport AvatarSession::close() {
    std::unique_lock lock(mutex_);
    if (closed_) return {};
    stop_workers(lock);
    closed_ = true;
    return avatar::cleanup_session(registry_);
}

SessionManager::SessionManager(fs::path temp_root, avatar::Synthesizer& synth, AvatarConfig avatar_cfg,
                               std::chrono::seconds ttl, const avatar::Clock& clock)
    : temp_root_(std::move(temp_root)), synth_(synth), avatar_cfg_(avatar_cfg), ttl_(ttl), clock_(clock) {}

SessionManager::~SessionManager() {
    stop_reaper();
    std::map<std::string, std::shared_ptr<AvatarSession>> sessions;
    {
        std::lock_guard lock(mutex_);
        sessions.swap(sessions_);
    }
    for (auto& [_, s] : sessions) s->close();
}

std::shared_ptr<AvatarSession> SessionManager::create(std::optional<std::string> lecture_id) {
    auto s = std::make_shared<AvatarSession>(new_session_id(), std::move(lecture_id), temp_root_, synth_, avatar_cfg_,
                                             clock_);
    std::lock_guard lock(mutex_);
    sessions_.emplace(s->id(), s);
    return s;
}

std::shared_ptr<AvatarSession> SessionManager::find(const std::string& id) {
    std::shared_ptr<AvatarSession> s;
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) return nullptr;
        s = it->second;
    }
    s->touch();
    return s;
}

avatar::CleanupReport SessionManager::cleanup(const std::string& id) {
    std::shared_ptr<AvatarSession> s;
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) return {};
        s = it->second;
        sessions_.erase(it);
    }
    return s->close();
}

std::size_t SessionManager::expire_idle() {
    const auto now = clock_.now();
    std::vector<std::shared_ptr<AvatarSession>> expired;
    {
        std::lock_guard lock(mutex_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (now - it->second->last_active() > ttl_) {
                expired.push_back(it->second);
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (auto& s : expired) {
        const auto report = s->close();
        spdlog::info("session {} expired after idling; {} temporary file(s) removed", s->id(), report.deleted);
    }
    return expired.size();
}

std::size_t SessionManager::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SessionManager::start_reaper(std::chrono::milliseconds interval) {
    stop_reaper();
    {
        std::lock_guard lock(reaper_mutex_);
        reaper_stop_ = false;
    }
    reaper_ = std::thread([this, interval] {
        std::unique_lock lock(reaper_mutex_);
        while (!reaper_cv_.wait_for(lock, interval, [&] { return reaper_stop_; })) {
            lock.unlock();
            expire_idle();
            lock.lock();
        }
    });
}

void SessionManager::stop_reaper() {
    {
        std::lock_guard lock(reaper_mutex_);
        reaper_stop_ = true;
    }
    reaper_cv_.notify_all();
    if (reaper_.joinable()) reaper_.join();
}

}  // namespace lectern::service
