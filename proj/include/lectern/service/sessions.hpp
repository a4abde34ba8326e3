#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lectern/avatar/cleanup.hpp"
#include "lectern/avatar/clock.hpp"
#include "lectern/avatar/scheduler.hpp"
#include "lectern/avatar/synth.hpp"
#include "lectern/service/config.hpp"

namespace lectern::service {

/// 128 random bits as 32 lowercase hex digits.
std::string new_session_id();

struct MediaLookup {
    enum class State { ready, pending, failed, unknown } state = State::unknown;
    std::string path;
    std::string status;
};

/// Ephemeral per-student state: the avatar playback schedule, its worker
/// threads and the temporary media they produce. Lives only in memory.
class AvatarSession {
public:
    AvatarSession(std::string id, std::optional<std::string> lecture_id, std::filesystem::path temp_root,
                  avatar::Synthesizer& synth, AvatarConfig cfg, const avatar::Clock& clock);
    ~AvatarSession();

    AvatarSession(const AvatarSession&) = delete;
    AvatarSession& operator=(const AvatarSession&) = delete;

    const std::string& id() const { return id_; }
    const std::optional<std::string>& lecture_id() const { return lecture_id_; }

    /// Replace the current plan (its media are deleted) and start preloading.
    void start_plan(const std::vector<std::string>& texts);

    /// Media for `seq`. Asking for the segment whose turn has come
    /// requests it on demand.
    MediaLookup media(std::size_t seq);

    /// Client report that `seq` started (or, with `ended`, finished)
    /// playing. Returns segments newly requested. Throws ContractError for
    /// out-of-order reports.
    std::vector<std::size_t> played(std::size_t seq, bool ended);

    /// Schedule events, segment statuses and synthesis timings.
    nlohmann::json describe() const;

    /// Stop workers, wait for in-flight synthesis, delete every temporary
    /// file. Safe to call repeatedly.
    avatar::CleanupReport close();

    avatar::Millis last_active() const;
    void touch();

private:
    void stop_workers(std::unique_lock<std::mutex>& lock);
    void worker_loop();
    void enqueue(const std::vector<std::size_t>& seqs);

    const std::string id_;
    const std::optional<std::string> lecture_id_;
    const std::filesystem::path temp_root_;
    avatar::Synthesizer& synth_;
    const AvatarConfig cfg_;
    const avatar::Clock& clock_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<avatar::PlaybackScheduler> scheduler_;
    std::deque<std::size_t> queue_;
    std::vector<std::thread> workers_;
    bool stop_ = false;
    bool closed_ = false;
    avatar::TempResourceRegistry registry_;
    std::map<std::size_t, nlohmann::json> synth_timings_;
    avatar::Millis last_active_{0};
};

/// Owns live sessions and expires idle ones after the TTL.
class SessionManager {
public:
    SessionManager(std::filesystem::path temp_root, avatar::Synthesizer& synth, AvatarConfig avatar_cfg,
                   std::chrono::seconds ttl, const avatar::Clock& clock);
    ~SessionManager();

    std::shared_ptr<AvatarSession> create(std::optional<std::string> lecture_id = std::nullopt);
    std::shared_ptr<AvatarSession> find(const std::string& id);

    /// Unknown ids report zero deletions.
    avatar::CleanupReport cleanup(const std::string& id);

    /// Close sessions idle for longer than the TTL; returns how many.
    std::size_t expire_idle();

    std::size_t size() const;

    void start_reaper(std::chrono::milliseconds interval);
    void stop_reaper();

private:
    std::filesystem::path temp_root_;
    avatar::Synthesizer& synth_;
    AvatarConfig avatar_cfg_;
    std::chrono::seconds ttl_;
    const avatar::Clock& clock_;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<AvatarSession>> sessions_;

    std::mutex reaper_mutex_;
    std::condition_variable reaper_cv_;
    bool reaper_stop_ = false;
    std::thread reaper_;
};

}  // namespace lectern::service
