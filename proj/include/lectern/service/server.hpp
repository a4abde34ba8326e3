#pragma once

#include <memory>
#include <string>

#include "lectern/avatar/clock.hpp"
#include "lectern/index/store.hpp"
#include "lectern/service/config.hpp"
#include "lectern/service/sessions.hpp"

namespace httplib {
class Server;
}

namespace lectern::service {

/// JSON-over-HTTP front end for one loaded store.
///
///   POST /api/ask                      {lecture_id, question, pause_time, config?}
///   POST /api/voice                    multipart: audio (WAV), lecture_id, pause_time
///   POST /api/avatar                   {session_id?, lecture_id?, answer_text}
///   GET  /api/avatar/{sid}/{seq}       clip (200, range requests) | 202 pending | 410 failed
///   GET  /api/avatar/{sid}/events      schedule state and event log
///   POST /api/avatar/{sid}/played      {seq, event?: "start" | "end"}
///   POST /api/cleanup                  {session_id}
///   GET  /api/lecture/{id}
///   GET  /api/health
class Server {
public:
    Server(ServiceConfig cfg, std::shared_ptr<const index::RagStore> store, Adapters adapters,
           std::shared_ptr<const avatar::Clock> clock = std::make_shared<avatar::SteadyClock>());
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (or -1); then call listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

    SessionManager& sessions() { return *sessions_; }
    const ServiceConfig& config() const { return cfg_; }

private:
    void routes();

    ServiceConfig cfg_;
    std::shared_ptr<const index::RagStore> store_;
    Adapters adapters_;
    std::shared_ptr<const avatar::Clock> clock_;
    std::unique_ptr<SessionManager> sessions_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace lectern::service
