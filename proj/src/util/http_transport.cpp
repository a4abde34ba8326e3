#include "lectern/util/http_transport.hpp"

#include <mutex>
#include <regex>

#include <httplib.h>

#include "lectern/errors.hpp"

namespace lectern {

namespace {

std::mutex g_log_mutex;
std::vector<std::string> g_log;

httplib::Client make_client(const Endpoint& ep, std::chrono::milliseconds timeout) {
    ConnectionLog::record(ep.authority());
    httplib::Client cli(ep.host, ep.port);
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    return cli;
}

nlohmann::json parse_reply(const httplib::Result& res, const Endpoint& ep, const std::string& stage) {
    if (!res) {
        throw AdapterError(stage, "adapter " + ep.authority() + " unreachable: " +
                                      httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw AdapterError(stage, "adapter " + ep.authority() + " returned HTTP " +
                                      std::to_string(res->status));
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw AdapterError(stage, "adapter " + ep.authority() + " sent invalid JSON: " + e.what());
    }
}

}  // namespace

std::string Endpoint::authority() const { return host + ":" + std::to_string(port); }

bool Endpoint::is_loopback() const {
    return host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

Endpoint parse_endpoint(const std::string& url) {
    static const std::regex re(R"(^(http)://([A-Za-z0-9.\-]+|\[[0-9a-fA-F:]+\])(?::(\d{1,5}))?(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw ConfigError("unsupported adapter URL '" + url + "' (expected http://host[:port]/path)");
    }
    Endpoint ep;
    ep.scheme = m[1];
    ep.host = m[2];
    if (ep.host.front() == '[') ep.host = ep.host.substr(1, ep.host.size() - 2);
    ep.port = m[3].matched ? std::stoi(m[3]) : 80;
    ep.path = m[4].matched ? std::string(m[4]) : "/";
    if (ep.port <= 0 || ep.port > 65535) throw ConfigError("adapter URL port out of range: " + url);
    return ep;
}

void ConnectionLog::record(const std::string& authority) {
    std::lock_guard lock(g_log_mutex);
    g_log.push_back(authority);
}

std::vector<std::string> ConnectionLog::snapshot() {
    std::lock_guard lock(g_log_mutex);
    return g_log;
}

void ConnectionLog::clear() {
    std::lock_guard lock(g_log_mutex);
    g_log.clear();
}

nlohmann::json post_json(const Endpoint& ep, const nlohmann::json& body, const std::string& stage,
                         const HttpOptions& opts) {
    auto cli = make_client(ep, opts.timeout);
    auto res = cli.Post(ep.path, body.dump(), "application/json");
    return parse_reply(res, ep, stage);
}

nlohmann::json post_multipart_file(const Endpoint& ep, const std::string& field,
                                   const std::string& filename, const std::string& content_type,
                                   const std::string& bytes, const std::string& stage,
                                   const HttpOptions& opts) {
    auto cli = make_client(ep, opts.timeout);
    httplib::MultipartFormDataItems items = {{field, bytes, filename, content_type}};
    auto res = cli.Post(ep.path, items);
    return parse_reply(res, ep, stage);
}

std::string get_bytes(const Endpoint& ep, const std::string& stage, const HttpOptions& opts) {
    auto cli = make_client(ep, opts.timeout);
    auto res = cli.Get(ep.path);
    if (!res) {
        throw AdapterError(stage, "media fetch from " + ep.authority() + " failed: " +
                                      httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw AdapterError(stage, "media fetch from " + ep.authority() + " returned HTTP " +
                                      std::to_string(res->status));
    }
    return res->body;
}

std::string probe(const Endpoint& ep, std::chrono::milliseconds timeout) {
    auto cli = make_client(ep, timeout);
    auto res = cli.Get("/");
    if (!res) return "unreachable: " + httplib::to_string(res.error());
    return "ok";
}

}  // namespace lectern
