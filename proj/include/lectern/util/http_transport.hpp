#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lectern {

struct Endpoint {
    std::string scheme;  // "http"
    std::string host;
    int port = 80;
    std::string path = "/";

    std::string authority() const;
    bool is_loopback() const;
};

/// Parses "http://host[:port][/path]". Throws ConfigError on anything else.
Endpoint parse_endpoint(const std::string& url);

/// Every outbound connection made by the engine is recorded here, so the
/// local-only property can be audited.
class ConnectionLog {
public:
    static void record(const std::string& authority);
    static std::vector<std::string> snapshot();
    static void clear();
};

struct HttpOptions {
    std::chrono::milliseconds timeout{30000};
};

/// POST a JSON body and parse a JSON reply. Non-2xx and transport failures
/// throw AdapterError tagged with `stage`.
nlohmann::json post_json(const Endpoint& ep, const nlohmann::json& body, const std::string& stage,
                         const HttpOptions& opts = {});

/// POST a single file part as multipart/form-data.
nlohmann::json post_multipart_file(const Endpoint& ep, const std::string& field,
                                   const std::string& filename, const std::string& content_type,
                                   const std::string& bytes, const std::string& stage,
                                   const HttpOptions& opts = {});

/// Fetch raw bytes (used for adapter-produced media).
std::string get_bytes(const Endpoint& ep, const std::string& stage, const HttpOptions& opts = {});

/// "ok" when the endpoint answers any HTTP request, otherwise a short reason.
std::string probe(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::milliseconds{500});

}  // namespace lectern
