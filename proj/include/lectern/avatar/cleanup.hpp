#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace lectern::avatar {

/// Temporary media produced for one session.
struct TempResourceRegistry {
    std::string session_id;
    std::filesystem::path root;       // session directory, removed recursively on cleanup (may be empty)
    std::set<std::string> paths;
};

struct CleanupReport {
    std::size_t deleted = 0;
    std::size_t already_absent = 0;
    std::vector<std::string> warnings;  // objects that survived a retry
};

/// Delete every registered object, then the session directory. Idempotent:
/// the registry is emptied, so a second call reports nothing. Undeletable
/// objects are retried once and reported as warnings.
CleanupReport cleanup_session(TempResourceRegistry& registry);

}  // namespace lectern::avatar
