#include "lectern/avatar/cleanup.hpp"

#include <spdlog/spdlog.h>

namespace lectern::avatar {

namespace fs = std::filesystem;

CleanupReport cleanup_session(TempResourceRegistry& registry) {
    CleanupReport report;
    for (const auto& p : registry.paths) {
        std::error_code ec;
        bool removed = fs::remove(p, ec);
        if (ec) {
            ec.clear();
            removed = fs::remove(p, ec);
        }
        if (ec) {
            report.warnings.push_back(p + ": " + ec.message());
        } else if (removed) {
            ++report.deleted;
        } else {
            ++report.already_absent;
        }
    }
    registry.paths.clear();

    if (!registry.root.empty()) {
        std::error_code ec;
        fs::remove_all(registry.root, ec);
        if (ec) {
            ec.clear();
            fs::remove_all(registry.root, ec);
        }
        if (ec) report.warnings.push_back(registry.root.string() + ": " + ec.message());
    }
    for (const auto& w : report.warnings) spdlog::warn("cleanup of session {}: {}", registry.session_id, w);
    return report;
}

}  // namespace lectern::avatar
