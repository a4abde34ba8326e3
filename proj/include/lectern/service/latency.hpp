#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lectern::service {

enum class Stage { asr, retrieval, llm, tts, avatar };

inline constexpr std::array<Stage, 5> kStages = {Stage::asr, Stage::retrieval, Stage::llm, Stage::tts, Stage::avatar};

const char* to_string(Stage s);

/// Seconds per processing stage; stages that did not run stay absent.
class LatencyReport {
public:
    void set(Stage s, double seconds);
    std::optional<double> get(Stage s) const { return values_[static_cast<std::size_t>(s)]; }

    nlohmann::json to_json() const;

private:
    std::array<std::optional<double>, kStages.size()> values_{};
};

struct Percentiles {
    std::size_t count = 0;
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

/// Nearest-rank percentiles over `samples` (copied and sorted).
Percentiles percentiles(std::vector<double> samples);

}  // namespace lectern::service
