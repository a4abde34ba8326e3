#include "lectern/service/latency.hpp"

#include <algorithm>
#include <cmath>

namespace lectern::service {

const char* to_string(Stage s) {
    switch (s) {
        case Stage::asr: return "asr";
        case Stage::retrieval: return "retrieval";
        case Stage::llm: return "llm";
        case Stage::tts: return "tts";
        case Stage::avatar: return "avatar";
    }
    return "?";
}

void LatencyReport::set(Stage s, double seconds) { values_[static_cast<std::size_t>(s)] = std::max(0.0, seconds); }

nlohmann::json LatencyReport::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (auto s : kStages) {
        if (auto v = get(s)) j[to_string(s)] = *v;
    }
    return j;
}

Percentiles percentiles(std::vector<double> samples) {
    Percentiles p;
    p.count = samples.size();
    if (samples.empty()) return p;
    std::sort(samples.begin(), samples.end());
    const auto rank = [&](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
        return samples[std::clamp<std::size_t>(r, 1, samples.size()) - 1];
    };
    p.p50 = rank(0.50);
    p.p95 = rank(0.95);
    p.p99 = rank(0.99);
    return p;
}

}  // namespace lectern::service
