#include "lectern/index/store.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lectern/errors.hpp"

namespace lectern::index {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRowNormTolerance = 1e-4;

std::uint32_t byteswap32(std::uint32_t v) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StoreError("store file missing or unreadable: " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_atomically(const fs::path& target, const std::string& bytes) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw StoreError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::vector<std::string> lectures_in_order(const std::vector<ingest::LectureSegment>& segments) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : segments) {
        if (seen.insert(s.lecture_id).second) out.push_back(s.lecture_id);
    }
    return out;
}

}  // namespace

RagStore::RagStore(VectorIndex index, std::vector<ingest::LectureSegment> segments, StoreMetadata meta)
    : index_(std::move(index)), segments_(std::move(segments)), meta_(std::move(meta)) {
    if (index_.size() != segments_.size()) {
        throw StoreError(fmt::format("row/id count mismatch: {} index rows, {} segments", index_.size(),
                                     segments_.size()));
    }
    if (!segments_.empty() && index_.dimension() != meta_.dimension) {
        throw StoreError(fmt::format("dimension mismatch: metadata says {}, index has {}", meta_.dimension,
                                     index_.dimension()));
    }
    by_id_.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (index_.id(i) != segments_[i].segment_id) {
            throw StoreError(fmt::format("row {} id '{}' does not match segment '{}'", i, index_.id(i),
                                         segments_[i].segment_id));
        }
        if (!by_id_.emplace(segments_[i].segment_id, i).second) {
            throw StoreError("duplicate segment id '" + segments_[i].segment_id + "'");
        }
    }
}

const ingest::LectureSegment* RagStore::find(const std::string& segment_id) const {
    const auto it = by_id_.find(segment_id);
    return it == by_id_.end() ? nullptr : &segments_[it->second];
}

bool RagStore::has_lecture(const std::string& lecture_id) const {
    return std::find(meta_.lecture_ids.begin(), meta_.lecture_ids.end(), lecture_id) != meta_.lecture_ids.end();
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

RagStore add_lecture(const RagStore& base, const std::vector<ingest::LectureSegment>& segments,
                     Embedder& embedder, double max_span) {
    if (segments.empty()) throw ContractError("add_lecture: no segments to add");
    const std::string& lecture = segments.front().lecture_id;
    for (const auto& s : segments) {
        if (s.lecture_id != lecture) throw ContractError("add_lecture: segments span several lectures");
    }
    if (!base.empty()) {
        const auto& m = base.metadata();
        if (m.embedder_name != embedder.name() || m.dimension != embedder.dimension()) {
            throw ConfigError(fmt::format("store was built with embedder '{}' (d={}), not '{}' (d={})",
                                          m.embedder_name, m.dimension, embedder.name(), embedder.dimension()));
        }
        if (m.max_span != max_span) {
            throw ConfigError(fmt::format("store was segmented with max_span {} s, not {} s", m.max_span, max_span));
        }
    }

    const VectorIndex fresh = build_index(segments, embedder);

    VectorIndex merged(embedder.dimension());
    std::vector<ingest::LectureSegment> all;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base.segments()[i].lecture_id == lecture) continue;
        merged.add(base.index().id(i), base.index().row(i));
        all.push_back(base.segments()[i]);
    }
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        merged.add(fresh.id(i), fresh.row(i));
        all.push_back(segments[i]);
    }

    StoreMetadata meta;
    meta.embedder_name = embedder.name();
    meta.dimension = embedder.dimension();
    meta.max_span = max_span;
    meta.created_at = utc_now_iso8601();
    meta.lecture_ids = lectures_in_order(all);
    return RagStore(std::move(merged), std::move(all), std::move(meta));
}

void save_store(const RagStore& store, const fs::path& dir) {
    fs::create_directories(dir);

    const auto& m = store.index().matrix();
    std::string vec_bytes(m.size() * sizeof(float), '\0');
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(vec_bytes.data(), m.data(), vec_bytes.size());
    } else {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto le = byteswap32(std::bit_cast<std::uint32_t>(m[i]));
            std::memcpy(vec_bytes.data() + i * 4, &le, 4);
        }
    }

    std::string jsonl;
    for (const auto& s : store.segments()) {
        json rec{{"segment_id", s.segment_id},
                 {"lecture_id", s.lecture_id},
                 {"start", s.start},
                 {"end", s.end},
                 {"text", s.text}};
        jsonl += rec.dump();
        jsonl += '\n';
    }

    const auto& md = store.metadata();
    json meta{{"embedder_name", md.embedder_name},
              {"dimension", md.dimension},
              {"max_span", md.max_span},
              {"created_at", md.created_at},
              {"lecture_ids", md.lecture_ids},
              {"format_version", md.format_version}};

    write_atomically(dir / "vectors.f32", vec_bytes);
    write_atomically(dir / "segments.jsonl", jsonl);
    write_atomically(dir / "meta.json", meta.dump(2) + "\n");
}

RagStore load_store(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw StoreError("store directory not found: " + dir.string());

    StoreMetadata md;
    try {
        const json meta = json::parse(read_file(dir / "meta.json"));
        md.format_version = meta.at("format_version").get<int>();
        if (md.format_version != kStoreFormatVersion) {
            throw StoreError(fmt::format("format_version {} unsupported (expected {})", md.format_version,
                                         kStoreFormatVersion));
        }
        md.embedder_name = meta.at("embedder_name").get<std::string>();
        md.dimension = meta.at("dimension").get<std::size_t>();
        md.max_span = meta.at("max_span").get<double>();
        md.created_at = meta.at("created_at").get<std::string>();
        md.lecture_ids = meta.at("lecture_ids").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw StoreError(std::string("meta.json invalid: ") + e.what());
    }
    if (md.dimension == 0) throw StoreError("meta.json: dimension must be positive");

    std::vector<ingest::LectureSegment> segments;
    {
        std::istringstream lines(read_file(dir / "segments.jsonl"));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const json rec = json::parse(line);
                segments.push_back(ingest::LectureSegment{rec.at("segment_id").get<std::string>(),
                                                          rec.at("lecture_id").get<std::string>(),
                                                          rec.at("start").get<double>(),
                                                          rec.at("end").get<double>(),
                                                          rec.at("text").get<std::string>()});
            } catch (const json::exception& e) {
                throw StoreError(fmt::format("segments.jsonl line {} invalid: {}", lineno, e.what()));
            }
        }
    }

    const std::string vec_bytes = read_file(dir / "vectors.f32");
    if (vec_bytes.size() % (sizeof(float) * md.dimension) != 0) {
        throw StoreError(fmt::format("vectors.f32 size {} is not a multiple of dimension {} x 4 bytes "
                                     "(dimension mismatch)",
                                     vec_bytes.size(), md.dimension));
    }
    const std::size_t rows = vec_bytes.size() / (sizeof(float) * md.dimension);
    if (rows != segments.size()) {
        throw StoreError(fmt::format("row/id count mismatch: vectors.f32 holds {} rows, segments.jsonl {} records",
                                     rows, segments.size()));
    }
    std::vector<float> matrix(rows * md.dimension);
    std::memcpy(matrix.data(), vec_bytes.data(), vec_bytes.size());
    if constexpr (std::endian::native != std::endian::little) {
        for (auto& f : matrix) f = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
    }

    std::vector<std::string> ids;
    ids.reserve(rows);
    for (const auto& s : segments) ids.push_back(s.segment_id);
    VectorIndex index(md.dimension, std::move(matrix), std::move(ids));

    for (std::size_t i = 0; i < rows; ++i) {
        const double sq = inner_product(index.row(i), index.row(i));
        if (sq != 0.0 && std::abs(std::sqrt(sq) - 1.0) > kRowNormTolerance) {
            throw StoreError(fmt::format("row {} ('{}') is not normalized (norm {})", i, index.id(i),
                                         std::sqrt(sq)));
        }
    }

    if (lectures_in_order(segments) != md.lecture_ids) {
        auto sorted_a = lectures_in_order(segments);
        auto sorted_b = md.lecture_ids;
        std::sort(sorted_a.begin(), sorted_a.end());
        std::sort(sorted_b.begin(), sorted_b.end());
        if (sorted_a != sorted_b) throw StoreError("lecture_ids in meta.json do not match segments.jsonl");
    }

    return RagStore(std::move(index), std::move(segments), std::move(md));
}

}  // namespace lectern::index
