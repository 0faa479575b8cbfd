#include "fovcast/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace fovcast {

using ordered_json = nlohmann::ordered_json;

namespace {

double wrap_deg(double theta_deg) {
    double t = std::fmod(theta_deg + 180.0, 360.0);
    if (t < 0.0) t += 360.0;
    return t - 180.0;
}

void validate_session(const SessionRecord& s, const std::string& where) {
    if (s.video_id.empty() || s.user_id.empty())
        throw DataError(where + ": empty video_id or user_id");
    if (s.fps <= 0) throw DataError(where + ": fps must be positive");
    int prev = -1;
    for (const FrameSample& f : s.frames) {
        if (f.frame_index < 0 || f.frame_index <= prev)
            throw DataError(where + ": frame indices must be nonnegative and strictly increasing");
        if (std::abs(f.phi_deg) > 90.0 || !std::isfinite(f.theta_deg) || !std::isfinite(f.phi_deg))
            throw DataError(where + ": angle out of range");
        prev = f.frame_index;
    }
}

void sort_sessions(std::vector<SessionRecord>& sessions) {
    std::stable_sort(sessions.begin(), sessions.end(),
                     [](const SessionRecord& a, const SessionRecord& b) {
                         if (a.video_id != b.video_id) return a.video_id < b.video_id;
                         return a.user_id < b.user_id;
                     });
}

}  // namespace

// ====================== canonical storage ======================

std::string session_to_json_line(const SessionRecord& s) {
    ordered_json j;
    j["video_id"] = s.video_id;
    j["user_id"] = s.user_id;
    j["fps"] = s.fps;
    ordered_json frames = ordered_json::array();
    for (const FrameSample& f : s.frames)
        frames.push_back({f.frame_index, f.theta_deg, f.phi_deg});
    j["frames"] = std::move(frames);
    return j.dump();
}

SessionRecord session_from_json_line(const std::string& line, int line_no) {
    const std::string where = "line " + std::to_string(line_no);
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
        throw DataError(where + ": invalid JSON (" + e.what() + ")");
    }
    SessionRecord s;
    try {
        s.video_id = j.at("video_id").get<std::string>();
        s.user_id = j.at("user_id").get<std::string>();
        s.fps = j.at("fps").get<int>();
        for (const auto& row : j.at("frames")) {
            if (!row.is_array() || row.size() != 3)
                throw DataError(where + ": frame rows must be [index, theta, phi]");
            FrameSample f;
            f.frame_index = row[0].get<int>();
            f.theta_deg = wrap_deg(row[1].get<double>());
            f.phi_deg = row[2].get<double>();
            s.frames.push_back(f);
        }
    } catch (const ordered_json::exception& e) {
        throw DataError(where + ": bad session record (" + e.what() + ")");
    }
    validate_session(s, where);
    return s;
}

std::vector<SessionRecord> read_sessions(const std::string& path) {
    const std::string bytes = read_file(path);
    std::vector<SessionRecord> sessions;
    std::istringstream in(bytes);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        sessions.push_back(session_from_json_line(line, line_no));
    }
    return sessions;
}

void write_sessions(const std::string& path, std::vector<SessionRecord> sessions) {
    sort_sessions(sessions);
    std::string out;
    for (const SessionRecord& s : sessions) {
        out += session_to_json_line(s);
        out += '\n';
    }
    write_file_atomic(path, out);
}

// ====================== ingestion adapters ======================

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    for (std::string& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    }
    return fields;
}

bool parse_int(const std::string& s, int& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<SessionRecord> ingest_angles_csv(const std::string& path, IngestReport& report) {
    const std::string bytes = read_file(path);
    std::map<std::pair<std::string, std::string>, SessionRecord> by_key;

    std::istringstream in(bytes);
    std::string line;
    int line_no = 0;
    bool saw_data = false;
    auto reject = [&](const std::string& why) {
        ++report.rejected_rows;
        report.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 5) {
            reject("expected 5 fields, got " + std::to_string(fields.size()));
            continue;
        }
        int frame_index;
        if (!parse_int(fields[2], frame_index)) {
            if (!saw_data) continue;  // header row
            reject("frame index is not an integer: " + fields[2]);
            continue;
        }
        double theta, phi;
        if (!parse_double(fields[3], theta) || !parse_double(fields[4], phi)) {
            reject("angles are not numeric");
            continue;
        }
        if (std::abs(phi) > 90.0) {
            reject("latitude out of range: " + fields[4]);
            continue;
        }
        if (fields[0].empty() || fields[1].empty()) {
            reject("empty video or user id");
            continue;
        }
        if (frame_index < 0) {
            reject("negative frame index");
            continue;
        }

        SessionRecord& rec = by_key[{fields[0], fields[1]}];
        if (rec.frames.empty()) {
            rec.video_id = fields[0];
            rec.user_id = fields[1];
            rec.fps = 30;
        }
        if (!rec.frames.empty() && frame_index <= rec.frames.back().frame_index) {
            reject("frame index not increasing for " + fields[0] + "/" + fields[1]);
            continue;
        }
        rec.frames.push_back({frame_index, wrap_deg(theta), phi});
        ++report.accepted_rows;
        saw_data = true;
    }

    std::vector<SessionRecord> sessions;
    sessions.reserve(by_key.size());
    for (auto& [key, rec] : by_key) sessions.push_back(std::move(rec));
    sort_sessions(sessions);
    return sessions;
}

std::vector<SessionRecord> ingest_canonical(const std::string& path, IngestReport& report) {
    const std::string bytes = read_file(path);
    std::vector<SessionRecord> sessions;
    std::istringstream in(bytes);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            sessions.push_back(session_from_json_line(line, line_no));
            report.accepted_rows += static_cast<std::int64_t>(sessions.back().frames.size());
        } catch (const DataError& e) {
            ++report.rejected_rows;
            report.diagnostics.push_back(path + ":" + e.what());
        }
    }
    sort_sessions(sessions);
    return sessions;
}

std::vector<SessionRecord> ingest(const std::string& adapter, const std::string& path,
                                  IngestReport& report) {
    if (adapter == "angles_csv") return ingest_angles_csv(path, report);
    if (adapter == "canonical") return ingest_canonical(path, report);
    throw UsageError("unknown adapter: " + adapter + " (available: angles_csv, canonical)");
}

// ====================== derived per-second views ======================

namespace {

/** Frames whose indices fall into [second*fps, (second+1)*fps), by binary search. */
std::span<const FrameSample> frames_in_second(const SessionRecord& s, int second) {
    const int lo = second * s.fps;
    const int hi = lo + s.fps;
    auto begin = std::lower_bound(s.frames.begin(), s.frames.end(), lo,
                                  [](const FrameSample& f, int v) { return f.frame_index < v; });
    auto end = std::lower_bound(begin, s.frames.end(), hi,
                                [](const FrameSample& f, int v) { return f.frame_index < v; });
    return {&*begin, static_cast<std::size_t>(end - begin)};
}

std::vector<UnitVec3> to_units(std::span<const FrameSample> frames) {
    std::vector<UnitVec3> units;
    units.reserve(frames.size());
    for (const FrameSample& f : frames)
        units.push_back(angles_to_unit(make_angle(deg2rad(f.theta_deg), deg2rad(f.phi_deg))));
    return units;
}

}  // namespace

int complete_seconds(const SessionRecord& s) {
    int count = 0;
    while (frames_in_second(s, count).size() == static_cast<std::size_t>(s.fps)) ++count;
    return count;
}

std::vector<UnitVec3> second_frames(const SessionRecord& s, int second) {
    auto frames = frames_in_second(s, second);
    if (frames.size() != static_cast<std::size_t>(s.fps)) return {};
    return to_units(frames);
}

std::vector<HeatGrid> session_second_heatmaps(const SessionRecord& s, const HeatmapConfig& cfg,
                                              bool keep_partial) {
    HeatmapConfig local = cfg;
    local.fps = s.fps;
    std::vector<HeatGrid> grids;
    const int full = complete_seconds(s);
    grids.reserve(static_cast<std::size_t>(full) + 1);
    for (int sec = 0; sec < full; ++sec)
        grids.push_back(second_heatmap(second_frames(s, sec), local));
    if (keep_partial) {
        auto tail = frames_in_second(s, full);
        if (!tail.empty() && tail.size() < static_cast<std::size_t>(s.fps))
            grids.push_back(second_heatmap(to_units(tail), local));
    }
    return grids;
}

// ====================== sliding windows ======================

namespace {

struct SecondCache {
    int seconds = 0;
    std::vector<std::vector<UnitVec3>> frames;   // per second
    std::vector<SecondSummary> summaries;        // per second
};

SecondCache cache_session(const SessionRecord& s) {
    SecondCache cache;
    cache.seconds = complete_seconds(s);
    cache.frames.reserve(cache.seconds);
    cache.summaries.reserve(cache.seconds);
    for (int sec = 0; sec < cache.seconds; ++sec) {
        cache.frames.push_back(second_frames(s, sec));
        cache.summaries.push_back(second_summary(cache.frames.back()));
    }
    return cache;
}

bool roster_eligible(const SessionRecord& target, const SessionRecord& other) {
    return other.video_id == target.video_id && other.fps == target.fps &&
           !(other.user_id == target.user_id);
}

}  // namespace

std::vector<TrajectoryWindow> build_windows(const SessionRecord& target,
                                            std::span<const SessionRecord> others,
                                            int past_seconds, int future_seconds,
                                            int stride_seconds) {
    if (past_seconds <= 0 || future_seconds <= 0 || stride_seconds <= 0)
        throw std::invalid_argument("window sizes and stride must be positive");
    const int span = past_seconds + future_seconds;

    SecondCache tc = cache_session(target);
    std::vector<const SessionRecord*> roster;
    std::vector<SecondCache> rc;
    for (const SessionRecord& o : others) {
        if (!roster_eligible(target, o)) continue;
        roster.push_back(&o);
        rc.push_back(cache_session(o));
    }

    std::vector<TrajectoryWindow> windows;
    for (int s0 = 0; s0 + span <= tc.seconds; s0 += stride_seconds) {
        TrajectoryWindow w;
        w.fps = target.fps;
        w.start_second = s0;
        for (int t = 0; t < past_seconds; ++t) {
            const auto& f = tc.frames[s0 + t];
            w.past_frames.insert(w.past_frames.end(), f.begin(), f.end());
            w.past_summaries.push_back(tc.summaries[s0 + t]);
        }
        for (int t = 0; t < future_seconds; ++t) {
            const auto& f = tc.frames[s0 + past_seconds + t];
            w.future_frames.insert(w.future_frames.end(), f.begin(), f.end());
            w.future_summaries.push_back(tc.summaries[s0 + past_seconds + t]);
        }
        for (std::size_t i = 0; i < roster.size(); ++i) {
            if (rc[i].seconds < s0 + span) continue;
            std::vector<SecondSummary> past(rc[i].summaries.begin() + s0,
                                            rc[i].summaries.begin() + s0 + past_seconds);
            std::vector<SecondSummary> future(rc[i].summaries.begin() + s0 + past_seconds,
                                              rc[i].summaries.begin() + s0 + span);
            w.others_past.push_back(std::move(past));
            w.others_future.push_back(std::move(future));
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<HeatmapWindow> build_heatmap_windows(const SessionRecord& target,
                                                 std::span<const SessionRecord> others,
                                                 const HeatmapConfig& cfg,
                                                 int past_seconds, int future_seconds,
                                                 int stride_seconds) {
    if (past_seconds <= 0 || future_seconds <= 0 || stride_seconds <= 0)
        throw std::invalid_argument("window sizes and stride must be positive");
    const int span = past_seconds + future_seconds;

    SecondCache tc = cache_session(target);
    std::vector<HeatGrid> target_grids = session_second_heatmaps(target, cfg);

    std::vector<const SessionRecord*> roster;
    std::vector<std::vector<HeatGrid>> roster_grids;
    for (const SessionRecord& o : others) {
        if (!roster_eligible(target, o)) continue;
        roster.push_back(&o);
        roster_grids.push_back(session_second_heatmaps(o, cfg));
    }

    std::vector<HeatmapWindow> windows;
    for (int s0 = 0; s0 + span <= tc.seconds; s0 += stride_seconds) {
        HeatmapWindow w;
        w.fps = target.fps;
        w.start_second = s0;
        w.video_id = target.video_id;
        for (int t = 0; t < past_seconds; ++t) w.past.push_back(target_grids[s0 + t]);
        for (int t = 0; t < future_seconds; ++t) {
            const int sec = s0 + past_seconds + t;
            w.future.push_back(target_grids[sec]);
            const auto& f = tc.frames[sec];
            w.future_frames.insert(w.future_frames.end(), f.begin(), f.end());
            w.future_summaries.push_back(tc.summaries[sec]);
        }

        std::vector<std::size_t> covered;
        for (std::size_t i = 0; i < roster.size(); ++i)
            if (roster_grids[i].size() >= static_cast<std::size_t>(s0 + span)) covered.push_back(i);
        if (!covered.empty()) {
            const double inv = 1.0 / static_cast<double>(covered.size());
            for (int t = 0; t < span; ++t) {
                std::array<double, HeatGrid::kCells> acc{};
                for (std::size_t i : covered) {
                    auto cells = roster_grids[i][s0 + t].cells();
                    for (int c = 0; c < HeatGrid::kCells; ++c) acc[c] += cells[c];
                }
                HeatGrid avg;
                for (int r = 0; r < HeatGrid::kRows; ++r)
                    for (int c = 0; c < HeatGrid::kCols; ++c)
                        avg.set(r, c, acc[r * HeatGrid::kCols + c] * inv);
                w.others_avg.push_back(avg);
            }
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

// ====================== heatmap container files ======================

namespace {

constexpr char kHeatmapMagic[4] = {'F', 'H', 'M', '1'};
constexpr char kSaliencyMagic[4] = {'F', 'S', 'L', '1'};

void put_string(std::string& out, const std::string& s) {
    put_u32_le(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

std::string get_string(const std::string& in, std::size_t& pos) {
    const std::uint32_t n = get_u32_le(in, pos);
    if (pos + n > in.size()) throw DataError("truncated binary record (string)");
    std::string s = in.substr(pos, n);
    pos += n;
    return s;
}

}  // namespace

void write_heatmap_file(const std::string& path, std::span<const HeatmapRecord> records) {
    std::string out;
    out.append(kHeatmapMagic, 4);
    put_u32_le(out, static_cast<std::uint32_t>(records.size()));
    for (const HeatmapRecord& r : records) {
        put_string(out, r.video_id);
        put_string(out, r.user_id);
        put_u32_le(out, r.second);
        append_grid(out, r.grid);
    }
    write_file_atomic(path, out);
}

std::vector<HeatmapRecord> read_heatmap_file(const std::string& path) {
    const std::string in = read_file(path);
    if (in.size() < 4 || std::memcmp(in.data(), kHeatmapMagic, 4) != 0)
        throw DataError(path + ": not a heatmap container");
    std::size_t pos = 4;
    const std::uint32_t count = get_u32_le(in, pos);
    std::vector<HeatmapRecord> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        HeatmapRecord r;
        r.video_id = get_string(in, pos);
        r.user_id = get_string(in, pos);
        r.second = get_u32_le(in, pos);
        r.grid = parse_grid(in, pos);
        records.push_back(std::move(r));
    }
    if (pos != in.size()) throw DataError(path + ": trailing bytes after last record");
    return records;
}

// ====================== saliency store ======================

void SaliencyStore::add(const std::string& video_id, int second,
                        std::vector<HeatGrid> frame_maps) {
    if (frame_maps.empty()) throw std::invalid_argument("saliency entry needs at least one map");
    entries_[{video_id, second}] = std::move(frame_maps);
}

const std::vector<HeatGrid>* SaliencyStore::find(const std::string& video_id, int second) const {
    auto it = entries_.find({video_id, second});
    return it == entries_.end() ? nullptr : &it->second;
}

void SaliencyStore::save(const std::string& path) const {
    std::string out;
    out.append(kSaliencyMagic, 4);
    put_u32_le(out, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [key, maps] : entries_) {
        put_string(out, key.first);
        put_u32_le(out, static_cast<std::uint32_t>(key.second));
        put_u32_le(out, static_cast<std::uint32_t>(maps.size()));
        for (const HeatGrid& g : maps) append_grid(out, g);
    }
    write_file_atomic(path, out);
}

SaliencyStore SaliencyStore::load(const std::string& path) {
    const std::string in = read_file(path);
    if (in.size() < 4 || std::memcmp(in.data(), kSaliencyMagic, 4) != 0)
        throw DataError(path + ": not a saliency store");
    std::size_t pos = 4;
    const std::uint32_t count = get_u32_le(in, pos);
    SaliencyStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string video = get_string(in, pos);
        const int second = static_cast<int>(get_u32_le(in, pos));
        const std::uint32_t n_maps = get_u32_le(in, pos);
        std::vector<HeatGrid> maps;
        maps.reserve(n_maps);
        for (std::uint32_t m = 0; m < n_maps; ++m) maps.push_back(parse_grid(in, pos));
        store.add(video, second, std::move(maps));
    }
    if (pos != in.size()) throw DataError(path + ": trailing bytes after last record");
    return store;
}

}  // namespace fovcast
