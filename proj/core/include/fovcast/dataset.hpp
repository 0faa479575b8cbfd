#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fovcast/common.hpp"
#include "fovcast/geometry.hpp"
#include "fovcast/heatmap.hpp"

namespace fovcast {

// ====================== session records ======================

/** One sampled head orientation: which frame, and where the view center was. */
struct FrameSample {
    int frame_index = 0;
    double theta_deg = 0.0;
    double phi_deg = 0.0;
};

/**
 * A single user's trace through a single video. Frame indices are strictly
 * increasing and place each sample on the video timeline: frame f belongs to
 * second f / fps. A second is usable once all fps frames of it are present.
 */
struct SessionRecord {
    std::string video_id;
    std::string user_id;
    int fps = 30;
    std::vector<FrameSample> frames;
};

// ====================== canonical storage (JSON lines) ======================

std::string session_to_json_line(const SessionRecord& s);

/** Parse one canonical line; `line_no` (1-based) is quoted in errors. */
SessionRecord session_from_json_line(const std::string& line, int line_no);

std::vector<SessionRecord> read_sessions(const std::string& path);

/**
 * Write records sorted by (video_id, user_id), one JSON object per line,
 * atomically. The output is byte-stable: writing what read_sessions returned
 * reproduces the file exactly.
 */
void write_sessions(const std::string& path, std::vector<SessionRecord> sessions);

// ====================== ingestion adapters ======================

/** Outcome of an ingest pass: what was kept, what was dropped and why. */
struct IngestReport {
    std::int64_t accepted_rows = 0;
    std::int64_t rejected_rows = 0;
    std::vector<std::string> diagnostics;
};

/**
 * Adapter "angles_csv": comma-separated rows
 *   video_id,user_id,frame_index,theta_deg,phi_deg
 * A header row and '#' comments are skipped. Rows that fail to parse, carry
 * |phi| > 90, or break the strictly-increasing frame order are rejected with
 * a line diagnostic while the rest of the file is kept. Longitudes are
 * wrapped into [-180, 180).
 */
std::vector<SessionRecord> ingest_angles_csv(const std::string& path, IngestReport& report);

/** Adapter "canonical": re-reads canonical JSON-lines output (idempotent). */
std::vector<SessionRecord> ingest_canonical(const std::string& path, IngestReport& report);

/** Dispatch by adapter name; throws UsageError for unknown names. */
std::vector<SessionRecord> ingest(const std::string& adapter, const std::string& path,
                                  IngestReport& report);

// ====================== derived per-second views ======================

/**
 * Length of the leading run of complete seconds: the largest S such that
 * every second 0..S-1 has all fps frames present. Windows and heatmap
 * sequences only use this run, so traces that start late or have gaps simply
 * contribute less coverage instead of misaligning.
 */
int complete_seconds(const SessionRecord& s);

/** Unit vectors of one complete second; empty when the second is incomplete. */
std::vector<UnitVec3> second_frames(const SessionRecord& s, int second);

/**
 * Per-second heatmaps for a whole session, in timeline order starting at
 * second 0. Incomplete seconds at the front or in gaps stop the sequence
 * (only the leading contiguous run of complete seconds is returned); a
 * trailing partial second is included only when keep_partial is set.
 */
std::vector<HeatGrid> session_second_heatmaps(const SessionRecord& s, const HeatmapConfig& cfg,
                                              bool keep_partial = false);

// ====================== sliding windows ======================

/**
 * One evaluation/training window: T past seconds of the target user, L
 * future seconds of ground truth, and the aligned views of every other user
 * who covers the full span. Frame lists are flattened second-major.
 */
struct TrajectoryWindow {
    int fps = 30;
    int start_second = 0;

    std::vector<UnitVec3> past_frames;             // T * fps
    std::vector<SecondSummary> past_summaries;     // T
    std::vector<UnitVec3> future_frames;           // L * fps
    std::vector<SecondSummary> future_summaries;   // L

    std::vector<std::vector<SecondSummary>> others_past;    // N x T
    std::vector<std::vector<SecondSummary>> others_future;  // N x L
};

/**
 * Slide a T+L window over the target session at the given stride. Windows
 * exist wherever the target covers all T+L seconds; other users watching the
 * same video join a window's roster only when they cover the full span too.
 */
std::vector<TrajectoryWindow> build_windows(const SessionRecord& target,
                                            std::span<const SessionRecord> others,
                                            int past_seconds = 10, int future_seconds = 10,
                                            int stride_seconds = 1);

/** Like TrajectoryWindow but with second-level heatmaps for the grid models. */
struct HeatmapWindow {
    int fps = 30;
    int start_second = 0;
    std::string video_id;

    std::vector<HeatGrid> past;     // T target grids
    std::vector<HeatGrid> future;   // L target grids (ground truth)
    /** Mean of the roster users' grids for every covered second (T+L long, empty without others). */
    std::vector<HeatGrid> others_avg;

    std::vector<UnitVec3> future_frames;          // L * fps, for center metrics
    std::vector<SecondSummary> future_summaries;  // L
};

std::vector<HeatmapWindow> build_heatmap_windows(const SessionRecord& target,
                                                 std::span<const SessionRecord> others,
                                                 const HeatmapConfig& cfg,
                                                 int past_seconds = 10, int future_seconds = 10,
                                                 int stride_seconds = 1);

// ====================== heatmap container files ======================

/** One stored grid, keyed by who produced it and which second it covers. */
struct HeatmapRecord {
    std::string video_id;
    std::string user_id;
    std::uint32_t second = 0;
    HeatGrid grid;
};

void write_heatmap_file(const std::string& path, std::span<const HeatmapRecord> records);
std::vector<HeatmapRecord> read_heatmap_file(const std::string& path);

// ====================== saliency store ======================

/**
 * Per-video, per-second stacks of frame-level saliency maps on the heatmap
 * grid, produced outside this project and consumed by the saliency fusion
 * path. Keyed lookups return null when a second has no maps.
 */
class SaliencyStore {
public:
    void add(const std::string& video_id, int second, std::vector<HeatGrid> frame_maps);
    const std::vector<HeatGrid>* find(const std::string& video_id, int second) const;
    std::size_t size() const { return entries_.size(); }

    void save(const std::string& path) const;
    static SaliencyStore load(const std::string& path);

private:
    std::map<std::pair<std::string, int>, std::vector<HeatGrid>> entries_;
};

}  // namespace fovcast
