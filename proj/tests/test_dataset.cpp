#include "fovcast/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fovcast/common.hpp"
#include "support/synthetic.hpp"

using namespace fovcast;
using testsupport::AnglePath;
using testsupport::make_session;

namespace {

/** Unique scratch path under the test binary's working directory. */
std::string scratch_path(const std::string& name) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() / "fovcast_dataset_tests";
    std::filesystem::create_directories(dir);
    return (dir / (name + "." + std::to_string(counter++))).string();
}

SessionRecord tiny_session(const std::string& video, const std::string& user, int fps,
                           int n_frames, double theta0 = 0.0) {
    SessionRecord s;
    s.video_id = video;
    s.user_id = user;
    s.fps = fps;
    for (int j = 0; j < n_frames; ++j)
        s.frames.push_back({j, theta0 + 0.25 * j, 5.0});
    return s;
}

}  // namespace

// ====================== canonical storage ======================

TEST(Dataset, CanonicalRoundTripAndIdempotence) {
    std::vector<SessionRecord> sessions{tiny_session("vidB", "u1", 2, 6, 10.0),
                                        tiny_session("vidA", "u2", 3, 9, -20.0)};
    const std::string path = scratch_path("canonical.jsonl");
    write_sessions(path, sessions);

    std::vector<SessionRecord> loaded = read_sessions(path);
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded[0].video_id, "vidA");  // sorted by (video, user)
    EXPECT_EQ(loaded[1].video_id, "vidB");
    EXPECT_EQ(loaded[1].fps, 2);
    ASSERT_EQ(loaded[1].frames.size(), 6u);
    EXPECT_DOUBLE_EQ(loaded[1].frames[3].theta_deg, 10.75);
    EXPECT_DOUBLE_EQ(loaded[1].frames[3].phi_deg, 5.0);

    const std::string first = read_file(path);
    write_sessions(path, loaded);
    EXPECT_EQ(read_file(path), first) << "rewriting what was read must be byte-identical";
}

TEST(Dataset, CanonicalLineValidation) {
    EXPECT_THROW(session_from_json_line("not json", 7), DataError);
    try {
        session_from_json_line("{\"video_id\":\"v\"}", 7);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
    }
    // Latitude beyond the poles.
    EXPECT_THROW(session_from_json_line(
                     R"({"video_id":"v","user_id":"u","fps":30,"frames":[[0,0.0,95.0]]})", 1),
                 DataError);
    // Non-increasing frame indices.
    EXPECT_THROW(
        session_from_json_line(
            R"({"video_id":"v","user_id":"u","fps":30,"frames":[[1,0.0,0.0],[1,0.0,0.0]]})", 1),
        DataError);
    // Longitudes wrap into [-180, 180).
    SessionRecord s = session_from_json_line(
        R"({"video_id":"v","user_id":"u","fps":30,"frames":[[0,185.0,0.0]]})", 1);
    EXPECT_DOUBLE_EQ(s.frames[0].theta_deg, -175.0);
}

// ====================== CSV ingestion ======================

TEST(Dataset, IngestAnglesCsvKeepsGoodRowsRejectsBad) {
    const std::string path = scratch_path("raw.csv");
    write_file_atomic(path,
                      "video_id,user_id,frame,theta,phi\n"
                      "# comment line\n"
                      "v1,alice,0,10.0,20.0\n"
                      "v1,bob,0,350.0,-5.0\n"
                      "v1,alice,1,11.0,95.0\n"      // latitude out of range
                      "v1,alice,2,12.0,20.5\n"
                      "v1,alice,1,13.0,20.0\n"      // non-increasing index
                      "v1,bob,1,bad,0.0\n"          // non-numeric longitude
                      "v1,bob,2,-10.0,0.0\n");

    IngestReport report;
    std::vector<SessionRecord> sessions = ingest_angles_csv(path, report);
    ASSERT_EQ(sessions.size(), 2u);
    EXPECT_EQ(sessions[0].user_id, "alice");
    EXPECT_EQ(sessions[1].user_id, "bob");
    ASSERT_EQ(sessions[0].frames.size(), 2u);  // frames 0 and 2 survive
    EXPECT_EQ(sessions[0].frames[1].frame_index, 2);
    ASSERT_EQ(sessions[1].frames.size(), 2u);
    EXPECT_DOUBLE_EQ(sessions[1].frames[0].theta_deg, -10.0);  // 350 wraps

    EXPECT_EQ(report.accepted_rows, 4);
    EXPECT_EQ(report.rejected_rows, 3);
    ASSERT_EQ(report.diagnostics.size(), 3u);
    EXPECT_NE(report.diagnostics[0].find(":5:"), std::string::npos)
        << "diagnostic names the offending line: " << report.diagnostics[0];
}

TEST(Dataset, IngestDispatchAndCanonicalAdapter) {
    std::vector<SessionRecord> sessions{tiny_session("v", "u", 2, 4)};
    const std::string path = scratch_path("canonical2.jsonl");
    write_sessions(path, sessions);

    IngestReport report;
    std::vector<SessionRecord> again = ingest("canonical", path, report);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(report.rejected_rows, 0);
    EXPECT_EQ(again[0].frames.size(), 4u);

    EXPECT_THROW(ingest("nope", path, report), UsageError);
    EXPECT_THROW(ingest("angles_csv", "/does/not/exist.csv", report), DataError);
}

// ====================== per-second views ======================

TEST(Dataset, CompleteSecondsStopsAtGapsAndLateStarts) {
    SessionRecord dense = tiny_session("v", "u", 3, 9);
    EXPECT_EQ(complete_seconds(dense), 3);

    SessionRecord gap = dense;
    gap.frames.erase(gap.frames.begin() + 4);  // second 1 now has 2 of 3 frames
    EXPECT_EQ(complete_seconds(gap), 1);

    SessionRecord late = dense;
    late.frames.erase(late.frames.begin());  // second 0 incomplete
    EXPECT_EQ(complete_seconds(late), 0);

    EXPECT_EQ(second_frames(gap, 1).size(), 0u);
    EXPECT_EQ(second_frames(gap, 0).size(), 3u);
}

TEST(Dataset, SecondFramesMatchAngles) {
    SessionRecord s = tiny_session("v", "u", 2, 4, 30.0);
    std::vector<UnitVec3> f = second_frames(s, 1);
    ASSERT_EQ(f.size(), 2u);
    UnitVec3 expect = angles_to_unit(make_angle(deg2rad(30.5), deg2rad(5.0)));
    EXPECT_NEAR(f[0].x, expect.x, 1e-15);
    EXPECT_NEAR(f[0].y, expect.y, 1e-15);
    EXPECT_NEAR(f[0].z, expect.z, 1e-15);
}

TEST(Dataset, SessionHeatmapsCountAndPartialTail) {
    AnglePath path;  // static at the origin, far from the poles
    SessionRecord s = make_session("v", "u", path, 4, 3);
    s.frames.push_back({12, 0.0, 0.0});  // one frame of a fifth second

    HeatmapConfig cfg;
    std::vector<HeatGrid> grids = session_second_heatmaps(s, cfg);
    ASSERT_EQ(grids.size(), 4u);
    for (const HeatGrid& g : grids) EXPECT_NEAR(g.sum(), 108.0 * 3, 1e-9);

    std::vector<HeatGrid> with_tail = session_second_heatmaps(s, cfg, /*keep_partial=*/true);
    ASSERT_EQ(with_tail.size(), 5u);
    EXPECT_NEAR(with_tail[4].sum(), 108.0, 1e-9);
}

// ====================== sliding windows ======================

TEST(Dataset, WindowCountsMatchSessionLength) {
    AnglePath path;
    path.theta_rate = 3.0;
    const int fps = 2;
    std::vector<SessionRecord> none;
    EXPECT_EQ(build_windows(make_session("v", "u", path, 30, fps), none).size(), 11u);
    EXPECT_EQ(build_windows(make_session("v", "u", path, 20, fps), none).size(), 1u);
    EXPECT_EQ(build_windows(make_session("v", "u", path, 19, fps), none).size(), 0u);
    EXPECT_EQ(build_windows(make_session("v", "u", path, 30, fps), none, 10, 10, 5).size(), 3u);
}

TEST(Dataset, WindowContentsAlignWithSession) {
    AnglePath path;
    path.theta0 = 10.0;
    path.theta_rate = 2.0;
    const int fps = 3;
    SessionRecord target = make_session("v", "tgt", path, 22, fps);
    std::vector<SessionRecord> none;
    std::vector<TrajectoryWindow> ws = build_windows(target, none);
    ASSERT_EQ(ws.size(), 3u);
    EXPECT_EQ(ws[2].start_second, 2);
    ASSERT_EQ(ws[0].past_frames.size(), 10u * fps);
    ASSERT_EQ(ws[0].future_frames.size(), 10u * fps);
    ASSERT_EQ(ws[0].past_summaries.size(), 10u);
    ASSERT_EQ(ws[0].future_summaries.size(), 10u);

    // Window 1's first past second is session second 1.
    std::vector<UnitVec3> sec1 = second_frames(target, 1);
    SecondSummary direct = second_summary(sec1);
    EXPECT_NEAR(ws[1].past_summaries[0].mu.x, direct.mu.x, 1e-15);
    EXPECT_NEAR(ws[1].past_frames[0].y, sec1[0].y, 1e-15);

    // Window 0's first future second is session second 10.
    SecondSummary f0 = second_summary(second_frames(target, 10));
    EXPECT_NEAR(ws[0].future_summaries[0].mu.y, f0.mu.y, 1e-15);
}

TEST(Dataset, WindowRosterFiltersAndCoverage) {
    AnglePath path;
    const int fps = 2;
    SessionRecord target = make_session("v", "tgt", path, 25, fps);

    AnglePath other_path;
    other_path.theta0 = 40.0;
    std::vector<SessionRecord> others{
        make_session("v", "full", other_path, 25, fps),
        make_session("v", "short", other_path, 21, fps),   // covers s0=0,1 only
        make_session("v", "tgt", other_path, 25, fps),     // same user: excluded
        make_session("w", "elsewhere", other_path, 25, fps),  // other video
        make_session("v", "slowcam", other_path, 25, fps + 1),  // fps mismatch
    };

    std::vector<TrajectoryWindow> ws = build_windows(target, others);
    ASSERT_EQ(ws.size(), 6u);
    EXPECT_EQ(ws[0].others_past.size(), 2u);
    EXPECT_EQ(ws[1].others_future.size(), 2u);
    EXPECT_EQ(ws[2].others_past.size(), 1u);  // "short" no longer covers
    EXPECT_EQ(ws[5].others_past.size(), 1u);
    ASSERT_EQ(ws[0].others_past[0].size(), 10u);
    ASSERT_EQ(ws[0].others_future[0].size(), 10u);

    // Other users' future summaries align to horizons 1..L.
    SecondSummary oth10 = second_summary(second_frames(others[0], 10));
    EXPECT_NEAR(ws[0].others_future[0][0].mu.x, oth10.mu.x, 1e-15);
}

TEST(Dataset, HeatmapWindowsCarryAlignedGrids) {
    AnglePath path;
    path.theta_rate = 4.0;
    const int fps = 2;
    SessionRecord target = make_session("v", "tgt", path, 21, fps);
    AnglePath p1, p2;
    p1.theta0 = 20.0;
    p2.theta0 = -40.0;
    std::vector<SessionRecord> others{make_session("v", "a", p1, 21, fps),
                                      make_session("v", "b", p2, 21, fps)};

    HeatmapConfig cfg;
    std::vector<HeatmapWindow> ws = build_heatmap_windows(target, others, cfg);
    ASSERT_EQ(ws.size(), 2u);
    ASSERT_EQ(ws[0].past.size(), 10u);
    ASSERT_EQ(ws[0].future.size(), 10u);
    ASSERT_EQ(ws[0].others_avg.size(), 20u);
    ASSERT_EQ(ws[0].future_frames.size(), 10u * fps);

    // Future grids restate the target's own per-second heatmaps.
    std::vector<HeatGrid> direct = session_second_heatmaps(target, cfg);
    EXPECT_EQ(ws[1].future[0], direct[11]);

    // The others' average is the cell-wise mean of both users' grids.
    std::vector<HeatGrid> ga = session_second_heatmaps(others[0], cfg);
    std::vector<HeatGrid> gb = session_second_heatmaps(others[1], cfg);
    const int r = 9, c = 20;
    EXPECT_NEAR(ws[0].others_avg[3].at(r, c), 0.5 * (ga[3].at(r, c) + gb[3].at(r, c)), 1e-12);

    std::vector<SessionRecord> none;
    std::vector<HeatmapWindow> solo = build_heatmap_windows(target, none, cfg);
    EXPECT_TRUE(solo[0].others_avg.empty());
}

// ====================== heatmap container files ======================

TEST(Dataset, HeatmapFileRoundTrip) {
    HeatGrid g1, g2;
    g1.set(3, 4, 1.5);
    g2.set(17, 35, 2.25);
    std::vector<HeatmapRecord> records{{"vid", "user", 0, g1}, {"vid", "user", 1, g2}};
    const std::string path = scratch_path("grids.fhm");
    write_heatmap_file(path, records);

    std::vector<HeatmapRecord> loaded = read_heatmap_file(path);
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded[0].video_id, "vid");
    EXPECT_EQ(loaded[1].second, 1u);
    EXPECT_TRUE(loaded[0].grid == g1);
    EXPECT_TRUE(loaded[1].grid == g2);
}

TEST(Dataset, HeatmapFileRejectsCorruption) {
    HeatGrid g;
    std::vector<HeatmapRecord> records{{"v", "u", 0, g}};
    const std::string path = scratch_path("grids_bad.fhm");
    write_heatmap_file(path, records);

    std::string bytes = read_file(path);
    write_file_atomic(path, bytes.substr(0, bytes.size() - 10));
    EXPECT_THROW(read_heatmap_file(path), DataError);

    bytes[0] = 'X';
    write_file_atomic(path, bytes);
    EXPECT_THROW(read_heatmap_file(path), DataError);
}

// ====================== saliency store ======================

TEST(Dataset, SaliencyStoreLookupAndPersistence) {
    SaliencyStore store;
    HeatGrid g;
    g.set(8, 17, 3.0);
    store.add("vid", 4, {g, HeatGrid{}});
    ASSERT_NE(store.find("vid", 4), nullptr);
    EXPECT_EQ(store.find("vid", 4)->size(), 2u);
    EXPECT_EQ(store.find("vid", 5), nullptr);
    EXPECT_EQ(store.find("other", 4), nullptr);

    const std::string path = scratch_path("sal.fsl");
    store.save(path);
    SaliencyStore loaded = SaliencyStore::load(path);
    ASSERT_EQ(loaded.size(), 1u);
    ASSERT_NE(loaded.find("vid", 4), nullptr);
    EXPECT_TRUE((*loaded.find("vid", 4))[0] == g);

    std::string bytes = read_file(path);
    bytes[0] = 'Z';
    write_file_atomic(path, bytes);
    EXPECT_THROW(SaliencyStore::load(path), DataError);
}
