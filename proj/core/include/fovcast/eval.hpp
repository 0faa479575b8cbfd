#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fovcast/dataset.hpp"
#include "fovcast/geometry.hpp"
#include "fovcast/heatmap.hpp"

namespace fovcast {

// ====================== report ======================

/**
 * Metric knobs shared by both evaluators. The viewport spans are full widths
 * in degrees (theta, phi); grid_deg is the lattice pitch of the coverage
 * integral.
 */
struct EvalOptions {
    std::pair<double, double> trajectory_fov_deg{120.0, 120.0};
    std::pair<double, double> heatmap_fov_deg{120.0, 90.0};
    double grid_deg = 0.5;
};

/**
 * Per-horizon metric summary over a set of sliding windows. Vectors are
 * indexed by horizon - 1 and all have `horizons` entries; tile_overlap is
 * empty for trajectory-family reports. Rates live in [0, 1] and MSE is
 * the mean squared Euclidean distance between unit vectors, so it is
 * non-negative.
 */
struct EvalReport {
    int horizons = 0;
    std::int64_t windows = 0;
    /** Grid predictions whose center could not be extracted (e.g. all-zero). */
    std::int64_t skipped_centers = 0;

    std::vector<double> hit_rate_a100;  // alpha = 1
    std::vector<double> hit_rate_a125;  // alpha = 1.25
    std::vector<double> mse;
    std::vector<double> tile_overlap;

    double avg_hit_rate_a100 = 0.0;
    double avg_hit_rate_a125 = 0.0;
    double avg_mse = 0.0;

    bool operator==(const EvalReport&) const = default;
};

// ====================== evaluators ======================

/**
 * Score center predictions against the windows they were made for.
 * preds[i][k] is the predicted view center of window i at horizon k+1; every
 * window must carry at least preds[i].size() future seconds. Hit rate
 * averages the per-frame FoV coverage (trajectory_fov_deg viewport scaled by
 * alpha); MSE compares the prediction with the ground-truth per-second mean
 * direction. Throws UsageError on empty or misaligned inputs.
 */
EvalReport evaluate_trajectory(std::span<const std::vector<UnitVec3>> preds,
                               std::span<const TrajectoryWindow> gt,
                               const EvalOptions& opt = {});

/**
 * Score grid predictions. Tile overlap compares each predicted grid with the
 * ground-truth second grid. A view center is also estimated from every
 * predicted grid and scored like a trajectory prediction (heatmap_fov_deg
 * spans); grids with no extractable center (all-zero mass) keep their tile
 * overlap but are skipped for the center metrics and counted in
 * skipped_centers. Horizons where every center was skipped report 0.
 * Throws UsageError on empty or misaligned inputs.
 */
EvalReport evaluate_heatmap(std::span<const std::vector<HeatGrid>> preds,
                            std::span<const HeatmapWindow> gt,
                            const EvalOptions& opt = {});

// ====================== serialization ======================

/**
 * CSV form: a header, one row per horizon, and an `average` row. Doubles are
 * written with enough digits to round-trip exactly; the tile_overlap column
 * is left empty for trajectory-family reports.
 */
std::string report_to_csv(const EvalReport& r);

/** Inverse of report_to_csv. Throws DataError on malformed input. */
EvalReport report_from_csv(const std::string& csv);

/** Short human-readable block: averages plus the per-horizon table. */
std::string report_summary(const EvalReport& r);

// ====================== model comparison ======================

/** One scored model, as fed to the comparison table. */
struct NamedReport {
    std::string name;
    EvalReport report;
};

/**
 * Rank reports by average hit rate at alpha = 1.25, best first; ties keep
 * their input order. Requires at least two reports (UsageError otherwise).
 * Columns: model, both average hit rates, average MSE.
 */
std::vector<NamedReport> rank_models(std::span<const NamedReport> reports);

/** Ranking as CSV (model,avg_hit_rate_alpha_1,avg_hit_rate_alpha_1_25,avg_mse). */
std::string comparison_to_csv(std::span<const NamedReport> reports);

/** Ranking as an aligned text table. */
std::string comparison_to_text(std::span<const NamedReport> reports);

}  // namespace fovcast
