#pragma once

// Non-learned comparison predictors plus the single-cell recurrent baseline.
// All geometric predictors return one unit-norm center per horizon second.

#include <vector>

#include "fovcast/dataset.hpp"
#include "fovcast/geometry.hpp"
#include "fovcast/models.hpp"

namespace fovcast {

/** Repeat the last observed frame's center for every horizon. */
std::vector<UnitVec3> persistency(const TrajectoryWindow& w, int horizons);

/**
 * Per-axis ordinary least squares of (x, y, z) against frame timestamps over
 * the last min(10, T) past seconds, extrapolated to each future second's
 * midpoint and renormalized. Degenerate fits fall back to persistency.
 */
std::vector<UnitVec3> linear_regression_predict(const TrajectoryWindow& w, int horizons);

/**
 * Linear extrapolation fitted only on the most recent monotonic stretch:
 * unwrap longitude over the past, then independently for the longitude and
 * latitude series find the longest suffix whose consecutive differences keep
 * one sign (zeros allowed) and fit that suffix. Latitude is clamped at the
 * poles and longitude re-wrapped. An axis whose suffix is too short to fit
 * falls back to persistency on that axis.
 */
std::vector<UnitVec3> truncated_linear_predict(const TrajectoryWindow& w, int horizons);

/**
 * Normalized mean of the other users' centers at each horizon.
 * Throws DataError without other users, NumericError when they cancel out.
 */
std::vector<UnitVec3> naive_average(const TrajectoryWindow& w, int horizons);

/**
 * Nearest-neighbour chain: starting from the last past frame, at each horizon
 * average the k other users closest (great-circle, index ties broken low) to
 * the previous prediction; that average becomes the next anchor. k is capped
 * at the roster size.
 */
std::vector<UnitVec3> knn_predict(const TrajectoryWindow& w, int horizons, int k = 5);

/**
 * The shared-cell recurrent baseline: forwards to the trajectory model,
 * requiring a trained model of the single-cell variant (UsageError otherwise).
 */
std::vector<SecondSummary> single_lstm_predict(const TrajectoryModel& m,
                                               const TrajectoryWindow& w, int horizons);

}  // namespace fovcast
