#pragma once

#include <array>
#include <span>
#include <string>

#include "fovcast/geometry.hpp"

namespace fovcast {

/**
 * Equirectangular occupancy grid: 18 latitude rows x 36 longitude columns of
 * 10-degree bins. Row 0 covers phi in [-90, -80), column 0 covers theta in
 * [-180, -170). Values are non-negative by construction.
 */
class HeatGrid {
public:
    static constexpr int kRows = 18;
    static constexpr int kCols = 36;
    static constexpr int kCells = kRows * kCols;
    static constexpr int kBinDeg = 10;

    HeatGrid() = default;  // all zeros

    double at(int row, int col) const { return v_[check(row, col)]; }

    /** Assign one cell; negative values are rejected. */
    void set(int row, int col, double value);

    /** Accumulate into one cell; the result must stay non-negative. */
    void add(int row, int col, double value);

    /** Row-major view of all 648 cells. */
    std::span<const double, kCells> cells() const { return v_; }

    double sum() const;

    bool operator==(const HeatGrid&) const = default;

private:
    static std::size_t check(int row, int col);
    std::array<double, kCells> v_{};
};

/** Rasterization parameters. Spans must be positive multiples of the bin size. */
struct HeatmapConfig {
    double fov_span_theta_deg = 120.0;
    double fov_span_phi_deg = 90.0;
    int fps = 30;
    double sigma0_bins = 1.0;          // blur STD at the equator, in bins
    double sigma_phi_clamp_deg = 80.0; // |phi| cap when evaluating 1/cos(phi)
};

/** Column of a longitude (radians; wrapped internally). */
int theta_bin(double theta_rad);
/** Row of a latitude (radians; the +90 pole belongs to the top row). */
int phi_bin(double phi_rad);
double bin_center_theta_deg(int col);
double bin_center_phi_deg(int row);

/**
 * Pre-blur FoV footprint: a cols x rows rectangle of ones (12 x 9 at the
 * default spans). Columns wrap circularly; rows beyond the poles are
 * discarded. Even spans cannot be symmetric about the center bin, so the
 * window whose center angle is nearest the true center is used (ties toward
 * the higher window), keeping the footprint within half a bin of the center.
 */
HeatGrid fov_rectangle_mask(const SphericalAngle& center, const HeatmapConfig& cfg = {});

/**
 * Per-row circular Gaussian blur along longitude with STD
 * sigma0_bins / cos(phi_row), the latitude clamped to +-sigma_phi_clamp_deg.
 * Kernels are truncated at 4 sigma and renormalized, so row sums are
 * preserved. Latitude is not blurred.
 */
HeatGrid blur_rows(const HeatGrid& grid, const HeatmapConfig& cfg = {});

/** Rasterized FoV of a single frame: rectangle mask followed by the row blur. */
HeatGrid frame_heatmap(const SphericalAngle& center, const HeatmapConfig& cfg = {});

/** Sum of the frame heatmaps of one second. Requires 1..fps frames. */
HeatGrid second_heatmap(std::span<const UnitVec3> frames, const HeatmapConfig& cfg = {});

/**
 * Mean view direction encoded by a heatmap: cells weighted by value times
 * cos(latitude); longitude via circular mean, latitude via linear mean.
 * Throws NumericError for an all-zero grid (and degenerate longitude masses).
 */
SphericalAngle estimate_center(const HeatGrid& grid);

/**
 * Fraction of the ground truth's N live cells that appear among the N
 * highest-valued predicted cells (ties resolved toward lower row-major
 * indices). Requires a non-empty ground-truth support.
 */
double tile_overlap_ratio(const HeatGrid& pred, const HeatGrid& gt);

/** Append one grid record: u32 rows, u32 cols, u32 bin_deg, then row-major f64 cells (little-endian). */
void append_grid(std::string& out, const HeatGrid& grid, int bin_deg = HeatGrid::kBinDeg);

/** Parse one grid record starting at pos; advances pos. Throws DataError on truncation or shape mismatch. */
HeatGrid parse_grid(const std::string& in, std::size_t& pos, int* bin_deg_out = nullptr);

}  // namespace fovcast
