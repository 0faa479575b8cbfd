#include "fovcast/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fovcast {

// ====================== HeatGrid ======================

std::size_t HeatGrid::check(int row, int col) {
    if (row < 0 || row >= kRows || col < 0 || col >= kCols)
        throw std::out_of_range("heat grid cell out of range");
    return static_cast<std::size_t>(row) * kCols + col;
}

void HeatGrid::set(int row, int col, double value) {
    if (value < 0.0) throw std::invalid_argument("heat grid values must be non-negative");
    v_[check(row, col)] = value;
}

void HeatGrid::add(int row, int col, double value) {
    const std::size_t i = check(row, col);
    const double next = v_[i] + value;
    if (next < 0.0) throw std::invalid_argument("heat grid values must be non-negative");
    v_[i] = next;
}

double HeatGrid::sum() const { return std::accumulate(v_.begin(), v_.end(), 0.0); }

// ====================== binning ======================

int theta_bin(double theta_rad) {
    const double deg = rad2deg(wrap_angle(theta_rad));
    const int c = static_cast<int>(std::floor((deg + 180.0) / HeatGrid::kBinDeg));
    return std::clamp(c, 0, HeatGrid::kCols - 1);
}

int phi_bin(double phi_rad) {
    const double deg = rad2deg(std::clamp(phi_rad, -kPi / 2, kPi / 2));
    const int r = static_cast<int>(std::floor((deg + 90.0) / HeatGrid::kBinDeg));
    return std::clamp(r, 0, HeatGrid::kRows - 1);
}

double bin_center_theta_deg(int col) { return HeatGrid::kBinDeg * (col + 0.5) - 180.0; }
double bin_center_phi_deg(int row) { return HeatGrid::kBinDeg * (row + 0.5) - 90.0; }

// ====================== rasterization ======================

namespace {

int span_to_bins(double span_deg, const char* what) {
    const double bins = span_deg / HeatGrid::kBinDeg;
    const int n = static_cast<int>(std::lround(bins));
    if (n < 1 || std::abs(bins - n) > 1e-9)
        throw std::invalid_argument(std::string(what) +
                                    " span must be a positive multiple of the bin size");
    return n;
}

}  // namespace

HeatGrid fov_rectangle_mask(const SphericalAngle& center, const HeatmapConfig& cfg) {
    const int span_cols = span_to_bins(cfg.fov_span_theta_deg, "longitude");
    const int span_rows = span_to_bins(cfg.fov_span_phi_deg, "latitude");

    const double col_pos = (rad2deg(wrap_angle(center.theta)) + 180.0) / HeatGrid::kBinDeg;
    const int c0 = std::clamp(static_cast<int>(std::floor(col_pos)), 0, HeatGrid::kCols - 1);
    int col_start;
    if (span_cols % 2 == 0) {
        // An even window cannot be symmetric about a bin: take the window
        // whose center angle is nearest the true center (ties to the right).
        const double frac = col_pos - std::floor(col_pos);
        col_start = frac < 0.5 ? c0 - span_cols / 2 : c0 - span_cols / 2 + 1;
    } else {
        col_start = c0 - span_cols / 2;
    }

    const int r0 = phi_bin(center.phi);
    const int row_start = r0 - span_rows / 2;

    HeatGrid g;
    for (int dr = 0; dr < span_rows; ++dr) {
        const int r = row_start + dr;
        if (r < 0 || r >= HeatGrid::kRows) continue;  // beyond a pole
        for (int dc = 0; dc < span_cols; ++dc) {
            const int c = ((col_start + dc) % HeatGrid::kCols + HeatGrid::kCols) % HeatGrid::kCols;
            g.set(r, c, 1.0);
        }
    }
    return g;
}

HeatGrid blur_rows(const HeatGrid& grid, const HeatmapConfig& cfg) {
    if (cfg.sigma0_bins <= 0.0) throw std::invalid_argument("blur sigma must be positive");
    HeatGrid out;
    std::array<double, HeatGrid::kCols> kernel{};
    for (int r = 0; r < HeatGrid::kRows; ++r) {
        const double phi =
            std::min(std::abs(bin_center_phi_deg(r)), cfg.sigma_phi_clamp_deg);
        const double sigma = cfg.sigma0_bins / std::cos(deg2rad(phi));
        const int radius = static_cast<int>(std::ceil(4.0 * sigma));

        // Truncate at 4 sigma, normalize, then fold into one circular period
        // so long kernels wrap cleanly. Folding keeps the sum at exactly 1.
        kernel.fill(0.0);
        double norm = 0.0;
        for (int k = -radius; k <= radius; ++k) norm += std::exp(-0.5 * k * k / (sigma * sigma));
        for (int k = -radius; k <= radius; ++k) {
            const int idx = ((k % HeatGrid::kCols) + HeatGrid::kCols) % HeatGrid::kCols;
            kernel[idx] += std::exp(-0.5 * k * k / (sigma * sigma)) / norm;
        }

        for (int c = 0; c < HeatGrid::kCols; ++c) {
            const double v = grid.at(r, c);
            if (v == 0.0) continue;
            for (int k = 0; k < HeatGrid::kCols; ++k) {
                const int dst = (c + k) % HeatGrid::kCols;
                if (kernel[k] > 0.0) out.add(r, dst, v * kernel[k]);
            }
        }
    }
    return out;
}

HeatGrid frame_heatmap(const SphericalAngle& center, const HeatmapConfig& cfg) {
    return blur_rows(fov_rectangle_mask(center, cfg), cfg);
}

HeatGrid second_heatmap(std::span<const UnitVec3> frames, const HeatmapConfig& cfg) {
    if (frames.empty() || static_cast<int>(frames.size()) > cfg.fps)
        throw std::invalid_argument("a second holds between 1 and fps frames");
    HeatGrid acc;
    for (const UnitVec3& f : frames) {
        const HeatGrid h = frame_heatmap(unit_to_angles(f), cfg);
        for (int r = 0; r < HeatGrid::kRows; ++r)
            for (int c = 0; c < HeatGrid::kCols; ++c)
                if (h.at(r, c) != 0.0) acc.add(r, c, h.at(r, c));
    }
    return acc;
}

// ====================== center estimation ======================

SphericalAngle estimate_center(const HeatGrid& grid) {
    std::array<double, HeatGrid::kCols> col_weight{};
    double total = 0.0, phi_acc = 0.0;
    for (int r = 0; r < HeatGrid::kRows; ++r) {
        const double cos_phi = std::cos(deg2rad(bin_center_phi_deg(r)));
        for (int c = 0; c < HeatGrid::kCols; ++c) {
            const double w = grid.at(r, c) * cos_phi;
            col_weight[c] += w;
            phi_acc += w * bin_center_phi_deg(r);
            total += w;
        }
    }
    if (total <= 0.0) throw NumericError("cannot estimate the center of an all-zero heatmap");

    std::array<double, HeatGrid::kCols> col_theta;
    for (int c = 0; c < HeatGrid::kCols; ++c) col_theta[c] = deg2rad(bin_center_theta_deg(c));
    const double theta = circular_mean(col_theta, col_weight);
    return make_angle(theta, deg2rad(phi_acc / total));
}

// ====================== tile overlap ======================

double tile_overlap_ratio(const HeatGrid& pred, const HeatGrid& gt) {
    int n = 0;
    for (double v : gt.cells())
        if (v > 0.0) ++n;
    if (n == 0) throw std::invalid_argument("ground-truth heatmap has an empty support");

    std::array<int, HeatGrid::kCells> order;
    std::iota(order.begin(), order.end(), 0);
    const auto cells = pred.cells();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (cells[a] != cells[b]) return cells[a] > cells[b];
        return a < b;
    });

    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (gt.cells()[order[i]] > 0.0) ++hits;
    return static_cast<double>(hits) / n;
}

// ====================== serialization ======================

void append_grid(std::string& out, const HeatGrid& grid, int bin_deg) {
    put_u32_le(out, HeatGrid::kRows);
    put_u32_le(out, HeatGrid::kCols);
    put_u32_le(out, static_cast<std::uint32_t>(bin_deg));
    for (double v : grid.cells()) put_f64_le(out, v);
}

HeatGrid parse_grid(const std::string& in, std::size_t& pos, int* bin_deg_out) {
    const std::uint32_t rows = get_u32_le(in, pos);
    const std::uint32_t cols = get_u32_le(in, pos);
    const std::uint32_t bin_deg = get_u32_le(in, pos);
    if (rows != HeatGrid::kRows || cols != HeatGrid::kCols)
        throw DataError("heatmap record has an unsupported shape");
    HeatGrid g;
    for (int r = 0; r < HeatGrid::kRows; ++r)
        for (int c = 0; c < HeatGrid::kCols; ++c) {
            const double v = get_f64_le(in, pos);
            if (v < 0.0) throw DataError("heatmap record holds a negative value");
            g.set(r, c, v);
        }
    if (bin_deg_out) *bin_deg_out = static_cast<int>(bin_deg);
    return g;
}

}  // namespace fovcast
