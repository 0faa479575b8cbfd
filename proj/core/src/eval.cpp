#include "fovcast/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "fovcast/common.hpp"

namespace fovcast {

namespace {

// ====================== shared accumulation ======================

/** Running per-horizon sums, finalized into an EvalReport by divide(). */
struct Accumulator {
    explicit Accumulator(int horizons)
        : h100(horizons, 0.0), h125(horizons, 0.0), sq(horizons, 0.0), centers(horizons, 0) {}

    std::vector<double> h100, h125, sq;
    std::vector<std::int64_t> centers;  // center predictions scored per horizon

    void add_center(int k, const UnitVec3& pred, std::span<const UnitVec3> gt_frames,
                    const UnitVec3& gt_mu, std::pair<double, double> fov, double grid_deg) {
        h100[k] += hit_rate_for_second(pred, gt_frames, 1.0, fov, grid_deg);
        h125[k] += hit_rate_for_second(pred, gt_frames, 1.25, fov, grid_deg);
        const double dx = pred.x - gt_mu.x;
        const double dy = pred.y - gt_mu.y;
        const double dz = pred.z - gt_mu.z;
        sq[k] += dx * dx + dy * dy + dz * dz;
        ++centers[k];
    }

    void finalize(EvalReport& r) const {
        const int L = static_cast<int>(h100.size());
        r.horizons = L;
        r.hit_rate_a100.resize(L);
        r.hit_rate_a125.resize(L);
        r.mse.resize(L);
        for (int k = 0; k < L; ++k) {
            const double n = centers[k] > 0 ? static_cast<double>(centers[k]) : 1.0;
            r.hit_rate_a100[k] = h100[k] / n;
            r.hit_rate_a125[k] = h125[k] / n;
            r.mse[k] = sq[k] / n;
        }
        r.avg_hit_rate_a100 = mean(r.hit_rate_a100);
        r.avg_hit_rate_a125 = mean(r.hit_rate_a125);
        r.avg_mse = mean(r.mse);
    }

    static double mean(const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }
};

/** Common shape checks; returns the horizon count shared by all predictions. */
template <typename Pred, typename Window>
int check_alignment(std::span<const std::vector<Pred>> preds, std::span<const Window> gt,
                    std::size_t (*future_depth)(const Window&)) {
    if (preds.size() != gt.size())
        throw UsageError("evaluate: " + std::to_string(preds.size()) + " prediction lists for " +
                         std::to_string(gt.size()) + " windows");
    if (gt.empty()) throw UsageError("evaluate: no windows");
    const std::size_t L = preds.front().size();
    if (L == 0) throw UsageError("evaluate: empty prediction list");
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != L)
            throw UsageError("evaluate: window " + std::to_string(i) + " has " +
                             std::to_string(preds[i].size()) + " predictions, expected " +
                             std::to_string(L));
        if (future_depth(gt[i]) < L)
            throw UsageError("evaluate: window " + std::to_string(i) + " carries only " +
                             std::to_string(future_depth(gt[i])) + " future seconds for horizon " +
                             std::to_string(L));
    }
    return static_cast<int>(L);
}

}  // namespace

// ====================== evaluators ======================

EvalReport evaluate_trajectory(std::span<const std::vector<UnitVec3>> preds,
                               std::span<const TrajectoryWindow> gt, const EvalOptions& opt) {
    const int L = check_alignment<UnitVec3, TrajectoryWindow>(
        preds, gt, [](const TrajectoryWindow& w) { return w.future_summaries.size(); });

    Accumulator acc(L);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const TrajectoryWindow& w = gt[i];
        if (w.future_frames.size() < static_cast<std::size_t>(L) * w.fps)
            throw UsageError("evaluate: window " + std::to_string(i) + " is missing future frames");
        for (int k = 0; k < L; ++k) {
            const std::span<const UnitVec3> frames(w.future_frames.data() +
                                                       static_cast<std::size_t>(k) * w.fps,
                                                   static_cast<std::size_t>(w.fps));
            acc.add_center(k, preds[i][k], frames, w.future_summaries[k].mu,
                           opt.trajectory_fov_deg, opt.grid_deg);
        }
    }

    EvalReport r;
    r.windows = static_cast<std::int64_t>(gt.size());
    acc.finalize(r);
    return r;
}

EvalReport evaluate_heatmap(std::span<const std::vector<HeatGrid>> preds,
                            std::span<const HeatmapWindow> gt, const EvalOptions& opt) {
    const int L = check_alignment<HeatGrid, HeatmapWindow>(
        preds, gt, [](const HeatmapWindow& w) {
            return std::min(w.future.size(), w.future_summaries.size());
        });

    Accumulator acc(L);
    std::vector<double> overlap(L, 0.0);
    std::int64_t skipped = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const HeatmapWindow& w = gt[i];
        if (w.future_frames.size() < static_cast<std::size_t>(L) * w.fps)
            throw UsageError("evaluate: window " + std::to_string(i) + " is missing future frames");
        for (int k = 0; k < L; ++k) {
            overlap[k] += tile_overlap_ratio(preds[i][k], w.future[k]);

            SphericalAngle center;
            bool have_center = true;
            try {
                center = estimate_center(preds[i][k]);
            } catch (const NumericError&) {
                have_center = false;  // no usable mass; overlap above still counts
                ++skipped;
            }
            if (!have_center) continue;
            const std::span<const UnitVec3> frames(w.future_frames.data() +
                                                       static_cast<std::size_t>(k) * w.fps,
                                                   static_cast<std::size_t>(w.fps));
            acc.add_center(k, angles_to_unit(center), frames, w.future_summaries[k].mu,
                           opt.heatmap_fov_deg, opt.grid_deg);
        }
    }

    EvalReport r;
    r.windows = static_cast<std::int64_t>(gt.size());
    r.skipped_centers = skipped;
    acc.finalize(r);
    for (int k = 0; k < L; ++k) overlap[k] /= static_cast<double>(gt.size());
    r.tile_overlap = std::move(overlap);
    return r;
}

// ====================== serialization ======================

namespace {

const char* kCsvHeader =
    "horizon,hit_rate_alpha_1,hit_rate_alpha_1_25,mse,tile_overlap,windows,skipped_centers";

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_field(const std::string& s, const char* what) {
    if (s.empty()) throw DataError(std::string("report csv: empty ") + what + " field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw DataError(std::string("report csv: bad ") + what + " value '" + s + "'");
    return v;
}

std::int64_t parse_count_field(const std::string& s, const char* what) {
    if (s.empty()) throw DataError(std::string("report csv: empty ") + what + " field");
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || v < 0)
        throw DataError(std::string("report csv: bad ") + what + " value '" + s + "'");
    return v;
}

}  // namespace

std::string report_to_csv(const EvalReport& r) {
    std::string out = kCsvHeader;
    out += '\n';
    const bool grids = !r.tile_overlap.empty();
    const std::string counts =
        "," + std::to_string(r.windows) + "," + std::to_string(r.skipped_centers);
    for (int k = 0; k < r.horizons; ++k) {
        out += std::to_string(k + 1);
        out += ',' + fmt_double(r.hit_rate_a100[k]);
        out += ',' + fmt_double(r.hit_rate_a125[k]);
        out += ',' + fmt_double(r.mse[k]);
        out += ',';
        if (grids) out += fmt_double(r.tile_overlap[k]);
        out += counts;
        out += '\n';
    }
    out += "average";
    out += ',' + fmt_double(r.avg_hit_rate_a100);
    out += ',' + fmt_double(r.avg_hit_rate_a125);
    out += ',' + fmt_double(r.avg_mse);
    out += ',';
    out += counts;
    out += '\n';
    return out;
}

EvalReport report_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw DataError("report csv: missing or unexpected header");

    EvalReport r;
    bool saw_average = false;
    bool first_row = true;
    bool grids = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (saw_average) throw DataError("report csv: rows after the average row");
        const std::vector<std::string> f = split_csv_row(line);
        if (f.size() != 7) throw DataError("report csv: expected 7 fields per row");

        const std::int64_t windows = parse_count_field(f[5], "windows");
        const std::int64_t skipped = parse_count_field(f[6], "skipped_centers");
        if (first_row) {
            r.windows = windows;
            r.skipped_centers = skipped;
            grids = !f[4].empty();
            first_row = false;
        } else if (windows != r.windows || skipped != r.skipped_centers) {
            throw DataError("report csv: inconsistent counts across rows");
        }

        if (f[0] == "average") {
            r.avg_hit_rate_a100 = parse_double_field(f[1], "hit_rate_alpha_1");
            r.avg_hit_rate_a125 = parse_double_field(f[2], "hit_rate_alpha_1_25");
            r.avg_mse = parse_double_field(f[3], "mse");
            if (!f[4].empty()) throw DataError("report csv: average row carries a tile overlap");
            saw_average = true;
            continue;
        }
        const std::int64_t horizon = parse_count_field(f[0], "horizon");
        if (horizon != r.horizons + 1)
            throw DataError("report csv: horizon rows must run 1..L in order");
        r.hit_rate_a100.push_back(parse_double_field(f[1], "hit_rate_alpha_1"));
        r.hit_rate_a125.push_back(parse_double_field(f[2], "hit_rate_alpha_1_25"));
        r.mse.push_back(parse_double_field(f[3], "mse"));
        if (grids != !f[4].empty())
            throw DataError("report csv: tile overlap present on some rows only");
        if (grids) r.tile_overlap.push_back(parse_double_field(f[4], "tile_overlap"));
        ++r.horizons;
    }
    if (!saw_average) throw DataError("report csv: missing average row");
    if (r.horizons == 0) throw DataError("report csv: no horizon rows");
    return r;
}

std::string report_summary(const EvalReport& r) {
    const bool grids = !r.tile_overlap.empty();
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof(buf), "windows %lld, horizons 1-%d",
                  static_cast<long long>(r.windows), r.horizons);
    out += buf;
    if (grids) {
        std::snprintf(buf, sizeof(buf), ", centers skipped %lld",
                      static_cast<long long>(r.skipped_centers));
        out += buf;
    }
    out += '\n';
    std::snprintf(buf, sizeof(buf),
                  "average hit rate  alpha=1.00 %.4f  alpha=1.25 %.4f   mse %.6f\n",
                  r.avg_hit_rate_a100, r.avg_hit_rate_a125, r.avg_mse);
    out += buf;
    out += grids ? "  h   hit@1.00   hit@1.25        mse    overlap\n"
                 : "  h   hit@1.00   hit@1.25        mse\n";
    for (int k = 0; k < r.horizons; ++k) {
        if (grids) {
            std::snprintf(buf, sizeof(buf), "%3d   %8.4f   %8.4f   %8.6f   %8.4f\n", k + 1,
                          r.hit_rate_a100[k], r.hit_rate_a125[k], r.mse[k], r.tile_overlap[k]);
        } else {
            std::snprintf(buf, sizeof(buf), "%3d   %8.4f   %8.4f   %8.6f\n", k + 1,
                          r.hit_rate_a100[k], r.hit_rate_a125[k], r.mse[k]);
        }
        out += buf;
    }
    return out;
}

// ====================== model comparison ======================

std::vector<NamedReport> rank_models(std::span<const NamedReport> reports) {
    if (reports.size() < 2) throw UsageError("rank_models: need at least two reports");
    std::vector<NamedReport> sorted(reports.begin(), reports.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const NamedReport& a, const NamedReport& b) {
        return a.report.avg_hit_rate_a125 > b.report.avg_hit_rate_a125;
    });
    return sorted;
}

std::string comparison_to_csv(std::span<const NamedReport> reports) {
    std::string out = "model,avg_hit_rate_alpha_1,avg_hit_rate_alpha_1_25,avg_mse\n";
    for (const NamedReport& nr : rank_models(reports)) {
        out += nr.name;
        out += ',' + fmt_double(nr.report.avg_hit_rate_a100);
        out += ',' + fmt_double(nr.report.avg_hit_rate_a125);
        out += ',' + fmt_double(nr.report.avg_mse);
        out += '\n';
    }
    return out;
}

std::string comparison_to_text(std::span<const NamedReport> reports) {
    const std::vector<NamedReport> sorted = rank_models(reports);
    std::size_t width = 5;  // "model"
    for (const NamedReport& nr : sorted) width = std::max(width, nr.name.size());

    std::string out(width - 5, ' ');
    out += "model   hit@1.00   hit@1.25        mse\n";
    char buf[96];
    for (const NamedReport& nr : sorted) {
        out.append(width - nr.name.size(), ' ');
        out += nr.name;
        std::snprintf(buf, sizeof(buf), "   %8.4f   %8.4f   %8.6f\n",
                      nr.report.avg_hit_rate_a100, nr.report.avg_hit_rate_a125,
                      nr.report.avg_mse);
        out += buf;
    }
    return out;
}

}  // namespace fovcast
