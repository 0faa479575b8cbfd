#pragma once

// One-struct configuration plus the file-to-file operations behind the CLI:
// ingest raw traces, rasterize per-second heatmaps, train a forecaster,
// dump predictions, score a model or baseline, and rank saved reports.
// Every operation is deterministic given its config and writes atomically;
// run_train / run_predict / run_eval snapshot the exact config they used
// into their output directory.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fovcast/dataset.hpp"
#include "fovcast/eval.hpp"
#include "fovcast/train.hpp"

namespace fovcast {

// ====================== run configuration ======================

/**
 * Flat bag of every knob the CLI exposes. JSON configs use exactly these
 * field names as keys; unknown keys are rejected so typos surface instead of
 * silently keeping a default. Values loaded from a config file take
 * precedence over command-line flags.
 *
 * family selects the predictor kind: "trajectory" (learned center
 * forecaster), "heatmap" (learned grid forecaster) or "baseline"
 * (closed-form predictor named by `variant`: persistency,
 * linear_regression, truncated_linear, naive_average, knn). For the
 * learned families `variant` names the trajectory variant or fusion mode.
 */
struct RunConfig {
    std::string family = "trajectory";
    std::string variant = "target_only";

    // sliding windows
    int past_seconds = 10;
    int future_seconds = 10;
    int stride_seconds = 1;
    int fps = 30;
    /** Viewport scale factors scored by the evaluator (fixed pair). */
    std::vector<double> alphas{1.0, 1.25};

    // trajectory-family architecture
    int hidden = 64;
    int embed_dim = 16;
    int n_others = 8;

    // baseline knobs
    int knn_k = 5;

    // heatmap-family architecture
    std::vector<int> channels{128, 64, 32};
    int others_channels = 32;
    int sal_mid_channels = 16;
    int sal_channels = 8;
    int head_mid_channels = 32;
    int kernel = 3;

    // rasterization
    double fov_span_theta_deg = 120.0;
    double fov_span_phi_deg = 90.0;
    double sigma0_bins = 1.0;
    double sigma_phi_clamp_deg = 80.0;
    bool keep_partial = false;  // keep a trailing partial second when rasterizing

    TrainConfig train;

    // paths
    std::string sessions_path;
    std::string saliency_path;
    std::string weights_path;
    std::string out_dir;
};

/** Serialize with every field present, 2-space indented, key order fixed. */
std::string config_to_json(const RunConfig& cfg);

/**
 * Overlay the JSON object in `text` onto cfg: keys present replace the
 * current values, absent keys keep them. Throws DataError on malformed JSON,
 * unknown keys, or wrong value types.
 */
void apply_config_json(RunConfig& cfg, const std::string& text);

/** Defaults plus a full overlay. */
RunConfig config_from_json(const std::string& text);

/** Check field ranges and family/variant consistency; throws UsageError. */
void validate_config(const RunConfig& cfg);

/** The HeatmapConfig equivalent of the rasterization fields. */
HeatmapConfig heatmap_config_of(const RunConfig& cfg);

// ====================== operations ======================

/**
 * Parse raw traces with the named adapter and write the canonical
 * session file (sorted, line-delimited, atomic). Adapters without an fps
 * column stamp every session with `fps`. Rejected rows are reported in the
 * returned diagnostics; an unreadable file throws DataError and an unknown
 * adapter UsageError.
 */
IngestReport run_ingest(const std::string& adapter, const std::string& raw_path,
                        const std::string& out_path, int fps = 30);

/**
 * Rasterize per-second heatmaps for every session in cfg.sessions_path into
 * one heatmap container file at out_path. Returns the record count.
 */
std::size_t run_gen_heatmaps(const RunConfig& cfg, const std::string& out_path);

/**
 * Build windows from cfg.sessions_path, fit the configured model and write
 * weights.fwt, loss_curve.csv and config.json into cfg.out_dir.
 * family "baseline" is rejected (nothing to train).
 */
TrainReport run_train(const RunConfig& cfg);

struct PredictOutcome {
    std::int64_t windows = 0;          // windows a prediction was emitted for
    std::int64_t skipped_windows = 0;  // windows the predictor could not serve
    std::string centers_path;
    std::string grids_path;  // heatmap family only
};

/**
 * Emit per-window, per-horizon predictions into cfg.out_dir:
 * predictions.csv with unit-vector centers (plus per-axis spreads for the
 * trajectory family), and predicted_grids.bin for the heatmap family.
 * Windows a roster-dependent predictor cannot serve (no other users) are
 * skipped and counted.
 */
PredictOutcome run_predict(const RunConfig& cfg);

/**
 * Score the configured model or baseline over cfg.sessions_path and write
 * report.csv, summary.txt and config.json into cfg.out_dir.
 */
EvalReport run_eval(const RunConfig& cfg);

/** A saved report.csv to include in a comparison, with its display name. */
struct NamedReportFile {
    std::string name;
    std::string path;
};

/**
 * Load saved reports, rank them and write comparison.csv (and the returned
 * text table as comparison.txt) into out_dir if non-empty. Needs >= 2 files.
 */
std::string run_compare(std::span<const NamedReportFile> reports, const std::string& out_dir);

}  // namespace fovcast
