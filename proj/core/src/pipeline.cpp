#include "fovcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <utility>

#include "json.hpp"

#include "fovcast/baselines.hpp"
#include "fovcast/weights.hpp"

namespace fovcast {

namespace {

using ordered_json = nlohmann::ordered_json;

// ====================== config json ======================

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["family"] = c.family;
    j["variant"] = c.variant;
    j["past_seconds"] = c.past_seconds;
    j["future_seconds"] = c.future_seconds;
    j["stride_seconds"] = c.stride_seconds;
    j["fps"] = c.fps;
    j["alphas"] = c.alphas;
    j["hidden"] = c.hidden;
    j["embed_dim"] = c.embed_dim;
    j["n_others"] = c.n_others;
    j["knn_k"] = c.knn_k;
    j["channels"] = c.channels;
    j["others_channels"] = c.others_channels;
    j["sal_mid_channels"] = c.sal_mid_channels;
    j["sal_channels"] = c.sal_channels;
    j["head_mid_channels"] = c.head_mid_channels;
    j["kernel"] = c.kernel;
    j["fov_span_theta_deg"] = c.fov_span_theta_deg;
    j["fov_span_phi_deg"] = c.fov_span_phi_deg;
    j["sigma0_bins"] = c.sigma0_bins;
    j["sigma_phi_clamp_deg"] = c.sigma_phi_clamp_deg;
    j["keep_partial"] = c.keep_partial;
    j["epochs"] = c.train.epochs;
    j["batch_size"] = c.train.batch_size;
    j["horizons"] = c.train.horizons;
    j["learning_rate"] = c.train.learning_rate;
    j["beta1"] = c.train.beta1;
    j["beta2"] = c.train.beta2;
    j["adam_eps"] = c.train.adam_eps;
    j["clip_norm"] = c.train.clip_norm;
    j["seed"] = c.train.seed;
    j["shuffle"] = c.train.shuffle;
    j["stop_at_train_loss"] = c.train.stop_at_train_loss;
    j["val_fraction"] = c.train.val_fraction;
    j["sessions_path"] = c.sessions_path;
    j["saliency_path"] = c.saliency_path;
    j["weights_path"] = c.weights_path;
    j["out_dir"] = c.out_dir;
    return j;
}

template <typename T>
T typed(const ordered_json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const ordered_json::exception&) {
        throw DataError("config: wrong value type for key '" + key + "'");
    }
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

void apply_config_json(RunConfig& c, const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw DataError("config: top level must be a JSON object");

    for (const auto& [key, v] : j.items()) {
        if (key == "family") c.family = typed<std::string>(v, key);
        else if (key == "variant") c.variant = typed<std::string>(v, key);
        else if (key == "past_seconds") c.past_seconds = typed<int>(v, key);
        else if (key == "future_seconds") c.future_seconds = typed<int>(v, key);
        else if (key == "stride_seconds") c.stride_seconds = typed<int>(v, key);
        else if (key == "fps") c.fps = typed<int>(v, key);
        else if (key == "alphas") c.alphas = typed<std::vector<double>>(v, key);
        else if (key == "hidden") c.hidden = typed<int>(v, key);
        else if (key == "embed_dim") c.embed_dim = typed<int>(v, key);
        else if (key == "n_others") c.n_others = typed<int>(v, key);
        else if (key == "knn_k") c.knn_k = typed<int>(v, key);
        else if (key == "channels") c.channels = typed<std::vector<int>>(v, key);
        else if (key == "others_channels") c.others_channels = typed<int>(v, key);
        else if (key == "sal_mid_channels") c.sal_mid_channels = typed<int>(v, key);
        else if (key == "sal_channels") c.sal_channels = typed<int>(v, key);
        else if (key == "head_mid_channels") c.head_mid_channels = typed<int>(v, key);
        else if (key == "kernel") c.kernel = typed<int>(v, key);
        else if (key == "fov_span_theta_deg") c.fov_span_theta_deg = typed<double>(v, key);
        else if (key == "fov_span_phi_deg") c.fov_span_phi_deg = typed<double>(v, key);
        else if (key == "sigma0_bins") c.sigma0_bins = typed<double>(v, key);
        else if (key == "sigma_phi_clamp_deg") c.sigma_phi_clamp_deg = typed<double>(v, key);
        else if (key == "keep_partial") c.keep_partial = typed<bool>(v, key);
        else if (key == "epochs") c.train.epochs = typed<int>(v, key);
        else if (key == "batch_size") c.train.batch_size = typed<int>(v, key);
        else if (key == "horizons") c.train.horizons = typed<int>(v, key);
        else if (key == "learning_rate") c.train.learning_rate = typed<double>(v, key);
        else if (key == "beta1") c.train.beta1 = typed<double>(v, key);
        else if (key == "beta2") c.train.beta2 = typed<double>(v, key);
        else if (key == "adam_eps") c.train.adam_eps = typed<double>(v, key);
        else if (key == "clip_norm") c.train.clip_norm = typed<double>(v, key);
        else if (key == "seed") c.train.seed = typed<std::uint64_t>(v, key);
        else if (key == "shuffle") c.train.shuffle = typed<bool>(v, key);
        else if (key == "stop_at_train_loss") c.train.stop_at_train_loss = typed<double>(v, key);
        else if (key == "val_fraction") c.train.val_fraction = typed<double>(v, key);
        else if (key == "sessions_path") c.sessions_path = typed<std::string>(v, key);
        else if (key == "saliency_path") c.saliency_path = typed<std::string>(v, key);
        else if (key == "weights_path") c.weights_path = typed<std::string>(v, key);
        else if (key == "out_dir") c.out_dir = typed<std::string>(v, key);
        else throw DataError("config: unknown key '" + key + "'");
    }
}

RunConfig config_from_json(const std::string& text) {
    RunConfig c;
    apply_config_json(c, text);
    return c;
}

// ====================== validation ======================

namespace {

const char* kBaselineNames[] = {"persistency", "linear_regression", "truncated_linear",
                                "naive_average", "knn"};

bool is_baseline_name(const std::string& name) {
    for (const char* b : kBaselineNames)
        if (name == b) return true;
    return false;
}

void check(bool ok, const std::string& msg) {
    if (!ok) throw UsageError("config: " + msg);
}

}  // namespace

void validate_config(const RunConfig& c) {
    check(c.family == "trajectory" || c.family == "heatmap" || c.family == "baseline",
          "family must be trajectory, heatmap or baseline, not '" + c.family + "'");
    if (c.family == "trajectory") {
        trajectory_variant_from_name(c.variant);  // throws UsageError on bad names
    } else if (c.family == "heatmap") {
        fusion_from_name(c.variant);
    } else {
        check(is_baseline_name(c.variant),
              "unknown baseline '" + c.variant +
                  "' (expected persistency, linear_regression, truncated_linear, "
                  "naive_average or knn)");
    }

    check(c.past_seconds >= 1, "past_seconds must be >= 1");
    check(c.future_seconds >= 1, "future_seconds must be >= 1");
    check(c.stride_seconds >= 1, "stride_seconds must be >= 1");
    check(c.fps >= 1, "fps must be >= 1");
    check(c.alphas == std::vector<double>{1.0, 1.25},
          "the evaluator scores the fixed scale pair alpha = 1 and alpha = 1.25");

    check(c.hidden >= 1, "hidden must be >= 1");
    check(c.embed_dim >= 1, "embed_dim must be >= 1");
    check(c.n_others >= 1, "n_others must be >= 1");
    check(c.knn_k >= 1, "knn_k must be >= 1");

    check(!c.channels.empty(), "channels must list at least one layer width");
    for (int ch : c.channels) check(ch >= 1, "channels entries must be >= 1");
    check(c.others_channels >= 1, "others_channels must be >= 1");
    check(c.sal_mid_channels >= 1, "sal_mid_channels must be >= 1");
    check(c.sal_channels >= 1, "sal_channels must be >= 1");
    check(c.head_mid_channels >= 1, "head_mid_channels must be >= 1");
    check(c.kernel >= 1 && c.kernel % 2 == 1, "kernel must be a positive odd width");

    const auto span_ok = [](double span, double limit) {
        return span > 0.0 && span <= limit &&
               std::abs(span / 10.0 - std::round(span / 10.0)) < 1e-9;
    };
    check(span_ok(c.fov_span_theta_deg, 360.0),
          "fov_span_theta_deg must be a positive multiple of 10 up to 360");
    check(span_ok(c.fov_span_phi_deg, 180.0),
          "fov_span_phi_deg must be a positive multiple of 10 up to 180");
    check(c.sigma0_bins > 0.0, "sigma0_bins must be positive");
    check(c.sigma_phi_clamp_deg > 0.0 && c.sigma_phi_clamp_deg < 90.0,
          "sigma_phi_clamp_deg must lie in (0, 90)");

    check(c.train.epochs >= 1, "epochs must be >= 1");
    check(c.train.batch_size >= 1, "batch_size must be >= 1");
    check(c.train.horizons >= 1 && c.train.horizons <= c.future_seconds,
          "horizons must lie in [1, future_seconds]");
    check(c.train.learning_rate > 0.0, "learning_rate must be positive");
    check(c.train.beta1 >= 0.0 && c.train.beta1 < 1.0, "beta1 must lie in [0, 1)");
    check(c.train.beta2 >= 0.0 && c.train.beta2 < 1.0, "beta2 must lie in [0, 1)");
    check(c.train.adam_eps > 0.0, "adam_eps must be positive");
    check(c.train.stop_at_train_loss >= 0.0, "stop_at_train_loss must be >= 0");
    check(c.train.val_fraction >= 0.0 && c.train.val_fraction < 1.0,
          "val_fraction must lie in [0, 1)");
}

HeatmapConfig heatmap_config_of(const RunConfig& c) {
    HeatmapConfig h;
    h.fov_span_theta_deg = c.fov_span_theta_deg;
    h.fov_span_phi_deg = c.fov_span_phi_deg;
    h.fps = c.fps;
    h.sigma0_bins = c.sigma0_bins;
    h.sigma_phi_clamp_deg = c.sigma_phi_clamp_deg;
    return h;
}

// ====================== shared plumbing ======================

namespace {

std::vector<SessionRecord> load_sessions(const RunConfig& c) {
    if (c.sessions_path.empty()) throw UsageError("sessions_path is required");
    std::vector<SessionRecord> sessions = read_sessions(c.sessions_path);
    if (sessions.empty()) throw DataError("no sessions in " + c.sessions_path);
    return sessions;
}

std::string require_out_dir(const RunConfig& c) {
    if (c.out_dir.empty()) throw UsageError("out_dir is required");
    std::filesystem::create_directories(c.out_dir);
    return c.out_dir;
}

void snapshot_config(const RunConfig& c, const std::string& dir) {
    write_file_atomic(dir + "/config.json", config_to_json(c));
}

TrajectoryModelConfig trajectory_model_config(const RunConfig& c) {
    TrajectoryModelConfig m;
    m.variant = trajectory_variant_from_name(c.variant);
    m.fps = c.fps;
    m.hidden = c.hidden;
    m.embed_dim = c.embed_dim;
    m.n_others = c.n_others;
    return m;
}

HeatmapModelConfig heatmap_model_config(const RunConfig& c) {
    HeatmapModelConfig m;
    m.fusion = fusion_from_name(c.variant);
    m.fps = c.fps;
    m.channels = c.channels;
    m.others_channels = c.others_channels;
    m.sal_mid_channels = c.sal_mid_channels;
    m.sal_channels = c.sal_channels;
    m.head_mid_channels = c.head_mid_channels;
    m.kernel = c.kernel;
    return m;
}

bool fusion_needs_others(FusionMode f) {
    return f == FusionMode::others_branch || f == FusionMode::others_direct ||
           f == FusionMode::others_saliency;
}

bool fusion_needs_saliency(FusionMode f) {
    return f == FusionMode::saliency || f == FusionMode::others_saliency;
}

bool baseline_needs_roster(const std::string& name) {
    return name == "naive_average" || name == "knn";
}

/** Windows of one target session, tagged with who produced them. */
template <typename Window>
struct TargetWindows {
    const SessionRecord* target = nullptr;
    std::vector<Window> windows;
};

std::vector<TargetWindows<TrajectoryWindow>> gather_trajectory_windows(
    const RunConfig& c, std::span<const SessionRecord> sessions) {
    std::vector<TargetWindows<TrajectoryWindow>> out;
    for (const SessionRecord& target : sessions) {
        auto ws =
            build_windows(target, sessions, c.past_seconds, c.future_seconds, c.stride_seconds);
        if (!ws.empty()) out.push_back({&target, std::move(ws)});
    }
    return out;
}

std::vector<TargetWindows<HeatmapWindow>> gather_heatmap_windows(
    const RunConfig& c, std::span<const SessionRecord> sessions) {
    const HeatmapConfig hc = heatmap_config_of(c);
    std::vector<TargetWindows<HeatmapWindow>> out;
    for (const SessionRecord& target : sessions) {
        auto ws = build_heatmap_windows(target, sessions, hc, c.past_seconds, c.future_seconds,
                                        c.stride_seconds);
        if (!ws.empty()) out.push_back({&target, std::move(ws)});
    }
    return out;
}

TrajectoryModel load_trajectory_checkpoint(const RunConfig& c) {
    if (c.weights_path.empty()) throw UsageError("weights_path is required for a trained model");
    TrajectoryModel m = load_trajectory_weights(c.weights_path);
    if (to_string(m.config.variant) != c.variant)
        throw UsageError("weights hold variant '" + to_string(m.config.variant) +
                         "' but the config names '" + c.variant + "'");
    if (m.config.fps != c.fps)
        throw UsageError("weights were built for fps " + std::to_string(m.config.fps) +
                         " but the config says " + std::to_string(c.fps));
    return m;
}

HeatmapModel load_heatmap_checkpoint(const RunConfig& c) {
    if (c.weights_path.empty()) throw UsageError("weights_path is required for a trained model");
    HeatmapModel m = load_heatmap_weights(c.weights_path);
    if (to_string(m.config.fusion) != c.variant)
        throw UsageError("weights hold fusion mode '" + to_string(m.config.fusion) +
                         "' but the config names '" + c.variant + "'");
    if (m.config.fps != c.fps)
        throw UsageError("weights were built for fps " + std::to_string(m.config.fps) +
                         " but the config says " + std::to_string(c.fps));
    return m;
}

SaliencyStore load_saliency_if_needed(const RunConfig& c, FusionMode fusion, bool* loaded) {
    *loaded = fusion_needs_saliency(fusion);
    if (!*loaded) return {};
    if (c.saliency_path.empty())
        throw UsageError("fusion mode '" + c.variant + "' needs saliency_path");
    return SaliencyStore::load(c.saliency_path);
}

std::vector<UnitVec3> baseline_centers(const std::string& name, const TrajectoryWindow& w,
                                       int horizons, int knn_k) {
    if (name == "persistency") return persistency(w, horizons);
    if (name == "linear_regression") return linear_regression_predict(w, horizons);
    if (name == "truncated_linear") return truncated_linear_predict(w, horizons);
    if (name == "naive_average") return naive_average(w, horizons);
    if (name == "knn") return knn_predict(w, horizons, knn_k);
    throw UsageError("unknown baseline '" + name + "'");
}

}  // namespace

// ====================== ingest / rasterize ======================

IngestReport run_ingest(const std::string& adapter, const std::string& raw_path,
                        const std::string& out_path, int fps) {
    if (out_path.empty()) throw UsageError("ingest: output path is required");
    if (fps < 1) throw UsageError("ingest: fps must be >= 1");
    IngestReport report;
    std::vector<SessionRecord> sessions = ingest(adapter, raw_path, report);
    // The canonical adapter carries fps per record; the raw CSV layout does
    // not, so the flag decides there.
    if (adapter != "canonical")
        for (SessionRecord& s : sessions) s.fps = fps;
    write_sessions(out_path, std::move(sessions));
    return report;
}

std::size_t run_gen_heatmaps(const RunConfig& cfg, const std::string& out_path) {
    validate_config(cfg);
    if (out_path.empty()) throw UsageError("gen-heatmaps: output path is required");
    const std::vector<SessionRecord> sessions = load_sessions(cfg);
    const HeatmapConfig hc = heatmap_config_of(cfg);

    std::vector<HeatmapRecord> records;
    for (const SessionRecord& s : sessions) {
        std::vector<HeatGrid> grids = session_second_heatmaps(s, hc, cfg.keep_partial);
        for (std::size_t sec = 0; sec < grids.size(); ++sec)
            records.push_back(
                {s.video_id, s.user_id, static_cast<std::uint32_t>(sec), std::move(grids[sec])});
    }
    write_heatmap_file(out_path, records);
    return records.size();
}

// ====================== training ======================

TrainReport run_train(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.family == "baseline")
        throw UsageError("baselines have nothing to train; use eval directly");
    const std::string dir = require_out_dir(cfg);
    const std::vector<SessionRecord> sessions = load_sessions(cfg);

    TrainReport report;
    Rng rng(cfg.train.seed);
    if (cfg.family == "trajectory") {
        std::vector<TrajectoryWindow> windows;
        for (auto& tw : gather_trajectory_windows(cfg, sessions))
            for (auto& w : tw.windows) windows.push_back(std::move(w));
        if (windows.empty())
            throw DataError("no training windows; every session is shorter than " +
                            std::to_string(cfg.past_seconds + cfg.future_seconds) + " s");
        TrajectoryModel model = make_trajectory_model(trajectory_model_config(cfg), rng);
        report = train_trajectory(model, windows, cfg.train);
        save_trajectory_weights(dir + "/weights.fwt", model);
    } else {
        const HeatmapModelConfig mc = heatmap_model_config(cfg);
        bool with_saliency = false;
        const SaliencyStore store = load_saliency_if_needed(cfg, mc.fusion, &with_saliency);

        std::vector<HeatmapWindow> windows;
        for (auto& tw : gather_heatmap_windows(cfg, sessions))
            for (auto& w : tw.windows) {
                if (fusion_needs_others(mc.fusion) && w.others_avg.empty()) continue;
                windows.push_back(std::move(w));
            }
        if (windows.empty())
            throw DataError("no training windows usable by fusion mode '" + cfg.variant + "'");
        HeatmapModel model = make_heatmap_model(mc, rng);
        report = train_heatmap(model, windows, cfg.train, with_saliency ? &store : nullptr);
        save_heatmap_weights(dir + "/weights.fwt", model);
    }

    std::string csv = "epoch,train_loss,val_loss,clip_events\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        csv += std::to_string(e);
        csv += ',' + fmt_double(report.epochs[e].train_loss);
        csv += ',';
        if (cfg.train.val_fraction > 0.0) csv += fmt_double(report.epochs[e].val_loss);
        csv += ',' + std::to_string(report.epochs[e].clip_events);
        csv += '\n';
    }
    write_file_atomic(dir + "/loss_curve.csv", csv);
    snapshot_config(cfg, dir);
    return report;
}

// ====================== prediction ======================

namespace {

/** One emitted forecast row; sigma rows stay empty for center-only predictors. */
void append_prediction_row(std::string& csv, const std::string& video, const std::string& user,
                           int start_second, int horizon, const UnitVec3& mu,
                           const std::array<double, 3>* sigma) {
    csv += video;
    csv += ',' + user;
    csv += ',' + std::to_string(start_second);
    csv += ',' + std::to_string(horizon);
    csv += ',' + fmt_double(mu.x) + ',' + fmt_double(mu.y) + ',' + fmt_double(mu.z);
    if (sigma) {
        csv += ',' + fmt_double((*sigma)[0]) + ',' + fmt_double((*sigma)[1]) + ',' +
               fmt_double((*sigma)[2]);
    } else {
        csv += ",,,";
    }
    csv += '\n';
}

const char* kPredictionsHeader =
    "video_id,user_id,start_second,horizon,x,y,z,sigma_x,sigma_y,sigma_z\n";

}  // namespace

PredictOutcome run_predict(const RunConfig& cfg) {
    validate_config(cfg);
    const std::string dir = require_out_dir(cfg);
    const std::vector<SessionRecord> sessions = load_sessions(cfg);
    const int L = cfg.future_seconds;

    PredictOutcome outcome;
    std::string csv = kPredictionsHeader;

    if (cfg.family == "heatmap") {
        HeatmapModel model = load_heatmap_checkpoint(cfg);
        bool with_saliency = false;
        const SaliencyStore store = load_saliency_if_needed(cfg, model.config.fusion, &with_saliency);

        std::vector<HeatmapRecord> grids;
        for (const auto& tw : gather_heatmap_windows(cfg, sessions)) {
            for (const HeatmapWindow& w : tw.windows) {
                if (fusion_needs_others(model.config.fusion) && w.others_avg.empty()) {
                    ++outcome.skipped_windows;
                    continue;
                }
                std::vector<HeatGrid> pred =
                    heatmap_predict(model, w, L, with_saliency ? &store : nullptr);
                for (int k = 0; k < L; ++k) {
                    const int sec = w.start_second + cfg.past_seconds + k;
                    grids.push_back({tw.target->video_id, tw.target->user_id,
                                     static_cast<std::uint32_t>(sec), pred[k]});
                    try {
                        const UnitVec3 mu = angles_to_unit(estimate_center(pred[k]));
                        append_prediction_row(csv, tw.target->video_id, tw.target->user_id,
                                              w.start_second, k + 1, mu, nullptr);
                    } catch (const NumericError&) {
                        // grid without a usable center: the grid record stands alone
                    }
                }
                ++outcome.windows;
            }
        }
        outcome.grids_path = dir + "/predicted_grids.bin";
        write_heatmap_file(outcome.grids_path, grids);
    } else {
        TrajectoryModel model;
        const bool learned = cfg.family == "trajectory";
        if (learned) model = load_trajectory_checkpoint(cfg);

        for (const auto& tw : gather_trajectory_windows(cfg, sessions)) {
            for (const TrajectoryWindow& w : tw.windows) {
                if (!learned && baseline_needs_roster(cfg.variant) && w.others_future.empty()) {
                    ++outcome.skipped_windows;
                    continue;
                }
                if (learned) {
                    const std::vector<SecondSummary> pred = trajectory_predict(model, w, L);
                    for (int k = 0; k < L; ++k)
                        append_prediction_row(csv, tw.target->video_id, tw.target->user_id,
                                              w.start_second, k + 1, pred[k].mu, &pred[k].sigma);
                } else {
                    const std::vector<UnitVec3> pred =
                        baseline_centers(cfg.variant, w, L, cfg.knn_k);
                    for (int k = 0; k < L; ++k)
                        append_prediction_row(csv, tw.target->video_id, tw.target->user_id,
                                              w.start_second, k + 1, pred[k], nullptr);
                }
                ++outcome.windows;
            }
        }
    }
    if (outcome.windows == 0) throw DataError("no window was predictable with this config");

    outcome.centers_path = dir + "/predictions.csv";
    write_file_atomic(outcome.centers_path, csv);
    snapshot_config(cfg, dir);
    return outcome;
}

// ====================== evaluation ======================

EvalReport run_eval(const RunConfig& cfg) {
    validate_config(cfg);
    const std::string dir = require_out_dir(cfg);
    const std::vector<SessionRecord> sessions = load_sessions(cfg);
    const int L = cfg.future_seconds;

    EvalReport report;
    if (cfg.family == "heatmap") {
        HeatmapModel model = load_heatmap_checkpoint(cfg);
        bool with_saliency = false;
        const SaliencyStore store = load_saliency_if_needed(cfg, model.config.fusion, &with_saliency);

        std::vector<HeatmapWindow> windows;
        for (auto& tw : gather_heatmap_windows(cfg, sessions))
            for (auto& w : tw.windows) {
                if (fusion_needs_others(model.config.fusion) && w.others_avg.empty()) continue;
                windows.push_back(std::move(w));
            }
        if (windows.empty()) throw DataError("no window was evaluable with this config");
        std::vector<std::vector<HeatGrid>> preds;
        preds.reserve(windows.size());
        for (const HeatmapWindow& w : windows)
            preds.push_back(heatmap_predict(model, w, L, with_saliency ? &store : nullptr));
        report = evaluate_heatmap(preds, windows);
    } else {
        TrajectoryModel model;
        const bool learned = cfg.family == "trajectory";
        if (learned) model = load_trajectory_checkpoint(cfg);

        std::vector<TrajectoryWindow> windows;
        for (auto& tw : gather_trajectory_windows(cfg, sessions))
            for (auto& w : tw.windows) {
                if (!learned && baseline_needs_roster(cfg.variant) && w.others_future.empty())
                    continue;
                windows.push_back(std::move(w));
            }
        if (windows.empty()) throw DataError("no window was evaluable with this config");
        std::vector<std::vector<UnitVec3>> preds;
        preds.reserve(windows.size());
        for (const TrajectoryWindow& w : windows) {
            if (learned) {
                std::vector<UnitVec3> centers;
                for (const SecondSummary& s : trajectory_predict(model, w, L))
                    centers.push_back(s.mu);
                preds.push_back(std::move(centers));
            } else {
                preds.push_back(baseline_centers(cfg.variant, w, L, cfg.knn_k));
            }
        }
        report = evaluate_trajectory(preds, windows);
    }

    write_file_atomic(dir + "/report.csv", report_to_csv(report));
    write_file_atomic(dir + "/summary.txt", report_summary(report));
    snapshot_config(cfg, dir);
    return report;
}

// ====================== comparison ======================

std::string run_compare(std::span<const NamedReportFile> reports, const std::string& out_dir) {
    if (reports.size() < 2) throw UsageError("compare: need at least two reports");
    std::vector<NamedReport> named;
    named.reserve(reports.size());
    for (const NamedReportFile& f : reports)
        named.push_back({f.name, report_from_csv(read_file(f.path))});

    const std::string text = comparison_to_text(named);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file_atomic(out_dir + "/comparison.csv", comparison_to_csv(named));
        write_file_atomic(out_dir + "/comparison.txt", text);
    }
    return text;
}

}  // namespace fovcast
