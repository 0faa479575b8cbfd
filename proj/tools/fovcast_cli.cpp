// Command-line front end: ingest raw gaze traces, rasterize heatmaps, train
// the forecasters, dump predictions, score models and baselines, and rank
// saved reports. Every run is deterministic given its flags/config file.
//
// Exit codes: 0 success, 1 usage problem, 2 data problem, 3 numeric failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fovcast/common.hpp"
#include "fovcast/pipeline.hpp"

namespace {

using fovcast::RunConfig;

/** Attach one flag per RunConfig field; a --config file later overrides them. */
void add_config_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path,
                    "JSON config file; values found in it take precedence over flags");

    cmd->add_option("--family", cfg.family, "trajectory | heatmap | baseline")
        ->capture_default_str();
    cmd->add_option("--variant", cfg.variant,
                    "trajectory variant, heatmap fusion mode, or baseline name")
        ->capture_default_str();

    cmd->add_option("--past-seconds", cfg.past_seconds, "history length T")->capture_default_str();
    cmd->add_option("--future-seconds", cfg.future_seconds, "forecast depth L")
        ->capture_default_str();
    cmd->add_option("--stride-seconds", cfg.stride_seconds, "window stride")
        ->capture_default_str();
    cmd->add_option("--fps", cfg.fps, "frames per second of the traces")->capture_default_str();

    cmd->add_option("--hidden", cfg.hidden, "recurrent width (trajectory family)")
        ->capture_default_str();
    cmd->add_option("--embed-dim", cfg.embed_dim, "attention embedding width")
        ->capture_default_str();
    cmd->add_option("--n-others", cfg.n_others, "mixing roster slots")->capture_default_str();
    cmd->add_option("--knn-k", cfg.knn_k, "neighbor count for the knn baseline")
        ->capture_default_str();

    cmd->add_option("--channels", cfg.channels, "encoder/decoder stack widths (heatmap family)")
        ->capture_default_str();
    cmd->add_option("--others-channels", cfg.others_channels)->capture_default_str();
    cmd->add_option("--sal-mid-channels", cfg.sal_mid_channels)->capture_default_str();
    cmd->add_option("--sal-channels", cfg.sal_channels)->capture_default_str();
    cmd->add_option("--head-mid-channels", cfg.head_mid_channels)->capture_default_str();
    cmd->add_option("--kernel", cfg.kernel, "convolution kernel width (odd)")
        ->capture_default_str();

    cmd->add_option("--fov-span-theta", cfg.fov_span_theta_deg, "FoV width in degrees")
        ->capture_default_str();
    cmd->add_option("--fov-span-phi", cfg.fov_span_phi_deg, "FoV height in degrees")
        ->capture_default_str();
    cmd->add_option("--sigma0-bins", cfg.sigma0_bins, "equator blur STD in bins")
        ->capture_default_str();
    cmd->add_option("--sigma-phi-clamp", cfg.sigma_phi_clamp_deg,
                    "latitude cap for the blur's 1/cos scaling")
        ->capture_default_str();
    cmd->add_flag("--keep-partial", cfg.keep_partial,
                  "rasterize a trailing partial second instead of dropping it");

    cmd->add_option("--epochs", cfg.train.epochs)->capture_default_str();
    cmd->add_option("--batch-size", cfg.train.batch_size)->capture_default_str();
    cmd->add_option("--horizons", cfg.train.horizons, "forecast depth trained against")
        ->capture_default_str();
    cmd->add_option("--learning-rate", cfg.train.learning_rate)->capture_default_str();
    cmd->add_option("--beta1", cfg.train.beta1)->capture_default_str();
    cmd->add_option("--beta2", cfg.train.beta2)->capture_default_str();
    cmd->add_option("--adam-eps", cfg.train.adam_eps)->capture_default_str();
    cmd->add_option("--clip-norm", cfg.train.clip_norm, "global gradient-norm ceiling, <=0 off")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.train.seed)->capture_default_str();
    cmd->add_flag("--shuffle,!--no-shuffle", cfg.train.shuffle, "shuffle windows each epoch");
    cmd->add_option("--stop-at-train-loss", cfg.train.stop_at_train_loss,
                    "stop early at this mean train loss (0 = off)")
        ->capture_default_str();
    cmd->add_option("--val-fraction", cfg.train.val_fraction,
                    "tail fraction of windows held out for validation")
        ->capture_default_str();

    cmd->add_option("--sessions", cfg.sessions_path, "canonical session file");
    cmd->add_option("--saliency", cfg.saliency_path, "saliency store file");
    cmd->add_option("--weights", cfg.weights_path, "model checkpoint to load");
    cmd->add_option("--out-dir", cfg.out_dir, "directory for run artifacts");
}

void overlay_config_file(RunConfig& cfg, const std::string& config_path) {
    if (!config_path.empty()) fovcast::apply_config_json(cfg, fovcast::read_file(config_path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"360-degree view-direction forecasting toolkit"};
    app.require_subcommand(1);

    // ingest
    std::string adapter = "angles_csv", raw_path, ingest_out;
    int ingest_fps = 30;
    CLI::App* ingest = app.add_subcommand("ingest", "convert raw traces to the canonical format");
    ingest->add_option("--adapter", adapter, "angles_csv | canonical")->capture_default_str();
    ingest->add_option("--in", raw_path, "raw trace file")->required();
    ingest->add_option("--out", ingest_out, "canonical output file")->required();
    ingest->add_option("--fps", ingest_fps, "frame rate stamped on sessions (angles_csv)")
        ->capture_default_str();

    // gen-heatmaps
    RunConfig gen_cfg;
    std::string gen_config_path, gen_out;
    CLI::App* gen = app.add_subcommand("gen-heatmaps", "rasterize per-second heatmaps");
    add_config_flags(gen, gen_cfg, gen_config_path);
    gen->add_option("--out", gen_out, "heatmap container output file")->required();

    // train / predict / eval share the full flag set
    RunConfig train_cfg, predict_cfg, eval_cfg;
    std::string train_config_path, predict_config_path, eval_config_path;
    CLI::App* train = app.add_subcommand("train", "fit a forecaster and save its weights");
    add_config_flags(train, train_cfg, train_config_path);
    CLI::App* predict = app.add_subcommand("predict", "write per-window forecasts");
    add_config_flags(predict, predict_cfg, predict_config_path);
    CLI::App* eval = app.add_subcommand("eval", "score a model or baseline");
    add_config_flags(eval, eval_cfg, eval_config_path);

    // compare
    std::vector<std::string> report_args;
    std::string compare_out_dir;
    CLI::App* compare = app.add_subcommand("compare", "rank saved evaluation reports");
    compare->add_option("--report", report_args, "name=path of a saved report.csv (repeatable)")
        ->required();
    compare->add_option("--out-dir", compare_out_dir, "directory for the comparison files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) {
            const fovcast::IngestReport report =
                fovcast::run_ingest(adapter, raw_path, ingest_out, ingest_fps);
            for (const std::string& d : report.diagnostics)
                std::fprintf(stderr, "ingest: %s\n", d.c_str());
            std::printf("accepted %lld rows, rejected %lld; wrote %s\n",
                        static_cast<long long>(report.accepted_rows),
                        static_cast<long long>(report.rejected_rows), ingest_out.c_str());
        } else if (gen->parsed()) {
            overlay_config_file(gen_cfg, gen_config_path);
            const std::size_t n = fovcast::run_gen_heatmaps(gen_cfg, gen_out);
            std::printf("wrote %zu second grids to %s\n", n, gen_out.c_str());
        } else if (train->parsed()) {
            overlay_config_file(train_cfg, train_config_path);
            const fovcast::TrainReport report = fovcast::run_train(train_cfg);
            std::printf("trained %zu epochs%s; best loss %.8g at epoch %d\n",
                        report.epochs.size(), report.stopped_early ? " (stopped early)" : "",
                        report.best_loss, report.best_epoch);
            std::printf("artifacts in %s: weights.fwt, loss_curve.csv, config.json\n",
                        train_cfg.out_dir.c_str());
        } else if (predict->parsed()) {
            overlay_config_file(predict_cfg, predict_config_path);
            const fovcast::PredictOutcome out = fovcast::run_predict(predict_cfg);
            std::printf("predicted %lld windows (%lld skipped); centers in %s\n",
                        static_cast<long long>(out.windows),
                        static_cast<long long>(out.skipped_windows), out.centers_path.c_str());
            if (!out.grids_path.empty()) std::printf("grids in %s\n", out.grids_path.c_str());
        } else if (eval->parsed()) {
            overlay_config_file(eval_cfg, eval_config_path);
            const fovcast::EvalReport report = fovcast::run_eval(eval_cfg);
            std::fputs(fovcast::report_summary(report).c_str(), stdout);
            std::printf("artifacts in %s: report.csv, summary.txt, config.json\n",
                        eval_cfg.out_dir.c_str());
        } else if (compare->parsed()) {
            std::vector<fovcast::NamedReportFile> files;
            for (const std::string& arg : report_args) {
                const std::size_t eq = arg.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
                    throw fovcast::UsageError("compare: --report expects name=path, got '" + arg +
                                              "'");
                files.push_back({arg.substr(0, eq), arg.substr(eq + 1)});
            }
            std::fputs(fovcast::run_compare(files, compare_out_dir).c_str(), stdout);
        }
        return 0;
    } catch (const fovcast::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const fovcast::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fovcast::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 3;
    }
}
