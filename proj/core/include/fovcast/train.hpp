#pragma once

// Mini-batch gradient training for both forecaster families: Adam updates
// with global-norm gradient clipping, deterministic shuffling, an optional
// held-out validation tail with best-epoch snapshotting, and early stop on a
// target train loss.

#include <cstdint>
#include <span>
#include <vector>

#include "fovcast/common.hpp"
#include "fovcast/models.hpp"

namespace fovcast {

struct TrainConfig {
    int epochs = 10;
    int batch_size = 16;
    int horizons = 10;  // forecast depth trained against (capped by window depth)
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip_norm = 5.0;  // global gradient-norm ceiling, <=0 disables
    std::uint64_t seed = 1;
    bool shuffle = true;
    double stop_at_train_loss = 0.0;  // stop once mean train loss <= this (0 = off)
    double val_fraction = 0.0;        // tail fraction of windows held out for validation
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;  // 0 when no validation split
    int clip_events = 0;    // batches whose gradient was rescaled this epoch
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int clip_events = 0;       // total across epochs
    double best_loss = 0.0;    // loss of the restored snapshot
    int best_epoch = -1;       // index into epochs of the restored snapshot
    bool stopped_early = false;
};

/**
 * Adam over a fixed parameter list. Gradients accumulate on the leaves via
 * backward(); step() applies one update from whatever has accumulated, then
 * clears the gradients. Returns true when the global-norm clip fired.
 */
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<nn::Tensor> params, const TrainConfig& cfg);

    bool step();
    int clip_events() const { return clip_events_; }

private:
    std::vector<nn::Tensor> params_;
    double lr_, beta1_, beta2_, eps_, clip_norm_;
    std::vector<std::vector<double>> m_, v_;
    long step_count_ = 0;
    int clip_events_ = 0;
};

/**
 * Fit against each window's per-second ground truth: the loss is the mean
 * over horizons of the per-element squared error between the predicted
 * (mean, spread) pair and the observed one. Windows are visited in seeded
 * shuffle order, averaged per batch. A non-finite loss raises NumericError.
 * Marks the model trained and restores the best snapshot before returning.
 */
TrainReport train_trajectory(TrajectoryModel& m, std::span<const TrajectoryWindow> windows,
                             const TrainConfig& cfg);

/**
 * Same loop for the grid forecaster: per-bin squared error between the
 * predicted and observed grids, both on the normalized input scale.
 * Fusion modes that read saliency features need `saliency`.
 */
TrainReport train_heatmap(HeatmapModel& m, std::span<const HeatmapWindow> windows,
                          const TrainConfig& cfg, const SaliencyStore* saliency = nullptr);

}  // namespace fovcast
