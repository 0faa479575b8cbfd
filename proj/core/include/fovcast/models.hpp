#pragma once

#include <string>
#include <vector>

#include "fovcast/dataset.hpp"
#include "fovcast/nn.hpp"

namespace fovcast {

// ====================== trajectory family ======================

enum class TrajectoryVariant {
    target_only,   // encoder/decoder over the target's own past
    single_lstm,   // one recurrent cell shared between past and future steps
    mlp_mixing,    // decoder output mixed with others' locations by a dense layer
    ame_location,  // attention over others' locations (location similarity)
    ame_hidden,    // attention keyed by recurrent-state similarity
};

TrajectoryVariant trajectory_variant_from_name(const std::string& name);
std::string to_string(TrajectoryVariant v);

struct TrajectoryModelConfig {
    TrajectoryVariant variant = TrajectoryVariant::target_only;
    int fps = 30;    // encoder consumes fps x (x,y,z) flattened per second
    int hidden = 64;
    int embed_dim = 16;  // attention embedding width
    int n_others = 8;    // fixed mixing roster (padded/truncated, with mask)
};

/**
 * Trajectory predictor: per future second a mean view direction (unit
 * 3-vector) and a per-axis spread. Which parameter blocks exist depends on
 * the variant; parameters() lists the live blocks in a fixed order for
 * optimizers and persistence.
 */
struct TrajectoryModel {
    TrajectoryModelConfig config;
    bool trained = false;

    nn::LstmParams encoder;      // all variants (single_lstm: the only cell, input 6)
    nn::LstmParams decoder;      // all but single_lstm
    nn::DenseParams head;        // hidden -> 6 projection
    nn::DenseParams mixing;      // mlp_mixing
    nn::DenseParams embed;       // ame_*: shared expert embedding
    nn::LstmParams others_lstm;  // ame_hidden: shared per-other recurrence

    std::vector<nn::Tensor> parameters() const;
};

TrajectoryModel make_trajectory_model(const TrajectoryModelConfig& config, Rng& rng);

/** Differentiable per-horizon output: mu {3} unit-norm, sigma {3} nonnegative. */
struct SummaryOut {
    nn::Tensor mu;
    nn::Tensor sigma;
};

/**
 * Run the model over one window for `horizons` future seconds. Variants that
 * use other users read w.others_future (and w.others_past for the
 * state-similarity variant); an empty roster gracefully reduces every
 * variant to its target-only behavior.
 */
std::vector<SummaryOut> trajectory_forward(const TrajectoryModel& m, const TrajectoryWindow& w,
                                           int horizons);

/** Frozen-weight convenience wrapper returning plain summaries. */
std::vector<SecondSummary> trajectory_predict(const TrajectoryModel& m, const TrajectoryWindow& w,
                                              int horizons);

// ====================== heatmap family ======================

enum class FusionMode {
    none,            // target's own history only
    others_branch,   // others' average heatmaps through a recurrent branch
    others_direct,   // others' average heatmap concatenated at each horizon
    saliency,        // per-second saliency features fused at each horizon
    others_saliency, // others_branch + saliency together
};

FusionMode fusion_from_name(const std::string& name);
std::string to_string(FusionMode f);

struct HeatmapModelConfig {
    FusionMode fusion = FusionMode::none;
    int fps = 30;                            // frames per second-level heatmap
    std::vector<int> channels{128, 64, 32};  // encoder/decoder stack widths
    int others_channels = 32;                // recurrent others-branch width
    int sal_mid_channels = 16;               // saliency feature extractor hidden width
    int sal_channels = 8;                    // saliency feature channels
    int head_mid_channels = 32;              // prediction head hidden width
    int kernel = 3;
};

/**
 * Grid predictor: consumes normalized second-level heatmaps (divided by
 * 108 x fps so cells lie in [0,1]) and emits one nonnegative normalized grid
 * per future second. The prediction head reads the concatenation of every
 * decoder layer's hidden map plus the fusion features of the active mode.
 */
struct HeatmapModel {
    HeatmapModelConfig config;
    bool trained = false;

    nn::ConvLstmParams encoder;
    nn::ConvLstmParams decoder;
    nn::ConvLstmParams others_branch;  // single layer, others_branch/others_saliency
    nn::ConvParams sal1, sal2;         // saliency feature extractor
    nn::ConvParams head1, head2;       // prediction head

    std::vector<nn::Tensor> parameters() const;
};

HeatmapModel make_heatmap_model(const HeatmapModelConfig& config, Rng& rng);

/** Scale factor mapping raw grids to the model's normalized input range. */
double heatmap_input_scale(const HeatmapModelConfig& config);

/**
 * Run the model over one window for `horizons` future seconds; returns
 * normalized {1, 18, 36} grids. Fusion inputs must be present: others modes
 * need w.others_avg, saliency modes need a store entry for every horizon
 * second of w's video.
 */
std::vector<nn::Tensor> heatmap_forward(const HeatmapModel& m, const HeatmapWindow& w,
                                        int horizons, const SaliencyStore* saliency = nullptr);

/** Frozen-weight wrapper returning grid-unit heatmaps (inverse-scaled). */
std::vector<HeatGrid> heatmap_predict(const HeatmapModel& m, const HeatmapWindow& w, int horizons,
                                      const SaliencyStore* saliency = nullptr);

}  // namespace fovcast
