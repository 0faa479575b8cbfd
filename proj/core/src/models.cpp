#include "fovcast/models.hpp"

#include <algorithm>
#include <stdexcept>

namespace fovcast {

using nn::Tensor;

// ====================== shared staging helpers ======================

namespace {

Tensor summary_tensor(const SecondSummary& s) {
    return Tensor::from({6}, {s.mu.x, s.mu.y, s.mu.z, s.sigma[0], s.sigma[1], s.sigma[2]});
}

Tensor frames_tensor(std::span<const UnitVec3> frames) {
    std::vector<double> v;
    v.reserve(frames.size() * 3);
    for (const UnitVec3& u : frames) {
        v.push_back(u.x);
        v.push_back(u.y);
        v.push_back(u.z);
    }
    const int n = static_cast<int>(v.size());
    return Tensor::from({n}, std::move(v));
}

/** Split a raw 6-wide projection into the (unit mu, nonnegative sigma) head. */
SummaryOut activate_head(const Tensor& raw) {
    return {nn::normalize3(nn::slice(raw, 0, 3)), nn::softplus(nn::slice(raw, 3, 3))};
}

Tensor pack(const SummaryOut& s) {
    std::vector<Tensor> parts{s.mu, s.sigma};
    return nn::concat(parts);
}

}  // namespace

// ====================== trajectory family ======================

TrajectoryVariant trajectory_variant_from_name(const std::string& name) {
    if (name == "target_only") return TrajectoryVariant::target_only;
    if (name == "single_lstm") return TrajectoryVariant::single_lstm;
    if (name == "mlp_mixing") return TrajectoryVariant::mlp_mixing;
    if (name == "ame_location") return TrajectoryVariant::ame_location;
    if (name == "ame_hidden") return TrajectoryVariant::ame_hidden;
    throw UsageError("unknown trajectory model: " + name +
                     " (available: target_only, single_lstm, mlp_mixing, ame_location, "
                     "ame_hidden)");
}

std::string to_string(TrajectoryVariant v) {
    switch (v) {
        case TrajectoryVariant::target_only: return "target_only";
        case TrajectoryVariant::single_lstm: return "single_lstm";
        case TrajectoryVariant::mlp_mixing: return "mlp_mixing";
        case TrajectoryVariant::ame_location: return "ame_location";
        case TrajectoryVariant::ame_hidden: return "ame_hidden";
    }
    throw std::logic_error("unreachable trajectory variant");
}

std::vector<Tensor> TrajectoryModel::parameters() const {
    std::vector<Tensor> out;
    encoder.collect(out);
    if (config.variant != TrajectoryVariant::single_lstm) decoder.collect(out);
    head.collect(out);
    if (config.variant == TrajectoryVariant::mlp_mixing) mixing.collect(out);
    if (config.variant == TrajectoryVariant::ame_location ||
        config.variant == TrajectoryVariant::ame_hidden)
        embed.collect(out);
    if (config.variant == TrajectoryVariant::ame_hidden) others_lstm.collect(out);
    return out;
}

TrajectoryModel make_trajectory_model(const TrajectoryModelConfig& config, Rng& rng) {
    if (config.fps <= 0 || config.hidden <= 0 || config.embed_dim <= 0 || config.n_others <= 0)
        throw std::invalid_argument("trajectory model sizes must be positive");
    TrajectoryModel m;
    m.config = config;
    const bool single = config.variant == TrajectoryVariant::single_lstm;
    m.encoder = nn::make_lstm(rng, single ? 6 : 3 * config.fps, config.hidden);
    if (!single) m.decoder = nn::make_lstm(rng, 6, config.hidden);
    m.head = nn::make_dense(rng, 6, config.hidden);
    if (config.variant == TrajectoryVariant::mlp_mixing)
        m.mixing = nn::make_dense(rng, 6, 6 + 7 * config.n_others);
    if (config.variant == TrajectoryVariant::ame_location)
        m.embed = nn::make_dense(rng, config.embed_dim, 6);
    if (config.variant == TrajectoryVariant::ame_hidden) {
        m.embed = nn::make_dense(rng, config.embed_dim, config.hidden);
        m.others_lstm = nn::make_lstm(rng, 6, config.hidden);
    }
    return m;
}

namespace {

/** Convex combination of 6-wide experts under attention weights, re-activated. */
SummaryOut mix_experts(std::span<const Tensor> experts, const Tensor& alpha) {
    Tensor combo = nn::scale_by(experts[0], nn::slice(alpha, 0, 1));
    for (std::size_t i = 1; i < experts.size(); ++i)
        combo = nn::add(combo, nn::scale_by(experts[i], nn::slice(alpha, static_cast<int>(i), 1)));
    return {nn::normalize3(nn::slice(combo, 0, 3)), nn::relu(nn::slice(combo, 3, 3))};
}

}  // namespace

std::vector<SummaryOut> trajectory_forward(const TrajectoryModel& m, const TrajectoryWindow& w,
                                           int horizons) {
    const TrajectoryModelConfig& cfg = m.config;
    if (horizons <= 0) throw std::invalid_argument("horizons must be positive");
    if (w.past_summaries.empty()) throw std::invalid_argument("window has no past seconds");
    const int past = static_cast<int>(w.past_summaries.size());
    const bool uses_others = cfg.variant == TrajectoryVariant::mlp_mixing ||
                             cfg.variant == TrajectoryVariant::ame_location ||
                             cfg.variant == TrajectoryVariant::ame_hidden;
    const std::size_t roster = w.others_future.size();
    if (uses_others)
        for (std::size_t i = 0; i < roster; ++i)
            if (w.others_future[i].size() < static_cast<std::size_t>(horizons))
                throw std::invalid_argument("other users do not cover the requested horizons");

    std::vector<SummaryOut> outs;
    outs.reserve(static_cast<std::size_t>(horizons));

    // ---- single shared cell: same recurrence for past and future ----
    if (cfg.variant == TrajectoryVariant::single_lstm) {
        nn::LstmState s = nn::lstm_zero_state(cfg.hidden);
        for (const SecondSummary& sec : w.past_summaries)
            s = nn::lstm_step(m.encoder, summary_tensor(sec), s);
        for (int k = 1; k <= horizons; ++k) {
            SummaryOut o = activate_head(nn::dense(m.head, s.h));
            outs.push_back(o);
            if (k < horizons) s = nn::lstm_step(m.encoder, pack(o), s);
        }
        return outs;
    }

    // ---- encoder over frame-level past seconds ----
    if (static_cast<int>(w.past_frames.size()) != past * cfg.fps)
        throw std::invalid_argument("window frame rate does not match the model");
    nn::LstmState enc = nn::lstm_zero_state(cfg.hidden);
    for (int t = 0; t < past; ++t) {
        std::span<const UnitVec3> frames(w.past_frames.data() +
                                             static_cast<std::size_t>(t) * cfg.fps,
                                         static_cast<std::size_t>(cfg.fps));
        enc = nn::lstm_step(m.encoder, frames_tensor(frames), enc);
    }

    // ---- shared recurrence over each other user's history (state similarity) ----
    std::vector<nn::LstmState> other_states;
    if (cfg.variant == TrajectoryVariant::ame_hidden) {
        other_states.reserve(roster);
        for (std::size_t i = 0; i < roster; ++i) {
            nn::LstmState s = nn::lstm_zero_state(cfg.hidden);
            for (const SecondSummary& sec : w.others_past[i])
                s = nn::lstm_step(m.others_lstm, summary_tensor(sec), s);
            other_states.push_back(std::move(s));
        }
    }

    // ---- decoder, fed back with its own projection ----
    nn::LstmState dec = enc;
    Tensor input = summary_tensor(w.past_summaries.back());
    for (int k = 1; k <= horizons; ++k) {
        dec = nn::lstm_step(m.decoder, input, dec);
        SummaryOut temp = activate_head(nn::dense(m.head, dec.h));

        switch (cfg.variant) {
            case TrajectoryVariant::target_only:
                outs.push_back(temp);
                break;
            case TrajectoryVariant::mlp_mixing: {
                std::vector<Tensor> parts;
                parts.push_back(pack(temp));
                std::vector<double> mask(static_cast<std::size_t>(cfg.n_others), 0.0);
                for (int i = 0; i < cfg.n_others; ++i) {
                    if (static_cast<std::size_t>(i) < roster) {
                        parts.push_back(summary_tensor(w.others_future[i][k - 1]));
                        mask[i] = 1.0;
                    } else {
                        parts.push_back(Tensor::constant({6}, 0.0));
                    }
                }
                parts.push_back(Tensor::from({cfg.n_others}, std::move(mask)));
                Tensor raw = nn::dense(m.mixing, nn::concat(parts));
                outs.push_back(activate_head(raw));
                break;
            }
            case TrajectoryVariant::ame_location: {
                std::vector<Tensor> experts;
                std::vector<Tensor> keys;
                for (std::size_t i = 0; i < roster; ++i) {
                    experts.push_back(summary_tensor(w.others_future[i][k - 1]));
                    keys.push_back(nn::dense(m.embed, experts.back()));
                }
                experts.push_back(pack(temp));
                Tensor u_tar = nn::dense(m.embed, experts.back());
                keys.push_back(u_tar);
                outs.push_back(mix_experts(experts, nn::attention_weights(u_tar, keys)));
                break;
            }
            case TrajectoryVariant::ame_hidden: {
                std::vector<Tensor> experts;
                std::vector<Tensor> keys;
                for (std::size_t i = 0; i < roster; ++i) {
                    other_states[i] = nn::lstm_step(
                        m.others_lstm, summary_tensor(w.others_future[i][k - 1]),
                        other_states[i]);
                    experts.push_back(summary_tensor(w.others_future[i][k - 1]));
                    keys.push_back(nn::dense(m.embed, other_states[i].h));
                }
                experts.push_back(pack(temp));
                Tensor u_tar = nn::dense(m.embed, dec.h);
                keys.push_back(u_tar);
                outs.push_back(mix_experts(experts, nn::attention_weights(u_tar, keys)));
                break;
            }
            case TrajectoryVariant::single_lstm:
                throw std::logic_error("unreachable");
        }
        input = pack(temp);
    }
    return outs;
}

std::vector<SecondSummary> trajectory_predict(const TrajectoryModel& m, const TrajectoryWindow& w,
                                              int horizons) {
    std::vector<SummaryOut> outs = trajectory_forward(m, w, horizons);
    std::vector<SecondSummary> result;
    result.reserve(outs.size());
    for (const SummaryOut& o : outs) {
        SecondSummary s;
        s.mu = unit(o.mu.value_at(0), o.mu.value_at(1), o.mu.value_at(2));
        s.sigma = {o.sigma.value_at(0), o.sigma.value_at(1), o.sigma.value_at(2)};
        result.push_back(s);
    }
    return result;
}

// ====================== heatmap family ======================

FusionMode fusion_from_name(const std::string& name) {
    if (name == "none") return FusionMode::none;
    if (name == "others_branch") return FusionMode::others_branch;
    if (name == "others_direct") return FusionMode::others_direct;
    if (name == "saliency") return FusionMode::saliency;
    if (name == "others_saliency") return FusionMode::others_saliency;
    throw UsageError("unknown fusion mode: " + name +
                     " (available: none, others_branch, others_direct, saliency, "
                     "others_saliency)");
}

std::string to_string(FusionMode f) {
    switch (f) {
        case FusionMode::none: return "none";
        case FusionMode::others_branch: return "others_branch";
        case FusionMode::others_direct: return "others_direct";
        case FusionMode::saliency: return "saliency";
        case FusionMode::others_saliency: return "others_saliency";
    }
    throw std::logic_error("unreachable fusion mode");
}

namespace {

bool uses_others_branch(FusionMode f) {
    return f == FusionMode::others_branch || f == FusionMode::others_saliency;
}
bool uses_others_direct(FusionMode f) { return f == FusionMode::others_direct; }
bool uses_saliency(FusionMode f) {
    return f == FusionMode::saliency || f == FusionMode::others_saliency;
}

}  // namespace

std::vector<Tensor> HeatmapModel::parameters() const {
    std::vector<Tensor> out;
    encoder.collect(out);
    decoder.collect(out);
    if (uses_others_branch(config.fusion)) others_branch.collect(out);
    if (uses_saliency(config.fusion)) {
        sal1.collect(out);
        sal2.collect(out);
    }
    head1.collect(out);
    head2.collect(out);
    return out;
}

HeatmapModel make_heatmap_model(const HeatmapModelConfig& config, Rng& rng) {
    if (config.fps <= 0 || config.channels.empty())
        throw std::invalid_argument("heatmap model needs positive fps and at least one layer");
    HeatmapModel m;
    m.config = config;
    m.encoder = nn::make_convlstm(rng, 1, config.channels, config.kernel);
    m.decoder = nn::make_convlstm(rng, 1, config.channels, config.kernel);
    int head_in = 0;
    for (int c : config.channels) head_in += c;
    if (uses_others_branch(config.fusion)) {
        const std::vector<int> one{config.others_channels};
        m.others_branch = nn::make_convlstm(rng, 1, one, config.kernel);
        head_in += config.others_channels;
    }
    if (uses_others_direct(config.fusion)) head_in += 1;
    if (uses_saliency(config.fusion)) {
        m.sal1 = nn::make_conv(rng, config.sal_mid_channels, config.fps, config.kernel);
        m.sal2 = nn::make_conv(rng, config.sal_channels, config.sal_mid_channels, config.kernel);
        head_in += config.sal_channels;
    }
    m.head1 = nn::make_conv(rng, config.head_mid_channels, head_in, config.kernel);
    m.head2 = nn::make_conv(rng, 1, config.head_mid_channels, config.kernel);
    // Start the output near the data scale: normalized grids average ~1/648
    // per bin, so a -6 bias puts the initial softplus output at ~2.5e-3
    // instead of ~0.7. Without this the fed-back first predictions are
    // hundreds of times larger than real grids and saturate the decoder.
    m.head2.bias.mutable_values()[0] = -6.0;
    return m;
}

double heatmap_input_scale(const HeatmapModelConfig& config) {
    return 1.0 / (108.0 * config.fps);
}

namespace {

Tensor grid_tensor(const HeatGrid& g, double scale) {
    std::vector<double> v(g.cells().begin(), g.cells().end());
    for (double& x : v) x *= scale;
    return Tensor::from({1, HeatGrid::kRows, HeatGrid::kCols}, std::move(v));
}

/** Stack one second's saliency frames as channels, each map scaled to peak 1. */
Tensor saliency_tensor(const std::vector<HeatGrid>& maps) {
    std::vector<double> v;
    v.reserve(maps.size() * HeatGrid::kCells);
    for (const HeatGrid& g : maps) {
        double peak = 0.0;
        for (double x : g.cells()) peak = std::max(peak, x);
        const double scale = peak > 0.0 ? 1.0 / peak : 0.0;
        for (double x : g.cells()) v.push_back(x * scale);
    }
    return Tensor::from({static_cast<int>(maps.size()), HeatGrid::kRows, HeatGrid::kCols},
                        std::move(v));
}

}  // namespace

std::vector<Tensor> heatmap_forward(const HeatmapModel& m, const HeatmapWindow& w, int horizons,
                                    const SaliencyStore* saliency) {
    const HeatmapModelConfig& cfg = m.config;
    if (horizons <= 0) throw std::invalid_argument("horizons must be positive");
    if (w.past.empty()) throw std::invalid_argument("window has no past grids");
    const int past = static_cast<int>(w.past.size());
    const double scale = heatmap_input_scale(cfg);

    const bool want_others = uses_others_branch(cfg.fusion) || uses_others_direct(cfg.fusion);
    if (want_others && w.others_avg.size() < static_cast<std::size_t>(past + horizons))
        throw DataError("fusion mode needs other users' grids for the full window span");
    if (uses_saliency(cfg.fusion) && saliency == nullptr)
        throw DataError("fusion mode needs a saliency store");

    auto states = nn::convlstm_zero_states(m.encoder, HeatGrid::kRows, HeatGrid::kCols);
    for (int t = 0; t < past; ++t)
        nn::convlstm_step(m.encoder, grid_tensor(w.past[t], scale), states);
    // Decoder starts from the encoder's final per-layer states.
    auto dec_states = states;

    std::vector<nn::ConvLstmLayerState> oth_states;
    if (uses_others_branch(cfg.fusion)) {
        oth_states = nn::convlstm_zero_states(m.others_branch, HeatGrid::kRows, HeatGrid::kCols);
        for (int t = 0; t < past; ++t)
            nn::convlstm_step(m.others_branch, grid_tensor(w.others_avg[t], scale), oth_states);
    }

    std::vector<Tensor> outs;
    outs.reserve(static_cast<std::size_t>(horizons));
    Tensor input = grid_tensor(w.past.back(), scale);
    for (int k = 1; k <= horizons; ++k) {
        nn::convlstm_step(m.decoder, input, dec_states);
        std::vector<Tensor> parts;
        for (const auto& layer : dec_states) parts.push_back(layer.h);

        if (uses_others_branch(cfg.fusion)) {
            nn::convlstm_step(m.others_branch,
                              grid_tensor(w.others_avg[past + k - 1], scale), oth_states);
            parts.push_back(oth_states[0].h);
        }
        if (uses_others_direct(cfg.fusion))
            parts.push_back(grid_tensor(w.others_avg[past + k - 1], scale));
        if (uses_saliency(cfg.fusion)) {
            const int second = w.start_second + past + k - 1;
            const std::vector<HeatGrid>* maps = saliency->find(w.video_id, second);
            if (maps == nullptr)
                throw DataError("no saliency maps for video " + w.video_id + " second " +
                                std::to_string(second));
            if (static_cast<int>(maps->size()) != cfg.fps)
                throw DataError("saliency maps per second must match fps");
            Tensor feat = nn::tanh_act(nn::conv(m.sal1, saliency_tensor(*maps)));
            parts.push_back(nn::tanh_act(nn::conv(m.sal2, feat)));
        }

        Tensor fused = nn::concat(parts);
        Tensor mid = nn::tanh_act(nn::conv(m.head1, fused));
        Tensor out = nn::softplus(nn::conv(m.head2, mid));
        outs.push_back(out);
        input = out;
    }
    return outs;
}

std::vector<HeatGrid> heatmap_predict(const HeatmapModel& m, const HeatmapWindow& w, int horizons,
                                      const SaliencyStore* saliency) {
    std::vector<Tensor> outs = heatmap_forward(m, w, horizons, saliency);
    const double inv_scale = 108.0 * m.config.fps;
    std::vector<HeatGrid> grids;
    grids.reserve(outs.size());
    for (const Tensor& t : outs) {
        HeatGrid g;
        auto v = t.values();
        for (int r = 0; r < HeatGrid::kRows; ++r)
            for (int c = 0; c < HeatGrid::kCols; ++c)
                g.set(r, c, v[static_cast<std::size_t>(r) * HeatGrid::kCols + c] * inv_scale);
        grids.push_back(std::move(g));
    }
    return grids;
}

}  // namespace fovcast
