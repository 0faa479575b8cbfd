#include "fovcast/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fovcast {

using nn::Tensor;

// ====================== optimizer ======================

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, const TrainConfig& cfg)
    : params_(std::move(params)),
      lr_(cfg.learning_rate),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_eps),
      clip_norm_(cfg.clip_norm) {
    if (params_.empty()) throw std::invalid_argument("optimizer needs parameters");
    if (lr_ <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (beta1_ < 0.0 || beta1_ >= 1.0 || beta2_ < 0.0 || beta2_ >= 1.0)
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.values().size(), 0.0);
        v_.emplace_back(p.values().size(), 0.0);
    }
}

bool AdamOptimizer::step() {
    ++step_count_;
    double sq = 0.0;
    for (const Tensor& p : params_)
        for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    double gscale = 1.0;
    bool clipped = false;
    if (clip_norm_ > 0.0 && norm > clip_norm_) {
        gscale = clip_norm_ / norm;
        clipped = true;
        ++clip_events_;
    }
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto g = params_[i].grad();
        std::vector<double>& vals = params_[i].mutable_values();
        std::vector<double>& m = m_[i];
        std::vector<double>& v = v_[i];
        for (std::size_t j = 0; j < vals.size(); ++j) {
            const double gj = (g.empty() ? 0.0 : g[j]) * gscale;
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
            vals[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
            if (!std::isfinite(vals[j]))
                throw NumericError("parameter update produced a non-finite value");
        }
        params_[i].zero_grad();
    }
    return clipped;
}

// ====================== shared loop ======================

namespace {

TrainReport run_training(std::vector<Tensor> params, std::size_t n_windows,
                         const TrainConfig& cfg,
                         const std::function<Tensor(std::size_t)>& window_loss) {
    if (cfg.epochs <= 0) throw std::invalid_argument("epochs must be positive");
    if (cfg.batch_size <= 0) throw std::invalid_argument("batch size must be positive");
    if (cfg.horizons <= 0) throw std::invalid_argument("horizons must be positive");
    if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
        throw std::invalid_argument("validation fraction must lie in [0, 1)");
    if (n_windows == 0) throw DataError("no training windows");

    const std::size_t n_val = static_cast<std::size_t>(
        std::floor(cfg.val_fraction * static_cast<double>(n_windows)));
    const std::size_t n_train = n_windows - n_val;
    if (n_train == 0) throw DataError("validation split leaves no training windows");

    for (Tensor& p : params) p.zero_grad();
    AdamOptimizer opt(params, cfg);
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto snapshot = [&] {
        std::vector<std::vector<double>> s;
        s.reserve(params.size());
        for (const Tensor& p : params)
            s.emplace_back(p.values().begin(), p.values().end());
        return s;
    };
    std::vector<std::vector<double>> best = snapshot();
    double best_metric = std::numeric_limits<double>::infinity();

    TrainReport rep;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle)
            for (std::size_t i = n_train - 1; i > 0; --i)
                std::swap(order[i], order[rng.index(i + 1)]);

        const int clip_before = opt.clip_events();
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < n_train;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
            const double contrib = 1.0 / static_cast<double>(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                Tensor loss = window_loss(order[i]);
                epoch_sum += loss.value_at(0);
                Tensor scaled = nn::scale(loss, contrib);
                scaled.backward();
            }
            opt.step();
        }
        EpochStats stats;
        stats.train_loss = epoch_sum / static_cast<double>(n_train);
        if (!std::isfinite(stats.train_loss))
            throw NumericError("training loss became non-finite");
        if (n_val > 0) {
            double val_sum = 0.0;
            for (std::size_t i = n_train; i < n_windows; ++i) {
                Tensor loss = window_loss(i);
                val_sum += loss.value_at(0);
            }
            stats.val_loss = val_sum / static_cast<double>(n_val);
            if (!std::isfinite(stats.val_loss))
                throw NumericError("validation loss became non-finite");
        }
        stats.clip_events = opt.clip_events() - clip_before;
        rep.epochs.push_back(stats);

        const double metric = n_val > 0 ? stats.val_loss : stats.train_loss;
        if (metric < best_metric) {
            best_metric = metric;
            rep.best_epoch = epoch;
            best = snapshot();
        }
        if (cfg.stop_at_train_loss > 0.0 && stats.train_loss <= cfg.stop_at_train_loss) {
            rep.stopped_early = true;
            break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i].mutable_values() = best[i];
    rep.best_loss = best_metric;
    rep.clip_events = opt.clip_events();
    return rep;
}

Tensor summary_constant(const SecondSummary& s) {
    return Tensor::from({6}, {s.mu.x, s.mu.y, s.mu.z, s.sigma[0], s.sigma[1], s.sigma[2]});
}

}  // namespace

// ====================== family-specific losses ======================

TrainReport train_trajectory(TrajectoryModel& m, std::span<const TrajectoryWindow> windows,
                             const TrainConfig& cfg) {
    for (const TrajectoryWindow& w : windows)
        if (w.future_summaries.empty()) throw DataError("window has no future seconds");

    auto window_loss = [&](std::size_t idx) {
        const TrajectoryWindow& w = windows[idx];
        const int horizons =
            std::min<int>(cfg.horizons, static_cast<int>(w.future_summaries.size()));
        std::vector<SummaryOut> outs = trajectory_forward(m, w, horizons);
        Tensor loss = Tensor::constant({1}, 0.0);
        for (int k = 0; k < horizons; ++k) {
            std::vector<Tensor> parts{outs[k].mu, outs[k].sigma};
            Tensor pred = nn::concat(parts);
            loss = nn::add(loss, nn::mse(pred, summary_constant(w.future_summaries[k])));
        }
        return nn::scale(loss, 1.0 / horizons);
    };
    TrainReport rep = run_training(m.parameters(), windows.size(), cfg, window_loss);
    m.trained = true;
    return rep;
}

TrainReport train_heatmap(HeatmapModel& m, std::span<const HeatmapWindow> windows,
                          const TrainConfig& cfg, const SaliencyStore* saliency) {
    for (const HeatmapWindow& w : windows)
        if (w.future.empty()) throw DataError("window has no future grids");
    const double scale = heatmap_input_scale(m.config);

    auto window_loss = [&](std::size_t idx) {
        const HeatmapWindow& w = windows[idx];
        const int horizons = std::min<int>(cfg.horizons, static_cast<int>(w.future.size()));
        std::vector<Tensor> outs = heatmap_forward(m, w, horizons, saliency);
        Tensor loss = Tensor::constant({1}, 0.0);
        for (int k = 0; k < horizons; ++k) {
            std::vector<double> gt(w.future[k].cells().begin(), w.future[k].cells().end());
            for (double& x : gt) x *= scale;
            Tensor target =
                Tensor::from({1, HeatGrid::kRows, HeatGrid::kCols}, std::move(gt));
            loss = nn::add(loss, nn::mse(outs[k], target));
        }
        return nn::scale(loss, 1.0 / horizons);
    };
    TrainReport rep = run_training(m.parameters(), windows.size(), cfg, window_loss);
    m.trained = true;
    return rep;
}

}  // namespace fovcast
