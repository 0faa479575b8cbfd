#include "fovcast/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace fovcast::nn {

namespace {

Tensor glorot(Rng& rng, std::vector<int> shape, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    int n = 1;
    for (int d : shape) n *= d;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(-limit, limit);
    return Tensor::from(std::move(shape), std::move(v), /*requires_grad=*/true);
}

}  // namespace

// ====================== dense ======================

void DenseParams::collect(std::vector<Tensor>& out) const {
    out.push_back(weight);
    out.push_back(bias);
}

DenseParams make_dense(Rng& rng, int output, int input) {
    if (output <= 0 || input <= 0) throw std::invalid_argument("dense sizes must be positive");
    DenseParams p;
    p.weight = glorot(rng, {output, input}, input, output);
    p.bias = Tensor::from({output}, std::vector<double>(output, 0.0), true);
    return p;
}

Tensor dense(const DenseParams& p, const Tensor& x) {
    return add(matvec(p.weight, x), p.bias);
}

// ====================== LSTM ======================

void LstmParams::collect(std::vector<Tensor>& out) const {
    out.push_back(w_input);
    out.push_back(w_hidden);
    out.push_back(bias);
}

LstmParams make_lstm(Rng& rng, int input, int hidden) {
    if (input <= 0 || hidden <= 0) throw std::invalid_argument("lstm sizes must be positive");
    LstmParams p;
    p.w_input = glorot(rng, {4 * hidden, input}, input, hidden);
    p.w_hidden = glorot(rng, {4 * hidden, hidden}, hidden, hidden);
    std::vector<double> b(static_cast<std::size_t>(4 * hidden), 0.0);
    for (int i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
    p.bias = Tensor::from({4 * hidden}, std::move(b), true);
    return p;
}

LstmState lstm_zero_state(int hidden) {
    return {Tensor::constant({hidden}, 0.0), Tensor::constant({hidden}, 0.0)};
}

LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& state) {
    const int hidden = p.hidden_size();
    if (x.shape() != std::vector<int>{p.input_size()})
        throw std::invalid_argument("lstm_step: input width does not match parameters");
    if (state.h.shape() != std::vector<int>{hidden} || state.c.shape() != std::vector<int>{hidden})
        throw std::invalid_argument("lstm_step: state width does not match parameters");

    Tensor gates = add(add(matvec(p.w_input, x), matvec(p.w_hidden, state.h)), p.bias);
    Tensor gi = sigmoid(slice(gates, 0, hidden));
    Tensor gf = sigmoid(slice(gates, hidden, hidden));
    Tensor gg = tanh_act(slice(gates, 2 * hidden, hidden));
    Tensor go = sigmoid(slice(gates, 3 * hidden, hidden));

    Tensor c_next = add(mul(gf, state.c), mul(gi, gg));
    Tensor h_next = mul(go, tanh_act(c_next));
    return {h_next, c_next};
}

// ====================== convolutional LSTM ======================

void ConvLstmLayerParams::collect(std::vector<Tensor>& out) const {
    out.push_back(w_input);
    out.push_back(w_hidden);
    out.push_back(bias);
}

ConvLstmLayerParams make_convlstm_layer(Rng& rng, int input_channels, int channels, int kernel) {
    if (input_channels <= 0 || channels <= 0)
        throw std::invalid_argument("convlstm channel counts must be positive");
    if (kernel <= 0 || kernel % 2 == 0)
        throw std::invalid_argument("convlstm kernels must be odd-sized");
    const int taps = kernel * kernel;
    ConvLstmLayerParams p;
    p.w_input = glorot(rng, {4 * channels, input_channels, kernel, kernel},
                       input_channels * taps, channels * taps);
    p.w_hidden = glorot(rng, {4 * channels, channels, kernel, kernel}, channels * taps,
                        channels * taps);
    std::vector<double> b(static_cast<std::size_t>(4 * channels), 0.0);
    for (int i = channels; i < 2 * channels; ++i) b[i] = 1.0;
    p.bias = Tensor::from({4 * channels}, std::move(b), true);
    return p;
}

ConvLstmLayerState convlstm_zero_state(int channels, int height, int width) {
    return {Tensor::constant({channels, height, width}, 0.0),
            Tensor::constant({channels, height, width}, 0.0)};
}

ConvLstmLayerState convlstm_layer_step(const ConvLstmLayerParams& p, const Tensor& x,
                                       const ConvLstmLayerState& state) {
    const auto& hs = state.h.shape();
    if (hs.size() != 3 || hs[0] != p.channels())
        throw std::invalid_argument("convlstm_layer_step: state does not match parameters");
    if (x.shape().size() != 3 || x.shape()[0] != p.input_channels() || x.shape()[1] != hs[1] ||
        x.shape()[2] != hs[2])
        throw std::invalid_argument("convlstm_layer_step: input map does not match state");

    const int channels = p.channels();
    Tensor zero_bias = Tensor::constant({4 * channels}, 0.0);
    Tensor gates = add(conv2d(x, p.w_input, p.bias), conv2d(state.h, p.w_hidden, zero_bias));
    Tensor gi = sigmoid(slice(gates, 0, channels));
    Tensor gf = sigmoid(slice(gates, channels, channels));
    Tensor gg = tanh_act(slice(gates, 2 * channels, channels));
    Tensor go = sigmoid(slice(gates, 3 * channels, channels));

    Tensor c_next = add(mul(gf, state.c), mul(gi, gg));
    Tensor h_next = mul(go, tanh_act(c_next));
    return {h_next, c_next};
}

void ConvLstmParams::collect(std::vector<Tensor>& out) const {
    for (const auto& l : layers) l.collect(out);
}

ConvLstmParams make_convlstm(Rng& rng, int input_channels, std::span<const int> channels,
                             int kernel) {
    if (channels.empty()) throw std::invalid_argument("convlstm needs at least one layer");
    ConvLstmParams p;
    int cin = input_channels;
    for (int c : channels) {
        p.layers.push_back(make_convlstm_layer(rng, cin, c, kernel));
        cin = c;
    }
    return p;
}

std::vector<ConvLstmLayerState> convlstm_zero_states(const ConvLstmParams& p, int height,
                                                     int width) {
    std::vector<ConvLstmLayerState> states;
    states.reserve(p.layers.size());
    for (const auto& l : p.layers)
        states.push_back(convlstm_zero_state(l.channels(), height, width));
    return states;
}

Tensor convlstm_step(const ConvLstmParams& p, const Tensor& x,
                     std::vector<ConvLstmLayerState>& states) {
    if (states.size() != p.layers.size())
        throw std::invalid_argument("convlstm_step: state count does not match layer count");
    Tensor layer_in = x;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        states[i] = convlstm_layer_step(p.layers[i], layer_in, states[i]);
        layer_in = states[i].h;
    }
    return layer_in;
}

// ====================== plain convolution ======================

void ConvParams::collect(std::vector<Tensor>& out) const {
    out.push_back(kernel);
    out.push_back(bias);
}

ConvParams make_conv(Rng& rng, int output_channels, int input_channels, int kernel) {
    if (output_channels <= 0 || input_channels <= 0)
        throw std::invalid_argument("conv channel counts must be positive");
    if (kernel <= 0 || kernel % 2 == 0)
        throw std::invalid_argument("conv kernels must be odd-sized");
    const int taps = kernel * kernel;
    ConvParams p;
    p.kernel = glorot(rng, {output_channels, input_channels, kernel, kernel},
                      input_channels * taps, output_channels * taps);
    p.bias = Tensor::from({output_channels}, std::vector<double>(output_channels, 0.0), true);
    return p;
}

Tensor conv(const ConvParams& p, const Tensor& x) { return conv2d(x, p.kernel, p.bias); }

// ====================== attention ======================

Tensor attention_weights(const Tensor& query, std::span<const Tensor> keys) {
    if (keys.empty()) throw std::invalid_argument("attention over zero keys");
    std::vector<Tensor> scores;
    scores.reserve(keys.size());
    for (const Tensor& k : keys) scores.push_back(dot(query, k));
    return softmax(concat(scores));
}

}  // namespace fovcast::nn
