#pragma once

#include <span>
#include <vector>

#include "fovcast/common.hpp"
#include "fovcast/tensor.hpp"

namespace fovcast::nn {

// ====================== dense ======================

/** Fully connected layer parameters: weight {out, in}, bias {out}. */
struct DenseParams {
    Tensor weight;
    Tensor bias;

    int input_size() const { return weight.shape()[1]; }
    int output_size() const { return weight.shape()[0]; }
    void collect(std::vector<Tensor>& out) const;
};

/** Glorot-uniform initialisation. */
DenseParams make_dense(Rng& rng, int output, int input);

Tensor dense(const DenseParams& p, const Tensor& x);

// ====================== LSTM ======================

/**
 * LSTM cell parameters. The three tensors stack the four gates along the
 * leading dimension in the order input, forget, cell, output:
 * w_input {4H, I}, w_hidden {4H, H}, bias {4H}.
 */
struct LstmParams {
    Tensor w_input;
    Tensor w_hidden;
    Tensor bias;

    int input_size() const { return w_input.shape()[1]; }
    int hidden_size() const { return w_hidden.shape()[1]; }
    void collect(std::vector<Tensor>& out) const;
};

/** Glorot-uniform weights; forget-gate bias starts at 1 so memory persists early in training. */
LstmParams make_lstm(Rng& rng, int input, int hidden);

struct LstmState {
    Tensor h;
    Tensor c;
};

LstmState lstm_zero_state(int hidden);

/** One recurrence step; returns the updated state. */
LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& state);

// ====================== convolutional LSTM ======================

/**
 * Convolutional LSTM cell over {C, H, W} feature maps. Gate stacking matches
 * LstmParams: w_input {4C, Cin, k, k}, w_hidden {4C, C, k, k}, bias {4C}.
 * Convolutions pad circularly along width and with zeros along height, so
 * the map behaves like an equirectangular panorama.
 */
struct ConvLstmLayerParams {
    Tensor w_input;
    Tensor w_hidden;
    Tensor bias;

    int input_channels() const { return w_input.shape()[1]; }
    int channels() const { return w_hidden.shape()[1]; }
    int kernel() const { return w_input.shape()[2]; }
    void collect(std::vector<Tensor>& out) const;
};

ConvLstmLayerParams make_convlstm_layer(Rng& rng, int input_channels, int channels, int kernel);

struct ConvLstmLayerState {
    Tensor h;
    Tensor c;
};

ConvLstmLayerState convlstm_zero_state(int channels, int height, int width);

ConvLstmLayerState convlstm_layer_step(const ConvLstmLayerParams& p, const Tensor& x,
                                       const ConvLstmLayerState& state);

/** A stack of convolutional LSTM layers; layer i feeds its hidden map to layer i+1. */
struct ConvLstmParams {
    std::vector<ConvLstmLayerParams> layers;

    void collect(std::vector<Tensor>& out) const;
};

ConvLstmParams make_convlstm(Rng& rng, int input_channels, std::span<const int> channels,
                             int kernel);

std::vector<ConvLstmLayerState> convlstm_zero_states(const ConvLstmParams& p, int height,
                                                     int width);

/**
 * Advance every layer one step; `states` is updated in place. Returns the
 * top layer's hidden map.
 */
Tensor convlstm_step(const ConvLstmParams& p, const Tensor& x,
                     std::vector<ConvLstmLayerState>& states);

// ====================== plain convolution ======================

/** One convolution layer over {C, H, W} maps (fovcast padding rules). */
struct ConvParams {
    Tensor kernel;  // {out, in, k, k}
    Tensor bias;    // {out}

    int input_channels() const { return kernel.shape()[1]; }
    int output_channels() const { return kernel.shape()[0]; }
    void collect(std::vector<Tensor>& out) const;
};

ConvParams make_conv(Rng& rng, int output_channels, int input_channels, int kernel);

Tensor conv(const ConvParams& p, const Tensor& x);

// ====================== attention ======================

/**
 * Dot-product attention weights: softmax over query . key_i.
 * Returns a {n} tensor of weights summing to one.
 */
Tensor attention_weights(const Tensor& query, std::span<const Tensor> keys);

}  // namespace fovcast::nn
