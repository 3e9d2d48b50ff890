// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsad/mat.hpp"
#include "rsad/objective.hpp"

namespace rsad {

/// Shape of the encoder/decoder/predictor networks.
struct ModelConfig {
  std::size_t m = 9;   ///< channels
  std::size_t w = 64;  ///< window length
  std::size_t h = 8;   ///< prediction horizon
  std::size_t d = 32;  ///< LSTM hidden width
  std::vector<std::size_t> mlp_hidden{64};
  /// Decoder emits the window last-step-first and the output is flipped back.
  bool reverse_decoder = true;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Single LSTM cell. Gate rows are stacked input, forget, cell, output;
/// the weight columns act on [hidden; input].
struct LstmParams {
  Mat w_gates;  ///< 4d x (d + input_dim)
  Mat b_gates;  ///< 4d x 1

  std::size_t hidden_dim() const { return b_gates.rows() / 4; }
  std::size_t input_dim() const { return w_gates.cols() - hidden_dim(); }
};

struct LstmState {
  Mat hidden;  ///< d x 1
  Mat cell;    ///< d x 1

  static LstmState zeros(std::size_t d) { return {Mat(d, 1), Mat(d, 1)}; }
};

struct DenseLayer {
  Mat weight;  ///< out x in
  Mat bias;    ///< out x 1
};

/// Every learnable tensor plus the configuration that shaped it. The same
/// type doubles as the gradient container.
struct ModelParams {
  ModelConfig config;
  LstmParams encoder;
  LstmParams decoder;
  Mat readout;       ///< m x d
  Mat readout_bias;  ///< m x 1
  std::vector<DenseLayer> predictor;

  /// All-zero parameters with shapes derived from config.
  static ModelParams zeros(const ModelConfig& config);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except the
  /// forget-gate bias which starts at 1.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  /// Named views of every parameter block in a fixed canonical order.
  std::vector<std::pair<std::string, Mat*>> blocks();
  std::vector<std::pair<std::string, const Mat*>> blocks() const;

  std::size_t parameter_count() const;
  /// Throws ShapeError naming the first block whose shape disagrees with config.
  void validate_shapes() const;
};

/// Intermediates of one LSTM step kept for backpropagation.
struct LstmStepCache {
  Mat z;  ///< [h_prev; x]
  Mat i, f, g, o;
  Mat c_prev;
  Mat c;
  Mat tanh_c;
  Mat h;
};

struct LstmTrace {
  std::vector<LstmStepCache> steps;
  LstmState final;
};

LstmState lstm_step(const LstmParams& params, const LstmState& state, const Mat& x_t);

struct EncodeResult {
  Mat hidden_seq;  ///< d x w
  LstmState final;
};

EncodeResult encode(const ModelParams& params, const Mat& x);
Mat decode(const ModelParams& params, const LstmState& final);
Mat predict(const ModelParams& params, const LstmState& final);

struct ForwardResult {
  Mat x_r;       ///< reconstruction, m x w
  Mat x_f_hat1;  ///< prediction from the original window, m x h
  Mat x_f_hat2;  ///< prediction from the reconstruction, m x h
};

ForwardResult forward_full(const ModelParams& params, const Mat& x);

/// Everything backward_full needs from a forward pass.
struct ForwardCache {
  Mat x;
  LstmTrace enc1;
  LstmTrace dec;
  std::vector<Mat> dec_hidden;  ///< decoder hidden per decoder step
  std::vector<Mat> mlp1;        ///< MLP activations on the first encoding
  LstmTrace enc2;
  std::vector<Mat> mlp2;
  ForwardResult out;
};

ForwardCache forward_cached(const ModelParams& params, const Mat& x);

/// Analytic gradient of the weighted residual objective through both encoder
/// passes, the decoder, and the predictor. Throws DivergenceError on
/// non-finite values.
ModelParams backward_full(const ModelParams& params, const ForwardCache& cache,
                          const Mat& x_f, const LossWeights& weights);

struct LossAndGradient {
  LossBreakdown loss;
  ModelParams grad;
};

LossAndGradient loss_and_gradient(const ModelParams& params, const Mat& x, const Mat& x_f,
                                  const LossWeights& weights);

}  // namespace rsad
