// SPDX-License-Identifier: Apache-2.0
#include "rsad/model.hpp"

#include <cmath>
#include <random>

#include "rsad/error.hpp"
#include "rsad/numerics.hpp"

namespace rsad {

void ModelConfig::validate() const {
  if (m == 0 || d == 0 || h == 0) throw ConfigError("model: m, d and h must be positive");
  if (w < 2) throw ConfigError("model: window length must be at least 2");
  for (std::size_t width : mlp_hidden) {
    if (width == 0) throw ConfigError("model: MLP hidden widths must be positive");
  }
}

namespace {

LstmParams lstm_zeros(std::size_t d, std::size_t input_dim) {
  return {Mat(4 * d, d + input_dim), Mat(4 * d, 1)};
}

std::vector<std::size_t> mlp_widths(const ModelConfig& c) {
  std::vector<std::size_t> widths{c.d};
  widths.insert(widths.end(), c.mlp_hidden.begin(), c.mlp_hidden.end());
  widths.push_back(c.m * c.h);
  return widths;
}

void uniform_fill(Mat& m, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.values()) v = dist(rng);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.encoder = lstm_zeros(config.d, config.m);
  p.decoder = lstm_zeros(config.d, config.m);
  p.readout = Mat(config.m, config.d);
  p.readout_bias = Mat(config.m, 1);
  const auto widths = mlp_widths(config);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.predictor.push_back({Mat(widths[l + 1], widths[l]), Mat(widths[l + 1], 1)});
  }
  return p;
}

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = zeros(config);
  std::mt19937_64 rng(seed);
  const std::size_t d = config.d;
  for (LstmParams* cell : {&p.encoder, &p.decoder}) {
    uniform_fill(cell->w_gates, cell->w_gates.cols(), rng);
    for (std::size_t r = d; r < 2 * d; ++r) cell->b_gates[r] = 1.0;
  }
  uniform_fill(p.readout, d, rng);
  for (auto& layer : p.predictor) uniform_fill(layer.weight, layer.weight.cols(), rng);
  return p;
}

namespace {

template <typename Params, typename MatPtr>
std::vector<std::pair<std::string, MatPtr>> collect_blocks(Params& p) {
  std::vector<std::pair<std::string, MatPtr>> out{
      {"encoder.w_gates", &p.encoder.w_gates}, {"encoder.b_gates", &p.encoder.b_gates},
      {"decoder.w_gates", &p.decoder.w_gates}, {"decoder.b_gates", &p.decoder.b_gates},
      {"decoder.readout", &p.readout},         {"decoder.readout_bias", &p.readout_bias}};
  for (std::size_t l = 0; l < p.predictor.size(); ++l) {
    const std::string prefix = "predictor." + std::to_string(l);
    out.emplace_back(prefix + ".weight", &p.predictor[l].weight);
    out.emplace_back(prefix + ".bias", &p.predictor[l].bias);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Mat*>> ModelParams::blocks() {
  return collect_blocks<ModelParams, Mat*>(*this);
}

std::vector<std::pair<std::string, const Mat*>> ModelParams::blocks() const {
  return collect_blocks<const ModelParams, const Mat*>(*this);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : blocks()) n += m->size();
  return n;
}

void ModelParams::validate_shapes() const {
  const ModelParams expected = zeros(config);
  const auto want = expected.blocks();
  const auto have = blocks();
  if (want.size() != have.size()) {
    throw ShapeError("model: expected " + std::to_string(want.size()) + " parameter blocks, got " +
                     std::to_string(have.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!want[i].second->same_shape(*have[i].second)) {
      throw ShapeError("model: block " + want[i].first + " has shape " +
                       have[i].second->shape_str() + ", expected " + want[i].second->shape_str());
    }
  }
}

namespace {

void require_input(const LstmParams& p, const LstmState& s, const Mat& x) {
  const std::size_t d = p.hidden_dim();
  if (x.rows() != p.input_dim() || x.cols() != 1 || s.hidden.rows() != d || s.cell.rows() != d) {
    throw ShapeError("lstm_step: input " + x.shape_str() + " / state " + s.hidden.shape_str() +
                     " incompatible with gates " + p.w_gates.shape_str());
  }
}

LstmStepCache lstm_step_cached(const LstmParams& p, const LstmState& s, const Mat& x) {
  require_input(p, s, x);
  const std::size_t d = p.hidden_dim();
  LstmStepCache c;
  c.z = vstack(s.hidden, x);
  Mat a = mat_mul(p.w_gates, c.z);
  a += p.b_gates;
  c.i = activation(Activation::kSigmoid, a.row_block(0, d));
  c.f = activation(Activation::kSigmoid, a.row_block(d, 2 * d));
  c.g = activation(Activation::kTanh, a.row_block(2 * d, 3 * d));
  c.o = activation(Activation::kSigmoid, a.row_block(3 * d, 4 * d));
  c.c_prev = s.cell;
  c.c = add(hadamard(c.f, s.cell), hadamard(c.i, c.g));
  c.tanh_c = activation(Activation::kTanh, c.c);
  c.h = hadamard(c.o, c.tanh_c);
  return c;
}

/// Runs the cell over the given inputs starting from `init`.
LstmTrace run_lstm(const LstmParams& p, const LstmState& init, const std::vector<Mat>& inputs) {
  LstmTrace trace;
  trace.steps.reserve(inputs.size());
  LstmState state = init;
  for (const Mat& x : inputs) {
    trace.steps.push_back(lstm_step_cached(p, state, x));
    state = {trace.steps.back().h, trace.steps.back().c};
  }
  trace.final = state;
  return trace;
}

std::vector<Mat> columns(const Mat& x) {
  std::vector<Mat> out;
  out.reserve(x.cols());
  for (std::size_t t = 0; t < x.cols(); ++t) out.push_back(x.col(t));
  return out;
}

void require_window(const ModelParams& p, const Mat& x) {
  if (x.rows() != p.config.m || x.cols() != p.config.w) {
    throw ShapeError("window " + x.shape_str() + " does not match model m x w = " +
                     std::to_string(p.config.m) + "x" + std::to_string(p.config.w));
  }
}

struct DecodeTrace {
  LstmTrace lstm;
  Mat x_r;
};

std::size_t output_column(const ModelConfig& c, std::size_t step) {
  return c.reverse_decoder ? c.w - 1 - step : step;
}

DecodeTrace run_decoder(const ModelParams& p, const LstmState& init) {
  if (init.hidden.rows() != p.config.d || init.cell.rows() != p.config.d) {
    throw ShapeError("decode: state " + init.hidden.shape_str() + " does not match d = " +
                     std::to_string(p.config.d));
  }
  const std::vector<Mat> inputs(p.config.w, Mat(p.config.m, 1));
  DecodeTrace out{run_lstm(p.decoder, init, inputs), Mat(p.config.m, p.config.w)};
  for (std::size_t k = 0; k < p.config.w; ++k) {
    Mat y = mat_mul(p.readout, out.lstm.steps[k].h);
    y += p.readout_bias;
    out.x_r.set_col(output_column(p.config, k), y);
  }
  return out;
}

/// Activations a_0 (input) .. a_L (last hidden) followed by the linear output.
std::vector<Mat> run_mlp(const ModelParams& p, const Mat& input) {
  if (input.rows() != p.config.d || input.cols() != 1) {
    throw ShapeError("predict: input " + input.shape_str() + " does not match d = " +
                     std::to_string(p.config.d));
  }
  std::vector<Mat> acts{input};
  for (std::size_t l = 0; l < p.predictor.size(); ++l) {
    Mat a = mat_mul(p.predictor[l].weight, acts.back());
    a += p.predictor[l].bias;
    const bool last = l + 1 == p.predictor.size();
    acts.push_back(last ? std::move(a) : activation(Activation::kTanh, a));
  }
  return acts;
}

/// Flat output index t*m + i maps to entry (i, t).
Mat unflatten_prediction(const ModelConfig& c, const Mat& flat) {
  Mat out(c.m, c.h);
  for (std::size_t t = 0; t < c.h; ++t) {
    for (std::size_t i = 0; i < c.m; ++i) out(i, t) = flat[t * c.m + i];
  }
  return out;
}

Mat flatten_prediction(const ModelConfig& c, const Mat& mh) {
  Mat out(c.m * c.h, 1);
  for (std::size_t t = 0; t < c.h; ++t) {
    for (std::size_t i = 0; i < c.m; ++i) out[t * c.m + i] = mh(i, t);
  }
  return out;
}

}  // namespace

LstmState lstm_step(const LstmParams& params, const LstmState& state, const Mat& x_t) {
  LstmStepCache c = lstm_step_cached(params, state, x_t);
  return {std::move(c.h), std::move(c.c)};
}

EncodeResult encode(const ModelParams& params, const Mat& x) {
  require_window(params, x);
  const LstmTrace trace = run_lstm(params.encoder, LstmState::zeros(params.config.d), columns(x));
  EncodeResult out{Mat(params.config.d, params.config.w), trace.final};
  for (std::size_t t = 0; t < trace.steps.size(); ++t) out.hidden_seq.set_col(t, trace.steps[t].h);
  return out;
}

Mat decode(const ModelParams& params, const LstmState& final) {
  return run_decoder(params, final).x_r;
}

Mat predict(const ModelParams& params, const LstmState& final) {
  return unflatten_prediction(params.config, run_mlp(params, final.hidden).back());
}

ForwardCache forward_cached(const ModelParams& params, const Mat& x) {
  require_window(params, x);
  const LstmState zero = LstmState::zeros(params.config.d);
  ForwardCache c;
  c.x = x;
  c.enc1 = run_lstm(params.encoder, zero, columns(x));
  DecodeTrace dec = run_decoder(params, c.enc1.final);
  c.dec = std::move(dec.lstm);
  c.out.x_r = std::move(dec.x_r);
  c.mlp1 = run_mlp(params, c.enc1.final.hidden);
  c.out.x_f_hat1 = unflatten_prediction(params.config, c.mlp1.back());
  c.enc2 = run_lstm(params.encoder, zero, columns(c.out.x_r));
  c.mlp2 = run_mlp(params, c.enc2.final.hidden);
  c.out.x_f_hat2 = unflatten_prediction(params.config, c.mlp2.back());
  return c;
}

ForwardResult forward_full(const ModelParams& params, const Mat& x) {
  return forward_cached(params, x).out;
}

namespace {

struct LstmBackward {
  Mat dh0;
  Mat dc0;
  std::vector<Mat> dx;  ///< gradient w.r.t. each step input
};

/// BPTT through one trace. `dh_out[t]` is the external gradient on step t's
/// hidden output (may be empty for none).
LstmBackward backprop_lstm(const LstmParams& p, LstmParams& grad, const LstmTrace& trace,
                           const std::vector<Mat>& dh_out, Mat dh_final, Mat dc_final) {
  const std::size_t d = p.hidden_dim();
  const std::size_t steps = trace.steps.size();
  LstmBackward out;
  out.dx.resize(steps);
  Mat dh_next = std::move(dh_final);
  Mat dc_next = std::move(dc_final);
  Mat da(4 * d, 1);
  for (std::size_t k = steps; k-- > 0;) {
    const LstmStepCache& s = trace.steps[k];
    Mat dh = dh_next;
    if (!dh_out.empty() && !dh_out[k].empty()) dh += dh_out[k];
    for (std::size_t j = 0; j < d; ++j) {
      const double d_o = dh[j] * s.tanh_c[j];
      const double dc = dc_next[j] + dh[j] * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
      const double d_i = dc * s.g[j];
      const double d_g = dc * s.i[j];
      const double d_f = dc * s.c_prev[j];
      dc_next[j] = dc * s.f[j];
      da[j] = d_i * s.i[j] * (1.0 - s.i[j]);
      da[d + j] = d_f * s.f[j] * (1.0 - s.f[j]);
      da[2 * d + j] = d_g * (1.0 - s.g[j] * s.g[j]);
      da[3 * d + j] = d_o * s.o[j] * (1.0 - s.o[j]);
    }
    mat_mul_nt_add(grad.w_gates, da, s.z);
    grad.b_gates += da;
    Mat dz = mat_mul_tn(p.w_gates, da);
    dh_next = dz.row_block(0, d);
    out.dx[k] = dz.row_block(d, dz.rows());
  }
  out.dh0 = std::move(dh_next);
  out.dc0 = std::move(dc_next);
  return out;
}

/// Backprop through the predictor; returns the gradient on its input.
Mat backprop_mlp(const ModelParams& p, ModelParams& grad, const std::vector<Mat>& acts,
                 Mat d_out) {
  Mat delta = std::move(d_out);
  for (std::size_t l = p.predictor.size(); l-- > 0;) {
    const bool last = l + 1 == p.predictor.size();
    if (!last) delta = hadamard(delta, activation_deriv(Activation::kTanh, acts[l + 1]));
    mat_mul_nt_add(grad.predictor[l].weight, delta, acts[l]);
    grad.predictor[l].bias += delta;
    delta = mat_mul_tn(p.predictor[l].weight, delta);
  }
  return delta;
}

void require_finite(const ModelParams& grad) {
  for (const auto& [name, m] : grad.blocks()) {
    if (!m->all_finite()) throw DivergenceError("non-finite gradient in block " + name);
  }
}

}  // namespace

ModelParams backward_full(const ModelParams& params, const ForwardCache& cache, const Mat& x_f,
                          const LossWeights& weights) {
  const ModelConfig& cfg = params.config;
  if (x_f.rows() != cfg.m || x_f.cols() != cfg.h) {
    throw ShapeError("target " + x_f.shape_str() + " does not match model m x h = " +
                     std::to_string(cfg.m) + "x" + std::to_string(cfg.h));
  }
  ModelParams grad = ModelParams::zeros(cfg);
  const ForwardResult& out = cache.out;

  // Loss gradients on the three network outputs.
  Mat d_xr = scale(weights.alpha, residual_norm_grad(out.x_r, cache.x));
  const Mat d_hat1 = scale(weights.beta, residual_norm_grad(out.x_f_hat1, x_f));
  const Mat d_hat2 = scale(weights.gamma, residual_norm_grad(out.x_f_hat2, x_f));

  // Prediction from the reconstruction: P, then the second encoder pass into x_r.
  const Mat dh_enc2 = backprop_mlp(params, grad, cache.mlp2, flatten_prediction(cfg, d_hat2));
  const LstmBackward b2 =
      backprop_lstm(params.encoder, grad.encoder, cache.enc2, {}, dh_enc2, Mat(cfg.d, 1));
  for (std::size_t t = 0; t < cfg.w; ++t) {
    for (std::size_t i = 0; i < cfg.m; ++i) d_xr(i, t) += b2.dx[t][i];
  }

  // Decoder readout and recurrence back to the first encoding.
  std::vector<Mat> dh_dec(cfg.w);
  for (std::size_t k = 0; k < cfg.w; ++k) {
    const Mat dy = d_xr.col(output_column(cfg, k));
    mat_mul_nt_add(grad.readout, dy, cache.dec.steps[k].h);
    grad.readout_bias += dy;
    dh_dec[k] = mat_mul_tn(params.readout, dy);
  }
  const LstmBackward bd =
      backprop_lstm(params.decoder, grad.decoder, cache.dec, dh_dec, Mat(cfg.d, 1), Mat(cfg.d, 1));

  // Prediction from the original window plus the decoder's pull on the final state.
  Mat dh_enc1 = backprop_mlp(params, grad, cache.mlp1, flatten_prediction(cfg, d_hat1));
  dh_enc1 += bd.dh0;
  backprop_lstm(params.encoder, grad.encoder, cache.enc1, {}, dh_enc1, bd.dc0);

  require_finite(grad);
  return grad;
}

LossAndGradient loss_and_gradient(const ModelParams& params, const Mat& x, const Mat& x_f,
                                  const LossWeights& weights) {
  const ForwardCache cache = forward_cached(params, x);
  LossAndGradient r;
  r.loss = loss(x, cache.out.x_r, x_f, cache.out.x_f_hat1, cache.out.x_f_hat2, weights);
  if (!std::isfinite(r.loss.total)) {
    throw DivergenceError("non-finite loss (rec=" + std::to_string(r.loss.rec) +
                          ", p1=" + std::to_string(r.loss.p1) +
                          ", p2=" + std::to_string(r.loss.p2) + ")");
  }
  r.grad = backward_full(params, cache, x_f, weights);
  return r;
}

}  // namespace rsad
