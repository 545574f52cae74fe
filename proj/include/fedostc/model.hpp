#pragma once

#include "fedostc/common.hpp"

#include <utility>
#include <vector>

namespace fedostc {

struct ModelConfig {
  int history_steps = 12;  // lookback window length
  int forecast_steps = 6;  // prediction horizon
  int input_dim = 1;
  int enc_hidden = 64;
  int dec_hidden = 128;
  unsigned seed = 1;

  void validate() const;
};

/// Segment layout of the flattened parameter vector:
/// encoder GRU | bridge (dec_hidden x enc_hidden) | decoder GRU | head (1 x dec_hidden).
/// Each GRU segment stores W_z, W_r, W_h then U_z, U_r, U_h, each matrix
/// column-major.
struct ParamLayout {
  int input_dim = 1;
  int enc_hidden = 0;
  int dec_hidden = 0;

  static ParamLayout from(const ModelConfig& cfg) {
    return ParamLayout{cfg.input_dim, cfg.enc_hidden, cfg.dec_hidden};
  }

  int encoder_size() const { return 3 * enc_hidden * input_dim + 3 * enc_hidden * enc_hidden; }
  int bridge_size() const { return dec_hidden * enc_hidden; }
  int decoder_size() const { return 3 * dec_hidden * 1 + 3 * dec_hidden * dec_hidden; }
  int head_size() const { return dec_hidden; }

  int encoder_offset() const { return 0; }
  int bridge_offset() const { return encoder_size(); }
  int decoder_offset() const { return bridge_offset() + bridge_size(); }
  int head_offset() const { return decoder_offset() + decoder_size(); }
  int total() const { return head_offset() + head_size(); }

  bool operator==(const ParamLayout&) const = default;
};

/// Flat model parameters plus the layout that interprets them.
struct ParamVector {
  ParamLayout layout;
  Vec values;

  static ParamVector zeros(const ParamLayout& layout) {
    return ParamVector{layout, Vec::Zero(layout.total())};
  }
};

/// Same layout as the ParamVector it differentiates.
using GradientVector = ParamVector;

/// Structured (unflattened) view used by the pack/unpack round trip.
struct GruParams {
  Mat w_z, w_r, w_h;  // gate x input weights
  Mat u_z, u_r, u_h;  // gate x hidden weights
};

struct ModelParams {
  GruParams encoder;
  Mat bridge;
  GruParams decoder;
  Eigen::RowVectorXd head;
};

ParamVector pack(const ModelParams& parts);
ModelParams unpack(const ParamVector& flat);

/// Read-only matrix views into one GRU segment of a flat vector.
struct GruView {
  Eigen::Map<const Mat> w_z, w_r, w_h, u_z, u_r, u_h;
};

GruView encoder_view(const ParamVector& p);
GruView decoder_view(const ParamVector& p);
Eigen::Map<const Mat> bridge_view(const ParamVector& p);
Eigen::Map<const Eigen::RowVectorXd> head_view(const ParamVector& p);

/// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per matrix; the
/// bridge starts at identity when enc_hidden == dec_hidden.
ParamVector init_params(const ModelConfig& cfg, uint64_t seed);
inline ParamVector init_params(const ModelConfig& cfg) { return init_params(cfg, cfg.seed); }

/// Everything the backward pass needs about one GRU step.
struct GruStepCache {
  Vec x, h_prev, z, r, h_tilde, h_new;
};

/// One gate update:
///   z = sigmoid(W_z x + U_z h), r = sigmoid(W_r x + U_r h),
///   h~ = tanh(W_h x + U_h (r .* h)), h' = (1-z) .* h + z .* h~.
Vec gru_step(const GruView& p, const Vec& x, const Vec& h_prev, GruStepCache* cache = nullptr);

struct EncodeResult {
  Vec h;  // final hidden state (the temporal pattern)
  std::vector<GruStepCache> caches;
};

/// Runs the encoder over the window from a zero initial hidden state.
EncodeResult encode(const ParamVector& p, const Vec& x_hist);

struct DecodeResult {
  Vec predictions;  // length forecast_steps
  Vec h0;           // bridged initial decoder hidden
  std::vector<GruStepCache> caches;
};

/// Autoregressive decode: initial hidden = bridge * h_prime, first input
/// is the last observed value, later steps feed back the previous
/// prediction; each step's output is head * hidden.
DecodeResult decode(const ParamVector& p, const Vec& h_prime, double x_last, int forecast_steps);

/// Mean squared error and its gradient w.r.t. the predictions.
std::pair<double, Vec> mse_loss(const Vec& predicted, const Vec& actual);

/// How the decoder's input hidden state is produced from the encoder
/// output. `direct` feeds the encoder hidden straight through (no
/// spatial pass). `self_path` recomputes
///   h' = sigmoid(alpha_self * h + offset)
/// with the neighbor contribution frozen into `offset`. `cached` decodes
/// from a served h' and backpropagates through the same frozen self path.
struct DecodeRoute {
  enum class Kind { direct, self_path, cached };
  Kind kind = Kind::direct;
  double alpha_self = 1.0;
  Vec offset;
  Vec h_prime;

  static DecodeRoute direct() { return DecodeRoute{}; }
  static DecodeRoute self_path(double alpha_self, Vec offset) {
    return DecodeRoute{Kind::self_path, alpha_self, std::move(offset), {}};
  }
  static DecodeRoute cached(Vec h_prime, double alpha_self) {
    return DecodeRoute{Kind::cached, alpha_self, {}, std::move(h_prime)};
  }
};

struct ForwardResult {
  EncodeResult enc;
  Vec h_prime;  // hidden state the decoder consumed
  DecodeResult dec;
  double alpha_self = 1.0;
  DecodeRoute::Kind route = DecodeRoute::Kind::direct;
  double x_last = 0.0;
};

ForwardResult forward(const ParamVector& p, const Vec& x_hist, const DecodeRoute& route,
                      int forecast_steps);

/// Forward pass reusing an already-computed encoder result (the state
/// uploaded before the spatial barrier).
ForwardResult forward_from_encode(const ParamVector& p, EncodeResult enc, const Vec& x_hist,
                                  const DecodeRoute& route, int forecast_steps);

/// Full backpropagation: head, decoder (through time, including the
/// autoregressive feedback), bridge, the frozen self path, then the
/// encoder through time. Neighbor hidden states and attention
/// coefficients are constants.
GradientVector backward(const ParamVector& p, const ForwardResult& fwd, const Vec& dloss_dpred);

struct GradCheckReport {
  double max_rel_error = 0.0;
  double encoder = 0.0, bridge = 0.0, decoder = 0.0, head = 0.0;  // per-segment maxima
};

/// Central finite differences of the forward loss against the analytic
/// gradient; relative error per coordinate is |analytic - fd| / max(1, |fd|).
GradCheckReport finite_diff_check(const ParamVector& p, const Vec& x_hist, const Vec& target,
                                  const DecodeRoute& route, double epsilon);

}  // namespace fedostc
