#include "fedostc/model.hpp"

#include <cmath>

namespace fedostc {

namespace {

inline Vec sigmoid(const Vec& v) { return (1.0 + (-v.array()).exp()).inverse().matrix(); }

inline Eigen::Map<const Mat> cmat(const Vec& v, int off, int rows, int cols) {
  return Eigen::Map<const Mat>(v.data() + off, rows, cols);
}

inline Eigen::Map<Mat> mmat(Vec& v, int off, int rows, int cols) {
  return Eigen::Map<Mat>(v.data() + off, rows, cols);
}

GruView gru_cview(const Vec& v, int off, int d, int in) {
  const int wi = d * in, ui = d * d;
  return GruView{cmat(v, off, d, in),          cmat(v, off + wi, d, in),
                 cmat(v, off + 2 * wi, d, in), cmat(v, off + 3 * wi, d, d),
                 cmat(v, off + 3 * wi + ui, d, d), cmat(v, off + 3 * wi + 2 * ui, d, d)};
}

struct GruMut {
  Eigen::Map<Mat> w_z, w_r, w_h, u_z, u_r, u_h;
};

GruMut gru_mview(Vec& v, int off, int d, int in) {
  const int wi = d * in, ui = d * d;
  return GruMut{mmat(v, off, d, in),          mmat(v, off + wi, d, in),
                mmat(v, off + 2 * wi, d, in), mmat(v, off + 3 * wi, d, d),
                mmat(v, off + 3 * wi + ui, d, d), mmat(v, off + 3 * wi + 2 * ui, d, d)};
}

/// Backprop through one GRU step. Accumulates parameter gradients into
/// `g`, returns the gradient w.r.t. the previous hidden state and the
/// step input.
std::pair<Vec, Vec> gru_backward(const GruView& p, const GruStepCache& c, const Vec& dh,
                                 GruMut& g) {
  const Vec dz = dh.cwiseProduct(c.h_tilde - c.h_prev);
  const Vec dht = dh.cwiseProduct(c.z);
  Vec dh_prev = dh.cwiseProduct(Vec::Ones(dh.size()) - c.z);

  const Vec dc = dht.cwiseProduct((1.0 - c.h_tilde.array().square()).matrix());
  const Vec rh = c.r.cwiseProduct(c.h_prev);
  g.w_h.noalias() += dc * c.x.transpose();
  g.u_h.noalias() += dc * rh.transpose();
  const Vec drh = p.u_h.transpose() * dc;
  const Vec dr = drh.cwiseProduct(c.h_prev);
  dh_prev.noalias() += drh.cwiseProduct(c.r);

  const Vec dzp = dz.cwiseProduct(c.z.cwiseProduct(Vec::Ones(dh.size()) - c.z));
  const Vec drp = dr.cwiseProduct(c.r.cwiseProduct(Vec::Ones(dh.size()) - c.r));
  g.w_z.noalias() += dzp * c.x.transpose();
  g.u_z.noalias() += dzp * c.h_prev.transpose();
  dh_prev.noalias() += p.u_z.transpose() * dzp;
  g.w_r.noalias() += drp * c.x.transpose();
  g.u_r.noalias() += drp * c.h_prev.transpose();
  dh_prev.noalias() += p.u_r.transpose() * drp;

  Vec dx = p.w_z.transpose() * dzp;
  dx.noalias() += p.w_r.transpose() * drp;
  dx.noalias() += p.w_h.transpose() * dc;
  return {std::move(dh_prev), std::move(dx)};
}

void fill_uniform(Eigen::Map<Mat> m, double bound, UniformRng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.range(-bound, bound);
}

}  // namespace

void ModelConfig::validate() const {
  require(history_steps >= 1 && forecast_steps >= 1, Errc::bad_config,
          "history and forecast steps must be >= 1");
  require(input_dim >= 1 && enc_hidden >= 1 && dec_hidden >= 1, Errc::bad_config,
          "model dimensions must be >= 1");
}

GruView encoder_view(const ParamVector& p) {
  return gru_cview(p.values, p.layout.encoder_offset(), p.layout.enc_hidden, p.layout.input_dim);
}

GruView decoder_view(const ParamVector& p) {
  return gru_cview(p.values, p.layout.decoder_offset(), p.layout.dec_hidden, 1);
}

Eigen::Map<const Mat> bridge_view(const ParamVector& p) {
  return cmat(p.values, p.layout.bridge_offset(), p.layout.dec_hidden, p.layout.enc_hidden);
}

Eigen::Map<const Eigen::RowVectorXd> head_view(const ParamVector& p) {
  return Eigen::Map<const Eigen::RowVectorXd>(p.values.data() + p.layout.head_offset(),
                                              p.layout.head_size());
}

ParamVector pack(const ModelParams& parts) {
  const int in = static_cast<int>(parts.encoder.w_z.cols());
  const int de = static_cast<int>(parts.encoder.w_z.rows());
  const int dd = static_cast<int>(parts.decoder.w_z.rows());
  ParamLayout layout{in, de, dd};

  auto check_gru = [](const GruParams& g, int d, int input, const char* which) {
    auto ok = [&](const Mat& m, int r, int c) {
      return m.rows() == r && m.cols() == c && m.allFinite();
    };
    require(ok(g.w_z, d, input) && ok(g.w_r, d, input) && ok(g.w_h, d, input) &&
                ok(g.u_z, d, d) && ok(g.u_r, d, d) && ok(g.u_h, d, d),
            Errc::shape_mismatch, std::string(which) + " GRU matrices have inconsistent shapes");
  };
  check_gru(parts.encoder, de, in, "encoder");
  check_gru(parts.decoder, dd, 1, "decoder");
  require(parts.bridge.rows() == dd && parts.bridge.cols() == de, Errc::shape_mismatch,
          "bridge must be dec_hidden x enc_hidden");
  require(parts.head.size() == dd, Errc::shape_mismatch, "head must be 1 x dec_hidden");

  ParamVector p = ParamVector::zeros(layout);
  auto enc = gru_mview(p.values, layout.encoder_offset(), de, in);
  enc.w_z = parts.encoder.w_z;
  enc.w_r = parts.encoder.w_r;
  enc.w_h = parts.encoder.w_h;
  enc.u_z = parts.encoder.u_z;
  enc.u_r = parts.encoder.u_r;
  enc.u_h = parts.encoder.u_h;
  mmat(p.values, layout.bridge_offset(), dd, de) = parts.bridge;
  auto dec = gru_mview(p.values, layout.decoder_offset(), dd, 1);
  dec.w_z = parts.decoder.w_z;
  dec.w_r = parts.decoder.w_r;
  dec.w_h = parts.decoder.w_h;
  dec.u_z = parts.decoder.u_z;
  dec.u_r = parts.decoder.u_r;
  dec.u_h = parts.decoder.u_h;
  Eigen::Map<Eigen::RowVectorXd>(p.values.data() + layout.head_offset(), dd) = parts.head;
  return p;
}

ModelParams unpack(const ParamVector& flat) {
  require(flat.values.size() == flat.layout.total(), Errc::layout_mismatch,
          "flat vector length does not match its layout");
  ModelParams parts;
  auto enc = encoder_view(flat);
  parts.encoder = GruParams{enc.w_z, enc.w_r, enc.w_h, enc.u_z, enc.u_r, enc.u_h};
  parts.bridge = bridge_view(flat);
  auto dec = decoder_view(flat);
  parts.decoder = GruParams{dec.w_z, dec.w_r, dec.w_h, dec.u_z, dec.u_r, dec.u_h};
  parts.head = head_view(flat);
  return parts;
}

ParamVector init_params(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  const ParamLayout layout = ParamLayout::from(cfg);
  ParamVector p = ParamVector::zeros(layout);
  UniformRng rng(mix_seed(seed, 0x70617261));

  const double enc_w_bound = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
  const double enc_u_bound = 1.0 / std::sqrt(static_cast<double>(cfg.enc_hidden));
  auto enc = gru_mview(p.values, layout.encoder_offset(), cfg.enc_hidden, cfg.input_dim);
  fill_uniform(enc.w_z, enc_w_bound, rng);
  fill_uniform(enc.w_r, enc_w_bound, rng);
  fill_uniform(enc.w_h, enc_w_bound, rng);
  fill_uniform(enc.u_z, enc_u_bound, rng);
  fill_uniform(enc.u_r, enc_u_bound, rng);
  fill_uniform(enc.u_h, enc_u_bound, rng);

  auto bridge = mmat(p.values, layout.bridge_offset(), cfg.dec_hidden, cfg.enc_hidden);
  if (cfg.enc_hidden == cfg.dec_hidden) {
    bridge.setIdentity();
  } else {
    fill_uniform(bridge, 1.0 / std::sqrt(static_cast<double>(cfg.enc_hidden)), rng);
  }

  const double dec_u_bound = 1.0 / std::sqrt(static_cast<double>(cfg.dec_hidden));
  auto dec = gru_mview(p.values, layout.decoder_offset(), cfg.dec_hidden, 1);
  fill_uniform(dec.w_z, 1.0, rng);
  fill_uniform(dec.w_r, 1.0, rng);
  fill_uniform(dec.w_h, 1.0, rng);
  fill_uniform(dec.u_z, dec_u_bound, rng);
  fill_uniform(dec.u_r, dec_u_bound, rng);
  fill_uniform(dec.u_h, dec_u_bound, rng);

  auto head = mmat(p.values, layout.head_offset(), 1, cfg.dec_hidden);
  fill_uniform(head, dec_u_bound, rng);
  return p;
}

Vec gru_step(const GruView& p, const Vec& x, const Vec& h_prev, GruStepCache* cache) {
  require(x.size() == p.w_z.cols(), Errc::shape_mismatch, "input width does not match weights");
  require(h_prev.size() == p.u_z.rows(), Errc::shape_mismatch,
          "hidden width does not match weights");
  Vec z = sigmoid(p.w_z * x + p.u_z * h_prev);
  Vec r = sigmoid(p.w_r * x + p.u_r * h_prev);
  Vec h_tilde = (p.w_h * x + p.u_h * r.cwiseProduct(h_prev)).array().tanh().matrix();
  Vec h = (Vec::Ones(z.size()) - z).cwiseProduct(h_prev) + z.cwiseProduct(h_tilde);
  if (cache) *cache = GruStepCache{x, h_prev, std::move(z), std::move(r), std::move(h_tilde), h};
  return h;
}

EncodeResult encode(const ParamVector& p, const Vec& x_hist) {
  require(p.layout.input_dim == 1, Errc::shape_mismatch, "encode expects scalar inputs");
  require(x_hist.size() >= 1, Errc::wrong_length, "history window is empty");
  EncodeResult out;
  out.caches.resize(static_cast<size_t>(x_hist.size()));
  Vec h = Vec::Zero(p.layout.enc_hidden);
  const GruView enc = encoder_view(p);
  Vec x(1);
  for (Eigen::Index d = 0; d < x_hist.size(); ++d) {
    x(0) = x_hist(d);
    h = gru_step(enc, x, h, &out.caches[static_cast<size_t>(d)]);
  }
  out.h = std::move(h);
  return out;
}

DecodeResult decode(const ParamVector& p, const Vec& h_prime, double x_last, int forecast_steps) {
  require(h_prime.size() == p.layout.enc_hidden, Errc::shape_mismatch,
          "decoder input hidden width must equal enc_hidden");
  require(forecast_steps >= 1, Errc::wrong_length, "forecast_steps must be >= 1");
  DecodeResult out;
  out.h0 = bridge_view(p) * h_prime;
  out.predictions.resize(forecast_steps);
  out.caches.resize(static_cast<size_t>(forecast_steps));
  const GruView dec = decoder_view(p);
  const auto head = head_view(p);
  Vec h = out.h0;
  Vec u(1);
  for (int k = 0; k < forecast_steps; ++k) {
    u(0) = k == 0 ? x_last : out.predictions(k - 1);
    h = gru_step(dec, u, h, &out.caches[static_cast<size_t>(k)]);
    out.predictions(k) = head * h;
  }
  return out;
}

std::pair<double, Vec> mse_loss(const Vec& predicted, const Vec& actual) {
  require(predicted.size() == actual.size(), Errc::length_mismatch,
          "prediction and truth lengths differ");
  require(predicted.size() >= 1, Errc::empty_input, "empty prediction");
  const double n = static_cast<double>(predicted.size());
  const Vec diff = predicted - actual;
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

ForwardResult forward(const ParamVector& p, const Vec& x_hist, const DecodeRoute& route,
                      int forecast_steps) {
  return forward_from_encode(p, encode(p, x_hist), x_hist, route, forecast_steps);
}

ForwardResult forward_from_encode(const ParamVector& p, EncodeResult enc, const Vec& x_hist,
                                  const DecodeRoute& route, int forecast_steps) {
  ForwardResult out;
  out.route = route.kind;
  out.alpha_self = route.alpha_self;
  out.x_last = x_hist(x_hist.size() - 1);
  out.enc = std::move(enc);
  switch (route.kind) {
    case DecodeRoute::Kind::direct:
      out.h_prime = out.enc.h;
      out.alpha_self = 1.0;
      break;
    case DecodeRoute::Kind::self_path:
      require(route.offset.size() == out.enc.h.size(), Errc::shape_mismatch,
              "frozen neighbor offset width must equal enc_hidden");
      out.h_prime = sigmoid(route.alpha_self * out.enc.h + route.offset);
      break;
    case DecodeRoute::Kind::cached:
      require(route.h_prime.size() == out.enc.h.size(), Errc::shape_mismatch,
              "served hidden state width must equal enc_hidden");
      out.h_prime = route.h_prime;
      break;
  }
  out.dec = decode(p, out.h_prime, out.x_last, forecast_steps);
  return out;
}

GradientVector backward(const ParamVector& p, const ForwardResult& fwd, const Vec& dloss_dpred) {
  const int de = p.layout.enc_hidden;
  const int dd = p.layout.dec_hidden;
  const auto fsteps = static_cast<Eigen::Index>(fwd.dec.caches.size());
  require(dloss_dpred.size() == fsteps, Errc::cache_mismatch,
          "loss gradient length does not match the decoded horizon");
  require(!fwd.enc.caches.empty() && fwd.enc.caches.front().h_prev.size() == de &&
              fwd.dec.caches.front().h_prev.size() == dd && fwd.h_prime.size() == de,
          Errc::cache_mismatch, "forward caches do not match the parameter layout");

  GradientVector g = ParamVector::zeros(p.layout);
  const GruView dec = decoder_view(p);
  const GruView enc = encoder_view(p);
  const auto head = head_view(p);
  auto g_dec = gru_mview(g.values, p.layout.decoder_offset(), dd, 1);
  auto g_enc = gru_mview(g.values, p.layout.encoder_offset(), de, p.layout.input_dim);
  auto g_bridge = mmat(g.values, p.layout.bridge_offset(), dd, de);
  auto g_head = Eigen::Map<Eigen::RowVectorXd>(g.values.data() + p.layout.head_offset(), dd);

  // Decoder through time; each step's input gradient feeds the previous
  // step's prediction.
  Vec dh_rec = Vec::Zero(dd);
  double dx_carry = 0.0;
  for (Eigen::Index k = fsteps - 1; k >= 0; --k) {
    const auto& cache = fwd.dec.caches[static_cast<size_t>(k)];
    const double dy = dloss_dpred(k) + (k < fsteps - 1 ? dx_carry : 0.0);
    g_head.noalias() += dy * cache.h_new.transpose();
    Vec dh = head.transpose() * dy + dh_rec;
    auto [dh_prev, dx] = gru_backward(dec, cache, dh, g_dec);
    dh_rec = std::move(dh_prev);
    dx_carry = dx(0);
  }

  // Bridge and the path back into the encoder output.
  g_bridge.noalias() += dh_rec * fwd.h_prime.transpose();
  const Vec dh_prime = bridge_view(p).transpose() * dh_rec;
  Vec dh_enc;
  if (fwd.route == DecodeRoute::Kind::direct) {
    dh_enc = dh_prime;
  } else {
    dh_enc = fwd.alpha_self *
             fwd.h_prime.cwiseProduct(Vec::Ones(de) - fwd.h_prime).cwiseProduct(dh_prime);
  }

  // Encoder through time.
  Vec dh = std::move(dh_enc);
  for (auto it = fwd.enc.caches.rbegin(); it != fwd.enc.caches.rend(); ++it) {
    auto [dh_prev, dx] = gru_backward(enc, *it, dh, g_enc);
    dh = std::move(dh_prev);
  }
  return g;
}

GradCheckReport finite_diff_check(const ParamVector& p, const Vec& x_hist, const Vec& target,
                                  const DecodeRoute& route, double epsilon) {
  require(epsilon > 0.0, Errc::zero_epsilon, "epsilon must be positive");
  require(route.kind != DecodeRoute::Kind::cached, Errc::cache_mismatch,
          "a cached hidden state is constant under perturbation; use self_path");
  const int fsteps = static_cast<int>(target.size());

  ForwardResult fwd = forward(p, x_hist, route, fsteps);
  auto [loss, dloss] = mse_loss(fwd.dec.predictions, target);
  (void)loss;
  const GradientVector g = backward(p, fwd, dloss);

  ParamVector probe = p;
  auto loss_at = [&]() {
    ForwardResult f = forward(probe, x_hist, route, fsteps);
    return mse_loss(f.dec.predictions, target).first;
  };

  GradCheckReport report;
  const ParamLayout& L = p.layout;
  for (int i = 0; i < L.total(); ++i) {
    const double saved = probe.values(i);
    probe.values(i) = saved + epsilon;
    const double lp = loss_at();
    probe.values(i) = saved - epsilon;
    const double lm = loss_at();
    probe.values(i) = saved;
    const double fd = (lp - lm) / (2.0 * epsilon);
    const double rel = std::abs(g.values(i) - fd) / std::max(1.0, std::abs(fd));
    report.max_rel_error = std::max(report.max_rel_error, rel);
    if (i < L.bridge_offset())
      report.encoder = std::max(report.encoder, rel);
    else if (i < L.decoder_offset())
      report.bridge = std::max(report.bridge, rel);
    else if (i < L.head_offset())
      report.decoder = std::max(report.decoder, rel);
    else
      report.head = std::max(report.head, rel);
  }
  return report;
}

}  // namespace fedostc
