#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rtbust/errors.hpp"
#include "rtbust/rng.hpp"
#include "rtbust/vectorize.hpp"

namespace rtbust {

struct VaeConfig {
  int latent_dim = 8;
  int lstm_hidden = 32;
  int max_seq_len = kDefaultSeqLen;
  int epochs = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double kl_weight = 1.0;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (latent_dim < 1 || lstm_hidden < 1 || max_seq_len < 1 || epochs < 1 ||
        batch_size < 1 || learning_rate <= 0 || kl_weight < 0 || clip_norm <= 0)
      throw ConfigError("vae: all configuration values must be positive");
    if (latent_dim > lstm_hidden)
      throw ConfigError("vae: latent_dim must not exceed lstm_hidden");
  }
};

/// Parameter tensors, in serialization order. The encoder LSTM stacks its
/// input, forget, candidate and output gates as four h-row blocks; the
/// decoder is an autonomous LSTM (no input term) whose initial hidden and
/// cell states are linear in the latent sample.
enum class VaeTensor : int {
  enc_wx, enc_wh, enc_b,
  w_mu, b_mu, w_logvar, b_logvar,
  w_h0, b_h0, w_c0, b_c0,
  dec_wh, dec_b, w_out, b_out,
  count_
};

constexpr int kVaeTensorCount = static_cast<int>(VaeTensor::count_);

struct VaeLayout {
  struct Block {
    const char* name;
    Eigen::Index offset, rows, cols;
  };
  std::array<Block, kVaeTensorCount> blocks{};
  Eigen::Index total = 0;

  static VaeLayout make(int d, int h) {
    VaeLayout l;
    const Eigen::Index D = d, H = h, G = 4 * static_cast<Eigen::Index>(h);
    const std::array<Block, kVaeTensorCount> shapes = {{
        {"enc_wx", 0, G, 1}, {"enc_wh", 0, G, H}, {"enc_b", 0, G, 1},
        {"w_mu", 0, D, H},   {"b_mu", 0, D, 1},
        {"w_logvar", 0, D, H}, {"b_logvar", 0, D, 1},
        {"w_h0", 0, H, D},   {"b_h0", 0, H, 1},
        {"w_c0", 0, H, D},   {"b_c0", 0, H, 1},
        {"dec_wh", 0, G, H}, {"dec_b", 0, G, 1},
        {"w_out", 0, 1, H},  {"b_out", 0, 1, 1},
    }};
    Eigen::Index off = 0;
    for (int i = 0; i < kVaeTensorCount; ++i) {
      l.blocks[static_cast<std::size_t>(i)] = shapes[static_cast<std::size_t>(i)];
      l.blocks[static_cast<std::size_t>(i)].offset = off;
      off += shapes[static_cast<std::size_t>(i)].rows *
             shapes[static_cast<std::size_t>(i)].cols;
    }
    l.total = off;
    return l;
  }

  const Block& at(VaeTensor t) const {
    return blocks[static_cast<std::size_t>(t)];
  }
};

template <typename Scalar>
struct VaeModelT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MapMat = Eigen::Map<Mat>;
  using CMapMat = Eigen::Map<const Mat>;

  VaeConfig config;
  CorpusStats stats;
  VaeLayout layout;
  Vec theta;

  VaeModelT() = default;
  explicit VaeModelT(const VaeConfig& cfg)
      : config(cfg), layout(VaeLayout::make(cfg.latent_dim, cfg.lstm_hidden)) {
    cfg.validate();
    theta = Vec::Zero(layout.total);
  }

  MapMat tensor(VaeTensor t) {
    const auto& b = layout.at(t);
    return MapMat(theta.data() + b.offset, b.rows, b.cols);
  }
  CMapMat tensor(VaeTensor t) const {
    const auto& b = layout.at(t);
    return CMapMat(theta.data() + b.offset, b.rows, b.cols);
  }

  /// Uniform weights; the scale keeps the untrained encoder sensitive to
  /// input differences over long sequences. Forget-gate biases start at 1
  /// so early training does not flush the cell state.
  void init_params(Rng& rng, double scale = 0.18) {
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      theta[i] = static_cast<Scalar>(rng.uniform(-scale, scale));
    const int h = config.lstm_hidden;
    tensor(VaeTensor::enc_b).block(h, 0, h, 1).setOnes();
    tensor(VaeTensor::dec_b).block(h, 0, h, 1).setOnes();
  }
};

using VaeModel = VaeModelT<double>;

template <typename Scalar>
struct VaeBatch {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat x;                               // Tmax-by-B, zero padded
  std::vector<Eigen::Index> lengths;   // per column, sorted non-increasing
};

template <typename Scalar>
struct VaeLossParts {
  Scalar total = 0, reconstruction = 0, kl = 0;
  bool finite() const {
    return std::isfinite(total) && std::isfinite(reconstruction) &&
           std::isfinite(kl);
  }
};

/// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) from the given rng.
inline Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu,
                                      const Eigen::VectorXd& logvar, Rng& rng) {
  if (mu.size() != logvar.size())
    throw ConfigError("reparameterize: size mismatch");
  Eigen::VectorXd z(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    z[i] = mu[i] + std::exp(0.5 * logvar[i]) * rng.normal();
  return z;
}

namespace vaedetail {

/// Number of active columns per step for length-sorted batches.
inline std::vector<Eigen::Index> active_counts(
    const std::vector<Eigen::Index>& lengths, Eigen::Index tmax) {
  std::vector<Eigen::Index> na(static_cast<std::size_t>(tmax), 0);
  for (Eigen::Index t = 0; t < tmax; ++t) {
    Eigen::Index c = 0;
    while (c < static_cast<Eigen::Index>(lengths.size()) && lengths[c] > t) ++c;
    na[static_cast<std::size_t>(t)] = c;
  }
  return na;
}

template <typename Scalar>
struct LstmTrace {
  using Mat = typename VaeModelT<Scalar>::Mat;
  std::vector<Mat> gates;  // [i; f; g; o] after nonlinearity, 4h-by-B per step
  std::vector<Mat> cell;   // c_t per step
  std::vector<Mat> tanh_c;
  std::vector<Mat> hidden;  // h_t per step; index 0 is the initial state
  std::vector<Mat> cell0;   // c_{t-1}; index 0 is the initial cell
};

}  // namespace vaedetail

/// Deterministic forward pass with the noise draw supplied explicitly so the
/// analytic gradient and the finite-difference oracle see identical losses.
template <typename Scalar>
VaeLossParts<Scalar> vae_forward_loss(
    const VaeModelT<Scalar>& model, const VaeBatch<Scalar>& batch,
    const typename VaeModelT<Scalar>::Mat& eps,
    typename VaeModelT<Scalar>::Vec* grad_out = nullptr);

template <typename Scalar>
VaeLossParts<Scalar> vae_forward_backward(const VaeModelT<Scalar>& model,
                                          const VaeBatch<Scalar>& batch,
                                          const typename VaeModelT<Scalar>::Mat& eps,
                                          typename VaeModelT<Scalar>::Vec& grad) {
  return vae_forward_loss(model, batch, eps, &grad);
}

/// Spec-facing loss: draws the noise from rng (column by column), then
/// evaluates. Returns (total, reconstruction, kl).
template <typename Scalar>
VaeLossParts<Scalar> vae_loss(const VaeModelT<Scalar>& model,
                              const VaeBatch<Scalar>& batch, Rng& rng) {
  typename VaeModelT<Scalar>::Mat eps(model.config.latent_dim,
                                      static_cast<Eigen::Index>(batch.lengths.size()));
  for (Eigen::Index b = 0; b < eps.cols(); ++b)
    for (Eigen::Index i = 0; i < eps.rows(); ++i)
      eps(i, b) = static_cast<Scalar>(rng.normal());
  VaeLossParts<Scalar> parts = vae_forward_loss(model, batch, eps);
  if (!parts.finite())
    throw NumericError("vae_loss: non-finite loss");
  return parts;
}

/// Encoder only: runs the LSTM over the non-padded steps and returns
/// (mu, logvar). An all-padding input is an error.
template <typename Scalar>
std::pair<typename VaeModelT<Scalar>::Vec, typename VaeModelT<Scalar>::Vec>
vae_encode(const VaeModelT<Scalar>& model,
           const typename VaeModelT<Scalar>::Vec& values, Eigen::Index true_len);

struct VaeTrainResult {
  VaeModel model;
  std::vector<VaeLossParts<double>> epoch_trace;
};

/// Backpropagation through time with adaptive moment estimation
/// (beta1 = 0.9, beta2 = 0.999, eps = 1e-8), global gradient-norm clipping,
/// seeded batch shuffling. Deterministic given config.seed.
VaeTrainResult vae_train(const VaeConfig& config, const FixedVectorMap& corpus,
                         const CorpusStats& stats);

/// Latent mean per user; no sampling at inference. Users with an empty
/// (all-padding) sequence are skipped and reported in warnings.
std::map<std::string, Eigen::VectorXd> extract_latents(
    const VaeModel& model, const FixedVectorMap& corpus,
    std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// implementation

template <typename Scalar>
VaeLossParts<Scalar> vae_forward_loss(
    const VaeModelT<Scalar>& model, const VaeBatch<Scalar>& batch,
    const typename VaeModelT<Scalar>::Mat& eps,
    typename VaeModelT<Scalar>::Vec* grad_out) {
  using Mat = typename VaeModelT<Scalar>::Mat;
  using Vec = typename VaeModelT<Scalar>::Vec;

  const int h = model.config.lstm_hidden;
  const int d = model.config.latent_dim;
  const auto B = static_cast<Eigen::Index>(batch.lengths.size());
  if (B == 0) throw ConfigError("vae: empty batch");
  const Eigen::Index tmax = batch.lengths.front();
  for (std::size_t i = 1; i < batch.lengths.size(); ++i)
    if (batch.lengths[i] > batch.lengths[i - 1])
      throw ConfigError("vae: batch not sorted by length");
  if (batch.lengths.back() < 1)
    throw ConfigError("vae: all-padding sequence in batch");
  if (batch.x.rows() < tmax || batch.x.cols() != B)
    throw ConfigError("vae: batch shape mismatch");
  if (eps.rows() != d || eps.cols() != B)
    throw ConfigError("vae: noise shape mismatch");

  const auto na = vaedetail::active_counts(batch.lengths, tmax);
  const auto enc_wx = model.tensor(VaeTensor::enc_wx);
  const auto enc_wh = model.tensor(VaeTensor::enc_wh);
  const auto enc_b = model.tensor(VaeTensor::enc_b);
  const auto w_mu = model.tensor(VaeTensor::w_mu);
  const auto b_mu = model.tensor(VaeTensor::b_mu);
  const auto w_lv = model.tensor(VaeTensor::w_logvar);
  const auto b_lv = model.tensor(VaeTensor::b_logvar);
  const auto w_h0 = model.tensor(VaeTensor::w_h0);
  const auto b_h0 = model.tensor(VaeTensor::b_h0);
  const auto w_c0 = model.tensor(VaeTensor::w_c0);
  const auto b_c0 = model.tensor(VaeTensor::b_c0);
  const auto dec_wh = model.tensor(VaeTensor::dec_wh);
  const auto dec_b = model.tensor(VaeTensor::dec_b);
  const auto w_out = model.tensor(VaeTensor::w_out);
  const auto b_out = model.tensor(VaeTensor::b_out);

  const bool want_grad = grad_out != nullptr;
  vaedetail::LstmTrace<Scalar> enc, dec;
  auto run_cell = [&](vaedetail::LstmTrace<Scalar>& tr, const Mat* wx,
                      const Eigen::Map<const Mat>& wh,
                      const Eigen::Map<const Mat>& bias, const Mat* input,
                      Eigen::Index t, Mat& hbuf, Mat& cbuf) {
    const Eigen::Index cols = na[static_cast<std::size_t>(t)];
    Mat a = wh * hbuf.leftCols(cols);
    if (wx != nullptr && input != nullptr)
      a.noalias() += (*wx) * input->row(t).head(cols);
    a.colwise() += bias.col(0);
    Mat gates(4 * h, cols);
    gates.topRows(3 * h) =
        (Scalar(1) / (Scalar(1) + (-a.topRows(3 * h).array()).exp())).matrix();
    gates.middleRows(2 * h, h) = a.middleRows(2 * h, h).array().tanh().matrix();
    gates.bottomRows(h) =
        (Scalar(1) / (Scalar(1) + (-a.bottomRows(h).array()).exp())).matrix();
    // gate rows: [i; f; g; o] with g = tanh candidate
    if (want_grad) tr.cell0.push_back(cbuf);
    Mat cnew = gates.middleRows(h, h).cwiseProduct(cbuf.leftCols(cols)) +
               gates.topRows(h).cwiseProduct(gates.middleRows(2 * h, h));
    Mat tc = cnew.array().tanh().matrix();
    cbuf.leftCols(cols) = cnew;
    hbuf.leftCols(cols) = gates.bottomRows(h).cwiseProduct(tc);
    if (want_grad) {
      tr.gates.push_back(std::move(gates));
      tr.cell.push_back(cbuf);
      tr.tanh_c.push_back(std::move(tc));
      tr.hidden.push_back(hbuf);
    }
  };

  // encoder sweep
  Mat henc = Mat::Zero(h, B), cenc = Mat::Zero(h, B);
  if (want_grad) enc.hidden.push_back(henc);
  Mat enc_wx_m = enc_wx, x_m = batch.x;  // concrete copies for the lambda
  for (Eigen::Index t = 0; t < tmax; ++t)
    run_cell(enc, &enc_wx_m, enc_wh, enc_b, &x_m, t, henc, cenc);

  // heads; frozen columns already hold each sequence's final state
  Mat mu = (w_mu * henc).colwise() + b_mu.col(0);
  Mat lv = (w_lv * henc).colwise() + b_lv.col(0);
  Mat sigma = (lv.array() * Scalar(0.5)).exp().matrix();
  Mat z = mu + sigma.cwiseProduct(eps);

  // decoder sweep from the latent-conditioned initial state
  Mat hdec = (w_h0 * z).colwise() + b_h0.col(0);
  Mat cdec = (w_c0 * z).colwise() + b_c0.col(0);
  Mat hdec0 = hdec, cdec0 = cdec;
  if (want_grad) dec.hidden.push_back(hdec);
  std::vector<Mat> xhat(static_cast<std::size_t>(tmax));
  VaeLossParts<Scalar> parts;
  Vec colw(B);
  for (Eigen::Index b = 0; b < B; ++b)
    colw[b] = Scalar(1) / (static_cast<Scalar>(batch.lengths[static_cast<std::size_t>(b)]) *
                           static_cast<Scalar>(B));
  for (Eigen::Index t = 0; t < tmax; ++t) {
    run_cell(dec, nullptr, dec_wh, dec_b, nullptr, t, hdec, cdec);
    const Eigen::Index cols = na[static_cast<std::size_t>(t)];
    Mat yh = (w_out * hdec.leftCols(cols)).colwise() + b_out.col(0);
    Mat err = yh - batch.x.row(t).head(cols).matrix();
    for (Eigen::Index b = 0; b < cols; ++b)
      parts.reconstruction += err(0, b) * err(0, b) * colw[b];
    if (want_grad) xhat[static_cast<std::size_t>(t)] = std::move(err);
  }

  // KL(q || N(0, I)) averaged over the batch
  Scalar kl = 0;
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index i = 0; i < d; ++i)
      kl += Scalar(0.5) * (mu(i, b) * mu(i, b) + std::exp(lv(i, b)) -
                           lv(i, b) - Scalar(1));
  parts.kl = kl / static_cast<Scalar>(B);
  parts.total = parts.reconstruction +
                static_cast<Scalar>(model.config.kl_weight) * parts.kl;
  if (!want_grad) return parts;

  // ------------------------------------------------------------------ backward
  Vec& g = *grad_out;
  g = Vec::Zero(model.layout.total);
  VaeModelT<Scalar> gm;  // map the gradient vector with the same layout
  gm.config = model.config;
  gm.layout = model.layout;
  gm.theta.swap(g);
  auto gt = [&gm](VaeTensor t) { return gm.tensor(t); };

  const Scalar beta = static_cast<Scalar>(model.config.kl_weight);
  Mat dmu = (beta / static_cast<Scalar>(B)) * mu;
  Mat dlv = (beta / (Scalar(2) * static_cast<Scalar>(B))) *
            (lv.array().exp() - Scalar(1)).matrix();

  auto cell_backward = [&](vaedetail::LstmTrace<Scalar>& tr,
                           const Eigen::Map<const Mat>& wh, Mat* wx_grad,
                           Eigen::Map<Mat> wh_grad, Eigen::Map<Mat> b_grad,
                           const Mat* input, Eigen::Index t, Mat& dh, Mat& dc) {
    const Eigen::Index cols = na[static_cast<std::size_t>(t)];
    const auto& gates = tr.gates[static_cast<std::size_t>(t)];
    const auto& tc = tr.tanh_c[static_cast<std::size_t>(t)];
    const auto& cprev = tr.cell0[static_cast<std::size_t>(t)];
    const auto& hprev = tr.hidden[static_cast<std::size_t>(t)];
    const auto I = gates.topRows(h);
    const auto F = gates.middleRows(h, h);
    const auto G = gates.middleRows(2 * h, h);
    const auto O = gates.bottomRows(h);

    Mat dhc = dh.leftCols(cols);
    Mat dO = dhc.cwiseProduct(tc);
    dc.leftCols(cols) +=
        dhc.cwiseProduct(O).cwiseProduct(
            (Scalar(1) - tc.array().square()).matrix());
    Mat dcc = dc.leftCols(cols);
    Mat dI = dcc.cwiseProduct(G);
    Mat dG = dcc.cwiseProduct(I);
    Mat dF = dcc.cwiseProduct(cprev.leftCols(cols));
    dc.leftCols(cols) = dcc.cwiseProduct(F);

    Mat da(4 * h, cols);
    da.topRows(h) = dI.cwiseProduct(I).cwiseProduct((Scalar(1) - I.array()).matrix());
    da.middleRows(h, h) =
        dF.cwiseProduct(F).cwiseProduct((Scalar(1) - F.array()).matrix());
    da.middleRows(2 * h, h) =
        dG.cwiseProduct((Scalar(1) - G.array().square()).matrix());
    da.bottomRows(h) =
        dO.cwiseProduct(O).cwiseProduct((Scalar(1) - O.array()).matrix());

    if (wx_grad != nullptr && input != nullptr)
      wx_grad->noalias() += da * input->row(t).head(cols).transpose();
    wh_grad.noalias() += da * hprev.leftCols(cols).transpose();
    b_grad.col(0).noalias() += da.rowwise().sum();
    dh.leftCols(cols).noalias() = wh.transpose() * da;
  };

  // decoder backward
  Mat dh = Mat::Zero(h, B), dc = Mat::Zero(h, B);
  Mat w_out_m = w_out;
  Mat enc_wx_grad_local = Mat::Zero(4 * h, 1);
  for (Eigen::Index t = tmax; t-- > 0;) {
    const Eigen::Index cols = na[static_cast<std::size_t>(t)];
    Mat dyh(1, cols);
    for (Eigen::Index b = 0; b < cols; ++b)
      dyh(0, b) = Scalar(2) * xhat[static_cast<std::size_t>(t)](0, b) * colw[b];
    gt(VaeTensor::w_out).noalias() +=
        dyh * dec.hidden[static_cast<std::size_t>(t + 1)].leftCols(cols).transpose();
    gt(VaeTensor::b_out)(0, 0) += dyh.sum();
    dh.leftCols(cols).noalias() += w_out_m.transpose() * dyh;
    cell_backward(dec, dec_wh, nullptr, gt(VaeTensor::dec_wh),
                  gt(VaeTensor::dec_b), nullptr, t, dh, dc);
  }
  // gradients into the latent-conditioned initial state
  gt(VaeTensor::w_h0).noalias() += dh * z.transpose();
  gt(VaeTensor::b_h0).col(0).noalias() += dh.rowwise().sum();
  gt(VaeTensor::w_c0).noalias() += dc * z.transpose();
  gt(VaeTensor::b_c0).col(0).noalias() += dc.rowwise().sum();
  Mat dz = w_h0.transpose() * dh + w_c0.transpose() * dc;
  dmu += dz;
  dlv += (Scalar(0.5) * dz.cwiseProduct(eps).cwiseProduct(sigma).array()).matrix();

  // heads
  gt(VaeTensor::w_mu).noalias() += dmu * henc.transpose();
  gt(VaeTensor::b_mu).col(0).noalias() += dmu.rowwise().sum();
  gt(VaeTensor::w_logvar).noalias() += dlv * henc.transpose();
  gt(VaeTensor::b_logvar).col(0).noalias() += dlv.rowwise().sum();

  // encoder backward
  dh = w_mu.transpose() * dmu + w_lv.transpose() * dlv;
  dc.setZero();
  for (Eigen::Index t = tmax; t-- > 0;)
    cell_backward(enc, enc_wh, &enc_wx_grad_local, gt(VaeTensor::enc_wh),
                  gt(VaeTensor::enc_b), &x_m, t, dh, dc);
  gt(VaeTensor::enc_wx).noalias() += enc_wx_grad_local;

  gm.theta.swap(g);
  return parts;
}

template <typename Scalar>
std::pair<typename VaeModelT<Scalar>::Vec, typename VaeModelT<Scalar>::Vec>
vae_encode(const VaeModelT<Scalar>& model,
           const typename VaeModelT<Scalar>::Vec& values,
           Eigen::Index true_len) {
  using Vec = typename VaeModelT<Scalar>::Vec;
  if (true_len < 1) throw DataError("vae_encode: all-padding input");
  if (true_len > values.size())
    throw ConfigError("vae_encode: true_len exceeds input length");

  const int h = model.config.lstm_hidden;
  const auto enc_wx = model.tensor(VaeTensor::enc_wx);
  const auto enc_wh = model.tensor(VaeTensor::enc_wh);
  const auto enc_b = model.tensor(VaeTensor::enc_b);
  Vec hs = Vec::Zero(h), cs = Vec::Zero(h);
  for (Eigen::Index t = 0; t < true_len; ++t) {
    Vec a = enc_wx.col(0) * values[t] + enc_wh * hs + enc_b.col(0);
    Vec ig = (Scalar(1) / (Scalar(1) + (-a.head(h).array()).exp())).matrix();
    Vec fg = (Scalar(1) / (Scalar(1) + (-a.segment(h, h).array()).exp())).matrix();
    Vec gg = a.segment(2 * h, h).array().tanh().matrix();
    Vec og = (Scalar(1) / (Scalar(1) + (-a.tail(h).array()).exp())).matrix();
    cs = fg.cwiseProduct(cs) + ig.cwiseProduct(gg);
    hs = og.cwiseProduct(cs.array().tanh().matrix());
  }
  Vec mu = model.tensor(VaeTensor::w_mu) * hs +
           model.tensor(VaeTensor::b_mu).col(0);
  Vec lv = model.tensor(VaeTensor::w_logvar) * hs +
           model.tensor(VaeTensor::b_logvar).col(0);
  return {mu, lv};
}

}  // namespace rtbust
