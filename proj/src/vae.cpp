#include "rtbust/vae.hpp"

#include <algorithm>
#include <sstream>

namespace rtbust {

namespace {

struct Sample {
  const FixedVector* vec;
  const std::string* id;
};

VaeBatch<double> make_batch(const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& idx,
                            std::size_t first, std::size_t count) {
  // columns sorted by (length desc, id asc) so per-step active columns
  // form a prefix
  std::vector<std::size_t> order(idx.begin() + static_cast<std::ptrdiff_t>(first),
                                 idx.begin() + static_cast<std::ptrdiff_t>(first + count));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (samples[a].vec->true_len != samples[b].vec->true_len)
      return samples[a].vec->true_len > samples[b].vec->true_len;
    return *samples[a].id < *samples[b].id;
  });

  VaeBatch<double> batch;
  const Eigen::Index tmax = samples[order.front()].vec->true_len;
  batch.x = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(tmax, 1),
                                  static_cast<Eigen::Index>(count));
  batch.lengths.resize(count);
  for (std::size_t c = 0; c < count; ++c) {
    const FixedVector& fv = *samples[order[c]].vec;
    batch.lengths[c] = fv.true_len;
    batch.x.col(static_cast<Eigen::Index>(c)).head(fv.true_len) =
        fv.values.head(fv.true_len);
  }
  return batch;
}

std::string trace_to_string(const std::vector<VaeLossParts<double>>& trace) {
  std::ostringstream os;
  for (std::size_t e = 0; e < trace.size(); ++e)
    os << "epoch " << e << " total=" << trace[e].total
       << " rec=" << trace[e].reconstruction << " kl=" << trace[e].kl << "\n";
  return os.str();
}

}  // namespace

VaeTrainResult vae_train(const VaeConfig& config, const FixedVectorMap& corpus,
                         const CorpusStats& stats) {
  config.validate();
  if (corpus.size() < static_cast<std::size_t>(config.batch_size))
    throw ConfigError("vae_train: corpus smaller than one batch");

  std::vector<Sample> samples;
  samples.reserve(corpus.size());
  for (const auto& [id, fv] : corpus) {
    if (fv.true_len < 1)
      throw DataError("vae_train: all-padding sequence for user " + id);
    samples.push_back({&fv, &id});
  }
  const std::size_t n = samples.size();

  VaeTrainResult result;
  result.model = VaeModel(config);
  result.model.stats = stats;
  Rng rng(config.seed);
  result.model.init_params(rng);

  Eigen::VectorXd m = Eigen::VectorXd::Zero(result.model.layout.total);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(result.model.layout.total);
  Eigen::VectorXd grad;
  const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
  std::int64_t step = 0;

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // seeded Fisher-Yates
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(idx[i], idx[j]);
    }

    VaeLossParts<double> epoch_parts;
    for (std::size_t first = 0; first < n;
         first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min(static_cast<std::size_t>(config.batch_size), n - first);
      VaeBatch<double> batch = make_batch(samples, idx, first, count);

      Eigen::MatrixXd eps(config.latent_dim,
                          static_cast<Eigen::Index>(count));
      for (Eigen::Index b = 0; b < eps.cols(); ++b)
        for (Eigen::Index i = 0; i < eps.rows(); ++i) eps(i, b) = rng.normal();

      const VaeLossParts<double> parts =
          vae_forward_backward(result.model, batch, eps, grad);
      if (!parts.finite() || parts.total > 1e6) {
        result.epoch_trace.push_back(epoch_parts);
        throw NumericError("vae_train: training diverged at epoch " +
                           std::to_string(epoch) + " (total=" +
                           std::to_string(parts.total) + ")\n" +
                           trace_to_string(result.epoch_trace));
      }
      const double w = static_cast<double>(count) / static_cast<double>(n);
      epoch_parts.total += parts.total * w;
      epoch_parts.reconstruction += parts.reconstruction * w;
      epoch_parts.kl += parts.kl * w;

      const double gnorm = grad.norm();
      if (gnorm > config.clip_norm) grad *= config.clip_norm / gnorm;
      ++step;
      m = b1 * m + (1.0 - b1) * grad;
      v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
      const double mc = 1.0 - std::pow(b1, static_cast<double>(step));
      const double vc = 1.0 - std::pow(b2, static_cast<double>(step));
      result.model.theta -=
          (config.learning_rate / mc) *
          (m.array() / ((v.array() / vc).sqrt() + adam_eps)).matrix();
    }
    result.epoch_trace.push_back(epoch_parts);
  }
  return result;
}

std::map<std::string, Eigen::VectorXd> extract_latents(
    const VaeModel& model, const FixedVectorMap& corpus,
    std::vector<std::string>* warnings) {
  std::map<std::string, Eigen::VectorXd> out;
  for (const auto& [id, fv] : corpus) {
    if (fv.true_len < 1) {
      if (warnings != nullptr)
        warnings->push_back("skipped user with empty sequence: " + id);
      continue;
    }
    out.emplace(id, vae_encode(model, fv.values, fv.true_len).first);
  }
  return out;
}

}  // namespace rtbust
