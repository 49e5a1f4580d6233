#include <doctest.h>

#include <cmath>

#include "rtbust/rle.hpp"
#include "rtbust/synth.hpp"
#include "rtbust/vae.hpp"

using namespace rtbust;

namespace {

VaeBatch<double> micro_batch(Rng& rng, int n_seqs, int max_len) {
  VaeBatch<double> batch;
  std::vector<Eigen::Index> lens;
  for (int i = 0; i < n_seqs; ++i)
    lens.push_back(rng.uniform_int(2, max_len));
  std::sort(lens.begin(), lens.end(), std::greater<>());
  batch.lengths = lens;
  batch.x = Eigen::MatrixXd::Zero(lens.front(), n_seqs);
  for (int b = 0; b < n_seqs; ++b)
    for (Eigen::Index t = 0; t < lens[static_cast<std::size_t>(b)]; ++t)
      batch.x(t, b) = rng.uniform(-2.0, 2.0);
  return batch;
}

}  // namespace

TEST_CASE("vae gradient matches central finite differences") {
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 4;
  cfg.max_seq_len = 12;
  cfg.seed = 7;

  VaeModel model(cfg);
  Rng rng(42);
  model.init_params(rng);
  VaeBatch<double> batch = micro_batch(rng, 3, 12);
  Eigen::MatrixXd eps(cfg.latent_dim, 3);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < cfg.latent_dim; ++i) eps(i, b) = rng.normal();

  Eigen::VectorXd grad;
  vae_forward_backward(model, batch, eps, grad);

  const double fd_step = 1e-5;
  double worst = 0;
  int worst_idx = -1;
  for (Eigen::Index p = 0; p < model.theta.size(); ++p) {
    VaeModel perturbed = model;
    perturbed.theta[p] += fd_step;
    const double up = vae_forward_loss(perturbed, batch, eps).total;
    perturbed.theta[p] -= 2 * fd_step;
    const double dn = vae_forward_loss(perturbed, batch, eps).total;
    const double numeric = (up - dn) / (2 * fd_step);
    const double rel = std::abs(grad[p] - numeric) /
                       std::max({1e-6, std::abs(grad[p]), std::abs(numeric)});
    if (rel > worst) {
      worst = rel;
      worst_idx = static_cast<int>(p);
    }
  }
  INFO("worst parameter index ", worst_idx);
  CHECK(worst <= 1e-4);
}

TEST_CASE("kl term closed-form values") {
  // mu = 0, logvar = 0 -> kl = 0; mu = [1,0], logvar = 0 -> kl = 0.5
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 4;
  VaeModel model(cfg);  // zero parameters: mu = logvar = 0 for any input

  VaeBatch<double> batch;
  batch.x = Eigen::MatrixXd::Zero(3, 1);
  batch.x.col(0) << 0.5, -0.5, 1.0;
  batch.lengths = {3};
  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(2, 1);

  const auto parts = vae_forward_loss(model, batch, eps);
  CHECK(parts.kl == doctest::Approx(0.0).epsilon(1e-9));

  // shift b_mu to [1, 0]
  model.tensor(VaeTensor::b_mu)(0, 0) = 1.0;
  const auto parts2 = vae_forward_loss(model, batch, eps);
  CHECK(parts2.kl == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("zero model encodes any input to zero mean") {
  VaeConfig cfg;
  cfg.latent_dim = 3;
  cfg.lstm_hidden = 5;
  VaeModel model(cfg);
  Eigen::VectorXd x(6);
  x << 1, -1, 2, 0.5, 0, 3;
  const auto [mu, lv] = vae_encode(model, x, 6);
  CHECK(mu.norm() == 0.0);
  CHECK(lv.norm() == 0.0);
}

TEST_CASE("encoding ignores padding") {
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 4;
  VaeModel model(cfg);
  Rng rng(5);
  model.init_params(rng);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
  for (int i = 0; i < 6; ++i) x[i] = rng.uniform(-1, 1);
  Eigen::VectorXd longer = Eigen::VectorXd::Zero(14);
  longer.head(10) = x;

  const auto [mu1, lv1] = vae_encode(model, x, 6);
  const auto [mu2, lv2] = vae_encode(model, longer, 6);
  CHECK((mu1 - mu2).norm() == 0.0);

  CHECK_THROWS_AS(vae_encode(model, x, 0), DataError);
}

TEST_CASE("reparameterize closed forms and determinism") {
  Eigen::VectorXd mu(2), lv(2);
  mu << 0.3, -0.7;
  lv << -30.0, -30.0;  // sigma ~ 3e-7
  Rng rng(11);
  const Eigen::VectorXd z = reparameterize(mu, lv, rng);
  CHECK((z - mu).norm() < 1e-6);

  Rng r1(99), r2(99);
  mu.setZero();
  lv.setZero();
  const Eigen::VectorXd a = reparameterize(mu, lv, r1);
  const Eigen::VectorXd b = reparameterize(mu, lv, r2);
  CHECK(a == b);

  // Monte-Carlo mean of z for mu = 0, logvar = 0
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
  Rng r3(123);
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += reparameterize(mu, lv, r3);
  sum /= n;
  CHECK(std::abs(sum[0]) < 0.05);
  CHECK(std::abs(sum[1]) < 0.05);
}

TEST_CASE("perfect reconstruction leaves only the kl term") {
  // zero parameters and an all-zero target sequence: xhat = 0 exactly
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 4;
  cfg.kl_weight = 2.0;
  VaeModel model(cfg);
  VaeBatch<double> batch;
  batch.x = Eigen::MatrixXd::Zero(4, 2);
  batch.lengths = {4, 3};
  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(2, 2);
  const auto parts = vae_forward_loss(model, batch, eps);
  CHECK(parts.reconstruction == 0.0);
  CHECK(parts.total == doctest::Approx(2.0 * parts.kl));
}

TEST_CASE("vae_loss draws noise from the rng deterministically") {
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 4;
  VaeModel model(cfg);
  Rng init(1);
  model.init_params(init);
  VaeBatch<double> batch;
  batch.x = Eigen::MatrixXd::Constant(5, 2, 0.3);
  batch.lengths = {5, 4};
  Rng r1(9), r2(9);
  const auto a = vae_loss(model, batch, r1);
  const auto b = vae_loss(model, batch, r2);
  CHECK(a.total == b.total);
  CHECK(a.reconstruction == b.reconstruction);
  CHECK(a.kl == b.kl);
  CHECK(a.total == doctest::Approx(a.reconstruction + a.kl));
  CHECK(a.kl >= 0.0);
}

TEST_CASE("botnet members end up closer than the typical account pair") {
  // small corpus: 24 humans + one straight-line botnet of 12
  CorpusSpec spec = default_corpus_spec();
  spec.groups = {spec.groups[0], spec.groups[1]};
  spec.groups[0].count = 24;
  spec.groups[1].count = 12;
  const LabeledCorpus corpus = gen_corpus(spec, 321);
  const SeriesMap series =
      filter_users(build_user_series(corpus.events, spec.window));
  RleMap rles;
  for (const auto& [id, s] : series) rles.emplace(id, rle_encode(s));
  const CorpusStats stats = fit_corpus_stats(rles);
  const FixedVectorMap vectors = vectorize_all(rles, 96, stats);

  VaeConfig cfg;
  cfg.latent_dim = 4;
  cfg.lstm_hidden = 12;
  cfg.max_seq_len = 96;
  cfg.epochs = 6;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const VaeTrainResult trained = vae_train(cfg, vectors, stats);
  const auto latents = extract_latents(trained.model, vectors);

  std::vector<Eigen::VectorXd> bots, all;
  for (const auto& [id, v] : latents) {
    all.push_back(v);
    if (corpus.truth.at(id) == Label::bot) bots.push_back(v);
  }
  REQUIRE(bots.size() >= 2);
  std::vector<double> pairwise;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      pairwise.push_back((all[i] - all[j]).norm());
  std::nth_element(pairwise.begin(), pairwise.begin() + pairwise.size() / 2,
                   pairwise.end());
  const double median = pairwise[pairwise.size() / 2];
  CHECK((bots[0] - bots[1]).norm() < median);
}

TEST_CASE("training reduces loss and is seed-deterministic") {
  VaeConfig cfg;
  cfg.latent_dim = 2;
  cfg.lstm_hidden = 6;
  cfg.max_seq_len = 16;
  cfg.epochs = 8;
  cfg.batch_size = 8;
  cfg.seed = 3;

  // two sequence archetypes plus noise
  FixedVectorMap corpus;
  Rng rng(17);
  for (int i = 0; i < 24; ++i) {
    FixedVector fv;
    fv.values = Eigen::VectorXd::Zero(16);
    const int len = 8 + static_cast<int>(rng.uniform_int(0, 7));
    for (int t = 0; t < len; ++t) {
      const double base = (i % 2 == 0) ? std::sin(0.7 * t) : 0.3 * t - 1.0;
      fv.values[t] = base + 0.05 * rng.normal();
    }
    fv.true_len = len;
    char id[16];
    std::snprintf(id, sizeof id, "u%03d", i);
    corpus.emplace(id, std::move(fv));
  }

  const VaeTrainResult r1 = vae_train(cfg, corpus, CorpusStats{});
  CHECK(r1.epoch_trace.size() == 8);
  for (const auto& p : r1.epoch_trace) CHECK(p.finite());
  CHECK(r1.epoch_trace.back().total < r1.epoch_trace.front().total);

  const VaeTrainResult r2 = vae_train(cfg, corpus, CorpusStats{});
  CHECK(r1.model.theta == r2.model.theta);

  // repeated extraction is identical; latent count matches corpus size
  const auto lat1 = extract_latents(r1.model, corpus);
  const auto lat2 = extract_latents(r1.model, corpus);
  CHECK(lat1.size() == corpus.size());
  for (const auto& [id, v] : lat1) CHECK(v == lat2.at(id));
}
