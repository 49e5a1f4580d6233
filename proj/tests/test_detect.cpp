#include <doctest.h>

#include <cmath>
#include <random>

#include "rtbust/detect.hpp"
#include "rtbust/errors.hpp"

using namespace rtbust;

namespace {

DetectionResult pred_of(const std::vector<std::pair<std::string, Label>>& v) {
  DetectionResult out;
  for (const auto& [id, l] : v) out[id] = {l, Provenance::clustered};
  return out;
}

TruthMap truth_of(const std::vector<std::pair<std::string, Label>>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("cluster labels map to bot, noise to human") {
  ClusterLabeling lab;
  lab.labels = {kNoiseLabel, 0, 0, kNoiseLabel, 1};
  lab.n_clusters = 2;
  const auto det = label_from_clusters(lab, {"a", "b", "c", "d", "e"});
  CHECK(det.at("a").label == Label::human);
  CHECK(det.at("a").provenance == Provenance::noise);
  CHECK(det.at("b").label == Label::bot);
  CHECK(det.at("b").provenance == Provenance::clustered);
  CHECK(det.at("e").label == Label::bot);

  ClusterLabeling all_noise;
  all_noise.labels = {kNoiseLabel, kNoiseLabel};
  const auto det2 = label_from_clusters(all_noise, {"x", "y"});
  for (const auto& [id, d] : det2) CHECK(d.label == Label::human);
}

TEST_CASE("quantile interpolation and the baseline threshold") {
  std::vector<double> rates;
  for (int i = 1; i <= 100; ++i) rates.push_back(i);
  CHECK(quantile(rates, 0.75) == doctest::Approx(75.25));

  std::map<std::string, double> m;
  for (int i = 1; i <= 100; ++i)
    m["u" + std::string(3 - std::to_string(i).size(), '0') + std::to_string(i)] =
        i;
  const auto det = baseline_from_rates(m);
  int bots = 0;
  for (const auto& [id, d] : det)
    if (d.label == Label::bot) ++bots;
  CHECK(bots == 25);  // rates 76..100 strictly above 75.25
  CHECK(det.at("u076").label == Label::bot);
  CHECK(det.at("u075").label == Label::human);
  for (const auto& [id, d] : det) CHECK(d.provenance == Provenance::baseline);
}

TEST_CASE("baseline with equal rates labels nobody") {
  std::map<std::string, double> m{{"a", 5}, {"b", 5}, {"c", 5}, {"d", 5}};
  const auto det = baseline_from_rates(m);
  for (const auto& [id, d] : det) CHECK(d.label == Label::human);

  std::map<std::string, double> small{{"a", 1}, {"b", 2}, {"c", 3}};
  CHECK_THROWS_AS(baseline_from_rates(small), DataError);
}

TEST_CASE("perfect prediction scores ones") {
  const auto pred = pred_of({{"a", Label::bot}, {"b", Label::human}});
  const auto truth = truth_of({{"a", Label::bot}, {"b", Label::human}});
  const MetricsReport r = compute_metrics(pred, truth);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.mcc == 1.0);
  CHECK(r.degenerate_metrics.empty());
}

TEST_CASE("f1 reproduces the published precision/recall combination") {
  CHECK(f1_score(0.9304, 0.8146) == doctest::Approx(0.8687).epsilon(1e-3));
}

TEST_CASE("hand confusion matrix yields the five closed-form values") {
  DetectionResult pred;
  TruthMap truth;
  int id = 0;
  const auto add = [&](Label p, Label t, int count) {
    for (int i = 0; i < count; ++i) {
      const std::string u = "u" + std::to_string(id++);
      pred[u] = {p, Provenance::clustered};
      truth[u] = t;
    }
  };
  add(Label::bot, Label::bot, 3);    // tp
  add(Label::bot, Label::human, 1);  // fp
  add(Label::human, Label::bot, 2);  // fn
  add(Label::human, Label::human, 4);  // tn

  const MetricsReport r = compute_metrics(pred, truth);
  CHECK(r.tp == 3);
  CHECK(r.fp == 1);
  CHECK(r.fn == 2);
  CHECK(r.tn == 4);
  CHECK(r.precision == doctest::Approx(0.75).epsilon(1e-4));
  CHECK(r.recall == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(r.f1 == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(r.mcc == doctest::Approx(0.4082).epsilon(1e-4));

  // consistency to machine precision: f1 is the harmonic mean
  CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall /
                                (r.precision + r.recall)).epsilon(1e-12));
}

TEST_CASE("swapping prediction labels negates mcc") {
  DetectionResult pred;
  TruthMap truth;
  std::mt19937 g(9);
  for (int i = 0; i < 50; ++i) {
    const std::string u = "u" + std::to_string(i);
    pred[u] = {(g() % 3 != 0) ? Label::bot : Label::human,
               Provenance::clustered};
    truth[u] = (g() % 2 != 0) ? Label::bot : Label::human;
  }
  const MetricsReport r = compute_metrics(pred, truth);
  DetectionResult swapped;
  for (const auto& [id, d] : pred)
    swapped[id] = {d.label == Label::bot ? Label::human : Label::bot,
                   d.provenance};
  const MetricsReport s = compute_metrics(swapped, truth);
  CHECK(s.mcc == doctest::Approx(-r.mcc).epsilon(1e-12));
}

TEST_CASE("all-human prediction accuracy equals the human fraction") {
  DetectionResult pred;
  TruthMap truth;
  for (int i = 0; i < 40; ++i) {
    const std::string u = "u" + std::to_string(i);
    pred[u] = {Label::human, Provenance::noise};
    truth[u] = i < 15 ? Label::bot : Label::human;
  }
  const MetricsReport r = compute_metrics(pred, truth);
  CHECK(r.accuracy == doctest::Approx(25.0 / 40.0));
  CHECK(r.recall == 0.0);
  CHECK(r.precision == 0.0);
  // zero-denominator conventions are flagged
  CHECK(!r.degenerate_metrics.empty());
}

TEST_CASE("key mismatch is an error") {
  const auto pred = pred_of({{"a", Label::bot}});
  const auto truth = truth_of({{"b", Label::bot}});
  CHECK_THROWS_AS(compute_metrics(pred, truth), DataError);
  const auto truth2 = truth_of({{"a", Label::bot}, {"b", Label::human}});
  CHECK_THROWS_AS(compute_metrics(pred, truth2), DataError);
}
