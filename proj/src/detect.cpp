#include "rtbust/detect.hpp"

#include <algorithm>
#include <cmath>

#include "rtbust/errors.hpp"

namespace rtbust {

DetectionResult label_from_clusters(const ClusterLabeling& labeling,
                                    const std::vector<std::string>& user_ids) {
  if (labeling.labels.size() != user_ids.size())
    throw DataError("label_from_clusters: labeling/user id size mismatch");
  DetectionResult out;
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    const bool clustered = labeling.labels[i] != kNoiseLabel;
    out[user_ids[i]] = {clustered ? Label::bot : Label::human,
                        clustered ? Provenance::clustered : Provenance::noise};
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile: empty input");
  if (q < 0 || q > 1) throw ConfigError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

DetectionResult baseline_from_rates(const std::map<std::string, double>& rates) {
  if (rates.size() < 4)
    throw DataError("baseline_retweet_rate: need at least 4 users");
  std::vector<double> values;
  values.reserve(rates.size());
  for (const auto& [id, r] : rates) values.push_back(r);
  const double q3 = quantile(values, 0.75);

  DetectionResult out;
  for (const auto& [id, r] : rates)
    out[id] = {r > q3 ? Label::bot : Label::human, Provenance::baseline};
  return out;
}

DetectionResult baseline_retweet_rate(const SeriesMap& series) {
  std::map<std::string, double> rates;
  for (const auto& [id, s] : series) rates.emplace(id, s.rate_per_day());
  return baseline_from_rates(rates);
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  if (denom <= 0) return 0;
  return 2.0 * precision * recall / denom;
}

MetricsReport compute_metrics(const DetectionResult& pred,
                              const TruthMap& truth) {
  if (pred.size() != truth.size())
    throw DataError("compute_metrics: prediction/truth key sets differ");
  MetricsReport r;
  auto it = truth.begin();
  for (const auto& [id, det] : pred) {
    if (it == truth.end() || it->first != id)
      throw DataError("compute_metrics: prediction/truth key sets differ");
    const bool pbot = det.label == Label::bot;
    const bool tbot = it->second == Label::bot;
    if (pbot && tbot) ++r.tp;
    else if (pbot && !tbot) ++r.fp;
    else if (!pbot && tbot) ++r.fn;
    else ++r.tn;
    ++it;
  }

  const auto ratio = [&r](double num, double den, const char* name) {
    if (den <= 0) {
      r.degenerate_metrics.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  const double tp = static_cast<double>(r.tp), fp = static_cast<double>(r.fp);
  const double fn = static_cast<double>(r.fn), tn = static_cast<double>(r.tn);
  r.precision = ratio(tp, tp + fp, "precision");
  r.recall = ratio(tp, tp + fn, "recall");
  r.accuracy = ratio(tp + tn, tp + fp + fn + tn, "accuracy");
  if (r.precision + r.recall <= 0) r.degenerate_metrics.emplace_back("f1");
  r.f1 = f1_score(r.precision, r.recall);
  const double mcc_den =
      std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  r.mcc = ratio(tp * tn - fp * fn, mcc_den, "mcc");
  return r;
}

}  // namespace rtbust
