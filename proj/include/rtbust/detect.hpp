#pragma once

#include <map>
#include <string>
#include <vector>

#include "rtbust/cluster.hpp"
#include "rtbust/events.hpp"

namespace rtbust {

enum class Label { human, bot };
enum class Provenance { clustered, noise, baseline };

inline const char* to_string(Label l) { return l == Label::bot ? "bot" : "human"; }
inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::clustered: return "clustered";
    case Provenance::noise: return "noise";
    default: return "baseline";
  }
}

struct Detection {
  Label label = Label::human;
  Provenance provenance = Provenance::noise;
};

/// Bot/human decision per analyzed account.
using DetectionResult = std::map<std::string, Detection>;

using TruthMap = std::map<std::string, Label>;

/// Clustered accounts are bots; noise accounts are humans.
DetectionResult label_from_clusters(const ClusterLabeling& labeling,
                                    const std::vector<std::string>& user_ids);

/// Baseline: bot iff the account's retweet rate strictly exceeds the third
/// quartile (linear-interpolation quantile) of all rates. Needs >= 4 users.
DetectionResult baseline_retweet_rate(const SeriesMap& series);
DetectionResult baseline_from_rates(const std::map<std::string, double>& rates);

/// Linear-interpolation quantile (the common "type 7" rule), q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Confusion counts and the five derived metrics, bot = positive class.
/// Metrics with a zero denominator are reported as 0 and named in
/// degenerate_metrics.
struct MetricsReport {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0, recall = 0, accuracy = 0, f1 = 0, mcc = 0;
  std::vector<std::string> degenerate_metrics;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// Requires pred and truth to cover exactly the same accounts.
MetricsReport compute_metrics(const DetectionResult& pred,
                              const TruthMap& truth);

}  // namespace rtbust
