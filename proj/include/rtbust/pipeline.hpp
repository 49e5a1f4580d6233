#pragma once

#include <cstdint>
#include <string>

#include "rtbust/cluster.hpp"
#include "rtbust/detect.hpp"
#include "rtbust/events.hpp"
#include "rtbust/vae.hpp"

namespace rtbust {

/// Everything `run` needs; every default is either a documented module
/// default or a declared decision. window.t_ref must be set explicitly.
struct PipelineConfig {
  std::string events_path;
  std::string truth_path;  // optional; enables the eval stage
  std::string out_dir = ".";

  AnalysisWindow window{0, kDefaultWindowSeconds};
  bool window_set = false;
  double min_rate = kDefaultMinRate;
  double max_rate = kDefaultMaxRate;
  bool strict_parse = false;

  std::string extractor = "vae";  // vae | pca | tica | handcrafted
  int latent_dim = 8;
  int seq_len = kDefaultSeqLen;
  int tica_lag = 1;

  ClusterParams cluster;
  VaeConfig vae;  // latent_dim/max_seq_len/seed are overridden from above
  std::uint64_t seed = 0;

  void validate() const;
};

struct PipelineResult {
  std::size_t parsed_events = 0;
  std::size_t malformed_lines = 0;
  std::size_t users_total = 0;
  std::size_t users_kept = 0;
  std::size_t truth_dropped = 0;  // truth rows for unanalyzed accounts
  MetricsReport metrics;
  bool have_metrics = false;
  std::string labels_path;
  std::string report_path;
};

/// ingest -> rle -> vectorize -> extractor -> cluster -> detect -> eval.
/// Each stage writes its artifact under out_dir; trace.log records seed,
/// stage record counts and timings. Artifacts of a failed stage keep the
/// .partial suffix.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace rtbust
