#include "rtbust/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "rtbust/errors.hpp"
#include "rtbust/handcrafted.hpp"
#include "rtbust/io.hpp"
#include "rtbust/linproj.hpp"
#include "rtbust/rle.hpp"
#include "rtbust/vectorize.hpp"

namespace rtbust {

namespace {

using Clock = std::chrono::steady_clock;

struct Trace {
  std::ostringstream log;
  Clock::time_point stage_start = Clock::now();

  void stage(const std::string& name, std::size_t records) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        Clock::now() - stage_start)
                        .count();
    log << "stage=" << name << " records=" << records << " ms=" << ms << "\n";
    stage_start = Clock::now();
  }
};

/// Handcrafted features live on wildly different scales (bits, seconds,
/// counts); z-score each column before Euclidean clustering.
LatentMap handcrafted_latents(const SeriesMap& series) {
  LatentMap out;
  if (series.empty()) return out;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(series.size()), 12);
  std::vector<const std::string*> ids;
  Eigen::Index r = 0;
  for (const auto& [id, s] : series) {
    const auto f = extract_handcrafted(s).as_array();
    for (int c = 0; c < 12; ++c) m(r, c) = f[static_cast<std::size_t>(c)];
    ids.push_back(&id);
    ++r;
  }
  const Eigen::RowVectorXd mean = m.colwise().mean();
  Eigen::RowVectorXd sd =
      ((m.rowwise() - mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index c = 0; c < sd.size(); ++c)
    if (sd[c] < 1e-12) sd[c] = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::VectorXd v =
        ((m.row(i) - mean).array() / sd.array()).matrix().transpose();
    out.emplace(*ids[static_cast<std::size_t>(i)], std::move(v));
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (events_path.empty()) throw ConfigError("run: --input is required");
  if (!window_set)
    throw ConfigError("run: --window-start is required (no default t_ref)");
  if (window.duration_s <= 0) throw ConfigError("run: window must be positive");
  if (min_rate > max_rate) throw ConfigError("run: min-rate > max-rate");
  if (extractor != "vae" && extractor != "pca" && extractor != "tica" &&
      extractor != "handcrafted")
    throw ConfigError("run: unknown extractor '" + extractor + "'");
  if (latent_dim < 1) throw ConfigError("run: latent dim must be >= 1");
  if (seq_len < 1) throw ConfigError("run: seq len must be >= 1");
  if (tica_lag < 1) throw ConfigError("run: tica lag must be >= 1");
  cluster.validate();
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  if (!std::filesystem::exists(config.events_path))
    throw ConfigError("missing input path: " + config.events_path);
  std::filesystem::create_directories(config.out_dir);
  const auto artifact = [&](const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };

  PipelineResult result;
  Trace trace;
  trace.log << "rtbust run seed=" << config.seed
            << " extractor=" << config.extractor << " d=" << config.latent_dim
            << " L=" << config.seq_len
            << " min_cluster_size=" << config.cluster.min_cluster_size
            << " min_samples=" << config.cluster.min_samples << "\n";

  try {
    // ingest
    ParseStats stats;
    const auto events =
        read_events_file(config.events_path, stats, config.strict_parse);
    result.parsed_events = stats.parsed;
    result.malformed_lines = stats.malformed;
    trace.stage("parse", stats.parsed);

    auto series = build_user_series(events, config.window);
    result.users_total = series.size();
    series = filter_users(series, config.min_rate, config.max_rate);
    result.users_kept = series.size();
    trace.stage("filter", series.size());

    RleMap rles;
    for (const auto& [id, s] : series) rles.emplace(id, rle_encode(s));
    write_file_atomic(artifact("series.txt"), format_series(rles));
    trace.stage("rle", rles.size());

    // vectorize
    const CorpusStats cstats = fit_corpus_stats(rles);
    const FixedVectorMap vectors = vectorize_all(rles, config.seq_len, cstats);
    trace.stage("vectorize", vectors.size());

    // unsupervised feature extraction
    LatentMap latents;
    if (config.extractor == "vae") {
      VaeConfig vcfg = config.vae;
      vcfg.latent_dim = config.latent_dim;
      vcfg.max_seq_len = config.seq_len;
      vcfg.seed = config.seed;
      if (vectors.size() < static_cast<std::size_t>(vcfg.batch_size))
        vcfg.batch_size = std::max<int>(1, static_cast<int>(vectors.size()));
      const VaeTrainResult trained = vae_train(vcfg, vectors, cstats);
      save_vae_model(artifact("vae.model"), trained.model);
      for (std::size_t e = 0; e < trained.epoch_trace.size(); ++e)
        trace.log << "epoch=" << e << " total=" << trained.epoch_trace[e].total
                  << " rec=" << trained.epoch_trace[e].reconstruction
                  << " kl=" << trained.epoch_trace[e].kl << "\n";
      latents = extract_latents(trained.model, vectors);
    } else if (config.extractor == "pca" || config.extractor == "tica") {
      const Eigen::MatrixXd m = stack_rows(vectors);
      LinearProjector proj =
          config.extractor == "pca"
              ? pca_fit(m, config.latent_dim)
              : tica_fit(m, config.latent_dim, config.tica_lag);
      proj.stats = cstats;
      if (proj.rank_deficient)
        trace.log << "warning: rank-deficient covariance, basis padded\n";
      save_projector(artifact("projector.model"), proj);
      for (const auto& [id, fv] : vectors)
        latents.emplace(id, proj.transform(fv.values));
    } else {
      latents = handcrafted_latents(series);
    }
    write_file_atomic(artifact("latents.csv"), format_latents_csv(latents));
    trace.stage("extract:" + config.extractor, latents.size());

    // clustering
    std::vector<std::string> ids;
    ids.reserve(latents.size());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(latents.size()),
                        latents.empty() ? 0 : latents.begin()->second.size());
    Eigen::Index r = 0;
    for (const auto& [id, v] : latents) {
      ids.push_back(id);
      pts.row(r++) = v.transpose();
    }
    const ClusterLabeling labeling = hdbscan(pts, config.cluster);
    write_file_atomic(artifact("clusters.csv"),
                      format_clusters_csv(ids, labeling));
    trace.stage("cluster", static_cast<std::size_t>(labeling.n_clusters));

    // detection
    const DetectionResult detection = label_from_clusters(labeling, ids);
    result.labels_path = artifact("labels.csv");
    write_file_atomic(result.labels_path, format_labels_csv(detection));
    trace.stage("detect", detection.size());

    // evaluation
    if (!config.truth_path.empty()) {
      const TruthMap full_truth = read_truth_file(config.truth_path);
      TruthMap truth;
      for (const auto& [id, det] : detection) {
        const auto it = full_truth.find(id);
        if (it == full_truth.end())
          throw DataError("truth file lacks analyzed account " + id);
        truth.emplace(id, it->second);
      }
      result.truth_dropped = full_truth.size() - truth.size();
      if (result.truth_dropped > 0)
        trace.log << "eval: dropped " << result.truth_dropped
                  << " truth rows for accounts removed by the filter\n";
      result.metrics = compute_metrics(detection, truth);
      result.have_metrics = true;
      result.report_path = artifact("report.json");
      write_file_atomic(result.report_path, format_report_json(result.metrics));
      trace.stage("eval", truth.size());
    }
  } catch (const std::exception& e) {
    trace.log << "error: " << e.what() << "\n";
    try {
      write_file_atomic(artifact("trace.log"), trace.log.str());
    } catch (...) {
    }
    throw;
  }

  write_file_atomic(artifact("trace.log"), trace.log.str());
  return result;
}

}  // namespace rtbust
