#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "rtbust/detect.hpp"
#include "rtbust/events.hpp"
#include "rtbust/linproj.hpp"
#include "rtbust/rle.hpp"
#include "rtbust/vae.hpp"

namespace rtbust {

using LatentMap = std::map<std::string, Eigen::VectorXd>;

/// Writes content to path + ".partial", then renames onto path, so an
/// aborted stage leaves only the marked partial file behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// events: one tab-separated record per line
// (user_id, retweet_id, retweet_ts, source_tweet_id, source_ts)
std::string format_events_tsv(const std::vector<RetweetEvent>& events);
std::vector<RetweetEvent> read_events_file(const std::string& path,
                                           ParseStats& stats,
                                           bool strict = false);

// truth: "user_id,label" header then one row per account
std::string format_truth_csv(const TruthMap& truth);
TruthMap read_truth_file(const std::string& path);

// series: one user per line, user_id then RLE values, space separated
std::string format_series(const RleMap& series);
RleMap read_series_file(const std::string& path);

// latents: headerless rows of user_id followed by d values
std::string format_latents_csv(const LatentMap& latents);
LatentMap read_latents_file(const std::string& path);

// clusters: headerless rows user_id,cluster_id,stability (-1 = noise)
std::string format_clusters_csv(const std::vector<std::string>& user_ids,
                                const ClusterLabeling& labeling);
std::map<std::string, int> read_clusters_file(const std::string& path);

// labels: headerless rows user_id,label,provenance
std::string format_labels_csv(const DetectionResult& result);
DetectionResult read_labels_file(const std::string& path);

// report: flat JSON object with the 4 counts and 5 metrics
std::string format_report_json(const MetricsReport& report);

// model files: a one-line magic header followed by named tensor blocks of
// base-10 floats; save-load-save is byte identical
void save_vae_model(const std::string& path, const VaeModel& model);
VaeModel load_vae_model(const std::string& path);

void save_projector(const std::string& path, const LinearProjector& proj);
LinearProjector load_projector(const std::string& path);

}  // namespace rtbust
