#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <vector>

namespace rtbust {

constexpr int kNoiseLabel = -1;
constexpr double kLambdaCap = 1e12;  // lambda = 1/distance at distance 0

struct ClusterParams {
  int min_cluster_size = 11;
  int min_samples = 10;  // k for core distances

  void validate() const;
};

/// Per-point cluster assignment. Cluster ids are dense from 0; noise points
/// carry kNoiseLabel. stability maps cluster id to its excess-of-mass score.
struct ClusterLabeling {
  std::vector<int> labels;
  std::map<int, double> stability;
  int n_clusters = 0;
};

struct MstEdge {
  int a = 0;
  int b = 0;
  double weight = 0;
};

/// Distance to the k-th nearest neighbor (self excluded, ties by index).
/// Points are rows. Requires n > k.
Eigen::VectorXd core_distances(const Eigen::MatrixXd& points, int k);

/// Minimum spanning tree of the complete graph under the mutual reachability
/// distance max(core(a), core(b), d(a, b)). Prim, O(n^2), deterministic
/// tie-break by (weight, min index, max index).
std::vector<MstEdge> mreach_mst(const Eigen::MatrixXd& points,
                                const Eigen::VectorXd& cores);

/// Single-linkage hierarchy from the MST, condensed with min_cluster_size;
/// clusters selected by excess of mass on stabilities computed with
/// lambda = 1/distance. Points outside selected clusters are noise.
ClusterLabeling extract_clusters(const std::vector<MstEdge>& mst_edges, int n,
                                 const ClusterParams& params);

/// Composition of the three stages. n < min_cluster_size yields all noise.
ClusterLabeling hdbscan(const Eigen::MatrixXd& points,
                        const ClusterParams& params);

}  // namespace rtbust
