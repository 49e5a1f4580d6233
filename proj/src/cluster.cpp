#include "rtbust/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "rtbust/errors.hpp"

namespace rtbust {

void ClusterParams::validate() const {
  if (min_cluster_size < 2)
    throw ConfigError("cluster: min_cluster_size must be >= 2");
  if (min_samples < 1) throw ConfigError("cluster: min_samples must be >= 1");
}

Eigen::VectorXd core_distances(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw ConfigError("core_distances: k must be >= 1");
  if (n <= k) throw ConfigError("core_distances: need more than k points");

  Eigen::VectorXd cores(n);
  std::vector<std::pair<double, Eigen::Index>> dists;
  dists.reserve(static_cast<std::size_t>(n) - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    dists.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      dists.emplace_back((points.row(i) - points.row(j)).norm(), j);
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    cores[i] = dists[static_cast<std::size_t>(k) - 1].first;
  }
  return cores;
}

namespace {

inline double mreach(const Eigen::MatrixXd& pts, const Eigen::VectorXd& cores,
                     int a, int b) {
  const double d = (pts.row(a) - pts.row(b)).norm();
  return std::max({cores[a], cores[b], d});
}

// Lexicographic edge key used for deterministic tie-breaking.
inline bool edge_less(double w1, int a1, int b1, double w2, int a2, int b2) {
  if (w1 != w2) return w1 < w2;
  const int lo1 = std::min(a1, b1), hi1 = std::max(a1, b1);
  const int lo2 = std::min(a2, b2), hi2 = std::max(a2, b2);
  if (lo1 != lo2) return lo1 < lo2;
  return hi1 < hi2;
}

}  // namespace

std::vector<MstEdge> mreach_mst(const Eigen::MatrixXd& points,
                                const Eigen::VectorXd& cores) {
  const int n = static_cast<int>(points.rows());
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(static_cast<std::size_t>(n) - 1);

  std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
  std::vector<double> best(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
  std::vector<int> from(static_cast<std::size_t>(n), -1);

  in_tree[0] = true;
  for (int v = 1; v < n; ++v) {
    best[v] = mreach(points, cores, 0, v);
    from[v] = 0;
  }

  for (int added = 1; added < n; ++added) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (pick < 0 ||
          edge_less(best[v], from[v], v, best[pick], from[pick], pick))
        pick = v;
    }
    edges.push_back({std::min(from[pick], pick), std::max(from[pick], pick),
                     best[pick]});
    in_tree[pick] = true;
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = mreach(points, cores, pick, v);
      if (edge_less(w, pick, v, best[v], from[v], v)) {
        best[v] = w;
        from[v] = pick;
      }
    }
  }
  return edges;
}

namespace {

double lambda_of(double dist) {
  if (dist <= 0) return kLambdaCap;
  return std::min(1.0 / dist, kLambdaCap);
}

struct Dendrogram {
  // Internal node i (0-based) merges children[i] at height[i]; node ids
  // 0..n-1 are points, n+i refers to internal node i.
  std::vector<std::pair<int, int>> children;
  std::vector<double> height;
  std::vector<int> leaf_count;
  int n = 0;

  int root() const { return n + static_cast<int>(children.size()) - 1; }
  bool is_leaf(int node) const { return node < n; }
  int count(int node) const {
    return is_leaf(node) ? 1 : leaf_count[static_cast<std::size_t>(node - n)];
  }

  void collect_leaves(int node, std::vector<int>& out) const {
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      if (is_leaf(cur)) {
        out.push_back(cur);
      } else {
        const auto& [l, r] = children[static_cast<std::size_t>(cur - n)];
        stack.push_back(l);
        stack.push_back(r);
      }
    }
  }
};

Dendrogram single_linkage(std::vector<MstEdge> edges, int n) {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const MstEdge& x, const MstEdge& y) {
                     return edge_less(x.weight, x.a, x.b, y.weight, y.a, y.b);
                   });
  Dendrogram d;
  d.n = n;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  // node_of maps a union-find root to its current dendrogram node
  std::vector<int> node_of(static_cast<std::size_t>(n));
  std::iota(node_of.begin(), node_of.end(), 0);

  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  for (const MstEdge& e : edges) {
    const int ra = find(e.a);
    const int rb = find(e.b);
    const int merged = n + static_cast<int>(d.children.size());
    d.children.emplace_back(node_of[static_cast<std::size_t>(ra)],
                            node_of[static_cast<std::size_t>(rb)]);
    d.height.push_back(e.weight);
    d.leaf_count.push_back(d.count(node_of[static_cast<std::size_t>(ra)]) +
                           d.count(node_of[static_cast<std::size_t>(rb)]));
    parent[static_cast<std::size_t>(rb)] = ra;
    node_of[static_cast<std::size_t>(ra)] = merged;
  }
  return d;
}

struct CondensedNode {
  double lambda_birth = 0;
  std::vector<std::pair<int, double>> fallen;  // (point, lambda at fall-out)
  std::vector<int> children;
  std::vector<double> child_lambda;  // lambda at the true split
  std::vector<int> child_size;
};

std::vector<CondensedNode> condense(const Dendrogram& d, int mcs) {
  std::vector<CondensedNode> nodes(1);
  nodes[0].lambda_birth = 0;  // root exists from lambda = 0
  if (d.children.empty()) {
    // n == 1: the only point never splits off anything
    if (d.n == 1) nodes[0].fallen.emplace_back(0, kLambdaCap);
    return nodes;
  }

  std::vector<int> leaves;
  std::vector<std::pair<int, int>> stack;  // (dendrogram node, condensed id)
  stack.emplace_back(d.root(), 0);
  while (!stack.empty()) {
    auto [node, cid] = stack.back();
    stack.pop_back();
    const auto& [left, right] = d.children[static_cast<std::size_t>(node - d.n)];
    const double lam = lambda_of(d.height[static_cast<std::size_t>(node - d.n)]);
    const int sl = d.count(left);
    const int sr = d.count(right);

    const bool keep_l = sl >= mcs;
    const bool keep_r = sr >= mcs;
    if (keep_l && keep_r) {
      for (int child : {left, right}) {
        const int ncid = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(ncid)].lambda_birth = lam;
        nodes[static_cast<std::size_t>(cid)].children.push_back(ncid);
        nodes[static_cast<std::size_t>(cid)].child_lambda.push_back(lam);
        nodes[static_cast<std::size_t>(cid)].child_size.push_back(
            d.count(child));
        stack.emplace_back(child, ncid);
      }
    } else if (!keep_l && !keep_r) {
      leaves.clear();
      d.collect_leaves(node, leaves);
      for (int p : leaves)
        nodes[static_cast<std::size_t>(cid)].fallen.emplace_back(p, lam);
    } else {
      const int gone = keep_l ? right : left;
      const int kept = keep_l ? left : right;
      leaves.clear();
      d.collect_leaves(gone, leaves);
      for (int p : leaves)
        nodes[static_cast<std::size_t>(cid)].fallen.emplace_back(p, lam);
      stack.emplace_back(kept, cid);
    }
  }
  return nodes;
}

double node_stability(const CondensedNode& c) {
  double s = 0;
  for (const auto& [p, lam] : c.fallen) s += lam - c.lambda_birth;
  for (std::size_t i = 0; i < c.children.size(); ++i)
    s += (c.child_lambda[i] - c.lambda_birth) * c.child_size[i];
  return s;
}

}  // namespace

ClusterLabeling extract_clusters(const std::vector<MstEdge>& mst_edges, int n,
                                 const ClusterParams& params) {
  params.validate();
  ClusterLabeling out;
  out.labels.assign(static_cast<std::size_t>(n), kNoiseLabel);
  if (n == 0) return out;
  if (n < params.min_cluster_size) return out;

  const Dendrogram dendro = single_linkage(mst_edges, n);
  const std::vector<CondensedNode> nodes =
      condense(dendro, params.min_cluster_size);

  std::vector<double> stability(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    stability[i] = node_stability(nodes[i]);

  // Degenerate tie: no non-root cluster and every point leaves the root at
  // the same lambda (all-identical inputs). One cluster, no noise.
  if (nodes.size() == 1) {
    const auto& f = nodes[0].fallen;
    bool uniform = !f.empty();
    for (const auto& [p, lam] : f) uniform = uniform && lam == f[0].second;
    if (uniform && static_cast<int>(f.size()) == n) {
      for (auto& l : out.labels) l = 0;
      out.n_clusters = 1;
      out.stability[0] = stability[0];
    }
    return out;
  }

  // Excess-of-mass selection, bottom-up; the root is never selectable.
  std::vector<bool> selected(nodes.size(), false);
  std::vector<double> shat(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const CondensedNode& c = nodes[i];
    double child_sum = 0;
    for (int ch : c.children) child_sum += shat[static_cast<std::size_t>(ch)];
    if (i == 0) {
      shat[i] = child_sum;
    } else if (c.children.empty()) {
      selected[i] = true;
      shat[i] = stability[i];
    } else if (stability[i] > child_sum) {
      selected[i] = true;
      shat[i] = stability[i];
    } else {
      shat[i] = child_sum;
    }
  }

  // Keep only the highest selected node on each root-to-leaf path.
  std::vector<std::pair<std::size_t, bool>> walk{{0, false}};
  std::vector<bool> final_sel(nodes.size(), false);
  while (!walk.empty()) {
    auto [i, covered] = walk.back();
    walk.pop_back();
    final_sel[i] = selected[i] && !covered;
    for (int ch : nodes[i].children)
      walk.emplace_back(static_cast<std::size_t>(ch), covered || final_sel[i]);
  }

  // Dense ids in condensed-node creation order; claim whole subtrees.
  int next_id = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!final_sel[i]) continue;
    const int id = next_id++;
    out.stability[id] = stability[i];
    std::vector<std::size_t> sub{i};
    while (!sub.empty()) {
      const std::size_t cur = sub.back();
      sub.pop_back();
      for (const auto& [p, lam] : nodes[cur].fallen)
        out.labels[static_cast<std::size_t>(p)] = id;
      for (int ch : nodes[cur].children)
        sub.push_back(static_cast<std::size_t>(ch));
    }
  }
  out.n_clusters = next_id;
  return out;
}

ClusterLabeling hdbscan(const Eigen::MatrixXd& points,
                        const ClusterParams& params) {
  params.validate();
  const int n = static_cast<int>(points.rows());
  ClusterLabeling out;
  out.labels.assign(static_cast<std::size_t>(n), kNoiseLabel);
  if (n == 0) return out;
  if (n < params.min_cluster_size) return out;

  const Eigen::VectorXd cores = core_distances(points, params.min_samples);
  const std::vector<MstEdge> mst = mreach_mst(points, cores);
  return extract_clusters(mst, n, params);
}

}  // namespace rtbust
