#pragma once

#include <Eigen/Dense>
#include <string>

#include "rtbust/errors.hpp"
#include "rtbust/vectorize.hpp"

namespace rtbust {

enum class ProjectorKind { pca, tica };

inline const char* to_string(ProjectorKind k) {
  return k == ProjectorKind::pca ? "pca" : "tica";
}

/// Linear map R^L -> R^d: y = basis^T (x - mean). For PCA the basis columns
/// are orthonormal; for TICA they are C0-orthonormal generalized eigenvectors.
template <typename Scalar>
struct LinearProjectorT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ProjectorKind kind = ProjectorKind::pca;
  Vec mean;          // L
  Mat basis;         // L x d
  Vec eigenvalues;   // d, non-increasing
  Scalar total_variance = 0;  // trace of the covariance (PCA only)
  int lag = 1;                // TICA only
  bool rank_deficient = false;
  CorpusStats stats;  // input normalization, carried for persistence

  Eigen::Index dim_in() const { return basis.rows(); }
  Eigen::Index dim_out() const { return basis.cols(); }

  Vec transform(const Eigen::Ref<const Vec>& x) const {
    return basis.transpose() * (x - mean);
  }

  /// Fraction of total variance captured per component (PCA).
  Vec explained_variance_ratio() const {
    if (total_variance <= Scalar(0)) return Vec::Zero(eigenvalues.size());
    return (eigenvalues / total_variance).cwiseMax(Scalar(0));
  }
};

using LinearProjector = LinearProjectorT<double>;

namespace detail {

/// Deterministic sign convention: the entry of largest magnitude (lowest
/// index on ties) is made positive.
template <typename Derived>
void fix_column_signs(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index best = 0;
    typename Derived::Scalar mag = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const auto a = std::abs(m(r, c));
      if (a > mag) {
        mag = a;
        best = r;
      }
    }
    if (m(best, c) < 0) m.col(c) = -m.col(c);
  }
}

}  // namespace detail

/// PCA: mean-centering, then the top-d eigenvectors of the sample covariance
/// by descending eigenvalue. With fewer than d strictly positive eigenvalues
/// the remaining columns come from the same orthonormal eigenbasis and the
/// projector is flagged rank_deficient.
template <typename Scalar>
LinearProjectorT<Scalar> pca_fit(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& data,
    Eigen::Index d) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = data.rows();
  const Eigen::Index L = data.cols();
  if (d < 1 || d > L) throw ConfigError("pca_fit: need 1 <= d <= L");
  if (n < d) throw ConfigError("pca_fit: need at least d samples");

  LinearProjectorT<Scalar> p;
  p.kind = ProjectorKind::pca;
  p.mean = data.colwise().mean().transpose();
  Mat centered = data.rowwise() - p.mean.transpose();
  const Scalar denom = n > 1 ? Scalar(n - 1) : Scalar(1);
  Mat cov = centered.transpose() * centered / denom;

  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericError("pca_fit: eigendecomposition failed");

  p.total_variance = cov.trace();
  p.basis.resize(L, d);
  p.eigenvalues.resize(d);
  Eigen::Index positive = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = L - 1 - i;  // solver returns ascending order
    p.basis.col(i) = es.eigenvectors().col(src);
    p.eigenvalues[i] = es.eigenvalues()[src];
    if (p.eigenvalues[i] > Scalar(1e-12)) ++positive;
  }
  p.rank_deficient = positive < d;
  detail::fix_column_signs(p.basis);
  return p;
}

struct TicaEigenResult {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns, C0-orthonormal
};

/// Symmetric generalized eigenproblem C_lag v = lambda (C_0 + eps I) v,
/// top-d pairs by descending eigenvalue, deterministic column signs.
TicaEigenResult solve_tica_eigenproblem(const Eigen::MatrixXd& c0,
                                        const Eigen::MatrixXd& clag,
                                        Eigen::Index d, double eps = 1e-6);

/// TICA over the training matrix, rows taken as the frame sequence (the
/// pipeline orders rows by user id, which fixes the lag structure
/// deterministically). Symmetrized covariance estimators.
LinearProjector tica_fit(const Eigen::MatrixXd& data, Eigen::Index d, int lag);

}  // namespace rtbust
