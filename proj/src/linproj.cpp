#include "rtbust/linproj.hpp"

#include <cmath>

namespace rtbust {

TicaEigenResult solve_tica_eigenproblem(const Eigen::MatrixXd& c0,
                                        const Eigen::MatrixXd& clag,
                                        Eigen::Index d, double eps) {
  const Eigen::Index L = c0.rows();
  if (c0.cols() != L || clag.rows() != L || clag.cols() != L)
    throw ConfigError("solve_tica_eigenproblem: shape mismatch");
  if (d < 1 || d > L) throw ConfigError("solve_tica_eigenproblem: bad d");

  Eigen::MatrixXd reg = c0 + eps * Eigen::MatrixXd::Identity(L, L);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(clag, reg);
  if (es.info() != Eigen::Success)
    throw NumericError("solve_tica_eigenproblem: solver failed");
  if (!es.eigenvalues().allFinite())
    throw NumericError("solve_tica_eigenproblem: non-finite eigenvalues");

  TicaEigenResult r;
  r.eigenvalues.resize(d);
  r.eigenvectors.resize(L, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = L - 1 - i;  // ascending from the solver
    r.eigenvalues[i] = es.eigenvalues()[src];
    r.eigenvectors.col(i) = es.eigenvectors().col(src);
  }
  detail::fix_column_signs(r.eigenvectors);
  return r;
}

LinearProjector tica_fit(const Eigen::MatrixXd& data, Eigen::Index d, int lag) {
  const Eigen::Index n = data.rows();
  const Eigen::Index L = data.cols();
  if (lag < 1) throw ConfigError("tica_fit: lag must be >= 1");
  if (L <= lag) throw ConfigError("tica_fit: need L > lag");
  if (n <= lag) throw ConfigError("tica_fit: need more rows than the lag");
  if (d < 1 || d > L) throw ConfigError("tica_fit: need 1 <= d <= L");

  LinearProjector p;
  p.kind = ProjectorKind::tica;
  p.lag = lag;
  p.mean = data.colwise().mean().transpose();
  Eigen::MatrixXd centered = data.rowwise() - p.mean.transpose();

  const Eigen::Index m = n - lag;
  const auto head = centered.topRows(m);
  const auto tail = centered.bottomRows(m);
  const double denom = 2.0 * static_cast<double>(m);
  Eigen::MatrixXd c0 =
      (head.transpose() * head + tail.transpose() * tail) / denom;
  Eigen::MatrixXd clag =
      (head.transpose() * tail + tail.transpose() * head) / denom;

  TicaEigenResult r = solve_tica_eigenproblem(c0, clag, d);
  p.basis = r.eigenvectors;
  p.eigenvalues = r.eigenvalues;
  p.total_variance = c0.trace();
  return p;
}

}  // namespace rtbust
