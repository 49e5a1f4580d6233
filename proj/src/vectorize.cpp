#include "rtbust/vectorize.hpp"

namespace rtbust {

CorpusStats fit_corpus_stats(const RleMap& corpus) {
  double sum = 0, sumsq = 0;
  std::size_t n = 0;
  for (const auto& [id, rle] : corpus) {
    for (std::int64_t v : rle.values) {
      const double x = signed_log(static_cast<double>(v));
      sum += x;
      sumsq += x * x;
      ++n;
    }
  }
  CorpusStats s;
  if (n == 0) return s;
  s.mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - s.mean * s.mean;
  s.stddev = var > 0 ? std::sqrt(var) : 1.0;
  if (s.stddev < 1e-12) s.stddev = 1.0;  // constant corpus
  return s;
}

FixedVector vectorize(const RleSequence& rle, Eigen::Index L,
                      const CorpusStats& stats) {
  if (L <= 0) throw ConfigError("vectorize: sequence length must be positive");
  FixedVector out;
  out.values = Eigen::VectorXd::Zero(L);
  const auto len = static_cast<Eigen::Index>(rle.values.size());
  // Truncation keeps the most recent entries (the tail of the sequence).
  const Eigen::Index keep = std::min(len, L);
  const Eigen::Index first = len - keep;
  for (Eigen::Index i = 0; i < keep; ++i) {
    const double x = signed_log(static_cast<double>(rle.values[first + i]));
    out.values[i] = (x - stats.mean) / stats.stddev;
  }
  out.true_len = keep;
  return out;
}

FixedVectorMap vectorize_all(const RleMap& corpus, Eigen::Index L,
                             const CorpusStats& stats) {
  FixedVectorMap out;
  for (const auto& [id, rle] : corpus) out.emplace(id, vectorize(rle, L, stats));
  return out;
}

Eigen::MatrixXd stack_rows(const FixedVectorMap& vecs) {
  if (vecs.empty()) return {};
  const Eigen::Index L = vecs.begin()->second.values.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(vecs.size()), L);
  Eigen::Index r = 0;
  for (const auto& [id, fv] : vecs) m.row(r++) = fv.values.transpose();
  return m;
}

}  // namespace rtbust
