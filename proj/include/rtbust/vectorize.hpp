#pragma once

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <string>

#include "rtbust/errors.hpp"
#include "rtbust/rle.hpp"

namespace rtbust {

constexpr int kDefaultSeqLen = 512;

/// Signed logarithm: sign(v) * ln(1 + |v|). Odd, fixes 0, compresses the
/// wide dynamic range of RLE entries (offsets up to the window length,
/// negative run lengths likewise).
inline double signed_log(double v) {
  return v >= 0 ? std::log1p(v) : -std::log1p(-v);
}

/// Mean and standard deviation of signed-log values over a training corpus.
struct CorpusStats {
  double mean = 0.0;
  double stddev = 1.0;
};

/// A sequence brought to a fixed length L: signed-log transformed, z-scored
/// with corpus statistics, then truncated keeping the most recent L entries
/// or right-padded with zeros. true_len records the unpadded prefix length.
struct FixedVector {
  Eigen::VectorXd values;         // exactly L entries, finite
  Eigen::Index true_len = 0;      // number of non-padding steps, <= L
};

using FixedVectorMap = std::map<std::string, FixedVector>;
using RleMap = std::map<std::string, RleSequence>;

CorpusStats fit_corpus_stats(const RleMap& corpus);

FixedVector vectorize(const RleSequence& rle, Eigen::Index L,
                      const CorpusStats& stats);

FixedVectorMap vectorize_all(const RleMap& corpus, Eigen::Index L,
                             const CorpusStats& stats);

/// Stacks fixed vectors into an n-by-L matrix, rows in map (user id) order.
Eigen::MatrixXd stack_rows(const FixedVectorMap& vecs);

}  // namespace rtbust
