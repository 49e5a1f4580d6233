#pragma once

#include <cstdint>
#include <vector>

#include "rtbust/events.hpp"

namespace rtbust {

/// A user's retweet time series after the modified run-length encoding:
/// the conceptual per-second series holds |t(x) - t_ref| at seconds where a
/// retweet happened and 0 elsewhere; runs of zero-seconds are replaced by a
/// single negative entry holding minus the run length.
///
/// Two retweets in the same second cannot be represented per-second; they are
/// kept as consecutive non-negative entries in arrival order, and such
/// sequences are exempt from the exact-window-coverage invariant.
struct RleSequence {
  std::vector<std::int64_t> values;
  std::size_t n_retweets = 0;  // number of observation (non-negative) entries

  /// Seconds covered: 1 per observation, |v| per run.
  std::int64_t covered_seconds() const {
    std::int64_t total = 0;
    for (std::int64_t v : values) total += v < 0 ? -v : 1;
    return total;
  }
};

/// Streaming encoder; never materializes the per-second array. The trailing
/// zero-run after the last retweet is encoded. Events must be sorted and
/// inside the window (guaranteed by build_user_series), otherwise DataError.
RleSequence rle_encode(const UserSeries& series);

/// Inverse of rle_encode for collision-free sequences: expands back to the
/// full per-second array of length window.duration_s. Throws DataError on
/// two consecutive negative entries or when the expansion does not cover the
/// window exactly.
std::vector<std::int64_t> rle_decode(const RleSequence& rle,
                                     const AnalysisWindow& window);

}  // namespace rtbust
