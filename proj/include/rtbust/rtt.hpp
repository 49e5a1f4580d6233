#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtbust/events.hpp"

namespace rtbust {

/// Rendering options for ReTweet-Tweet scatterplots: retweet timestamp on x,
/// original-tweet timestamp on y, causality keeps every point on or below
/// the main diagonal. The inset shows the empirical delay distribution over
/// log-spaced bins plus a rug of the individual delays.
struct RttOptions {
  int plot_px = 560;    // square drawing area
  int margin_px = 60;
  double marker_px = 2.0;
  int inset_bins = 40;
  std::optional<std::pair<std::int64_t, std::int64_t>> zoom;  // [t0, t1]
};

/// One account. Deterministic byte output for identical input.
std::string rtt_single(const UserSeries& series, const AnalysisWindow& window,
                       const RttOptions& options = {});

/// Account group with a cyclic 12-color palette, one color per account.
std::string rtt_group(const std::vector<UserSeries>& series,
                      const AnalysisWindow& window,
                      const RttOptions& options = {});

}  // namespace rtbust
