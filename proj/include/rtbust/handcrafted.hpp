#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "rtbust/events.hpp"

namespace rtbust {

constexpr std::int64_t kDefaultSessionGapSeconds = 3600;

/// The 12 per-account features, in table order. Entropies are in bits,
/// IRT and delay statistics in seconds, rates in retweets/day.
struct HandcraftedVector {
  double rt_users_entropy = 0;
  double rt_days_entropy = 0;
  double rt_rate = 0;
  double daily_mean_rts = 0;
  double rt_days = 0;
  double min_irt = 0;
  double mean_irt = 0;
  double stdev_irt = 0;
  double min_rt_delay = 0;
  double mean_rt_delay = 0;
  double stdev_rt_delay = 0;
  double rt_sessions = 0;

  std::array<double, 12> as_array() const {
    return {rt_users_entropy, rt_days_entropy, rt_rate,      daily_mean_rts,
            rt_days,          min_irt,         mean_irt,     stdev_irt,
            min_rt_delay,     mean_rt_delay,   stdev_rt_delay, rt_sessions};
  }
  static const std::array<std::string, 12>& names();
};

/// Shannon entropy in bits of the distribution given by nonnegative counts.
/// At least one count must be positive.
double shannon_entropy_bits(std::span<const std::int64_t> counts);

/// Number of maximal runs of sorted timestamps whose consecutive gaps are
/// all strictly below gap_s. Empty input counts zero sessions.
std::size_t detect_sessions(std::span<const std::int64_t> sorted_timestamps,
                            std::int64_t gap_s = kDefaultSessionGapSeconds);

/// Computes all 12 features for one user. Requires at least one event.
/// With fewer than 2 events the IRT min/mean and both stdevs are 0.
HandcraftedVector extract_handcrafted(const UserSeries& series);

}  // namespace rtbust
