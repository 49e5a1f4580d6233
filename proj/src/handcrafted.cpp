#include "rtbust/handcrafted.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rtbust/errors.hpp"

namespace rtbust {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// UTC calendar day index of an epoch timestamp.
std::int64_t utc_day(std::int64_t ts) { return floor_div(ts, kSecondsPerDay); }

struct Moments {
  double min = 0, mean = 0, stdev = 0;
};

// Population standard deviation; single value yields stdev 0.
Moments moments(const std::vector<std::int64_t>& xs) {
  Moments m;
  if (xs.empty()) return m;
  m.min = static_cast<double>(*std::min_element(xs.begin(), xs.end()));
  double sum = 0;
  for (std::int64_t x : xs) sum += static_cast<double>(x);
  m.mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (std::int64_t x : xs) {
    const double d = static_cast<double>(x) - m.mean;
    ss += d * d;
  }
  m.stdev = std::sqrt(ss / static_cast<double>(xs.size()));
  return m;
}

}  // namespace

const std::array<std::string, 12>& HandcraftedVector::names() {
  static const std::array<std::string, 12> kNames = {
      "rt_users_entropy", "rt_days_entropy", "rt_rate",       "daily_mean_rts",
      "rt_days",          "min_irt",         "mean_irt",      "stdev_irt",
      "min_rt_delay",     "mean_rt_delay",   "stdev_rt_delay", "rt_sessions"};
  return kNames;
}

double shannon_entropy_bits(std::span<const std::int64_t> counts) {
  double total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw DataError("shannon_entropy_bits: negative count");
    total += static_cast<double>(c);
  }
  if (total <= 0) throw DataError("shannon_entropy_bits: all counts zero");
  double h = 0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h < 0 ? 0 : h;  // clamp -0.0 from rounding
}

std::size_t detect_sessions(std::span<const std::int64_t> sorted_timestamps,
                            std::int64_t gap_s) {
  if (gap_s <= 0) throw ConfigError("detect_sessions: gap_s must be positive");
  if (sorted_timestamps.empty()) return 0;
  std::size_t sessions = 1;
  for (std::size_t i = 1; i < sorted_timestamps.size(); ++i) {
    if (sorted_timestamps[i] - sorted_timestamps[i - 1] >= gap_s) ++sessions;
  }
  return sessions;
}

HandcraftedVector extract_handcrafted(const UserSeries& series) {
  if (series.events.empty())
    throw DataError("extract_handcrafted: empty series for user " +
                    series.user_id);

  const auto n = series.events.size();
  HandcraftedVector f;

  // Distribution of retweet targets. The event schema has no source-author
  // field, so the distinct source tweets stand in for the retweeted users.
  std::map<std::string, std::int64_t> target_counts;
  std::map<std::int64_t, std::int64_t> source_day_counts;
  std::vector<std::int64_t> rt_times, delays;
  rt_times.reserve(n);
  delays.reserve(n);
  for (const RetweetEvent& ev : series.events) {
    ++target_counts[ev.source_tweet_id];
    ++source_day_counts[utc_day(ev.source_ts)];
    rt_times.push_back(ev.retweet_ts);
    delays.push_back(ev.retweet_ts - ev.source_ts);
  }

  std::vector<std::int64_t> counts;
  counts.reserve(target_counts.size());
  for (const auto& [k, c] : target_counts) counts.push_back(c);
  f.rt_users_entropy = shannon_entropy_bits(counts);

  counts.clear();
  for (const auto& [k, c] : source_day_counts) counts.push_back(c);
  f.rt_days_entropy = shannon_entropy_bits(counts);

  f.rt_rate = static_cast<double>(n) / series.window.days();
  f.daily_mean_rts = static_cast<double>(n) / series.window.days();

  std::map<std::int64_t, std::int64_t> rt_day_set;
  for (std::int64_t t : rt_times) ++rt_day_set[utc_day(t)];
  f.rt_days = static_cast<double>(rt_day_set.size());

  if (n >= 2) {
    std::vector<std::int64_t> irts;
    irts.reserve(n - 1);
    for (std::size_t i = 1; i < rt_times.size(); ++i)
      irts.push_back(rt_times[i] - rt_times[i - 1]);
    const Moments m = moments(irts);
    f.min_irt = m.min;
    f.mean_irt = m.mean;
    f.stdev_irt = m.stdev;
  }

  const Moments d = moments(delays);
  f.min_rt_delay = d.min;
  f.mean_rt_delay = d.mean;
  f.stdev_rt_delay = n >= 2 ? d.stdev : 0.0;

  f.rt_sessions = static_cast<double>(detect_sessions(rt_times));
  return f;
}

}  // namespace rtbust
