#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rtbust {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kDefaultWindowSeconds = 14 * kSecondsPerDay;
constexpr double kDefaultMinRate = 2.0;   // retweets/day
constexpr double kDefaultMaxRate = 50.0;  // retweets/day

/// One retweet: who, when, which original tweet, and when that original
/// tweet was published. Causality requires retweet_ts >= source_ts.
struct RetweetEvent {
  std::string user_id;
  std::string retweet_id;
  std::int64_t retweet_ts = 0;   // t_j
  std::string source_tweet_id;
  std::int64_t source_ts = 0;    // t(x)
};

/// Half-open analysis window [t_ref, t_ref + duration_s).
struct AnalysisWindow {
  std::int64_t t_ref = 0;
  std::int64_t duration_s = kDefaultWindowSeconds;

  bool contains(std::int64_t ts) const {
    return ts >= t_ref && ts < t_ref + duration_s;
  }
  std::int64_t end() const { return t_ref + duration_s; }
  double days() const { return static_cast<double>(duration_s) / kSecondsPerDay; }
};

/// One user's retweet events inside the window, sorted by
/// (retweet_ts, retweet_id).
struct UserSeries {
  std::string user_id;
  std::vector<RetweetEvent> events;
  AnalysisWindow window;

  double rate_per_day() const {
    return static_cast<double>(events.size()) / window.days();
  }
};

using SeriesMap = std::map<std::string, UserSeries>;

struct ParseStats {
  std::size_t parsed = 0;
  std::size_t malformed = 0;
};

/// Parses newline-delimited tab-separated records
/// (user_id, retweet_id, retweet_ts, source_tweet_id, source_ts).
/// Malformed lines (wrong field count, non-numeric timestamps, causality
/// violations) are counted and skipped; with strict=true the first one throws.
std::vector<RetweetEvent> parse_events(std::istream& in, ParseStats& stats,
                                       bool strict = false);

/// Groups events per user, drops events outside the window, sorts within
/// user by (retweet_ts, retweet_id). Users with no in-window events are
/// not represented.
SeriesMap build_user_series(const std::vector<RetweetEvent>& events,
                            const AnalysisWindow& window);

/// Keeps users whose mean retweets/day lies in [min_rate, max_rate], both
/// bounds inclusive. The mean uses the full window length in days.
SeriesMap filter_users(const SeriesMap& series, double min_rate = kDefaultMinRate,
                       double max_rate = kDefaultMaxRate);

}  // namespace rtbust
