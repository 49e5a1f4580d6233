#include "rtbust/events.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <string_view>

#include "rtbust/errors.hpp"

namespace rtbust {

namespace {

bool parse_i64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

bool parse_line(std::string_view line, RetweetEvent& ev) {
  std::string_view fields[5];
  std::size_t n = 0;
  while (n < 5) {
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      fields[n++] = line;
      line = {};
      break;
    }
    fields[n++] = line.substr(0, tab);
    line.remove_prefix(tab + 1);
  }
  if (n != 5 || !line.empty()) return false;
  if (fields[0].empty() || fields[1].empty() || fields[3].empty()) return false;
  if (!parse_i64(fields[2], ev.retweet_ts)) return false;
  if (!parse_i64(fields[4], ev.source_ts)) return false;
  if (ev.retweet_ts < ev.source_ts) return false;  // causality
  ev.user_id = fields[0];
  ev.retweet_id = fields[1];
  ev.source_tweet_id = fields[3];
  return true;
}

}  // namespace

std::vector<RetweetEvent> parse_events(std::istream& in, ParseStats& stats,
                                       bool strict) {
  if (!in) throw DataError("parse_events: unreadable stream");
  std::vector<RetweetEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RetweetEvent ev;
    if (parse_line(line, ev)) {
      events.push_back(std::move(ev));
      ++stats.parsed;
    } else {
      if (strict)
        throw DataError("parse_events: malformed record at line " +
                        std::to_string(lineno));
      ++stats.malformed;
    }
  }
  if (in.bad()) throw DataError("parse_events: stream read failure");
  return events;
}

SeriesMap build_user_series(const std::vector<RetweetEvent>& events,
                            const AnalysisWindow& window) {
  SeriesMap out;
  for (const RetweetEvent& ev : events) {
    if (!window.contains(ev.retweet_ts)) continue;
    UserSeries& s = out[ev.user_id];
    if (s.events.empty()) {
      s.user_id = ev.user_id;
      s.window = window;
    }
    s.events.push_back(ev);
  }
  for (auto& [id, s] : out) {
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const RetweetEvent& a, const RetweetEvent& b) {
                       if (a.retweet_ts != b.retweet_ts)
                         return a.retweet_ts < b.retweet_ts;
                       return a.retweet_id < b.retweet_id;
                     });
  }
  return out;
}

SeriesMap filter_users(const SeriesMap& series, double min_rate,
                       double max_rate) {
  if (min_rate > max_rate)
    throw ConfigError("filter_users: min_rate > max_rate");
  SeriesMap out;
  for (const auto& [id, s] : series) {
    const double rate = s.rate_per_day();
    if (rate >= min_rate && rate <= max_rate) out.emplace(id, s);
  }
  return out;
}

}  // namespace rtbust
