#include "rtbust/rle.hpp"

#include <cstdlib>

#include "rtbust/errors.hpp"

namespace rtbust {

RleSequence rle_encode(const UserSeries& series) {
  const AnalysisWindow& w = series.window;
  RleSequence out;
  out.values.reserve(series.events.size() * 2 + 1);
  std::int64_t cursor = 0;  // next second to account for, relative to t_ref
  for (const RetweetEvent& ev : series.events) {
    if (!w.contains(ev.retweet_ts))
      throw DataError("rle_encode: event outside window for user " +
                      series.user_id);
    const std::int64_t sec = ev.retweet_ts - w.t_ref;
    const std::int64_t obs = std::llabs(ev.source_ts - w.t_ref);
    if (sec >= cursor) {
      if (sec > cursor) out.values.push_back(-(sec - cursor));
      out.values.push_back(obs);
      cursor = sec + 1;
    } else if (sec == cursor - 1) {
      // same-second collision: keep both observations in arrival order
      out.values.push_back(obs);
    } else {
      throw DataError("rle_encode: events not sorted for user " +
                      series.user_id);
    }
    ++out.n_retweets;
  }
  if (cursor < w.duration_s) out.values.push_back(-(w.duration_s - cursor));
  return out;
}

std::vector<std::int64_t> rle_decode(const RleSequence& rle,
                                     const AnalysisWindow& window) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(window.duration_s), 0);
  std::int64_t cursor = 0;
  bool prev_negative = false;
  for (std::int64_t v : rle.values) {
    if (v < 0) {
      if (prev_negative)
        throw DataError("rle_decode: two consecutive negative entries");
      prev_negative = true;
      cursor += -v;
      if (cursor > window.duration_s)
        throw DataError("rle_decode: sequence longer than window");
    } else {
      prev_negative = false;
      if (cursor >= window.duration_s)
        throw DataError("rle_decode: sequence longer than window");
      out[static_cast<std::size_t>(cursor)] = v;
      ++cursor;
    }
  }
  if (cursor != window.duration_s)
    throw DataError("rle_decode: sequence does not cover the window");
  return out;
}

}  // namespace rtbust
