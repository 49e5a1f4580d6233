#include <doctest.h>

#include <vector>

#include "rtbust/errors.hpp"
#include "rtbust/rle.hpp"
#include "rtbust/rng.hpp"

using namespace rtbust;

namespace {

UserSeries series_from(const AnalysisWindow& w,
                       const std::vector<std::pair<std::int64_t, std::int64_t>>&
                           rt_src_pairs) {
  UserSeries s;
  s.user_id = "u";
  s.window = w;
  int i = 0;
  for (const auto& [rt, src] : rt_src_pairs) {
    char rid[16];
    std::snprintf(rid, sizeof rid, "r%04d", i++);
    s.events.push_back({"u", rid, rt, std::string("s") + rid, src});
  }
  return s;
}

/// Brute-force oracle: the fully materialized per-second retweet series,
/// |source_ts - t_ref| at retweet seconds and zero elsewhere.
std::vector<std::int64_t> per_second_oracle(const UserSeries& s) {
  std::vector<std::int64_t> a(static_cast<std::size_t>(s.window.duration_s), 0);
  for (const auto& ev : s.events)
    a[static_cast<std::size_t>(ev.retweet_ts - s.window.t_ref)] =
        std::llabs(ev.source_ts - s.window.t_ref);
  return a;
}

}  // namespace

TEST_CASE("worked figure example compresses byte-for-byte") {
  // per-second series [3,0,0,0,4,0,6,9,20] -> [3,-3,4,-1,6,9,20]
  const AnalysisWindow w{100, 9};
  const UserSeries s = series_from(
      w, {{100, 97}, {104, 96}, {106, 94}, {107, 91}, {108, 80}});
  const RleSequence rle = rle_encode(s);
  CHECK(rle.values == std::vector<std::int64_t>{3, -3, 4, -1, 6, 9, 20});
  CHECK(rle.n_retweets == 5);
  CHECK(rle_decode(rle, w) ==
        std::vector<std::int64_t>{3, 0, 0, 0, 4, 0, 6, 9, 20});
}

TEST_CASE("zero retweets over an n second window encodes to one run") {
  const AnalysisWindow w{0, 7};
  const RleSequence rle = rle_encode(series_from(w, {}));
  CHECK(rle.values == std::vector<std::int64_t>{-7});
  CHECK(rle.n_retweets == 0);
}

TEST_CASE("trailing zero run after the last retweet is encoded") {
  const AnalysisWindow w{0, 10};
  const RleSequence rle = rle_encode(series_from(w, {{2, 1}}));
  CHECK(rle.values == std::vector<std::int64_t>{-2, 1, -7});
  CHECK(rle.covered_seconds() == 10);
}

TEST_CASE("decode inverts the figure reading and rejects malformed input") {
  const AnalysisWindow w5{0, 5};
  RleSequence a;
  a.values = {3, -3, 4};
  CHECK(rle_decode(a, w5) == std::vector<std::int64_t>{3, 0, 0, 0, 4});

  RleSequence b;
  b.values = {-5};
  CHECK(rle_decode(b, w5) == std::vector<std::int64_t>{0, 0, 0, 0, 0});

  RleSequence bad;
  bad.values = {1, -2, -2};
  CHECK_THROWS_AS(rle_decode(bad, w5), DataError);

  RleSequence overrun;
  overrun.values = {-9};
  CHECK_THROWS_AS(rle_decode(overrun, w5), DataError);
}

TEST_CASE("random collision-free series round-trip against the oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const AnalysisWindow w{rng.uniform_int(0, 100000), 10000};
    // 50 distinct retweet seconds
    std::vector<std::int64_t> secs;
    while (secs.size() < 50) {
      const auto s = rng.uniform_int(0, w.duration_s - 1);
      if (std::find(secs.begin(), secs.end(), s) == secs.end())
        secs.push_back(s);
    }
    std::sort(secs.begin(), secs.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto s : secs) {
      const std::int64_t rt = w.t_ref + s;
      pairs.emplace_back(rt, rt - rng.uniform_int(1, 500000));
    }
    const UserSeries s = series_from(w, pairs);
    const RleSequence rle = rle_encode(s);

    CHECK(rle_decode(rle, w) == per_second_oracle(s));
    CHECK(rle.covered_seconds() == w.duration_s);
    CHECK(rle.n_retweets == 50);

    // re-encoding the decoded array reproduces the sequence exactly
    const auto array = rle_decode(rle, w);
    RleSequence re;
    std::int64_t run = 0;
    for (const auto v : array) {
      if (v == 0) {
        ++run;
        continue;
      }
      if (run > 0) re.values.push_back(-run);
      run = 0;
      re.values.push_back(v);
      ++re.n_retweets;
    }
    if (run > 0) re.values.push_back(-run);
    CHECK(re.values == rle.values);
  }
}

TEST_CASE("same-second collisions stay as consecutive observations") {
  const AnalysisWindow w{0, 6};
  const UserSeries s = series_from(w, {{2, 1}, {2, 0}, {4, 3}});
  const RleSequence rle = rle_encode(s);
  CHECK(rle.values == std::vector<std::int64_t>{-2, 1, 0, -1, 3, -1});
  CHECK(rle.n_retweets == 3);
  // one extra second of coverage; such sequences are exempt from the
  // exact-window invariant
  CHECK(rle.covered_seconds() == w.duration_s + 1);
}

TEST_CASE("events outside the window are an internal error") {
  const AnalysisWindow w{0, 5};
  UserSeries s = series_from(w, {{7, 3}});
  CHECK_THROWS_AS(rle_encode(s), DataError);
}
