#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "rtbust/errors.hpp"
#include "rtbust/handcrafted.hpp"
#include "rtbust/synth.hpp"

using namespace rtbust;

TEST_CASE("shannon entropy closed forms") {
  CHECK(shannon_entropy_bits(std::vector<std::int64_t>{10}) == 0.0);
  CHECK(shannon_entropy_bits(std::vector<std::int64_t>{1, 1, 1, 1}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(shannon_entropy_bits(std::vector<std::int64_t>{3, 1}) ==
        doctest::Approx(0.8113).epsilon(1e-4));
  CHECK_THROWS_AS(shannon_entropy_bits(std::vector<std::int64_t>{0, 0}),
                  DataError);
}

TEST_CASE("session detection") {
  CHECK(detect_sessions(std::vector<std::int64_t>{}) == 0);
  CHECK(detect_sessions(std::vector<std::int64_t>{42}) == 1);
  CHECK(detect_sessions(std::vector<std::int64_t>{0, 100, 5000}, 3600) == 2);

  // random timestamps against a rescan oracle
  std::mt19937_64 g(7);
  std::vector<std::int64_t> ts(1000);
  for (auto& t : ts)
    t = static_cast<std::int64_t>(g() % (14ULL * kSecondsPerDay));
  std::sort(ts.begin(), ts.end());
  std::size_t oracle = ts.empty() ? 0 : 1;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] - ts[i - 1] >= 3600) ++oracle;
  CHECK(detect_sessions(ts, 3600) == oracle);
}

namespace {

UserSeries make_series(const AnalysisWindow& w,
                       std::vector<RetweetEvent> events) {
  UserSeries s;
  s.user_id = "u";
  s.window = w;
  s.events = std::move(events);
  return s;
}

}  // namespace

TEST_CASE("single-event degenerate conventions") {
  const AnalysisWindow w{0, 14 * kSecondsPerDay};
  const auto f = extract_handcrafted(
      make_series(w, {{"u", "r0", 5000, "s0", 4000}}));
  CHECK(f.rt_users_entropy == 0.0);
  CHECK(f.rt_days_entropy == 0.0);
  CHECK(f.rt_days == 1.0);
  CHECK(f.rt_sessions == 1.0);
  CHECK(f.min_irt == 0.0);
  CHECK(f.mean_irt == 0.0);
  CHECK(f.stdev_irt == 0.0);
  CHECK(f.min_rt_delay == 1000.0);
  CHECK(f.stdev_rt_delay == 0.0);

  CHECK_THROWS_AS(extract_handcrafted(make_series(w, {})), DataError);
}

TEST_CASE("rates use the full window length") {
  const AnalysisWindow w{0, 14 * kSecondsPerDay};
  std::vector<RetweetEvent> events;
  for (int i = 0; i < 28; ++i) {
    char rid[8];
    std::snprintf(rid, sizeof rid, "r%02d", i);
    events.push_back({"u", rid, i * 40000 + 100, "s" + std::to_string(i),
                      i * 40000});
  }
  const auto f = extract_handcrafted(make_series(w, events));
  CHECK(f.rt_rate == doctest::Approx(2.0));
  CHECK(f.daily_mean_rts == doctest::Approx(2.0));
  CHECK(f.min_rt_delay == 100.0);
  CHECK(f.mean_rt_delay == 100.0);
  CHECK(f.min_irt == 40000.0);
  CHECK(f.stdev_irt == 0.0);
}

TEST_CASE("feature invariants on generated accounts") {
  CorpusSpec spec = default_corpus_spec();
  for (auto& g : spec.groups) g.count = std::min(g.count, 8);
  const LabeledCorpus corpus = gen_corpus(spec, 5);
  const AnalysisWindow w = spec.window;
  const SeriesMap series = build_user_series(corpus.events, w);

  for (const auto& [id, s] : series) {
    const auto f = extract_handcrafted(s);
    std::set<std::string> targets;
    std::set<std::int64_t> src_days, rt_days;
    for (const auto& ev : s.events) {
      targets.insert(ev.source_tweet_id);
      src_days.insert(ev.source_ts >= 0 ? ev.source_ts / kSecondsPerDay
                                        : (ev.source_ts - kSecondsPerDay + 1) /
                                              kSecondsPerDay);
      rt_days.insert(ev.retweet_ts / kSecondsPerDay);
    }
    CHECK(f.rt_users_entropy <=
          std::log2(static_cast<double>(targets.size())) + 1e-9);
    CHECK(f.rt_days_entropy <=
          std::log2(static_cast<double>(src_days.size())) + 1e-9);
    CHECK(f.rt_sessions <= static_cast<double>(s.events.size()));
    CHECK(f.rt_days == static_cast<double>(rt_days.size()));
    CHECK(f.rt_days <= w.days() + 1);
    CHECK(f.min_irt <= f.mean_irt);
    CHECK(f.min_rt_delay <= f.mean_rt_delay);
    CHECK(f.stdev_irt >= 0);
    CHECK(f.stdev_rt_delay >= 0);
  }
}

TEST_CASE("straight line bots keep tiny mean delays") {
  CorpusSpec spec = default_corpus_spec();
  spec.groups = {spec.groups[1]};  // straight_line group
  spec.groups[0].count = 5;
  const LabeledCorpus corpus = gen_corpus(spec, 21);
  const SeriesMap series = build_user_series(corpus.events, spec.window);
  REQUIRE(series.size() == 5);
  for (const auto& [id, s] : series) {
    const auto f = extract_handcrafted(s);
    CHECK(f.mean_rt_delay <= 10.0);
    CHECK(f.min_rt_delay >= 1.0);
  }
}

TEST_CASE("features are invariant to event permutation") {
  CorpusSpec spec = default_corpus_spec();
  spec.groups.resize(1);
  spec.groups[0].count = 3;
  LabeledCorpus corpus = gen_corpus(spec, 77);
  const SeriesMap base = build_user_series(corpus.events, spec.window);

  std::mt19937 g(3);
  std::shuffle(corpus.events.begin(), corpus.events.end(), g);
  const SeriesMap shuffled = build_user_series(corpus.events, spec.window);
  for (const auto& [id, s] : base) {
    const auto a = extract_handcrafted(s).as_array();
    const auto b = extract_handcrafted(shuffled.at(id)).as_array();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}
