#include "rtbust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rtbust/errors.hpp"

namespace rtbust {

namespace {

// Droplet bursts: probability per event, total burst size 3..8.
constexpr double kDropletProb = 0.1;
constexpr double kDropletFactor = 1.0 + kDropletProb * (5.5 - 1.0);  // 1.45

constexpr double kDelayMedianS = 300.0;
constexpr double kDelaySigmaLog = 1.5;

constexpr double kSessionAttendance = 0.98;
constexpr double kPoolParticipation = 0.95;
constexpr double kTriangularParticipation = 0.88;
constexpr double kRunAttendance = 0.95;
constexpr std::int64_t kWaterfallLookbackS = 3 * kSecondsPerDay;

std::string make_id(const std::string& prefix, std::size_t seq) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", seq);
  return prefix + buf;
}

RetweetEvent make_event(const std::string& user_id, std::size_t& seq,
                        std::int64_t rt_ts, const std::string& source_id,
                        std::int64_t src_ts) {
  RetweetEvent ev;
  ev.user_id = user_id;
  ev.retweet_id = make_id(user_id + "_r", seq++);
  ev.retweet_ts = rt_ts;
  ev.source_tweet_id = source_id;
  ev.source_ts = src_ts;
  return ev;
}

}  // namespace

const char* to_string(BehaviorKind k) {
  switch (k) {
    case BehaviorKind::human: return "human";
    case BehaviorKind::straight_line: return "straight_line";
    case BehaviorKind::triangular: return "triangular";
    default: return "waterfall";
  }
}

BehaviorKind behavior_kind_from_string(const std::string& s) {
  if (s == "human") return BehaviorKind::human;
  if (s == "straight_line") return BehaviorKind::straight_line;
  if (s == "triangular") return BehaviorKind::triangular;
  if (s == "waterfall") return BehaviorKind::waterfall;
  throw ConfigError("unknown behavior kind: " + s);
}

void BehaviorSpec::validate() const {
  if (rate_per_day < 2.0 || rate_per_day > 50.0)
    throw ConfigError("behavior: rate_per_day must lie in [2, 50]");
  if (jitter_s < 0) throw ConfigError("behavior: jitter_s must be >= 0");
  if (kind != BehaviorKind::human) {
    if (session_period_s <= 0 || session_length_s <= 0)
      throw ConfigError("behavior: session fields must be positive");
    if (session_length_s >= session_period_s)
      throw ConfigError("behavior: session_length_s must be < session_period_s");
  }
}

namespace {

/// Piecewise-constant activity weight over the window. Real accounts differ
/// in when they are awake and how bursty their browsing is; bots differ only
/// in their botnet's schedule. The profile realizes that heterogeneity.
struct ActivityProfile {
  std::vector<std::int64_t> edges;  // breakpoints; front = t_ref, back = end
  std::vector<double> weights;      // weights[i] over [edges[i], edges[i+1])

  double integral_seconds() const {
    double s = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      s += weights[i] * static_cast<double>(edges[i + 1] - edges[i]);
    return s;
  }

  double at(std::int64_t ts) const {
    const auto it = std::upper_bound(edges.begin(), edges.end(), ts);
    const auto i = static_cast<std::size_t>(it - edges.begin());
    if (i == 0 || i > weights.size()) return 0.0;
    return weights[i - 1];
  }
};

ActivityProfile make_human_profile(const AnalysisWindow& window, Rng& rng) {
  const auto logu = [&rng](double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
  };
  // nightly low-activity phase: per-account length, depth and placement;
  // log-uniform depths put some accounts at "no sleep signature" and some
  // at near-total silence
  const auto sleep_len = static_cast<std::int64_t>(logu(4.0, 12.0) * 3600.0);
  const double sleep_w = logu(0.01, 1.0);
  const auto sleep_phase =
      static_cast<std::int64_t>(rng.uniform(0, kSecondsPerDay));
  // irregular browsing blocks: exponential on/off dwell times
  const double active_mean = logu(1.0 / 3.0, 8.0) * 3600.0;
  const double idle_mean = logu(0.25, 6.0) * 3600.0;
  const double idle_w = logu(0.02, 1.0);
  // weekly rhythm: two adjacent low or high days per week, per-account depth
  const double weekend_w = logu(0.15, 1.0);
  const auto weekend_day = rng.uniform_int(0, 6);

  std::vector<std::pair<std::int64_t, double>> marks;  // (time, weight from it)
  bool active = rng.uniform01() < active_mean / (active_mean + idle_mean);
  std::int64_t cursor = window.t_ref;
  marks.emplace_back(cursor, active ? 1.0 : idle_w);
  while (cursor < window.end()) {
    cursor += std::max<std::int64_t>(
        60, static_cast<std::int64_t>(
                rng.exponential(1.0 / (active ? active_mean : idle_mean))));
    active = !active;
    marks.emplace_back(cursor, active ? 1.0 : idle_w);
  }

  ActivityProfile p;
  std::int64_t prev = window.t_ref;
  std::size_t mi = 0;
  p.edges.push_back(window.t_ref);
  while (prev < window.end()) {
    // next breakpoint: block change, sleep boundary or midnight
    const std::int64_t tod =
        (prev - window.t_ref + sleep_phase) % kSecondsPerDay;
    const bool asleep = tod < sleep_len;
    std::int64_t next = prev + (asleep ? sleep_len - tod : kSecondsPerDay - tod);
    next = std::min(next, prev + kSecondsPerDay -
                              (prev - window.t_ref) % kSecondsPerDay);
    while (mi + 1 < marks.size() && marks[mi + 1].first <= prev) ++mi;
    if (mi + 1 < marks.size()) next = std::min(next, marks[mi + 1].first);
    next = std::min(next, window.end());
    if (next == prev) next = prev + 1;
    const std::int64_t dow = ((prev - window.t_ref) / kSecondsPerDay) % 7;
    const bool offday = dow == weekend_day || dow == (weekend_day + 1) % 7;
    p.weights.push_back(marks[mi].second * (asleep ? sleep_w : 1.0) *
                        (offday ? weekend_w : 1.0));
    p.edges.push_back(next);
    prev = next;
  }
  return p;
}

}  // namespace

std::vector<RetweetEvent> gen_human(const BehaviorSpec& spec,
                                    const AnalysisWindow& window, Rng& rng,
                                    const std::string& user_id) {
  spec.validate();
  std::vector<RetweetEvent> events;
  const ActivityProfile profile = make_human_profile(window, rng);
  // thinning a homogeneous candidate stream by the profile keeps the total
  // count exactly Poisson(rate * days); droplets are budgeted into the base
  const double base_target =
      spec.rate_per_day * window.days() / kDropletFactor;
  const double cand_per_sec = base_target / profile.integral_seconds();

  std::size_t rt_seq = 0, src_seq = 0;
  double t = static_cast<double>(window.t_ref);
  while (true) {
    t += rng.exponential(cand_per_sec);
    const auto ts = static_cast<std::int64_t>(t);
    if (ts >= window.end()) break;
    if (rng.uniform01() >= profile.at(ts)) continue;

    auto delay = static_cast<std::int64_t>(
        std::llround(rng.lognormal_median(kDelayMedianS, kDelaySigmaLog)));
    if (delay < 1) delay = 1;
    const std::string src = make_id(user_id + "_s", src_seq++);
    events.push_back(make_event(user_id, rt_seq, ts, src, ts - delay));

    if (rng.uniform01() < kDropletProb) {
      // reverse-chronological feed walk: retweets seconds apart with
      // monotonically increasing delays; scroll depth is heavy-tailed, a
      // walk can reach tweets minutes or days old
      const std::int64_t burst = rng.uniform_int(3, 8);
      std::int64_t bt = ts;
      std::int64_t bdelay = delay;
      for (std::int64_t j = 1; j < burst; ++j) {
        bt += rng.uniform_int(1, 3);
        bdelay += static_cast<std::int64_t>(std::llround(
            std::exp(rng.uniform(std::log(60.0), std::log(200000.0)))));
        if (bt >= window.end()) break;
        const std::string bsrc = make_id(user_id + "_s", src_seq++);
        events.push_back(make_event(user_id, rt_seq, bt, bsrc, bt - bdelay));
      }
    }
  }
  return events;
}

SharedStream gen_shared_stream(const BehaviorSpec& spec,
                               const AnalysisWindow& window, Rng& rng,
                               const std::string& botnet_id) {
  spec.validate();
  if (spec.kind == BehaviorKind::human)
    throw ConfigError("gen_shared_stream: humans have no shared stream");

  SharedStream out;
  out.phase_s = rng.uniform_int(
      0, static_cast<std::int64_t>(spec.session_period_s) - 1);
  std::size_t seq = 0;
  const std::string prefix = "p_" + botnet_id;

  if (spec.kind == BehaviorKind::waterfall) {
    // a continuous feed reaching back before the window so early runs
    // have history to walk
    const double runs_per_day = kSecondsPerDay / spec.session_period_s;
    const double mean_run = spec.rate_per_day / (runs_per_day * kRunAttendance);
    const double pool_per_day = std::max(24.0, 2.0 * mean_run);
    double t = static_cast<double>(window.t_ref - kWaterfallLookbackS);
    std::int64_t prev = 0;
    while (true) {
      t += rng.exponential(pool_per_day / kSecondsPerDay);
      auto ts = static_cast<std::int64_t>(t);
      if (ts >= window.end()) break;
      if (ts <= prev) ts = prev + 1;  // keep pool timestamps strictly increasing
      prev = ts;
      out.tweets.emplace_back(make_id(prefix, seq++), ts);
    }
    // run schedule with per-run target lengths, shared by the whole botnet
    const auto k_lo = std::max<std::int64_t>(
        3, static_cast<std::int64_t>(std::floor(0.7 * mean_run)));
    const auto k_hi = std::max<std::int64_t>(
        k_lo + 1, static_cast<std::int64_t>(std::ceil(1.3 * mean_run)));
    for (std::int64_t r0 = window.t_ref + out.phase_s; r0 < window.end();
         r0 += static_cast<std::int64_t>(spec.session_period_s))
      out.runs.emplace_back(r0, rng.uniform_int(k_lo, k_hi));
    return out;
  }

  // session-driven kinds: tweets are published inside the sessions only
  const double sessions_per_day = kSecondsPerDay / spec.session_period_s;
  const double in_session_s_per_day = sessions_per_day * spec.session_length_s;
  double per_sec = 0;
  if (spec.kind == BehaviorKind::straight_line) {
    per_sec = spec.rate_per_day /
              (in_session_s_per_day * kSessionAttendance * kPoolParticipation);
  } else {  // triangular: members retweet a shared fraction of the feed
    per_sec = spec.rate_per_day / (in_session_s_per_day * kSessionAttendance *
                                   kTriangularParticipation);
  }

  for (std::int64_t s0 = window.t_ref + out.phase_s; s0 < window.end();
       s0 += static_cast<std::int64_t>(spec.session_period_s)) {
    const std::int64_t s1 = std::min(
        s0 + static_cast<std::int64_t>(spec.session_length_s), window.end());
    double t = static_cast<double>(s0);
    std::int64_t prev = 0;
    while (true) {
      t += rng.exponential(per_sec);
      auto ts = static_cast<std::int64_t>(t);
      if (ts >= s1) break;
      if (ts <= prev) ts = prev + 1;
      prev = ts;
      out.tweets.emplace_back(make_id(prefix, seq++), ts);
    }
  }
  return out;
}

namespace {

std::vector<RetweetEvent> gen_straight_line(const BehaviorSpec& spec,
                                            const AnalysisWindow& window,
                                            Rng& rng, const SharedStream& shared,
                                            const std::string& user_id) {
  std::vector<RetweetEvent> events;
  std::size_t rt_seq = 0;
  const auto period = static_cast<std::int64_t>(spec.session_period_s);
  const auto len = static_cast<std::int64_t>(spec.session_length_s);
  const auto jitter = static_cast<std::int64_t>(spec.jitter_s);

  for (std::int64_t s0 = window.t_ref + shared.phase_s; s0 < window.end();
       s0 += period) {
    const std::int64_t shift = jitter > 0 ? rng.uniform_int(-jitter, jitter) : 0;
    const bool attend = rng.uniform01() < kSessionAttendance;
    const std::int64_t a0 = s0 + shift;
    const std::int64_t a1 = a0 + len;
    const auto lo = std::lower_bound(
        shared.tweets.begin(), shared.tweets.end(), a0,
        [](const auto& tw, std::int64_t v) { return tw.second < v; });
    for (auto it = lo; it != shared.tweets.end() && it->second < a1; ++it) {
      if (!attend) continue;
      if (rng.uniform01() >= kPoolParticipation) continue;
      const std::int64_t rt = it->second + rng.uniform_int(1, 10);
      if (!window.contains(rt)) continue;
      events.push_back(make_event(user_id, rt_seq, rt, it->first, it->second));
    }
  }
  return events;
}

std::vector<RetweetEvent> gen_triangular(const BehaviorSpec& spec,
                                         const AnalysisWindow& window, Rng& rng,
                                         const SharedStream& shared,
                                         const std::string& user_id) {
  std::vector<RetweetEvent> events;
  std::size_t rt_seq = 0;
  const auto period = static_cast<std::int64_t>(spec.session_period_s);
  const auto len = static_cast<std::int64_t>(spec.session_length_s);

  for (std::int64_t s0 = window.t_ref + shared.phase_s; s0 < window.end();
       s0 += period) {
    if (rng.uniform01() >= kSessionAttendance) continue;
    const std::int64_t s1 = std::min(s0 + len, window.end());
    const auto lo = std::lower_bound(
        shared.tweets.begin(), shared.tweets.end(), s0,
        [](const auto& tw, std::int64_t v) { return tw.second < v; });
    // every member walks the same session feed and retweets each tweet at a
    // uniform moment before the session closes, so the source is always
    // bounded below by the session start and the delay by the elapsed time
    for (auto it = lo; it != shared.tweets.end() && it->second < s1; ++it) {
      if (rng.uniform01() >= kTriangularParticipation) continue;
      const std::int64_t span = s1 - it->second;
      const std::int64_t rt = it->second + (span > 1 ? rng.uniform_int(0, span - 1) : 0);
      if (!window.contains(rt)) continue;
      events.push_back(make_event(user_id, rt_seq, rt, it->first, it->second));
    }
  }
  return events;
}

std::vector<RetweetEvent> gen_waterfall(const BehaviorSpec& spec,
                                        const AnalysisWindow& window, Rng& rng,
                                        const SharedStream& shared,
                                        const std::string& user_id) {
  std::vector<RetweetEvent> events;
  std::size_t rt_seq = 0;
  const auto jitter = static_cast<std::int64_t>(spec.jitter_s);

  for (const auto& [r0, want] : shared.runs) {
    if (rng.uniform01() >= kRunAttendance) continue;
    std::int64_t start = r0 + (jitter > 0 ? rng.uniform_int(-jitter, jitter) : 0);
    if (start < window.t_ref) start = window.t_ref;
    if (start >= window.end()) continue;

    // walk the shared feed in reverse chronological order, at most 3 days back
    auto it = std::lower_bound(
        shared.tweets.begin(), shared.tweets.end(), start,
        [](const auto& tw, std::int64_t v) { return tw.second < v; });
    std::int64_t rt = start;
    std::int64_t taken = 0;
    while (it != shared.tweets.begin() && taken < want) {
      --it;
      if (it->second < start - kWaterfallLookbackS) break;
      if (rt >= window.end()) break;
      events.push_back(make_event(user_id, rt_seq, rt, it->first, it->second));
      rt += rng.uniform_int(1, 5);
      ++taken;
    }
  }
  return events;
}

}  // namespace

std::vector<RetweetEvent> gen_bot(const BehaviorSpec& spec,
                                  const AnalysisWindow& window, Rng& rng,
                                  const SharedStream& shared,
                                  const std::string& user_id) {
  spec.validate();
  if (spec.kind == BehaviorKind::human)
    throw ConfigError("gen_bot: kind must be a bot pattern");
  if (!spec.botnet_id.empty() && shared.tweets.empty())
    throw ConfigError("gen_bot: botnet " + spec.botnet_id +
                      " has no shared stream");

  std::vector<RetweetEvent> events;
  switch (spec.kind) {
    case BehaviorKind::straight_line:
      events = gen_straight_line(spec, window, rng, shared, user_id);
      break;
    case BehaviorKind::triangular:
      events = gen_triangular(spec, window, rng, shared, user_id);
      break;
    default:
      events = gen_waterfall(spec, window, rng, shared, user_id);
      break;
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const RetweetEvent& a, const RetweetEvent& b) {
                     if (a.retweet_ts != b.retweet_ts)
                       return a.retweet_ts < b.retweet_ts;
                     return a.retweet_id < b.retweet_id;
                   });
  return events;
}

CorpusSpec default_corpus_spec() {
  CorpusSpec spec;

  AccountGroup humans;
  humans.behavior.kind = BehaviorKind::human;
  humans.behavior.rate_per_day = 7.0;
  humans.count = 200;
  humans.rate_min = 3.5;
  humans.rate_max = 45.0;
  spec.groups.push_back(humans);

  AccountGroup straight;
  straight.behavior.kind = BehaviorKind::straight_line;
  straight.behavior.rate_per_day = 15.0;
  straight.behavior.session_period_s = 4 * 3600.0;
  straight.behavior.session_length_s = 30 * 60.0;
  straight.behavior.jitter_s = 30.0;
  straight.behavior.botnet_id = "sl0";
  straight.count = 40;
  spec.groups.push_back(straight);

  AccountGroup triangular;
  triangular.behavior.kind = BehaviorKind::triangular;
  triangular.behavior.rate_per_day = 12.0;
  triangular.behavior.session_period_s = 6 * 3600.0;
  triangular.behavior.session_length_s = 45 * 60.0;
  triangular.behavior.jitter_s = 30.0;
  triangular.behavior.botnet_id = "tr0";
  triangular.count = 60;
  spec.groups.push_back(triangular);

  AccountGroup waterfall;
  waterfall.behavior.kind = BehaviorKind::waterfall;
  waterfall.behavior.rate_per_day = 26.0;
  waterfall.behavior.session_period_s = 10 * 3600.0;
  waterfall.behavior.session_length_s = 60.0;  // run spacing, not dwell time
  waterfall.behavior.jitter_s = 30.0;
  waterfall.behavior.botnet_id = "wf0";
  waterfall.count = 100;
  spec.groups.push_back(waterfall);

  return spec;
}

LabeledCorpus gen_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  LabeledCorpus corpus;
  corpus.seed = seed;

  for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
    const AccountGroup& group = spec.groups[gi];
    if (group.count < 0) throw ConfigError("gen_corpus: negative group count");
    BehaviorSpec behavior = group.behavior;
    const bool is_human = behavior.kind == BehaviorKind::human;

    SharedStream shared;
    if (!is_human) {
      if (behavior.botnet_id.empty())
        behavior.botnet_id = "bn" + std::to_string(gi);
      Rng pool_rng(derive_seed(seed, 0x700000 + gi));
      shared = gen_shared_stream(behavior, spec.window, pool_rng,
                                 behavior.botnet_id);
    }

    for (int ai = 0; ai < group.count; ++ai) {
      char uid[32];
      std::snprintf(uid, sizeof uid, "a%02zu%04d", gi, ai);
      Rng rng(derive_seed(seed, gi * 1000003ULL +
                                    static_cast<std::uint64_t>(ai) + 1));
      BehaviorSpec acct = behavior;
      if (is_human && group.rate_min > 0 && group.rate_max > group.rate_min)
        acct.rate_per_day = std::exp(
            rng.uniform(std::log(group.rate_min), std::log(group.rate_max)));

      std::vector<RetweetEvent> events;
      if (is_human)
        events = gen_human(acct, spec.window, rng, uid);
      else
        events = gen_bot(acct, spec.window, rng, shared, uid);
      corpus.truth[uid] = is_human ? Label::human : Label::bot;
      corpus.events.insert(corpus.events.end(),
                           std::make_move_iterator(events.begin()),
                           std::make_move_iterator(events.end()));
    }
  }

  std::sort(corpus.events.begin(), corpus.events.end(),
            [](const RetweetEvent& a, const RetweetEvent& b) {
              if (a.retweet_ts != b.retweet_ts) return a.retweet_ts < b.retweet_ts;
              return a.retweet_id < b.retweet_id;
            });
  return corpus;
}

CorpusSpec parse_corpus_spec_file(const std::string& path) {
  if (path.empty()) return default_corpus_spec();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus spec file: " + path);

  CorpusSpec spec;
  spec.groups.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;

    const auto parse_kv = [&](const std::string& t) {
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("corpus spec line " + std::to_string(lineno) +
                          ": expected key=value, got '" + t + "'");
      return std::pair{t.substr(0, eq), t.substr(eq + 1)};
    };

    if (tok == "group") {
      AccountGroup g;
      while (ls >> tok) {
        auto [k, v] = parse_kv(tok);
        if (k == "kind") g.behavior.kind = behavior_kind_from_string(v);
        else if (k == "count") g.count = std::stoi(v);
        else if (k == "rate") g.behavior.rate_per_day = std::stod(v);
        else if (k == "rate_min") g.rate_min = std::stod(v);
        else if (k == "rate_max") g.rate_max = std::stod(v);
        else if (k == "period") g.behavior.session_period_s = std::stod(v);
        else if (k == "length") g.behavior.session_length_s = std::stod(v);
        else if (k == "jitter") g.behavior.jitter_s = std::stod(v);
        else if (k == "botnet") g.behavior.botnet_id = v;
        else
          throw ConfigError("corpus spec line " + std::to_string(lineno) +
                            ": unknown group key '" + k + "'");
      }
      spec.groups.push_back(g);
    } else {
      auto [k, v] = parse_kv(tok);
      if (k == "window_start") spec.window.t_ref = std::stoll(v);
      else if (k == "window_days")
        spec.window.duration_s = std::stoll(v) * kSecondsPerDay;
      else
        throw ConfigError("corpus spec line " + std::to_string(lineno) +
                          ": unknown key '" + k + "'");
    }
  }
  if (spec.groups.empty())
    throw ConfigError("corpus spec file defines no groups: " + path);
  return spec;
}

}  // namespace rtbust
