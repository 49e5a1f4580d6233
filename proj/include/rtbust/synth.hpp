#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtbust/detect.hpp"
#include "rtbust/events.hpp"
#include "rtbust/rng.hpp"

namespace rtbust {

enum class BehaviorKind { human, straight_line, triangular, waterfall };

const char* to_string(BehaviorKind k);
BehaviorKind behavior_kind_from_string(const std::string& s);

/// Generation recipe for one account. Humans keep delays log-normal around
/// 5 minutes with occasional droplet bursts; the three bot kinds reproduce
/// the suspicious session-driven signatures. Session fields apply to bots
/// only; rate bounds, when set, draw per-account rates log-uniformly.
struct BehaviorSpec {
  BehaviorKind kind = BehaviorKind::human;
  double rate_per_day = 7.0;         // target mean retweets/day, in [2, 50]
  double session_period_s = 6 * 3600.0;
  double session_length_s = 40 * 60.0;
  double jitter_s = 30.0;            // per-account desynchronization
  std::string botnet_id;             // empty: not part of a botnet

  void validate() const;
};

/// A botnet's common pool of source tweets plus its shared schedule.
/// All member accounts retweet (subsets of) this pool; waterfall botnets
/// additionally share per-run target lengths.
struct SharedStream {
  std::vector<std::pair<std::string, std::int64_t>> tweets;  // (id, ts) asc
  std::int64_t phase_s = 0;  // offset of the first session/run after t_ref
  std::vector<std::pair<std::int64_t, std::int64_t>> runs;   // (start, length)
};

struct AccountGroup {
  BehaviorSpec behavior;
  int count = 0;
  // optional per-account rate band (log-uniform draw); 0/0 disables
  double rate_min = 0.0;
  double rate_max = 0.0;
};

struct CorpusSpec {
  AnalysisWindow window{1529193600, kDefaultWindowSeconds};  // 2018-06-17 UTC
  std::vector<AccountGroup> groups;
};

struct LabeledCorpus {
  std::vector<RetweetEvent> events;  // global (retweet_ts, retweet_id) order
  TruthMap truth;
  std::uint64_t seed = 0;
};

std::vector<RetweetEvent> gen_human(const BehaviorSpec& spec,
                                    const AnalysisWindow& window, Rng& rng,
                                    const std::string& user_id);

SharedStream gen_shared_stream(const BehaviorSpec& spec,
                               const AnalysisWindow& window, Rng& rng,
                               const std::string& botnet_id);

std::vector<RetweetEvent> gen_bot(const BehaviorSpec& spec,
                                  const AnalysisWindow& window, Rng& rng,
                                  const SharedStream& shared,
                                  const std::string& user_id);

/// The corpus used by the acceptance suite: 200 humans plus botnets of
/// 40 straight-line, 60 triangular and 100 waterfall accounts.
CorpusSpec default_corpus_spec();

/// Deterministic given seed: per-account substreams are derived from the
/// seed and the account's index, never from generation order.
LabeledCorpus gen_corpus(const CorpusSpec& spec, std::uint64_t seed);

/// Parses the synth config file (one `group ...` line per account group,
/// plus optional window_start/window_days lines). Returns the default
/// corpus spec when path is empty.
CorpusSpec parse_corpus_spec_file(const std::string& path);

}  // namespace rtbust
