#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <stack>
#include <string>
#include <vector>

#include "rtbust/errors.hpp"
#include "rtbust/rtt.hpp"
#include "rtbust/synth.hpp"

using namespace rtbust;

namespace {

const AnalysisWindow kWindow{1529193600, 14 * kSecondsPerDay};

/// Minimal structural validator: well-formed XML with balanced tags, quoted
/// attributes, a single svg root carrying the namespace, and only elements
/// from the SVG vocabulary this emitter uses.
bool validate_svg(const std::string& svg) {
  if (svg.rfind("<?xml", 0) != 0) return false;
  static const std::regex tag_re(
      "<(/?)([A-Za-z]+)((?:\\s+[A-Za-z][A-Za-z0-9-]*=\"[^\"<>]*\")*)\\s*(/?)>");
  static const std::vector<std::string> allowed = {
      "svg", "rect", "line", "circle", "g", "text"};
  std::stack<std::string> open;
  bool seen_root = false;
  auto begin = std::sregex_iterator(svg.begin(), svg.end(), tag_re);
  std::size_t covered = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const std::smatch& m = *it;
    covered += m.length(0);
    const bool closing = m[1].length() > 0;
    const bool self_closing = m[4].length() > 0;
    const std::string name = m[2].str();
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      return false;
    if (closing) {
      if (open.empty() || open.top() != name) return false;
      open.pop();
    } else if (!self_closing) {
      if (name == "svg") {
        if (seen_root) return false;
        seen_root = true;
        if (m[3].str().find("xmlns=\"http://www.w3.org/2000/svg\"") ==
            std::string::npos)
          return false;
      }
      open.push(name);
    }
  }
  // every non-whitespace byte outside the prolog must belong to a tag
  std::size_t content = 0;
  for (std::size_t i = svg.find("?>") + 2; i < svg.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(svg[i]))) ++content;
  std::size_t tag_bytes = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    std::string t = it->str();
    for (char c : t)
      if (!std::isspace(static_cast<unsigned char>(c))) ++tag_bytes;
  }
  return seen_root && open.empty() && content == tag_bytes;
}

std::vector<std::pair<double, double>> circle_centers(const std::string& svg) {
  static const std::regex c_re(
      "<circle cx=\"([0-9.e+-]+)\" cy=\"([0-9.e+-]+)\"");
  std::vector<std::pair<double, double>> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), c_re);
       it != std::sregex_iterator(); ++it)
    out.emplace_back(std::stod((*it)[1].str()), std::stod((*it)[2].str()));
  return out;
}

UserSeries one_event_series() {
  UserSeries s;
  s.user_id = "u";
  s.window = kWindow;
  s.events.push_back({"u", "r0", kWindow.t_ref + 600000,
                      "s0", kWindow.t_ref + 300000});
  return s;
}

}  // namespace

TEST_CASE("empty series renders a valid figure with no markers") {
  UserSeries s;
  s.user_id = "u";
  s.window = kWindow;
  const std::string svg = rtt_single(s, kWindow);
  CHECK(validate_svg(svg));
  CHECK(circle_centers(svg).empty());
  CHECK(svg.find("<line") != std::string::npos);  // the diagonal
}

TEST_CASE("single event maps to the expected pixel") {
  const RttOptions opt;
  const std::string svg = rtt_single(one_event_series(), kWindow, opt);
  CHECK(validate_svg(svg));
  const auto centers = circle_centers(svg);
  REQUIRE(centers.size() == 1);
  const double span = static_cast<double>(kWindow.duration_s);
  const double ex = opt.margin_px + 600000.0 / span * opt.plot_px;
  const double ey = opt.margin_px + (span - 300000.0) / span * opt.plot_px;
  CHECK(centers[0].first == doctest::Approx(ex).epsilon(1e-4));
  CHECK(centers[0].second == doctest::Approx(ey).epsilon(1e-4));
}

TEST_CASE("rendering is byte-deterministic") {
  const std::string a = rtt_single(one_event_series(), kWindow);
  const std::string b = rtt_single(one_event_series(), kWindow);
  CHECK(a == b);
}

TEST_CASE("group of one equals the single-account figure") {
  const UserSeries s = one_event_series();
  CHECK(rtt_group({s}, kWindow) == rtt_single(s, kWindow));
  CHECK_THROWS_AS(rtt_group({}, kWindow), ConfigError);
}

TEST_CASE("no marker rises above the diagonal on synthetic accounts") {
  CorpusSpec spec = default_corpus_spec();
  for (auto& g : spec.groups) g.count = 4;
  const LabeledCorpus corpus = gen_corpus(spec, 9);
  const SeriesMap series = build_user_series(corpus.events, spec.window);

  const RttOptions opt;
  std::vector<UserSeries> group;
  for (const auto& [id, s] : series) group.push_back(s);
  const std::string svg = rtt_group(group, spec.window, opt);
  CHECK(validate_svg(svg));

  // on-or-below the identity line in pixel space: cx + cy >= 2m + size
  const auto centers = circle_centers(svg);
  std::size_t total_events = 0;
  for (const auto& s : group) total_events += s.events.size();
  REQUIRE(centers.size() == total_events);
  for (const auto& [cx, cy] : centers)
    CHECK(cx + cy >= 2.0 * opt.margin_px + opt.plot_px - 0.05);
}

TEST_CASE("straight line bots hug the diagonal band") {
  CorpusSpec spec = default_corpus_spec();
  spec.groups = {spec.groups[1]};
  spec.groups[0].count = 1;
  const LabeledCorpus corpus = gen_corpus(spec, 77);
  const SeriesMap series = build_user_series(corpus.events, spec.window);
  REQUIRE(series.size() == 1);

  const RttOptions opt;
  const std::string svg = rtt_single(series.begin()->second, spec.window, opt);
  const auto centers = circle_centers(svg);
  REQUIRE(!centers.empty());
  // delay <= 10 s is far below one pixel at this scale
  const double band = 2.0 * opt.margin_px + opt.plot_px;
  std::size_t in_band = 0;
  for (const auto& [cx, cy] : centers)
    if (cx + cy <= band + 0.5) ++in_band;
  CHECK(static_cast<double>(in_band) >= 0.99 * static_cast<double>(centers.size()));
}

TEST_CASE("group colors cycle through the twelve-color palette") {
  CorpusSpec spec = default_corpus_spec();
  spec.groups = {spec.groups[3]};
  spec.groups[0].count = 44;
  const LabeledCorpus corpus = gen_corpus(spec, 8);
  const SeriesMap series = build_user_series(corpus.events, spec.window);
  REQUIRE(series.size() == 44);

  std::vector<UserSeries> group;
  for (const auto& [id, s] : series) group.push_back(s);
  const std::string svg = rtt_group(group, spec.window);

  static const std::regex g_re("<g fill=\"(#[0-9a-f]{6})\">");
  std::vector<std::string> colors;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), g_re);
       it != std::sregex_iterator(); ++it)
    colors.push_back((*it)[1].str());
  REQUIRE(colors.size() == 44);
  std::set<std::string> distinct(colors.begin(), colors.end());
  CHECK(distinct.size() == 12);
  CHECK(colors[0] == colors[12]);  // cyclic assignment

  std::size_t total_events = 0;
  for (const auto& s : group) total_events += s.events.size();
  CHECK(circle_centers(svg).size() == total_events);
}

TEST_CASE("inset rug carries one tick per plotted point") {
  const RttOptions opt;
  CorpusSpec spec = default_corpus_spec();
  spec.groups = {spec.groups[0]};
  spec.groups[0].count = 1;
  const LabeledCorpus corpus = gen_corpus(spec, 3);
  const SeriesMap series = build_user_series(corpus.events, spec.window);
  REQUIRE(series.size() == 1);
  const UserSeries& s = series.begin()->second;
  const std::string svg = rtt_single(s, spec.window, opt);

  const auto count = [&](const std::string& needle) {
    std::size_t c = 0, pos = 0;
    while ((pos = svg.find(needle, pos)) != std::string::npos) {
      ++c;
      pos += needle.size();
    }
    return c;
  };
  // lines = 1 diagonal + one rug tick per event
  CHECK(count("<line") == 1 + s.events.size());
}

TEST_CASE("zoom inset draws a second frame") {
  RttOptions opt;
  opt.zoom = {{kWindow.t_ref + 100000, kWindow.t_ref + 200000}};
  const std::string svg = rtt_single(one_event_series(), kWindow, opt);
  CHECK(validate_svg(svg));
  // two frames: two diagonals
  std::size_t frames = 0, pos = 0;
  while ((pos = svg.find("stroke=\"#888888\"", pos)) != std::string::npos) {
    ++frames;
    pos += 10;
  }
  CHECK(frames == 2);

  RttOptions bad;
  bad.zoom = {{10, 10}};
  CHECK_THROWS_AS(rtt_single(one_event_series(), kWindow, bad), ConfigError);
}
