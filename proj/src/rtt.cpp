#include "rtbust/rtt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rtbust/errors.hpp"

namespace rtbust {

namespace {

constexpr const char* kPalette[12] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double x0, y0, size;          // pixel rect (y0 is the top)
  double lo, hi;                // shared data range of both axes
  double px(std::int64_t t) const {
    return x0 + (static_cast<double>(t) - lo) / (hi - lo) * size;
  }
  double py(std::int64_t t) const {
    return y0 + (hi - static_cast<double>(t)) / (hi - lo) * size;
  }
};

void draw_frame(std::ostringstream& svg, const Frame& f) {
  svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\""
      << fmt(f.size) << "\" height=\"" << fmt(f.size)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt(f.x0) << "\" y1=\"" << fmt(f.y0 + f.size)
      << "\" x2=\"" << fmt(f.x0 + f.size) << "\" y2=\"" << fmt(f.y0)
      << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
}

void draw_points(std::ostringstream& svg, const Frame& f,
                 const std::vector<UserSeries>& series, double r,
                 bool clip_to_range) {
  for (std::size_t s = 0; s < series.size(); ++s) {
    svg << "<g fill=\"" << kPalette[s % 12] << "\">\n";
    for (const RetweetEvent& ev : series[s].events) {
      if (clip_to_range &&
          (static_cast<double>(ev.retweet_ts) < f.lo ||
           static_cast<double>(ev.retweet_ts) > f.hi ||
           static_cast<double>(ev.source_ts) < f.lo ||
           static_cast<double>(ev.source_ts) > f.hi))
        continue;
      svg << "<circle cx=\"" << fmt(f.px(ev.retweet_ts)) << "\" cy=\""
          << fmt(f.py(ev.source_ts)) << "\" r=\"" << fmt(r) << "\"/>\n";
    }
    svg << "</g>\n";
  }
}

void draw_delay_inset(std::ostringstream& svg, const Frame& plot,
                      const std::vector<UserSeries>& series,
                      const AnalysisWindow& window, int n_bins) {
  std::vector<std::int64_t> delays;
  for (const UserSeries& s : series)
    for (const RetweetEvent& ev : s.events)
      delays.push_back(ev.retweet_ts - ev.source_ts);
  if (delays.empty()) return;

  const double w = plot.size * 0.38, h = plot.size * 0.22;
  const double x0 = plot.x0 + plot.size - w - plot.size * 0.04;
  const double y0 = plot.y0 + plot.size - h - plot.size * 0.10;

  // log10-spaced bins over [1 s, window length]; out-of-range delays clamp
  // into the edge bins so every plotted point is counted exactly once
  const double logmax = std::log10(static_cast<double>(window.duration_s));
  std::vector<int> counts(static_cast<std::size_t>(n_bins), 0);
  const auto bin_of = [&](std::int64_t d) {
    const double ld =
        std::log10(static_cast<double>(std::max<std::int64_t>(d, 1)));
    auto b = static_cast<int>(ld / logmax * n_bins);
    return std::clamp(b, 0, n_bins - 1);
  };
  for (std::int64_t d : delays) ++counts[static_cast<std::size_t>(bin_of(d))];
  const int peak = *std::max_element(counts.begin(), counts.end());

  svg << "<g>\n<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
      << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"white\" stroke=\"#444444\" stroke-width=\"0.5\"/>\n";
  const double bw = w / n_bins;
  for (int b = 0; b < n_bins; ++b) {
    const int c = counts[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    const double bh = (h - 8) * c / peak;
    svg << "<rect x=\"" << fmt(x0 + b * bw) << "\" y=\""
        << fmt(y0 + h - 6 - bh) << "\" width=\"" << fmt(bw) << "\" height=\""
        << fmt(bh) << "\" fill=\"#666666\"/>\n";
  }
  // rug: one tick per delay along the log axis
  for (std::int64_t d : delays) {
    const double ld = std::log10(static_cast<double>(
        std::clamp<std::int64_t>(d, 1, window.duration_s)));
    const double x = x0 + ld / logmax * w;
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y0 + h - 5)
        << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(y0 + h - 1)
        << "\" stroke=\"#222222\" stroke-width=\"0.5\"/>\n";
  }
  svg << "</g>\n";
}

std::string render(const std::vector<UserSeries>& series,
                   const AnalysisWindow& window, const RttOptions& opt) {
  if (opt.plot_px < 64 || opt.margin_px < 0 || opt.inset_bins < 1)
    throw ConfigError("rtt: bad render options");

  // both axes share one range so the diagonal is the identity line;
  // sources older than the window extend the range downward
  std::int64_t lo = window.t_ref;
  for (const UserSeries& s : series)
    for (const RetweetEvent& ev : s.events) lo = std::min(lo, ev.source_ts);
  const std::int64_t hi = window.end();

  const double total = opt.plot_px + 2.0 * opt.margin_px;
  Frame plot{static_cast<double>(opt.margin_px),
             static_cast<double>(opt.margin_px),
             static_cast<double>(opt.plot_px), static_cast<double>(lo),
             static_cast<double>(hi)};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total)
      << "\" height=\"" << fmt(total) << "\" viewBox=\"0 0 " << fmt(total)
      << " " << fmt(total) << "\">\n";
  draw_frame(svg, plot);
  draw_points(svg, plot, series, opt.marker_px, false);
  draw_delay_inset(svg, plot, series, window, opt.inset_bins);

  if (opt.zoom) {
    const auto [z0, z1] = *opt.zoom;
    if (z1 <= z0) throw ConfigError("rtt: zoom interval must have t0 < t1");
    Frame zoom{plot.x0 + plot.size * 0.04, plot.y0 + plot.size * 0.04,
               plot.size * 0.30, static_cast<double>(z0),
               static_cast<double>(z1)};
    draw_frame(svg, zoom);
    draw_points(svg, zoom, series, opt.marker_px * 0.75, true);
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string rtt_single(const UserSeries& series, const AnalysisWindow& window,
                       const RttOptions& options) {
  return render({series}, window, options);
}

std::string rtt_group(const std::vector<UserSeries>& series,
                      const AnalysisWindow& window, const RttOptions& options) {
  if (series.empty()) throw ConfigError("rtt_group: need at least one series");
  return render(series, window, options);
}

}  // namespace rtbust
