#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rtbust/errors.hpp"
#include "rtbust/handcrafted.hpp"
#include "rtbust/io.hpp"
#include "rtbust/linproj.hpp"
#include "rtbust/pipeline.hpp"
#include "rtbust/rle.hpp"
#include "rtbust/rtt.hpp"
#include "rtbust/synth.hpp"
#include "rtbust/vectorize.hpp"

namespace {

using namespace rtbust;

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("missing input path: " + path);
}

SeriesMap load_filtered_series(const std::string& events_path,
                               const AnalysisWindow& window, double min_rate,
                               double max_rate, bool strict) {
  require_file(events_path);
  ParseStats stats;
  const auto events = read_events_file(events_path, stats, strict);
  if (stats.malformed > 0)
    std::cerr << "warning: skipped " << stats.malformed
              << " malformed lines\n";
  return filter_users(build_user_series(events, window), min_rate, max_rate);
}

int cmd_ingest(const std::string& input, std::int64_t window_start,
               int window_days, double min_rate, double max_rate, bool strict,
               const std::string& out) {
  const AnalysisWindow window{window_start, window_days * kSecondsPerDay};
  const SeriesMap series =
      load_filtered_series(input, window, min_rate, max_rate, strict);
  RleMap rles;
  for (const auto& [id, s] : series) rles.emplace(id, rle_encode(s));
  write_file_atomic(out, format_series(rles));
  std::cerr << "ingest: " << rles.size() << " users -> " << out << "\n";
  return 0;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed,
              const std::string& out, const std::string& truth_out) {
  if (!spec_path.empty()) require_file(spec_path);
  const CorpusSpec spec = parse_corpus_spec_file(spec_path);
  const LabeledCorpus corpus = gen_corpus(spec, seed);
  write_file_atomic(out, format_events_tsv(corpus.events));
  write_file_atomic(truth_out, format_truth_csv(corpus.truth));
  std::cerr << "synth: " << corpus.truth.size() << " accounts, "
            << corpus.events.size() << " events -> " << out << "\n";
  return 0;
}

int cmd_train_vae(const std::string& series_path, int dim, int seq_len,
                  int epochs, int batch_size, double lr, double beta,
                  std::uint64_t seed, const std::string& model_out) {
  require_file(series_path);
  const RleMap rles = read_series_file(series_path);
  const CorpusStats stats = fit_corpus_stats(rles);
  const FixedVectorMap vectors = vectorize_all(rles, seq_len, stats);

  VaeConfig cfg;
  cfg.latent_dim = dim;
  cfg.max_seq_len = seq_len;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.learning_rate = lr;
  cfg.kl_weight = beta;
  cfg.seed = seed;
  if (vectors.size() < static_cast<std::size_t>(cfg.batch_size))
    cfg.batch_size = std::max<int>(1, static_cast<int>(vectors.size()));
  const VaeTrainResult trained = vae_train(cfg, vectors, stats);
  save_vae_model(model_out, trained.model);
  std::cerr << "train-vae: epochs=" << trained.epoch_trace.size()
            << " final total=" << trained.epoch_trace.back().total << " -> "
            << model_out << "\n";
  return 0;
}

int cmd_features(const std::string& extractor, const std::string& series_path,
                 const std::string& events_path, std::int64_t window_start,
                 int window_days, int dim, int seq_len, int lag,
                 const std::string& model_path, const std::string& model_out,
                 const std::string& out) {
  require_file(series_path);
  const RleMap rles = read_series_file(series_path);
  LatentMap latents;

  if (extractor == "handcrafted") {
    if (events_path.empty())
      throw ConfigError("features: handcrafted extractor needs --events");
    if (window_start == 0)
      throw ConfigError(
          "features: handcrafted extractor needs --window-start");
    const AnalysisWindow window{window_start, window_days * kSecondsPerDay};
    require_file(events_path);
    ParseStats stats;
    const auto events = read_events_file(events_path, stats);
    const SeriesMap all = build_user_series(events, window);
    for (const auto& [id, rle] : rles) {
      const auto it = all.find(id);
      if (it == all.end())
        throw DataError("features: no events for series user " + id);
      const auto f = extract_handcrafted(it->second).as_array();
      latents.emplace(id, Eigen::Map<const Eigen::VectorXd>(f.data(), 12));
    }
  } else if (extractor == "vae") {
    if (model_path.empty())
      throw ConfigError("features: vae extractor needs --model");
    require_file(model_path);
    const VaeModel model = load_vae_model(model_path);
    const FixedVectorMap vectors =
        vectorize_all(rles, model.config.max_seq_len, model.stats);
    std::vector<std::string> warnings;
    latents = extract_latents(model, vectors, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  } else if (extractor == "pca" || extractor == "tica") {
    LinearProjector proj;
    if (!model_path.empty()) {
      require_file(model_path);
      proj = load_projector(model_path);
    } else {
      const CorpusStats stats = fit_corpus_stats(rles);
      const FixedVectorMap vectors = vectorize_all(rles, seq_len, stats);
      const Eigen::MatrixXd m = stack_rows(vectors);
      proj = extractor == "pca" ? pca_fit(m, dim) : tica_fit(m, dim, lag);
      proj.stats = stats;
      if (proj.rank_deficient)
        std::cerr << "warning: rank-deficient covariance, basis padded with "
                     "remaining orthonormal directions\n";
    }
    const FixedVectorMap vectors =
        vectorize_all(rles, proj.dim_in(), proj.stats);
    for (const auto& [id, fv] : vectors)
      latents.emplace(id, proj.transform(fv.values));
    if (!model_out.empty()) save_projector(model_out, proj);
  } else {
    throw ConfigError("features: unknown extractor '" + extractor + "'");
  }

  write_file_atomic(out, format_latents_csv(latents));
  std::cerr << "features: " << latents.size() << " users -> " << out << "\n";
  return 0;
}

int cmd_cluster(const std::string& latents_path, int min_cluster_size,
                int min_samples, const std::string& out) {
  require_file(latents_path);
  const LatentMap latents = read_latents_file(latents_path);
  std::vector<std::string> ids;
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(latents.size()),
                      latents.empty() ? 0 : latents.begin()->second.size());
  Eigen::Index r = 0;
  for (const auto& [id, v] : latents) {
    ids.push_back(id);
    pts.row(r++) = v.transpose();
  }
  ClusterParams params;
  params.min_cluster_size = min_cluster_size;
  params.min_samples = min_samples;
  const ClusterLabeling labeling = hdbscan(pts, params);
  write_file_atomic(out, format_clusters_csv(ids, labeling));
  std::cerr << "cluster: " << labeling.n_clusters << " clusters over "
            << ids.size() << " users -> " << out << "\n";
  return 0;
}

int cmd_detect(const std::string& clusters_path, const std::string& series_path,
               bool baseline, int window_days, const std::string& out) {
  DetectionResult result;
  if (baseline) {
    if (series_path.empty())
      throw ConfigError("detect: --baseline needs --series");
    require_file(series_path);
    const RleMap rles = read_series_file(series_path);
    std::map<std::string, double> rates;
    for (const auto& [id, rle] : rles)
      rates.emplace(id, static_cast<double>(rle.n_retweets) / window_days);
    result = baseline_from_rates(rates);
  } else {
    if (clusters_path.empty())
      throw ConfigError("detect: need --clusters (or --baseline)");
    require_file(clusters_path);
    for (const auto& [id, cluster] : read_clusters_file(clusters_path)) {
      const bool bot = cluster != kNoiseLabel;
      result[id] = {bot ? Label::bot : Label::human,
                    bot ? Provenance::clustered : Provenance::noise};
    }
  }
  write_file_atomic(out, format_labels_csv(result));
  std::cerr << "detect: " << result.size() << " accounts -> " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& out) {
  require_file(pred_path);
  require_file(truth_path);
  const DetectionResult pred = read_labels_file(pred_path);
  const TruthMap truth = read_truth_file(truth_path);
  const MetricsReport report = compute_metrics(pred, truth);
  write_file_atomic(out, format_report_json(report));
  std::printf("precision=%.4f recall=%.4f accuracy=%.4f f1=%.4f mcc=%.4f\n",
              report.precision, report.recall, report.accuracy, report.f1,
              report.mcc);
  return 0;
}

int cmd_rtt(const std::string& events_path, const std::string& user,
            const std::string& users_file, std::int64_t window_start,
            int window_days, const std::string& zoom, const std::string& out) {
  require_file(events_path);
  ParseStats stats;
  const auto events = read_events_file(events_path, stats);

  AnalysisWindow window{window_start, window_days * kSecondsPerDay};
  if (window_start == 0 && !events.empty()) {
    // default the window to the span of the data, floored to a day
    std::int64_t lo = events.front().retweet_ts;
    std::int64_t hi = lo;
    for (const auto& ev : events) {
      lo = std::min(lo, ev.retweet_ts);
      hi = std::max(hi, ev.retweet_ts);
    }
    window.t_ref = lo - (lo % kSecondsPerDay);
    window.duration_s =
        ((hi - window.t_ref) / kSecondsPerDay + 1) * kSecondsPerDay;
  }

  RttOptions options;
  if (!zoom.empty()) {
    const auto colon = zoom.find(':');
    if (colon == std::string::npos)
      throw ConfigError("rtt: --zoom expects t0:t1");
    options.zoom = {{std::stoll(zoom.substr(0, colon)),
                     std::stoll(zoom.substr(colon + 1))}};
  }

  const SeriesMap all = build_user_series(events, window);
  const auto series_of = [&](const std::string& id) {
    const auto it = all.find(id);
    if (it == all.end()) {
      UserSeries empty;
      empty.user_id = id;
      empty.window = window;
      return empty;
    }
    return it->second;
  };

  std::string svg;
  if (!users_file.empty()) {
    require_file(users_file);
    std::ifstream in(users_file);
    std::vector<UserSeries> group;
    std::string id;
    while (std::getline(in, id)) {
      if (!id.empty() && id.back() == '\r') id.pop_back();
      if (!id.empty()) group.push_back(series_of(id));
    }
    if (group.empty()) throw ConfigError("rtt: --users file lists no ids");
    svg = rtt_group(group, window, options);
  } else if (!user.empty()) {
    svg = rtt_single(series_of(user), window, options);
  } else {
    throw ConfigError("rtt: need --user or --users");
  }
  write_file_atomic(out, svg);
  std::cerr << "rtt: wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtbust: retweeter bot detection from retweet time series"};
  app.require_subcommand(1);
  app.set_config("--config", "", "optional key=value config file");

  try {
    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse, filter and RLE-encode");
    std::string in_input, in_out;
    std::int64_t in_start = 0;
    int in_days = 14;
    double in_min = kDefaultMinRate, in_max = kDefaultMaxRate;
    bool in_strict = false;
    ingest->add_option("--input", in_input)->required();
    ingest->add_option("--window-start", in_start)->required();
    ingest->add_option("--window-days", in_days);
    ingest->add_option("--min-rate", in_min);
    ingest->add_option("--max-rate", in_max);
    ingest->add_flag("--strict", in_strict);
    ingest->add_option("--out", in_out)->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled corpus");
    std::string sy_spec, sy_out, sy_truth;
    std::uint64_t sy_seed = 0;
    synth->add_option("--spec", sy_spec);
    synth->add_option("--seed", sy_seed)->envname("RTBUST_SEED");
    synth->add_option("--out", sy_out)->required();
    synth->add_option("--truth", sy_truth)->required();

    // features
    auto* features = app.add_subcommand("features", "extract latent features");
    std::string fe_extractor, fe_series, fe_events, fe_model, fe_model_out,
        fe_out;
    std::int64_t fe_start = 0;
    int fe_days = 14, fe_dim = 8, fe_len = kDefaultSeqLen, fe_lag = 1;
    features->add_option("--extractor", fe_extractor)->required();
    features->add_option("--series", fe_series)->required();
    features->add_option("--events", fe_events);
    features->add_option("--window-start", fe_start);
    features->add_option("--window-days", fe_days);
    features->add_option("--dim", fe_dim);
    features->add_option("--seq-len", fe_len);
    features->add_option("--lag", fe_lag);
    features->add_option("--model", fe_model);
    features->add_option("--model-out", fe_model_out);
    features->add_option("--out", fe_out)->required();

    // train-vae
    auto* train = app.add_subcommand("train-vae", "train the LSTM VAE");
    std::string tv_series, tv_model_out;
    int tv_dim = 8, tv_len = kDefaultSeqLen, tv_epochs = 50, tv_batch = 64;
    double tv_lr = 1e-3, tv_beta = 1.0;
    std::uint64_t tv_seed = 0;
    train->add_option("--series", tv_series)->required();
    train->add_option("--dim", tv_dim);
    train->add_option("--seq-len", tv_len);
    train->add_option("--epochs", tv_epochs);
    train->add_option("--batch-size", tv_batch);
    train->add_option("--learning-rate", tv_lr);
    train->add_option("--beta", tv_beta);
    train->add_option("--seed", tv_seed)->envname("RTBUST_SEED");
    train->add_option("--model-out", tv_model_out)->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "HDBSCAN over latents");
    std::string cl_latents, cl_out;
    int cl_mcs = 11, cl_k = 10;
    cluster->add_option("--latents", cl_latents)->required();
    cluster->add_option("--min-cluster-size", cl_mcs);
    cluster->add_option("--min-samples", cl_k);
    cluster->add_option("--out", cl_out)->required();

    // detect
    auto* detect = app.add_subcommand("detect", "clusters -> bot labels");
    std::string de_clusters, de_series, de_out;
    bool de_baseline = false;
    int de_days = 14;
    detect->add_option("--clusters", de_clusters);
    detect->add_option("--series", de_series);
    detect->add_flag("--baseline", de_baseline);
    detect->add_option("--window-days", de_days);
    detect->add_option("--out", de_out)->required();

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against truth");
    std::string ev_pred, ev_truth, ev_out;
    eval->add_option("--pred", ev_pred)->required();
    eval->add_option("--truth", ev_truth)->required();
    eval->add_option("--out", ev_out)->required();

    // rtt
    auto* rtt = app.add_subcommand("rtt", "emit an RTT scatterplot SVG");
    std::string rt_events, rt_user, rt_users, rt_zoom, rt_out;
    std::int64_t rt_start = 0;
    int rt_days = 14;
    rtt->add_option("--events", rt_events)->required();
    rtt->add_option("--user", rt_user);
    rtt->add_option("--users", rt_users);
    rtt->add_option("--window-start", rt_start);
    rtt->add_option("--window-days", rt_days);
    rtt->add_option("--zoom", rt_zoom);
    rtt->add_option("--out", rt_out)->required();

    // run
    auto* run = app.add_subcommand("run", "full pipeline");
    PipelineConfig cfg;
    std::int64_t run_start = 0;
    int run_days = 14;
    run->add_option("--input", cfg.events_path)->required();
    run->add_option("--truth", cfg.truth_path);
    run->add_option("--out-dir", cfg.out_dir);
    run->add_option("--window-start", run_start)->required();
    run->add_option("--window-days", run_days);
    run->add_option("--min-rate", cfg.min_rate);
    run->add_option("--max-rate", cfg.max_rate);
    run->add_option("--extractor", cfg.extractor);
    run->add_option("--dim", cfg.latent_dim);
    run->add_option("--seq-len", cfg.seq_len);
    run->add_option("--lag", cfg.tica_lag);
    run->add_option("--min-cluster-size", cfg.cluster.min_cluster_size);
    run->add_option("--min-samples", cfg.cluster.min_samples);
    run->add_option("--epochs", cfg.vae.epochs);
    run->add_option("--batch-size", cfg.vae.batch_size);
    run->add_option("--learning-rate", cfg.vae.learning_rate);
    run->add_option("--beta", cfg.vae.kl_weight);
    run->add_option("--seed", cfg.seed)->envname("RTBUST_SEED");
    run->add_flag("--strict", cfg.strict_parse);

    app.parse(argc, argv);

    if (ingest->parsed())
      return cmd_ingest(in_input, in_start, in_days, in_min, in_max, in_strict,
                        in_out);
    if (synth->parsed()) return cmd_synth(sy_spec, sy_seed, sy_out, sy_truth);
    if (features->parsed())
      return cmd_features(fe_extractor, fe_series, fe_events, fe_start, fe_days,
                          fe_dim, fe_len, fe_lag, fe_model, fe_model_out,
                          fe_out);
    if (train->parsed())
      return cmd_train_vae(tv_series, tv_dim, tv_len, tv_epochs, tv_batch,
                           tv_lr, tv_beta, tv_seed, tv_model_out);
    if (cluster->parsed()) return cmd_cluster(cl_latents, cl_mcs, cl_k, cl_out);
    if (detect->parsed())
      return cmd_detect(de_clusters, de_series, de_baseline, de_days, de_out);
    if (eval->parsed()) return cmd_eval(ev_pred, ev_truth, ev_out);
    if (rtt->parsed())
      return cmd_rtt(rt_events, rt_user, rt_users, rt_start, rt_days, rt_zoom,
                     rt_out);
    if (run->parsed()) {
      cfg.window = AnalysisWindow{run_start, run_days * kSecondsPerDay};
      cfg.window_set = true;
      const PipelineResult result = run_pipeline(cfg);
      std::cerr << "run: kept " << result.users_kept << "/"
                << result.users_total << " users\n";
      if (result.have_metrics)
        std::printf(
            "precision=%.4f recall=%.4f accuracy=%.4f f1=%.4f mcc=%.4f\n",
            result.metrics.precision, result.metrics.recall,
            result.metrics.accuracy, result.metrics.f1, result.metrics.mcc);
      return 0;
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  } catch (const rtbust::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
