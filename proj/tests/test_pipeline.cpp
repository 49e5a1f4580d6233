#include <doctest.h>

#include <filesystem>

#include "rtbust/errors.hpp"
#include "rtbust/io.hpp"
#include "rtbust/pipeline.hpp"
#include "rtbust/synth.hpp"

using namespace rtbust;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("missing input path is a configuration error naming the path") {
  PipelineConfig cfg;
  cfg.events_path = "/definitely/not/here.tsv";
  cfg.window = {0, kDefaultWindowSeconds};
  cfg.window_set = true;
  try {
    run_pipeline(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/definitely/not/here.tsv") !=
          std::string::npos);
  }
}

TEST_CASE("config validation rejects bad settings") {
  PipelineConfig cfg;
  cfg.events_path = "x";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // window not set
  cfg.window_set = true;
  cfg.extractor = "magic";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.extractor = "pca";
  cfg.min_rate = 9;
  cfg.max_rate = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("zero-account corpus is valid and empty") {
  CorpusSpec spec = default_corpus_spec();
  for (auto& g : spec.groups) g.count = 0;
  const LabeledCorpus corpus = gen_corpus(spec, 1);
  CHECK(corpus.events.empty());
  CHECK(corpus.truth.empty());
}

TEST_CASE("handcrafted pipeline runs end to end and restricts truth") {
  TempDir tmp("rtbust_pipe_test");
  CorpusSpec spec = default_corpus_spec();
  spec.groups[0].count = 30;
  spec.groups[1].count = 14;
  spec.groups[2].count = 0;
  spec.groups[3].count = 0;
  const LabeledCorpus corpus = gen_corpus(spec, 6);
  write_file_atomic(tmp.file("events.tsv"), format_events_tsv(corpus.events));
  write_file_atomic(tmp.file("truth.csv"), format_truth_csv(corpus.truth));

  PipelineConfig cfg;
  cfg.events_path = tmp.file("events.tsv");
  cfg.truth_path = tmp.file("truth.csv");
  cfg.out_dir = tmp.file("out");
  cfg.window = spec.window;
  cfg.window_set = true;
  cfg.extractor = "handcrafted";
  cfg.cluster.min_cluster_size = 8;
  cfg.cluster.min_samples = 5;
  cfg.seed = 6;

  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.users_total == 44);
  CHECK(r.have_metrics);
  CHECK(r.users_kept + r.truth_dropped == 44);
  for (const char* name : {"series.txt", "latents.csv", "clusters.csv",
                           "labels.csv", "report.json", "trace.log"})
    CHECK(std::filesystem::exists(tmp.file(std::string("out/") + name)));

  // the truth rows of filtered-out accounts leave the evaluation set
  const auto labels = read_labels_file(tmp.file("out/labels.csv"));
  CHECK(labels.size() == r.users_kept);
}
