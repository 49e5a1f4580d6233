#include "rtbust/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtbust/errors.hpp"

namespace rtbust {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

void write_tensor_block(std::ostream& os, const char* name,
                        const Eigen::Ref<const Eigen::MatrixXd>& m) {
  os << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << " ";
      os << g17(m(r, c));
    }
    os << "\n";
  }
}

Eigen::MatrixXd read_tensor_block(std::istream& is, const std::string& want,
                                  const std::string& path) {
  std::string tag, name;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> tag >> name >> rows >> cols) || tag != "tensor" || name != want)
    throw DataError("model file " + path + ": expected tensor block '" + want +
                    "'");
  if (rows < 0 || cols < 0 || rows * cols > (1LL << 28))
    throw DataError("model file " + path + ": implausible tensor shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(is >> m(r, c)))
        throw DataError("model file " + path + ": truncated tensor '" + want +
                        "'");
  return m;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp);
    out << content;
    if (!out) throw DataError("write failure: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp + " to " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_events_tsv(const std::vector<RetweetEvent>& events) {
  std::ostringstream os;
  for (const RetweetEvent& ev : events)
    os << ev.user_id << '\t' << ev.retweet_id << '\t' << ev.retweet_ts << '\t'
       << ev.source_tweet_id << '\t' << ev.source_ts << '\n';
  return os.str();
}

std::vector<RetweetEvent> read_events_file(const std::string& path,
                                           ParseStats& stats, bool strict) {
  auto in = open_in(path);
  return parse_events(in, stats, strict);
}

std::string format_truth_csv(const TruthMap& truth) {
  std::ostringstream os;
  os << "user_id,label\n";
  for (const auto& [id, label] : truth) os << id << ',' << to_string(label) << '\n';
  return os.str();
}

TruthMap read_truth_file(const std::string& path) {
  auto in = open_in(path);
  TruthMap truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    if (lineno == 1 && line == "user_id,label") continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 || (fields[1] != "bot" && fields[1] != "human"))
      throw DataError("truth file " + path + ": bad row at line " +
                      std::to_string(lineno));
    truth[fields[0]] = fields[1] == "bot" ? Label::bot : Label::human;
  }
  return truth;
}

std::string format_series(const RleMap& series) {
  std::ostringstream os;
  for (const auto& [id, rle] : series) {
    os << id;
    for (std::int64_t v : rle.values) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

RleMap read_series_file(const std::string& path) {
  auto in = open_in(path);
  RleMap out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    RleSequence rle;
    std::int64_t v;
    while (ls >> v) {
      rle.values.push_back(v);
      if (v >= 0) ++rle.n_retweets;
    }
    if (!out.emplace(id, std::move(rle)).second)
      throw DataError("series file " + path + ": duplicate user " + id);
  }
  return out;
}

std::string format_latents_csv(const LatentMap& latents) {
  std::ostringstream os;
  for (const auto& [id, v] : latents) {
    os << id;
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << g9(v[i]);
    os << '\n';
  }
  return os.str();
}

LatentMap read_latents_file(const std::string& path) {
  auto in = open_in(path);
  LatentMap out;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    const auto fields = split(line, ',');
    if (fields.size() < 2)
      throw DataError("latents file " + path + ": bad row at line " +
                      std::to_string(lineno));
    Eigen::VectorXd v(static_cast<Eigen::Index>(fields.size()) - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        v[static_cast<Eigen::Index>(i - 1)] = std::stod(fields[i]);
      } catch (const std::exception&) {
        throw DataError("latents file " + path + ": bad value at line " +
                        std::to_string(lineno));
      }
    }
    if (dim < 0) dim = v.size();
    if (v.size() != dim)
      throw DataError("latents file " + path + ": inconsistent dimensions");
    out.emplace(fields[0], std::move(v));
  }
  return out;
}

std::string format_clusters_csv(const std::vector<std::string>& user_ids,
                                const ClusterLabeling& labeling) {
  if (user_ids.size() != labeling.labels.size())
    throw DataError("format_clusters_csv: size mismatch");
  std::ostringstream os;
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    const int c = labeling.labels[i];
    const double st = c >= 0 ? labeling.stability.at(c) : 0.0;
    os << user_ids[i] << ',' << c << ',' << g9(st) << '\n';
  }
  return os.str();
}

std::map<std::string, int> read_clusters_file(const std::string& path) {
  auto in = open_in(path);
  std::map<std::string, int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    const auto fields = split(line, ',');
    if (fields.size() != 3)
      throw DataError("clusters file " + path + ": bad row at line " +
                      std::to_string(lineno));
    out[fields[0]] = std::stoi(fields[1]);
  }
  return out;
}

std::string format_labels_csv(const DetectionResult& result) {
  std::ostringstream os;
  for (const auto& [id, det] : result)
    os << id << ',' << to_string(det.label) << ',' << to_string(det.provenance)
       << '\n';
  return os.str();
}

DetectionResult read_labels_file(const std::string& path) {
  auto in = open_in(path);
  DetectionResult out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    const auto fields = split(line, ',');
    if (fields.size() < 2 || (fields[1] != "bot" && fields[1] != "human"))
      throw DataError("labels file " + path + ": bad row at line " +
                      std::to_string(lineno));
    Detection det;
    det.label = fields[1] == "bot" ? Label::bot : Label::human;
    if (fields.size() >= 3) {
      if (fields[2] == "clustered") det.provenance = Provenance::clustered;
      else if (fields[2] == "noise") det.provenance = Provenance::noise;
      else det.provenance = Provenance::baseline;
    }
    out[fields[0]] = det;
  }
  return out;
}

std::string format_report_json(const MetricsReport& r) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"tp\": " << r.tp << ",\n";
  os << "  \"fp\": " << r.fp << ",\n";
  os << "  \"fn\": " << r.fn << ",\n";
  os << "  \"tn\": " << r.tn << ",\n";
  os << "  \"precision\": " << g17(r.precision) << ",\n";
  os << "  \"recall\": " << g17(r.recall) << ",\n";
  os << "  \"accuracy\": " << g17(r.accuracy) << ",\n";
  os << "  \"f1\": " << g17(r.f1) << ",\n";
  os << "  \"mcc\": " << g17(r.mcc) << ",\n";
  os << "  \"degenerate_metrics\": \"";
  for (std::size_t i = 0; i < r.degenerate_metrics.size(); ++i) {
    if (i > 0) os << ' ';
    os << r.degenerate_metrics[i];
  }
  os << "\"\n}\n";
  return os.str();
}

void save_vae_model(const std::string& path, const VaeModel& model) {
  std::ostringstream os;
  os << "RTBUST-VAE v1 d=" << model.config.latent_dim
     << " h=" << model.config.lstm_hidden << " L=" << model.config.max_seq_len
     << "\n";
  Eigen::MatrixXd stats(1, 2);
  stats << model.stats.mean, model.stats.stddev;
  write_tensor_block(os, "norm_stats", stats);
  for (int i = 0; i < kVaeTensorCount; ++i) {
    const auto& b = model.layout.blocks[static_cast<std::size_t>(i)];
    write_tensor_block(os, b.name,
                       Eigen::Map<const Eigen::MatrixXd>(
                           model.theta.data() + b.offset, b.rows, b.cols));
  }
  write_file_atomic(path, os.str());
}

VaeModel load_vae_model(const std::string& path) {
  auto in = open_in(path);
  std::string magic, version, dd, hh, ll;
  if (!(in >> magic >> version >> dd >> hh >> ll) || magic != "RTBUST-VAE" ||
      version != "v1" || dd.rfind("d=", 0) != 0 || hh.rfind("h=", 0) != 0 ||
      ll.rfind("L=", 0) != 0)
    throw DataError("model file " + path + ": bad or incompatible header");

  VaeConfig cfg;
  try {
    cfg.latent_dim = std::stoi(dd.substr(2));
    cfg.lstm_hidden = std::stoi(hh.substr(2));
    cfg.max_seq_len = std::stoi(ll.substr(2));
  } catch (const std::exception&) {
    throw DataError("model file " + path + ": bad header values");
  }
  VaeModel model(cfg);
  const Eigen::MatrixXd stats = read_tensor_block(in, "norm_stats", path);
  if (stats.rows() != 1 || stats.cols() != 2)
    throw DataError("model file " + path + ": bad norm_stats shape");
  model.stats.mean = stats(0, 0);
  model.stats.stddev = stats(0, 1);
  for (int i = 0; i < kVaeTensorCount; ++i) {
    const auto& b = model.layout.blocks[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd m = read_tensor_block(in, b.name, path);
    if (m.rows() != b.rows || m.cols() != b.cols)
      throw DataError("model file " + path + ": tensor shape mismatch for " +
                      b.name);
    Eigen::Map<Eigen::MatrixXd>(model.theta.data() + b.offset, b.rows, b.cols) =
        m;
  }
  return model;
}

void save_projector(const std::string& path, const LinearProjector& proj) {
  std::ostringstream os;
  os << "RTBUST-LINPROJ v1 kind=" << to_string(proj.kind)
     << " d=" << proj.dim_out() << " L=" << proj.dim_in()
     << " lag=" << proj.lag << "\n";
  Eigen::MatrixXd stats(1, 3);
  stats << proj.stats.mean, proj.stats.stddev, proj.total_variance;
  write_tensor_block(os, "norm_stats", stats);
  write_tensor_block(os, "mean", proj.mean);
  write_tensor_block(os, "basis", proj.basis);
  write_tensor_block(os, "eigenvalues", proj.eigenvalues);
  write_file_atomic(path, os.str());
}

LinearProjector load_projector(const std::string& path) {
  auto in = open_in(path);
  std::string magic, version, kind, dd, ll, lag;
  if (!(in >> magic >> version >> kind >> dd >> ll >> lag) ||
      magic != "RTBUST-LINPROJ" || version != "v1" ||
      kind.rfind("kind=", 0) != 0 || dd.rfind("d=", 0) != 0 ||
      ll.rfind("L=", 0) != 0 || lag.rfind("lag=", 0) != 0)
    throw DataError("projector file " + path + ": bad or incompatible header");

  LinearProjector p;
  const std::string kind_s = kind.substr(5);
  if (kind_s == "pca") p.kind = ProjectorKind::pca;
  else if (kind_s == "tica") p.kind = ProjectorKind::tica;
  else throw DataError("projector file " + path + ": unknown kind " + kind_s);
  p.lag = std::stoi(lag.substr(4));

  const Eigen::MatrixXd stats = read_tensor_block(in, "norm_stats", path);
  if (stats.rows() != 1 || stats.cols() != 3)
    throw DataError("projector file " + path + ": bad norm_stats shape");
  p.stats.mean = stats(0, 0);
  p.stats.stddev = stats(0, 1);
  p.total_variance = stats(0, 2);
  p.mean = read_tensor_block(in, "mean", path);
  p.basis = read_tensor_block(in, "basis", path);
  p.eigenvalues = read_tensor_block(in, "eigenvalues", path);
  const auto d = std::stoll(dd.substr(2));
  const auto L = std::stoll(ll.substr(2));
  if (p.basis.rows() != L || p.basis.cols() != d || p.mean.size() != L ||
      p.eigenvalues.size() != d)
    throw DataError("projector file " + path + ": tensor shape mismatch");
  return p;
}

}  // namespace rtbust
