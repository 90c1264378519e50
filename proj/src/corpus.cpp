#include "jsrda/corpus.hpp"

#include "jsrda/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace jsrda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kModule = "corpus";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(kModule, "cannot write file: " + path.string());
  return out;
}

double parse_double(std::string_view token, const fs::path& path, std::size_t line) {
  token = trim(token);
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last) {
    throw Error(kModule, path.string() + ":" + std::to_string(line) +
                             ": non-numeric token '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(kModule, path.string() + ":" + std::to_string(line) +
                             ": non-finite value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

Index MultiViewCorpus::sample_count() const {
  return views.empty() ? 0 : views.front().features.rows();
}

Index MultiViewCorpus::feature_dim() const {
  return views.empty() ? 0 : views.front().features.cols();
}

const Labels& MultiViewCorpus::labels() const {
  if (views.empty()) throw Error(kModule, "corpus has no views");
  return views.front().labels;
}

std::size_t MultiViewCorpus::view_index(const std::string& id) const {
  for (std::size_t v = 0; v < views.size(); ++v)
    if (views[v].id == id) return v;
  throw Error(kModule, "unknown view id '" + id + "'");
}

void MultiViewCorpus::validate() const {
  if (views.size() < 2)
    throw Error(kModule, "corpus needs at least 2 views, got " + std::to_string(views.size()));
  if (class_count < 1) throw Error(kModule, "class_count must be >= 1");
  const Index n = views.front().features.rows();
  const Index d = views.front().features.cols();
  for (const auto& view : views) {
    if (view.features.rows() < 1 || view.features.cols() < 1)
      throw Error(kModule, "view '" + view.id + "' has an empty feature matrix");
    if (view.features.rows() != n) {
      throw Error(kModule, "sample count mismatch: view '" + views.front().id + "' has " +
                               std::to_string(n) + ", view '" + view.id + "' has " +
                               std::to_string(view.features.rows()));
    }
    if (view.features.cols() != d) {
      throw Error(kModule, "feature dimension mismatch in view '" + view.id + "'");
    }
    if (!view.features.allFinite())
      throw Error(kModule, "view '" + view.id + "' contains non-finite features");
    if (static_cast<Index>(view.labels.size()) != n) {
      throw Error(kModule, "view '" + view.id + "' has " + std::to_string(view.labels.size()) +
                               " labels for " + std::to_string(n) + " samples");
    }
    for (std::size_t i = 0; i < view.labels.size(); ++i) {
      const int y = view.labels[i];
      if (y < 1 || y > class_count) {
        throw Error(kModule, "label " + std::to_string(y) + " at sample " + std::to_string(i) +
                                 " of view '" + view.id + "' outside [1.." +
                                 std::to_string(class_count) + "]");
      }
    }
  }
  const Labels& ref = views.front().labels;
  for (const auto& view : views) {
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (view.labels[i] != ref[i]) {
        throw Error(kModule, "label disagreement at sample " + std::to_string(i) +
                                 " between views '" + views.front().id + "' and '" + view.id +
                                 "'");
      }
    }
  }
}

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw Error("synth", "invalid field '" + field + "': " + rule);
  };
  require(views >= 2, "views", "must be >= 2");
  require(classes >= 1, "classes", "must be >= 1");
  require(samples_per_class >= 1, "samples_per_class", "must be >= 1");
  require(latent_dim >= 1, "latent_dim", "must be >= 1");
  require(observation_dim >= 1, "observation_dim", "must be >= 1");
  require(view_noise >= 0.0 && std::isfinite(view_noise), "view_noise", "must be >= 0");
  require(class_separation >= 0.0 && std::isfinite(class_separation), "class_separation",
          "must be >= 0");
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(kModule, "cannot format value");
  return std::string(buf.data(), ptr);
}

Matrix read_matrix_csv(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(kModule, path.string() + ":" + std::to_string(line_no) + ": ragged row with " +
                               std::to_string(row.size()) + " values, expected " +
                               std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(kModule, path.string() + ": no rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = open_output(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_exact(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw Error(kModule, "write failed: " + path.string());
}

Labels read_labels(const fs::path& path) {
  auto in = open_input(path);
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto token = trim(line);
    if (token.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(kModule, path.string() + ":" + std::to_string(line_no) +
                               ": non-integer label '" + std::string(token) + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

void write_labels(const fs::path& path, const Labels& labels) {
  auto out = open_output(path);
  for (int y : labels) out << y << '\n';
}

MultiViewCorpus load_corpus(const fs::path& manifest) {
  if (!fs::exists(manifest)) throw Error(kModule, "manifest not found: " + manifest.string());
  json doc;
  try {
    auto in = open_input(manifest);
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(kModule, "malformed manifest " + manifest.string() + ": " + e.what());
  }
  const fs::path base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  MultiViewCorpus corpus;
  try {
    corpus.class_count = doc.at("class_count").get<int>();
    for (const auto& entry : doc.at("views")) {
      ViewDataset view;
      view.id = entry.at("id").get<std::string>();
      view.features = read_matrix_csv(resolve(entry.at("features_csv").get<std::string>()));
      view.labels = read_labels(resolve(entry.at("labels_csv").get<std::string>()));
      corpus.views.push_back(std::move(view));
    }
  } catch (const json::exception& e) {
    throw Error(kModule, "malformed manifest " + manifest.string() + ": " + e.what());
  }
  corpus.validate();
  return corpus;
}

fs::path save_corpus(const MultiViewCorpus& corpus, const fs::path& dir) {
  corpus.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(kModule, "cannot create directory " + dir.string() + ": " + ec.message());
  json doc;
  doc["class_count"] = corpus.class_count;
  doc["views"] = json::array();
  for (const auto& view : corpus.views) {
    const std::string features = view.id + "_features.csv";
    const std::string labels = view.id + "_labels.csv";
    write_matrix_csv(dir / features, view.features);
    write_labels(dir / labels, view.labels);
    doc["views"].push_back({{"id", view.id}, {"features_csv", features}, {"labels_csv", labels}});
  }
  const fs::path manifest = dir / "manifest.json";
  auto out = open_output(manifest);
  out << doc.dump(2) << '\n';
  return manifest;
}

MultiViewCorpus synth_corpus(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols, double scale) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = scale * normal(rng);
    return m;
  };

  const Index latent = cfg.latent_dim;
  const Index d = cfg.observation_dim;
  const Index n = static_cast<Index>(cfg.classes) * cfg.samples_per_class;
  // Unit within-class spread and separation-scaled centres in latent space;
  // the view maps are scaled so observed samples have roughly unit norm.
  const double sep = cfg.class_separation;
  const Matrix centers = gaussian(latent, cfg.classes, sep / std::sqrt(double(latent)));
  Matrix latent_samples(latent, n);
  Labels labels(static_cast<std::size_t>(n));
  for (int c = 0; c < cfg.classes; ++c) {
    for (int s = 0; s < cfg.samples_per_class; ++s) {
      const Index i = static_cast<Index>(c) * cfg.samples_per_class + s;
      latent_samples.col(i) =
          centers.col(c) + gaussian(latent, 1, 1.0 / std::sqrt(double(latent)));
      labels[static_cast<std::size_t>(i)] = c + 1;
    }
  }

  const double map_scale = 1.0 / std::sqrt(double(d) * (sep * sep + 1.0));
  std::vector<Matrix> maps;
  for (int v = 0; v < cfg.views; ++v) {
    if (cfg.shared_transform && v > 0) {
      maps.push_back(maps.front());
    } else {
      maps.push_back(gaussian(d, latent, map_scale));
    }
  }

  MultiViewCorpus corpus;
  corpus.class_count = cfg.classes;
  for (int v = 0; v < cfg.views; ++v) {
    ViewDataset view;
    view.id = "C" + std::to_string(v);
    Matrix observed = maps[v] * latent_samples;
    if (cfg.view_noise > 0.0) observed += gaussian(d, n, cfg.view_noise / std::sqrt(double(d)));
    view.features = observed.transpose();
    view.labels = labels;
    corpus.views.push_back(std::move(view));
  }
  return corpus;
}

ClassSplit hold_out_class(const MultiViewCorpus& corpus, int held_class) {
  if (held_class < 1 || held_class > corpus.class_count) {
    throw Error(kModule, "held-out class " + std::to_string(held_class) + " outside [1.." +
                             std::to_string(corpus.class_count) + "]");
  }
  ClassSplit split;
  split.held_class = held_class;
  const Labels& labels = corpus.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto idx = static_cast<Index>(i);
    split.full.push_back(idx);
    if (labels[i] == held_class) {
      split.test.push_back(idx);
    } else {
      split.feature_learning.push_back(idx);
    }
  }
  if (split.test.empty())
    throw Error(kModule, "held-out class " + std::to_string(held_class) + " has no samples");
  return split;
}

Matrix select_columns(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

Labels select_labels(const Labels& labels, const std::vector<Index>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace jsrda
