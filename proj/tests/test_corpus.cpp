#include "jsrda/corpus.hpp"
#include "jsrda/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <json.hpp>

#include <map>

using namespace jsrda;

namespace {

// Two-view manifest over hand-written CSVs.
std::filesystem::path write_two_views(const ScratchDir& dir, const std::string& f0,
                                      const std::string& l0, const std::string& f1,
                                      const std::string& l1, int classes) {
  write_file(dir / "a.csv", f0);
  write_file(dir / "a_labels.csv", l0);
  write_file(dir / "b.csv", f1);
  write_file(dir / "b_labels.csv", l1);
  nlohmann::json m = {{"class_count", classes},
                      {"views",
                       {{{"id", "A"}, {"features_csv", "a.csv"}, {"labels_csv", "a_labels.csv"}},
                        {{"id", "B"}, {"features_csv", "b.csv"}, {"labels_csv", "b_labels.csv"}}}}};
  write_file(dir / "manifest.json", m.dump());
  return dir / "manifest.json";
}

std::string rows_of(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += std::to_string(i) + ",1\n";
  return s;
}

std::string labels_of(int n, int label) {
  std::string s;
  for (int i = 0; i < n; ++i) s += std::to_string(label) + "\n";
  return s;
}

}  // namespace

TEST_CASE("csv parses a small matrix") {
  ScratchDir dir("csv");
  write_file(dir / "m.csv", "1,2\n3,4");
  const Matrix m = read_matrix_csv(dir / "m.csv");
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(1, 0) == 3.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("csv errors carry the line number") {
  ScratchDir dir("csv");
  write_file(dir / "ragged.csv", "1,2\n3");
  const std::string ragged = error_text([&] { read_matrix_csv(dir / "ragged.csv"); });
  CHECK(ragged.find(":2:") != std::string::npos);
  CHECK(ragged.find("ragged") != std::string::npos);

  write_file(dir / "text.csv", "1,2\n3,4\n5,x\n");
  const std::string bad = error_text([&] { read_matrix_csv(dir / "text.csv"); });
  CHECK(bad.find(":3:") != std::string::npos);

  const std::string missing = error_text([&] { read_matrix_csv(dir / "absent.csv"); });
  CHECK(missing.find("absent.csv") != std::string::npos);
}

TEST_CASE("csv round trip is bit exact") {
  ScratchDir dir("csv");
  std::mt19937_64 rng(11);
  Matrix m = oracle::gaussian(5, 7, rng, 1e3);
  m(0, 0) = 1.0 / 3.0;
  m(1, 1) = -0.0;
  m(2, 2) = 5e-310;  // subnormal
  m(3, 3) = 1.7976931348623157e308;
  write_matrix_csv(dir / "m.csv", m);
  const Matrix back = read_matrix_csv(dir / "m.csv");
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 7);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 7; ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("load_corpus accepts consistent views") {
  ScratchDir dir("corpus");
  const auto manifest =
      write_two_views(dir, "1,2\n3,4\n", "1\n2\n", "5,6\n7,8\n", "1\n2\n", 2);
  const MultiViewCorpus c = load_corpus(manifest);
  CHECK(c.views.size() == 2);
  CHECK(c.sample_count() == 2);
  CHECK(c.views[1].features(1, 0) == 7.0);
  CHECK(c.view_index("B") == 1);
}

TEST_CASE("load_corpus rejects inconsistent views") {
  ScratchDir dir("corpus");
  SUBCASE("sample count mismatch") {
    const auto m = write_two_views(dir, rows_of(10), labels_of(10, 1), rows_of(9),
                                   labels_of(9, 1), 1);
    CHECK(error_text([&] { load_corpus(m); }).find("sample count mismatch") != std::string::npos);
  }
  SUBCASE("label out of range") {
    const auto m = write_two_views(dir, rows_of(2), "1\n4\n", rows_of(2), "1\n4\n", 3);
    CHECK(error_text([&] { load_corpus(m); }).find("label 4") != std::string::npos);
  }
  SUBCASE("labels disagree across views") {
    const auto m = write_two_views(dir, rows_of(2), "1\n2\n", rows_of(2), "2\n2\n", 2);
    CHECK(error_text([&] { load_corpus(m); }).find("disagreement") != std::string::npos);
  }
  SUBCASE("missing manifest") {
    CHECK(error_text([&] { load_corpus(dir / "nope.json"); }).find("nope.json") !=
          std::string::npos);
  }
}

TEST_CASE("save then load reproduces the corpus") {
  ScratchDir dir("corpus");
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.views = 3;
  cfg.classes = 3;
  cfg.samples_per_class = 4;
  const MultiViewCorpus c = synth_corpus(cfg);
  const MultiViewCorpus back = load_corpus(save_corpus(c, dir.path()));
  REQUIRE(back.views.size() == 3);
  CHECK(back.class_count == 3);
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(back.views[v].id == c.views[v].id);
    CHECK(back.views[v].labels == c.views[v].labels);
    CHECK(back.views[v].features == c.views[v].features);
  }
}

TEST_CASE("synthetic corpus") {
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.classes = 3;
  cfg.samples_per_class = 20;

  SUBCASE("deterministic for a fixed seed") {
    const auto a = synth_corpus(cfg);
    const auto b = synth_corpus(cfg);
    for (std::size_t v = 0; v < a.views.size(); ++v)
      CHECK(a.views[v].features == b.views[v].features);
    cfg.seed = 43;
    CHECK(synth_corpus(cfg).views[0].features != a.views[0].features);
  }
  SUBCASE("balanced counts") {
    const auto c = synth_corpus(cfg);
    c.validate();
    CHECK(c.views.size() == 2);
    CHECK(c.sample_count() == 60);
    CHECK(c.feature_dim() == cfg.observation_dim);
    std::map<int, int> counts;
    for (int y : c.labels()) ++counts[y];
    CHECK(counts == std::map<int, int>{{1, 20}, {2, 20}, {3, 20}});
  }
  SUBCASE("shared map without noise gives identical views") {
    cfg.view_noise = 0.0;
    cfg.shared_transform = true;
    const auto c = synth_corpus(cfg);
    CHECK(c.views[0].features == c.views[1].features);
  }
  SUBCASE("distinct maps give distinct views") {
    cfg.view_noise = 0.0;
    const auto c = synth_corpus(cfg);
    CHECK(c.views[0].features != c.views[1].features);
  }
  SUBCASE("invalid config names the field") {
    cfg.views = 1;
    CHECK(error_text([&] { synth_corpus(cfg); }).find("'views'") != std::string::npos);
    cfg.views = 2;
    cfg.view_noise = -1.0;
    CHECK(error_text([&] { synth_corpus(cfg); }).find("'view_noise'") != std::string::npos);
  }
}

TEST_CASE("hold_out_class splits by label") {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.classes = 3;
  cfg.samples_per_class = 20;
  const auto c = synth_corpus(cfg);
  for (int held = 1; held <= 3; ++held) {
    const ClassSplit s = hold_out_class(c, held);
    CHECK(s.feature_learning.size() == 40);
    CHECK(s.test.size() == 20);
    CHECK(s.full.size() == 60);
    for (Index i : s.feature_learning) CHECK(c.labels()[std::size_t(i)] != held);
    for (Index i : s.test) CHECK(c.labels()[std::size_t(i)] == held);
  }
  CHECK_THROWS_AS(hold_out_class(c, 0), Error);
  CHECK_THROWS_AS(hold_out_class(c, 4), Error);
}

TEST_CASE("hold_out_class partitions a two-class corpus") {
  SynthConfig cfg;
  cfg.seed = 8;
  cfg.classes = 2;
  cfg.samples_per_class = 5;
  const auto c = synth_corpus(cfg);
  const ClassSplit s = hold_out_class(c, 2);
  std::vector<Index> all = s.feature_learning;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  CHECK(all == s.full);
}

TEST_CASE("hold_out_class rejects an empty class") {
  ScratchDir dir("corpus");
  const auto m = write_two_views(dir, rows_of(2), "1\n1\n", rows_of(2), "1\n1\n", 2);
  const auto c = load_corpus(m);
  CHECK(error_text([&] { hold_out_class(c, 2); }).find("no samples") != std::string::npos);
}
