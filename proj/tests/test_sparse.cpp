#include "jsrda/sparse.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace jsrda;

namespace {

using oracle::incoherent_atoms;
using oracle::planted_signals;
using oracle::unit_columns;

}  // namespace

TEST_CASE("omp recovers a single atom of an orthonormal dictionary") {
  Dictionary d{Matrix::Identity(5, 5)};
  const Vector code = omp(d, d.atoms.col(3), 1);
  CHECK(support_size(code) == 1);
  CHECK(code(3) == 1.0);
  CHECK((d.atoms * code - d.atoms.col(3)).norm() == 0.0);
}

TEST_CASE("omp on a zero signal") {
  std::mt19937_64 rng(1);
  Dictionary d{unit_columns(oracle::gaussian(6, 8, rng))};
  const Vector code = omp(d, Vector::Zero(6), 3);
  CHECK(code.isZero(0.0));
}

TEST_CASE("omp never beats the exhaustive optimum") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Dictionary d{unit_columns(oracle::gaussian(6, 8, rng))};
    const Vector y = oracle::gaussian(6, 1, rng);
    const Vector code = omp(d, y, 2);
    CHECK(support_size(code) <= 2);
    const double r = (y - d.atoms * code).norm();
    CHECK(r >= oracle::exhaustive_best_residual(d.atoms, y, 2) - 1e-12);
  }
}

TEST_CASE("omp recovers exact 2-sparse signals over incoherent atoms") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Dictionary d{incoherent_atoms(16, 8, rng)};
    const Vector y = planted_signals(d.atoms, 2, 1, rng).col(0);
    const Vector code = omp(d, y, 2);
    CHECK((y - d.atoms * code).norm() <= 1e-9);
  }
}

TEST_CASE("omp residual shrinks with sparsity and respects tol") {
  std::mt19937_64 rng(29);
  Dictionary d{unit_columns(oracle::gaussian(10, 20, rng))};
  const Vector y = oracle::gaussian(10, 1, rng);
  double prev = y.norm();
  for (int g = 1; g <= 10; ++g) {
    const double r = (y - d.atoms * omp(d, y, g)).norm();
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
  const double target = 0.5 * y.norm();
  const Vector early = omp(d, y, 10, target);
  CHECK((y - d.atoms * early).norm() <= target);
  CHECK(support_size(early) < 10);
}

TEST_CASE("omp ties go to the lowest index") {
  Matrix atoms(2, 2);
  atoms << 1, 0, 0, 1;
  Vector y(2);
  y << 1, 1;
  const Vector code = omp(Dictionary{atoms}, y, 1);
  CHECK(code(0) == 1.0);
  CHECK(code(1) == 0.0);
}

TEST_CASE("omp input errors") {
  Dictionary d{Matrix::Identity(3, 3)};
  CHECK_THROWS(omp(d, Vector::Zero(4), 1));
  CHECK_THROWS(omp(Dictionary{Matrix::Zero(3, 3)}, Vector::Ones(3), 1));
}

TEST_CASE("omp_batch matches column-wise omp") {
  std::mt19937_64 rng(31);
  Dictionary d{unit_columns(oracle::gaussian(8, 12, rng))};
  const Matrix y = oracle::gaussian(8, 5, rng);
  const Matrix codes = omp_batch(d, y, 3);
  for (Index j = 0; j < 5; ++j) CHECK(codes.col(j) == omp(d, y.col(j), 3));
}

TEST_CASE("ksvd objective is non-increasing") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix y = oracle::gaussian(12, 60, rng);
    DictConfig cfg;
    cfg.atoms = 16;
    cfg.sparsity = 3;
    cfg.ksvd_iters = 15;
    cfg.seed = std::uint64_t(trial);
    const auto res = ksvd(y, cfg);
    REQUIRE(!res.objective.empty());
    for (std::size_t i = 1; i < res.objective.size(); ++i)
      CHECK(res.objective[i] <= res.objective[i - 1] * (1 + 1e-12));
    for (Index j = 0; j < res.dict.size(); ++j)
      CHECK(res.dict.atoms.col(j).norm() == doctest::Approx(1.0).epsilon(1e-10));
    for (Index j = 0; j < res.codes.cols(); ++j) CHECK(support_size(res.codes.col(j)) <= 3);
    CHECK((y - res.dict.atoms * res.codes).squaredNorm() ==
          doctest::Approx(res.objective.back()).epsilon(1e-9));
  }
}

TEST_CASE("ksvd recovers a planted dictionary") {
  // Incoherent atoms, so that OMP can code every planted column exactly.
  std::mt19937_64 rng(41);
  const Matrix d0 = incoherent_atoms(16, 8, rng);
  const Matrix y = planted_signals(d0, 2, 200, rng);
  DictConfig cfg;
  cfg.atoms = 8;
  cfg.sparsity = 2;
  cfg.ksvd_iters = 30;
  cfg.seed = 3;
  const auto res = ksvd(y, cfg);
  CHECK((y - res.dict.atoms * res.codes).norm() / y.norm() <= 1e-3);
}

TEST_CASE("ksvd initialized from data columns reconstructs them") {
  std::mt19937_64 rng(43);
  const Matrix y = oracle::gaussian(6, 4, rng);
  DictConfig cfg;
  cfg.atoms = 4;
  cfg.sparsity = 1;
  cfg.ksvd_iters = 1;
  const auto res = ksvd(y, Dictionary{y}, cfg);
  CHECK((y - res.dict.atoms * res.codes).norm() <= 1e-10 * y.norm());
}

TEST_CASE("ksvd is deterministic and validates input") {
  std::mt19937_64 rng(47);
  const Matrix y = oracle::gaussian(5, 30, rng);
  DictConfig cfg;
  cfg.atoms = 40;  // more atoms than columns
  cfg.sparsity = 2;
  cfg.ksvd_iters = 5;
  cfg.seed = 9;
  const auto a = ksvd(y, cfg);
  const auto b = ksvd(y, cfg);
  CHECK(a.dict.atoms == b.dict.atoms);
  CHECK(a.codes == b.codes);
  CHECK(a.dict.size() == 40);

  CHECK_THROWS(ksvd(Matrix::Zero(5, 10), cfg));
  cfg.sparsity = 41;
  CHECK(error_text([&] { cfg.validate(); }).find("sparsity") != std::string::npos);
}

TEST_CASE("transfer dictionaries") {
  std::mt19937_64 rng(53);
  const Matrix d0 = incoherent_atoms(16, 8, rng);
  const Matrix codes0 = planted_signals(Matrix::Identity(8, 8), 2, 120, rng);
  // Two views built from different atoms over the same sparse codes.
  const Matrix d1 = incoherent_atoms(16, 8, rng);
  const Matrix source = d0 * codes0;
  const Matrix target = d1 * codes0;
  DictConfig cfg;
  cfg.atoms = 8;
  cfg.sparsity = 2;
  cfg.ksvd_iters = 30;
  cfg.seed = 5;
  const auto res = learn_transfer_dictionaries({source, target}, cfg);
  REQUIRE(res.dict.view_blocks.size() == 2);
  CHECK(res.dict.stacked.dim() == 32);

  Matrix restacked(32, 8);
  restacked << res.dict.view_blocks[0].atoms, res.dict.view_blocks[1].atoms;
  CHECK(restacked == res.dict.stacked.atoms);

  Matrix y(32, 120);
  y << source, target;
  const Matrix whole = res.dict.stacked.atoms * res.codes;
  CHECK((whole.topRows(16) - res.dict.view_blocks[0].atoms * res.codes).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK((whole.bottomRows(16) - res.dict.view_blocks[1].atoms * res.codes).cwiseAbs().maxCoeff() <=
        1e-12);
  for (int v = 0; v < 2; ++v) {
    const Matrix& yv = v == 0 ? source : target;
    const Matrix rec = res.dict.view_blocks[std::size_t(v)].atoms * res.codes;
    CHECK((yv - rec).norm() / yv.norm() <= 1e-2);
  }

  // Encoding a view against its block recovers the shared supports.
  const Matrix enc = encode_view(res.dict.view_blocks[0], source, cfg);
  int same_support = 0;
  for (Index j = 0; j < 120; ++j) {
    bool same = true;
    for (Index k = 0; k < 8; ++k)
      same = same && ((std::abs(enc(k, j)) > 1e-8) == (std::abs(res.codes(k, j)) > 1e-8));
    same_support += same;
  }
  CHECK(same_support == 120);

  CHECK(encode_view(res.dict.view_blocks[0], Matrix::Zero(16, 1), cfg).isZero(0.0));
  CHECK(encode_view(res.dict.view_blocks[1], target.col(7), cfg).col(0) ==
        omp(res.dict.view_blocks[1], target.col(7), cfg.sparsity, cfg.omp_tol));

  CHECK_THROWS(learn_transfer_dictionaries({source, target.leftCols(100)}, cfg));
  CHECK_THROWS(learn_transfer_dictionaries({source, target.topRows(10)}, cfg));
}

TEST_CASE("dictionary csv round trip") {
  ScratchDir dir("dict");
  std::mt19937_64 rng(59);
  Dictionary d{unit_columns(oracle::gaussian(7, 4, rng))};
  save_dictionary_csv(dir / "d.csv", d);
  CHECK(load_dictionary_csv(dir / "d.csv").atoms == d.atoms);
}
