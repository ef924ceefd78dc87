#include "ktba/errors.hpp"
#include "ktba/space.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ktba;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

std::vector<LinearMap> sample_maps(std::mt19937_64& rng) {
  std::vector<LinearMap> maps;
  maps.push_back(LinearMap::identity(3));
  maps.push_back(LinearMap::negated_identity(2));
  maps.push_back(LinearMap::zero(2, 4));
  maps.push_back(LinearMap::dense(oracle::random_mat(rng, 3, 5)));
  maps.push_back(LinearMap::scaled(-2.5, LinearMap::dense(oracle::random_mat(rng, 2, 2))));
  maps.push_back(LinearMap::block({
      {LinearMap::identity(2), LinearMap::zero(2, 1), LinearMap::dense(oracle::random_mat(rng, 2, 3))},
      {LinearMap::dense(oracle::random_mat(rng, 1, 2)), LinearMap::negated_identity(1), LinearMap::zero(1, 3)},
  }));
  return maps;
}

}  // namespace

TEST_CASE("inner products") {
  CHECK(inner(v({1, 2}), v({3, 4})) == 11.0);
  CHECK(inner(v({0, 0, 0}), v({0, 0, 0})) == 0.0);
  const BlockVec u({v({1, 0}), v({0, 2})});
  const BlockVec w({v({1, 0}), v({0, 1})});
  CHECK(inner(u, w) == 3.0);
  CHECK_THROWS_AS(inner(v({1, 2}), v({1, 2, 3})), SignatureError);
  CHECK_THROWS_AS(inner(u, BlockVec({v({1, 0, 0}), v({0, 1})})), SignatureError);
}

TEST_CASE("apply and adjoint examples") {
  CHECK(apply(LinearMap::identity(2), v({5, -1})) == v({5, -1}));
  Matrix d(2, 2);
  d << 2, 0, 0, 3;
  CHECK(apply(LinearMap::dense(d), v({1, 1})) == v({2, 3}));
  const auto row = LinearMap::block({{LinearMap::identity(1), LinearMap::negated_identity(1)}});
  CHECK(apply(row, v({1, 4})) == v({-3}));

  CHECK(adjoint_apply(LinearMap::identity(1), v({2})) == v({2}));
  Matrix e(2, 2);
  e << 1, 2, 0, 1;
  CHECK(adjoint_apply(LinearMap::dense(e), v({1, 1})) == v({1, 3}));
  const auto col = LinearMap::block({{LinearMap::identity(1)}, {LinearMap::negated_identity(1)}});
  CHECK(adjoint_apply(col, v({5, 2})) == v({3}));

  CHECK_THROWS_AS(apply(LinearMap::identity(2), v({1})), SignatureError);
  CHECK_THROWS_AS(adjoint_apply(LinearMap::dense(d), v({1, 2, 3})), SignatureError);
}

TEST_CASE("block grids must be consistent") {
  CHECK_THROWS_AS(LinearMap::block({{LinearMap::identity(2)}, {LinearMap::identity(3)}}),
                  SignatureError);
  CHECK_THROWS_AS(LinearMap::block({{LinearMap::identity(2), LinearMap::zero(3, 1)}}),
                  SignatureError);
}

TEST_CASE("non-finite data is rejected") {
  Matrix d(1, 1);
  d << std::nan("");
  CHECK_THROWS_AS(LinearMap::dense(d), NonFiniteError);
  CHECK_THROWS_AS(apply(LinearMap::identity(1), v({INFINITY})), NonFiniteError);
}

TEST_CASE("operator norm estimates") {
  CHECK(operator_norm_estimate(LinearMap::identity(2), 10) == doctest::Approx(1.0).epsilon(1e-9));
  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  CHECK(std::abs(operator_norm_estimate(LinearMap::dense(d), 50) - 3.0) <= 1e-6);
  CHECK(operator_norm_estimate(LinearMap::zero(3, 2), 5) == 0.0);
  CHECK_THROWS_AS(operator_norm_estimate(LinearMap::identity(2), 0), ParameterError);

  // Lower bound on the spectral norm that does not decrease with iterations.
  std::mt19937_64 rng(7);
  const Matrix m = oracle::random_mat(rng, 4, 3);
  const double exact = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  double prev = 0.0;
  for (int it = 1; it <= 60; it += 5) {
    const double est = operator_norm_estimate(LinearMap::dense(m), it);
    CHECK(est <= exact * (1 + 1e-12));
    CHECK(est >= prev);
    prev = est;
  }
  CHECK(prev == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("adjoint identity on random pairs") {
  std::mt19937_64 rng(11);
  for (const auto& L : sample_maps(rng)) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = oracle::random_vec(rng, static_cast<int>(L.domain_dim()));
      const Vec y = oracle::random_vec(rng, static_cast<int>(L.codomain_dim()));
      const double lhs = inner(apply(L, x), y);
      const double rhs = inner(x, adjoint_apply(L, y));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
    }
  }
}

TEST_CASE("structured maps agree with their dense forms") {
  std::mt19937_64 rng(13);
  for (const auto& L : sample_maps(rng)) {
    const Matrix D = L.densify();
    for (int trial = 0; trial < 50; ++trial) {
      const Vec x = oracle::random_vec(rng, static_cast<int>(L.domain_dim()));
      const Vec y = oracle::random_vec(rng, static_cast<int>(L.codomain_dim()));
      CHECK((apply(L, x) - D * x).norm() <= 1e-14 * (1 + x.norm() * D.norm()));
      CHECK((adjoint_apply(L, y) - D.transpose() * y).norm() <= 1e-14 * (1 + y.norm() * D.norm()));
    }
  }
}

TEST_CASE("block inner product equals flattened inner product") {
  std::mt19937_64 rng(17);
  const std::vector<Index> dims{2, 1, 3};
  for (int trial = 0; trial < 100; ++trial) {
    const Vec a = oracle::random_vec(rng, 6);
    const Vec b = oracle::random_vec(rng, 6);
    const BlockVec u = BlockVec::split(a, dims);
    const BlockVec w = BlockVec::split(b, dims);
    CHECK(std::abs(inner(u, w) - a.dot(b)) <= 1e-13 * (1 + a.norm() * b.norm()));
    CHECK(u.flatten() == a);
  }
}
