#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "colayers/oracles.hpp"
#include "colayers/regularized.hpp"
#include "test_support.hpp"

using namespace colayers;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

FrankWolfeConfig entropy_config(Index d) {
  FrankWolfeConfig cfg;
  cfg.initial = simplex_uniform_start(d);
  return cfg;
}
}  // namespace

TEST_CASE("SparseMAP on the simplex: spot values") {
  const CoOracle o = make_simplex_oracle(2);
  CHECK(sparsemap(vec({0.6, 0.4}), o).moment.isApprox(vec({0.6, 0.4}), 1e-9));
  CHECK(sparsemap(vec({2, 0}), o).moment.isApprox(vec({1, 0}), 1e-12));
  CHECK(sparsemap(vec({1, 1}), o).moment.isApprox(vec({0.5, 0.5}), 1e-9));
  CHECK(testing::project_simplex_sort(vec({2, 0})) == vec({1, 0}));
}

TEST_CASE("SparseMAP matches the sort-threshold projection") {
  std::mt19937_64 rng(21);
  for (Index d : {3, 5, 8}) {
    const CoOracle o = make_simplex_oracle(d);
    for (int t = 0; t < 20; ++t) {
      const Vector th = testing::random_vector(rng, d, -1, 1);
      const FrankWolfeResult r = sparsemap(th, o);
      CHECK(r.converged);
      CHECK((r.moment - testing::project_simplex_sort(th)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("entropy layer is softmax") {
  const CoOracle o = make_simplex_oracle(2);
  const FrankWolfeResult r = frank_wolfe_layer(vec({std::log(2.0), 0}), shannon_negentropy(), o, entropy_config(2));
  CHECK((r.moment - vec({2.0 / 3.0, 1.0 / 3.0})).cwiseAbs().maxCoeff() < 1e-3);
  std::mt19937_64 rng(22);
  const CoOracle o4 = make_simplex_oracle(4);
  for (int t = 0; t < 10; ++t) {
    const Vector th = testing::random_vector(rng, 4, -2, 2);
    const FrankWolfeResult e = frank_wolfe_layer(th, shannon_negentropy(), o4, entropy_config(4));
    CHECK((e.moment - softmax_reference(th)).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("projection far inside a normal cone is a single vertex") {
  const CoOracle o = make_ranking_oracle(4);
  const Vector th = vec({10, 20, 30, 40});
  const FrankWolfeResult r = sparsemap(th, o);
  REQUIRE(r.distribution.size() == 1);
  CHECK(r.distribution.atoms()[0].vertex == vec({1, 2, 3, 4}));
  CHECK(r.distribution.atoms()[0].weight == 1.0);
  CHECK(regularized_jacobian(th, half_squared_norm(), o).jacobian.isZero());
}

TEST_CASE("SparseMAP on the 2x2 path polytope matches a weight grid search") {
  const GridGraph g{2, 2, Connectivity::acyclic};
  const auto paths = testing::grid_path_vertices(g);
  REQUIRE(paths.size() == 3);
  CoOracle o = make_grid_bellman_oracle(GridGraph{2, 2, Connectivity::acyclic});
  std::mt19937_64 rng(23);
  for (int t = 0; t < 5; ++t) {
    const Vector th = testing::random_vector(rng, 4, -1, 1);
    const int steps = 400;
    double best = std::numeric_limits<double>::infinity();
    Vector best_mu;
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; a + b <= steps; ++b) {
        const double wa = static_cast<double>(a) / steps;
        const double wb = static_cast<double>(b) / steps;
        const Vector mu = wa * paths[0] + wb * paths[1] + (1.0 - wa - wb) * paths[2];
        const double dist = (mu - th).squaredNorm();
        if (dist < best) {
          best = dist;
          best_mu = mu;
        }
      }
    }
    CHECK((sparsemap(th, o).moment - best_mu).cwiseAbs().maxCoeff() < 5e-3);
  }
}

TEST_CASE("Frank-Wolfe output invariants") {
  std::mt19937_64 rng(24);
  const CoOracle o = make_ranking_oracle(5);
  for (int t = 0; t < 20; ++t) {
    const Vector th = testing::random_vector(rng, 5, 0, 5);
    const FrankWolfeResult r = sparsemap(th, o);
    CHECK(r.distribution.valid());
    CHECK(static_cast<int>(r.distribution.size()) <= r.iterations + 1);
    CHECK(r.moment == r.distribution.mean());
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      CHECK(r.objective_trace[k] >= r.objective_trace[k - 1] - 1e-12);
    }
  }
}

TEST_CASE("dual gap reaches 1e-6 within 500 iterations") {
  std::mt19937_64 rng(25);
  FrankWolfeConfig cfg;
  cfg.max_iterations = 500;
  cfg.dual_gap_tolerance = 1e-6;
  const CoOracle o = make_ranking_oracle(5);
  for (int t = 0; t < 20; ++t) {
    const FrankWolfeResult r = sparsemap(testing::random_vector(rng, 5, 0, 5), o, cfg);
    CHECK(r.converged);
    CHECK(r.dual_gap <= 1e-6);
  }
}

TEST_CASE("SparseMAP Jacobian on the simplex interior") {
  const CoOracle o = make_simplex_oracle(3);
  const Vector th = vec({0.2, 0.1, 0.3});
  const RegularizedJacobian j = regularized_jacobian(th, half_squared_norm(), o);
  const Matrix expected = Matrix::Identity(3, 3) - Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK((j.jacobian - expected).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(j.implicit);
}

TEST_CASE("SparseMAP Jacobian restricted to the active face") {
  const CoOracle o = make_simplex_oracle(3);
  const Vector th = vec({0.6, 0.5, -1.0});
  const RegularizedJacobian j = regularized_jacobian(th, half_squared_norm(), o);
  Matrix expected = Matrix::Zero(3, 3);
  expected.topLeftCorner(2, 2) << 0.5, -0.5, -0.5, 0.5;
  CHECK((j.jacobian - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("entropy Jacobian is the softmax Jacobian") {
  const CoOracle o = make_simplex_oracle(3);
  const Vector th = vec({0.4, -0.3, 0.1});
  const RegularizedJacobian j = regularized_jacobian(th, shannon_negentropy(), o, entropy_config(3));
  const Vector mu = softmax_reference(th);
  const Matrix expected = Matrix(mu.asDiagonal()) - mu * mu.transpose();
  CHECK((j.jacobian - expected).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("SparseMAP Jacobians are symmetric PSD and match finite differences") {
  std::mt19937_64 rng(26);
  const CoOracle o = make_ranking_oracle(4);
  int compared = 0;
  for (int t = 0; t < 30; ++t) {
    const Vector th = testing::random_vector(rng, 4, 0, 4);
    const RegularizedJacobian j = regularized_jacobian(th, half_squared_norm(), o);
    CHECK((j.jacobian - j.jacobian.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (j.jacobian + j.jacobian.transpose()));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    const Matrix fd = finite_difference_layer_jacobian(th, half_squared_norm(), o, FrankWolfeConfig{});
    // skip points sitting on an active-set change
    const Matrix fd_wide = finite_difference_layer_jacobian(th, half_squared_norm(), o, FrankWolfeConfig{}, 1e-4);
    if ((fd - fd_wide).cwiseAbs().maxCoeff() > 1e-4) continue;
    ++compared;
    CHECK((j.jacobian - fd).cwiseAbs().maxCoeff() < 1e-3);
  }
  CHECK(compared >= 20);
}

TEST_CASE("configuration errors") {
  FrankWolfeConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(sparsemap(vec({1, 2}), make_simplex_oracle(2), cfg), ConfigError);
  cfg = {};
  cfg.dual_gap_tolerance = 0;
  CHECK_THROWS_AS(sparsemap(vec({1, 2}), make_simplex_oracle(2), cfg), ConfigError);
  cfg = {};
  cfg.step_rule = StepRule::analytic_quadratic;
  CHECK_THROWS_AS(frank_wolfe_layer(vec({1, 2}), shannon_negentropy(), make_simplex_oracle(2), cfg), ConfigError);
}
