#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

#include "bam/error.hpp"
#include "bam/problem.hpp"
#include "support.hpp"

using bam::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

bam::Problem sparse_group() {
  return bam::build_sparse_group_instance(50, 40, bam::contiguous_groups(40, 5), 7, 0.1, 0.1);
}

bam::Problem decoupled() {
  auto s = std::make_shared<const bam::BlockStructure>(std::vector<std::string>{"a", "b"},
                                                       std::vector<Eigen::Index>{2, 1});
  bam::CouplingOracle H;
  H.value = [](const bam::BlockVector&) { return 0.0; };
  H.partial_grad = [s](const bam::BlockVector&, std::size_t i) -> Vector {
    return Vector::Zero(s->dim(i));
  };
  std::vector<bam::BlockTerm> terms{bam::make_l1_term(1.0), bam::make_l1_term(1.0)};
  return bam::Problem("decoupled", s, H, terms, bam::BlockVector::zeros(s));
}

}  // namespace

TEST_CASE("phi_value examples") {
  const bam::Problem sq = bam::build_separable_quadratic();
  CHECK(bam::phi_value(sq, sq.make_point({vec({0}), vec({0})})) == doctest::Approx(2.0));
  CHECK(bam::phi_value(sq, sq.make_point({vec({1.0 / 3}), vec({-1.0 / 3})})) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  const bam::Problem sg = sparse_group();
  CHECK(bam::phi_value(sg, bam::BlockVector::zeros(sg.structure_ptr())) == 0.0);
}

TEST_CASE("phi_value names the block with a non-finite term") {
  const bam::Problem sq = bam::build_separable_quadratic();
  auto terms = sq.terms();
  terms[1].value = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(bam::Problem("broken", sq.structure_ptr(), sq.coupling(), terms,
                               sq.initial_point()),
                  bam::Error);
  try {
    bam::Problem("broken", sq.structure_ptr(), sq.coupling(), terms, sq.initial_point());
  } catch (const bam::Error& e) {
    CHECK(e.kind() == bam::ErrorKind::Evaluation);
    CHECK(std::string(e.what()).find("z") != std::string::npos);
  }
}

TEST_CASE("problem construction validates term count and shapes") {
  const bam::Problem sq = bam::build_separable_quadratic();
  auto terms = sq.terms();
  terms.pop_back();
  CHECK_THROWS_AS(bam::Problem("short", sq.structure_ptr(), sq.coupling(), terms,
                               sq.initial_point()),
                  bam::Error);
  const bam::BlockVector wrong({"a"}, {vec({1})});
  CHECK_THROWS_AS(bam::phi_value(sq, wrong), bam::Error);
}

TEST_CASE("separable quadratic: gradient vanishes at the analytic minimizer") {
  const bam::Problem sq = bam::build_separable_quadratic();
  const auto xs = sq.make_point({vec({1.0 / 3}), vec({-1.0 / 3})});
  // Full gradient of Phi = partial H gradient + f'.
  const double gy = bam::partial_gradient(sq, xs, 0)[0] + 2 * (1.0 / 3 - 1);
  const double gz = bam::partial_gradient(sq, xs, 1)[0] + 2 * (-1.0 / 3 + 1);
  CHECK(std::abs(gy) <= 1e-12);
  CHECK(std::abs(gz) <= 1e-12);
  REQUIRE(sq.reference_minimizer().has_value());
  CHECK((sq.reference_minimizer()->flatten() - xs.flatten()).norm() <= 1e-12);
}

TEST_CASE("sparse-group partial gradients match finite differences") {
  const bam::Problem sg = sparse_group();
  bamtest::Rng rng(17);
  for (int probe = 0; probe < 10; ++probe) {
    const auto x = sg.make_point({rng.uniform_vec(50, -1, 1), rng.uniform_vec(40, -1, 1)});
    for (std::size_t i = 0; i < 2; ++i) {
      const Vector g = bam::partial_gradient(sg, x, i);
      const Vector fd = bamtest::fd_partial(sg, x, i);
      for (Eigen::Index j = 0; j < g.size(); ++j)
        CHECK(std::abs(fd[j] - g[j]) / std::max({1.0, std::abs(fd[j]), std::abs(g[j])}) <= 1e-6);
    }
  }
}

TEST_CASE("sparse-group Lipschitz constants") {
  const bam::Problem sg = sparse_group();
  const auto x = sg.initial_point();
  CHECK(bam::partial_lipschitz(sg, x, 1) == 2.0);

  const auto d = bam::make_sparse_group_data(50, 40, bam::contiguous_groups(40, 5), 7, 0.1, 0.1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.A.transpose() * d.A);
  const double lmax = eig.eigenvalues().maxCoeff();
  CHECK(d.lipschitz_y == doctest::Approx(2 * lmax).epsilon(1e-6));
  CHECK(d.lipschitz_y >= 2 * lmax * (1 - 1e-6));
  CHECK(d.sigma_max == doctest::Approx(std::sqrt(lmax)).epsilon(1e-6));

  // The estimator sits between the true constant and its 1.5x safety margin.
  const double ez = bam::estimate_partial_lipschitz(sg, x, 1, 20, 0);
  CHECK(ez >= 2.0 - 1e-9);
  CHECK(ez <= 3.0);
}

TEST_CASE("sparse-group exact z-minimizer at y = 0 is zero") {
  const bam::Problem sg = sparse_group();
  bamtest::Rng rng(2);
  const auto x = sg.make_point({Vector::Zero(50), rng.uniform_vec(40, -1, 1)});
  REQUIRE(sg.term(1).exact_coupled_min);
  const auto z = sg.term(1).exact_coupled_min(x, 1, bam::make_zero_generator(40));
  REQUIRE(z.has_value());
  CHECK(z->lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("Lipschitz estimates") {
  const bam::Problem sq = bam::build_separable_quadratic();
  const double ey = bam::estimate_partial_lipschitz(sq, sq.initial_point(), 0, 20, 1);
  CHECK(ey >= 2.0 - 1e-9);
  CHECK(ey <= 3.0);

  const bam::Problem zero = decoupled();
  CHECK(bam::estimate_partial_lipschitz(zero, zero.initial_point(), 0, 20, 0) == 0.0);
  CHECK(bam::estimate_cross_lipschitz(zero, zero.initial_point(), 1, 20, 0) == 0.0);
  CHECK(bam::partial_lipschitz(zero, zero.initial_point(), 0) == 0.0);
}

TEST_CASE("multiblock quadratic: equal targets give a consensus minimizer") {
  bam::MultiblockData d = bam::make_multiblock_data(5, 3);
  d.targets.setConstant(0.4);
  const bam::Problem p = bam::build_multiblock_quadratic(d);
  REQUIRE(p.reference_minimizer().has_value());
  CHECK((p.reference_minimizer()->flatten() - Vector::Constant(5, 0.4)).norm() <= 1e-12);
  CHECK(std::abs(bam::phi_value(p, *p.reference_minimizer())) <= 1e-24);
}

TEST_CASE("multiblock quadratic: reference minimizer matches an independent dense solve") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = bam::make_multiblock_data(4, seed);
    const bam::Problem p = bam::build_multiblock_quadratic(d);
    CHECK((p.reference_minimizer()->flatten() - bamtest::multiblock_dense_minimizer(d)).norm() <=
          1e-12);
    bamtest::Rng rng(seed);
    const auto x = p.make_point({vec({rng.uniform(-1, 1)}), vec({rng.uniform(-1, 1)}),
                                 vec({rng.uniform(-1, 1)}), vec({rng.uniform(-1, 1)})});
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(std::abs(bam::partial_gradient(p, x, i)[0] - bamtest::fd_partial(p, x, i)[0]) <= 1e-7);
  }
}

TEST_CASE("multiblock data: symmetric weights in [0.1, 1], zero diagonal, targets in [-1, 1]") {
  const auto d = bam::make_multiblock_data(6, 9);
  CHECK((d.weights - d.weights.transpose()).norm() == 0.0);
  for (Eigen::Index i = 0; i < 6; ++i) {
    CHECK(d.weights(i, i) == 0.0);
    CHECK(std::abs(d.targets[i]) <= 1.0);
    for (Eigen::Index j = 0; j < 6; ++j)
      if (i != j) CHECK((d.weights(i, j) >= 0.1 && d.weights(i, j) <= 1.0));
  }
  CHECK_THROWS_AS(bam::make_multiblock_data(2, 1), bam::Error);
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
  bamtest::Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd B(8, 8);
    for (Eigen::Index i = 0; i < 64; ++i) B.data()[i] = rng.uniform(-1, 1);
    const Eigen::MatrixXd M = B.transpose() * B;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    CHECK(bam::power_iteration_lambda_max(M, 1) ==
          doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("corrupted gradient fixture differs only at the chosen coordinate") {
  const bam::Problem sg = sparse_group();
  const bam::Problem bad = bam::make_corrupted_gradient_problem(sg, 1, 3, 0.1);
  const auto x = sg.initial_point();
  Vector diff = bam::partial_gradient(bad, x, 1) - bam::partial_gradient(sg, x, 1);
  CHECK(diff[3] == doctest::Approx(0.1));
  diff[3] = 0;
  CHECK(diff.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(bam::partial_gradient(bad, x, 0) == bam::partial_gradient(sg, x, 0));
  CHECK(bam::phi_value(bad, x) == bam::phi_value(sg, x));
  CHECK_THROWS_AS(bam::make_corrupted_gradient_problem(sg, 1, 40, 0.1), bam::Error);
  CHECK_THROWS_AS(bam::make_corrupted_gradient_problem(sg, 2, 0, 0.1), bam::Error);
}
