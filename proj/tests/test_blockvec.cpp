#include <doctest.h>

#include <cmath>
#include <limits>

#include "bam/blockvec.hpp"
#include "bam/error.hpp"
#include "support.hpp"

using bam::BlockStructure;
using bam::BlockVector;
using bam::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("norm_sq examples") {
  CHECK(bam::norm_sq(BlockVector({"x"}, {Vector::Zero(3)})) == 0.0);
  CHECK(bam::norm_sq(BlockVector({"y", "z"}, {vec({3}), vec({4})})) == 25.0);
  CHECK(bam::norm_sq(BlockVector({"x"}, {Vector::Ones(10)})) == 10.0);
  CHECK(bam::norm(BlockVector({"y", "z"}, {vec({3}), vec({4})})) == 5.0);
}

TEST_CASE("combine examples") {
  const BlockVector x({"a", "b"}, {vec({1.5, -2}), vec({7})});
  const BlockVector anything({"a", "b"}, {vec({9, 9}), vec({-3})});
  CHECK(bam::combine(1.0, x, 0.0, anything).flatten() == x.flatten());

  const BlockVector u({"a"}, {vec({1, 2})});
  CHECK(bam::combine(1.0, u, -1.0, u).flatten() == Vector::Zero(2));

  const BlockVector e1({"a"}, {vec({1, 0})}), e2({"a"}, {vec({0, 1})});
  CHECK(bam::combine(2.0, e1, 3.0, e2).flatten() == vec({2, 3}));
}

TEST_CASE("combine rejects mismatched structures") {
  const BlockVector u({"a"}, {vec({1, 2})});
  const BlockVector other_dim({"a"}, {vec({1, 2, 3})});
  const BlockVector other_id({"b"}, {vec({1, 2})});
  CHECK_THROWS_AS(bam::combine(1.0, u, 1.0, other_dim), bam::Error);
  CHECK_THROWS_AS(bam::combine(1.0, u, 1.0, other_id), bam::Error);
  try {
    bam::combine(1.0, u, 1.0, other_dim);
  } catch (const bam::Error& e) {
    CHECK(e.kind() == bam::ErrorKind::Shape);
  }
}

TEST_CASE("construction validates ids, dims and values") {
  CHECK_THROWS_AS(BlockStructure({"a", "a"}, {1, 1}), bam::Error);
  CHECK_THROWS_AS(BlockStructure({}, {}), bam::Error);
  CHECK_THROWS_AS(BlockStructure({"a"}, {0}), bam::Error);
  CHECK_THROWS_AS(BlockStructure({"a", "b"}, {1}), bam::Error);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(BlockVector({"a"}, {vec({1, nan})}), bam::Error);
  CHECK_THROWS_AS(BlockVector({"a"}, {vec({std::numeric_limits<double>::infinity()})}),
                  bam::Error);
  auto s = std::make_shared<const BlockStructure>(std::vector<std::string>{"a", "b"},
                                                  std::vector<Eigen::Index>{2, 1});
  CHECK_THROWS_AS(BlockVector(s, {vec({1, 2}), vec({1, 2})}), bam::Error);
  CHECK_THROWS_AS(BlockVector::from_flat(s, vec({1, 2})), bam::Error);
}

TEST_CASE("with_block copies and leaves the original untouched") {
  const BlockVector x({"a", "b"}, {vec({1, 2}), vec({3})});
  const BlockVector y = x.with_block(1, vec({9}));
  CHECK(x.block(1)[0] == 3.0);
  CHECK(y.block(1)[0] == 9.0);
  CHECK(y.block(0) == x.block(0));
  CHECK(y.same_structure(x));
  CHECK_THROWS_AS(x.with_block(0, vec({1})), bam::Error);
}

TEST_CASE("property: flatten/from_flat round trip and norm additivity") {
  bamtest::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto nb = static_cast<std::size_t>(rng.uniform(1, 5));
    std::vector<std::string> ids;
    std::vector<Eigen::Index> dims;
    for (std::size_t i = 0; i < nb; ++i) {
      ids.push_back("b" + std::to_string(i));
      dims.push_back(static_cast<Eigen::Index>(rng.uniform(1, 6)));
    }
    auto s = std::make_shared<const BlockStructure>(ids, dims);
    const Vector flat = rng.uniform_vec(s->total_dim(), -5, 5);
    const BlockVector x = BlockVector::from_flat(s, flat);
    CHECK(x.flatten() == flat);
    double sum = 0.0;
    for (std::size_t i = 0; i < nb; ++i) sum += x.block(i).squaredNorm();
    CHECK(bam::norm_sq(x) == doctest::Approx(sum).epsilon(1e-14));
    CHECK(bam::norm_sq(x) == doctest::Approx(flat.squaredNorm()).epsilon(1e-14));

    const BlockVector y = BlockVector::from_flat(s, rng.uniform_vec(s->total_dim(), -5, 5));
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const Vector expect = a * x.flatten() + b * y.flatten();
    CHECK((bam::combine(a, x, b, y).flatten() - expect).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}
