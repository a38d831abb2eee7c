#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "bam/blockvec.hpp"

namespace bam {

/// Smooth coupling H restricted to one block with every other block frozen.
struct PartialCoupling {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz = 0.0;  // bound on the gradient's Lipschitz constant in this block
  Eigen::Index dim = 0;
  /// The point the other blocks were frozen at, and which block is free.
  std::optional<BlockVector> frozen;
  std::size_t block = 0;
};

/// Convex differentiable function defining a Bregman distance, together with
/// declared bounds on its strong-convexity modulus and gradient Lipschitz
/// constant.
struct BregmanGenerator {
  enum class Kind { Zero, Augmented, Linearization, Custom };

  Kind kind = Kind::Custom;
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double modulus_nu = 0.0;
  double lipschitz_L = std::numeric_limits<double>::infinity();  // inf = unbounded
  double alpha = 0.0;  // quadratic weight for Augmented / Linearization
  std::string label;
  /// Set for Linearization: the frozen point its coupling term was built from.
  std::optional<BlockVector> frozen;
  std::size_t frozen_block = 0;
};

/// phi(x) - phi(y) - <grad phi(y), x - y>.
double bregman_distance(const BregmanGenerator& gen, const Vector& x, const Vector& y);

BregmanGenerator make_zero_generator(Eigen::Index dim);

/// phi(x) = (alpha/2)|x|^2.
BregmanGenerator make_augmented_generator(double alpha, Eigen::Index dim);

/// phi(x) = (alpha/2)|x|^2 - H(x, frozen). Requires alpha > coupling.lipschitz,
/// which makes phi strongly convex with modulus alpha - L.
BregmanGenerator make_linearization_generator(double alpha, const PartialCoupling& coupling);

/// Wraps user-supplied oracles. Declared constants are validated by
/// check_generator_convexity, not here.
BregmanGenerator make_custom_generator(Eigen::Index dim,
                                       std::function<double(const Vector&)> value,
                                       std::function<Vector(const Vector&)> gradient,
                                       double modulus_nu, double lipschitz_L,
                                       std::string label);

struct ConvexityReport {
  double min_ratio = std::numeric_limits<double>::infinity();
  double modulus_nu = 0.0;
  std::size_t probes = 0;
  bool pass = false;
};

/// Samples seeded pairs (u, v) uniformly in [-radius, radius]^dim around
/// `center` (origin when empty) and reports min <grad(u)-grad(v), u-v>/|u-v|^2.
ConvexityReport check_generator_convexity(const BregmanGenerator& gen, std::size_t probes,
                                          std::uint64_t seed, double radius = 10.0,
                                          const Vector& center = Vector());

}  // namespace bam
