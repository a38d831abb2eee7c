#include "bam/bregman.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "bam/error.hpp"

namespace bam {

namespace {

void require_dim(const BregmanGenerator& gen, const Vector& v, const char* what) {
  if (v.size() != gen.dim)
    throw Error(ErrorKind::Shape, std::string("bregman: ") + what + " has length " +
                                      std::to_string(v.size()) + ", generator expects " +
                                      std::to_string(gen.dim));
}

std::string fmt_alpha(double a) {
  std::ostringstream os;
  os << a;
  return os.str();
}

}  // namespace

double bregman_distance(const BregmanGenerator& gen, const Vector& x, const Vector& y) {
  require_dim(gen, x, "x");
  require_dim(gen, y, "y");
  const double fx = gen.value(x);
  const double fy = gen.value(y);
  const Vector gy = gen.gradient(y);
  if (!std::isfinite(fx) || !std::isfinite(fy) || !gy.allFinite())
    throw Error(ErrorKind::Evaluation, "bregman: generator '" + gen.label +
                                           "' returned a non-finite value");
  return fx - fy - gy.dot(x - y);
}

BregmanGenerator make_zero_generator(Eigen::Index dim) {
  if (dim < 1) throw Error(ErrorKind::Parameter, "zero generator: dim must be >= 1");
  BregmanGenerator g;
  g.kind = BregmanGenerator::Kind::Zero;
  g.dim = dim;
  g.value = [](const Vector&) { return 0.0; };
  g.gradient = [dim](const Vector&) -> Vector { return Vector::Zero(dim); };
  g.modulus_nu = 0.0;
  g.lipschitz_L = 0.0;
  g.label = "zero";
  return g;
}

BregmanGenerator make_augmented_generator(double alpha, Eigen::Index dim) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::Parameter, "augmented generator: alpha must be positive and finite");
  if (dim < 1) throw Error(ErrorKind::Parameter, "augmented generator: dim must be >= 1");
  BregmanGenerator g;
  g.kind = BregmanGenerator::Kind::Augmented;
  g.dim = dim;
  g.alpha = alpha;
  g.value = [alpha](const Vector& x) { return 0.5 * alpha * x.squaredNorm(); };
  g.gradient = [alpha](const Vector& x) -> Vector { return alpha * x; };
  g.modulus_nu = alpha;
  g.lipschitz_L = alpha;
  g.label = "aam(" + fmt_alpha(alpha) + ")";
  return g;
}

BregmanGenerator make_linearization_generator(double alpha, const PartialCoupling& coupling) {
  if (!std::isfinite(alpha) || !(alpha > coupling.lipschitz))
    throw Error(ErrorKind::Parameter,
                "linearization generator: alpha = " + fmt_alpha(alpha) +
                    " must exceed the partial Lipschitz constant L = " +
                    fmt_alpha(coupling.lipschitz) +
                    " (alpha_k > L_i is required for the generator to be convex)");
  if (!coupling.value || !coupling.gradient)
    throw Error(ErrorKind::Configuration, "linearization generator: coupling oracle missing");
  BregmanGenerator g;
  g.kind = BregmanGenerator::Kind::Linearization;
  g.dim = coupling.dim;
  g.alpha = alpha;
  auto value = coupling.value;
  auto gradient = coupling.gradient;
  g.value = [alpha, value](const Vector& x) { return 0.5 * alpha * x.squaredNorm() - value(x); };
  g.gradient = [alpha, gradient](const Vector& x) -> Vector { return alpha * x - gradient(x); };
  g.modulus_nu = alpha - coupling.lipschitz;
  g.lipschitz_L = alpha + coupling.lipschitz;
  g.label = "plam(" + fmt_alpha(alpha) + ", frozen)";
  g.frozen = coupling.frozen;
  g.frozen_block = coupling.block;
  return g;
}

BregmanGenerator make_custom_generator(Eigen::Index dim,
                                       std::function<double(const Vector&)> value,
                                       std::function<Vector(const Vector&)> gradient,
                                       double modulus_nu, double lipschitz_L,
                                       std::string label) {
  if (dim < 1) throw Error(ErrorKind::Parameter, "custom generator: dim must be >= 1");
  if (!value || !gradient)
    throw Error(ErrorKind::Configuration, "custom generator: value and gradient are required");
  if (modulus_nu < 0.0 || lipschitz_L < 0.0)
    throw Error(ErrorKind::Parameter, "custom generator: moduli must be nonnegative");
  if (std::isfinite(lipschitz_L) && modulus_nu > lipschitz_L)
    throw Error(ErrorKind::Parameter, "custom generator: modulus_nu exceeds lipschitz_L");
  BregmanGenerator g;
  g.kind = BregmanGenerator::Kind::Custom;
  g.dim = dim;
  g.value = std::move(value);
  g.gradient = std::move(gradient);
  g.modulus_nu = modulus_nu;
  g.lipschitz_L = lipschitz_L;
  g.label = std::move(label);
  return g;
}

ConvexityReport check_generator_convexity(const BregmanGenerator& gen, std::size_t probes,
                                          std::uint64_t seed, double radius,
                                          const Vector& center) {
  if (probes < 1) throw Error(ErrorKind::Parameter, "convexity check: probes must be >= 1");
  if (!(radius > 0.0)) throw Error(ErrorKind::Parameter, "convexity check: radius must be > 0");
  const Vector origin = center.size() == 0 ? Vector::Zero(gen.dim) : center;
  require_dim(gen, origin, "center");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  auto sample = [&] {
    Vector v(gen.dim);
    for (Eigen::Index j = 0; j < gen.dim; ++j) v[j] = origin[j] + unif(rng);
    return v;
  };

  ConvexityReport report;
  report.modulus_nu = gen.modulus_nu;
  for (std::size_t p = 0; p < probes; ++p) {
    const Vector u = sample();
    const Vector v = sample();
    const Vector d = u - v;
    const double dd = d.squaredNorm();
    if (dd == 0.0) continue;
    const Vector gu = gen.gradient(u);
    const Vector gv = gen.gradient(v);
    if (!gu.allFinite() || !gv.allFinite())
      throw Error(ErrorKind::Evaluation, "convexity check: non-finite gradient from '" +
                                             gen.label + "'");
    report.min_ratio = std::min(report.min_ratio, (gu - gv).dot(d) / dd);
    ++report.probes;
  }
  report.pass = report.probes > 0 && report.min_ratio >= gen.modulus_nu - 1e-8;
  return report;
}

}  // namespace bam
