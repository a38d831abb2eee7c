#include "bam/prox.hpp"

#include <cmath>
#include <string>

#include "bam/error.hpp"

namespace bam {

void validate_partition(const Groups& groups, Eigen::Index n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Eigen::Index count = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::InvalidInput, "group partition contains an empty group");
    for (Eigen::Index idx : g) {
      if (idx < 0 || idx >= n)
        throw Error(ErrorKind::InvalidInput,
                    "group index " + std::to_string(idx) + " outside [0, " + std::to_string(n) + ")");
      if (seen[static_cast<std::size_t>(idx)])
        throw Error(ErrorKind::InvalidInput,
                    "group index " + std::to_string(idx) + " appears in more than one group");
      seen[static_cast<std::size_t>(idx)] = 1;
      ++count;
    }
  }
  if (count != n)
    throw Error(ErrorKind::InvalidInput, "groups cover " + std::to_string(count) + " of " +
                                             std::to_string(n) + " indices");
}

Groups contiguous_groups(Eigen::Index n, Eigen::Index group_size) {
  if (group_size < 1) throw Error(ErrorKind::Parameter, "group size must be >= 1");
  Groups groups;
  for (Eigen::Index start = 0; start < n; start += group_size) {
    std::vector<Eigen::Index> g;
    for (Eigen::Index i = start; i < std::min(n, start + group_size); ++i) g.push_back(i);
    groups.push_back(std::move(g));
  }
  return groups;
}

Vector soft_threshold(const Vector& v, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::Parameter, "soft_threshold: tau must be > 0");
  Vector u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - tau;
    u[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return u;
}

Vector group_soft_threshold(const Vector& v, const Groups& groups, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::Parameter, "group_soft_threshold: tau must be > 0");
  validate_partition(groups, v.size());
  Vector u = Vector::Zero(v.size());
  for (const auto& g : groups) {
    double nrm = 0.0;
    for (Eigen::Index idx : g) nrm += v[idx] * v[idx];
    nrm = std::sqrt(nrm);
    if (nrm <= tau) continue;
    const double scale = 1.0 - tau / nrm;
    for (Eigen::Index idx : g) u[idx] = scale * v[idx];
  }
  return u;
}

namespace {

Vector smooth_gradient(const InnerSubproblem& sub, const Vector& x, const Vector& anchor_grad) {
  return sub.coupling.gradient(x) + sub.generator.gradient(x) - anchor_grad;
}

}  // namespace

double inner_objective(const InnerSubproblem& sub, const Vector& x) {
  return sub.coupling.value(x) + sub.term_value(x) + bregman_distance(sub.generator, x, sub.anchor);
}

InnerResult inner_exact_min(const InnerSubproblem& sub, double tol, std::size_t max_iter,
                            bool keep_history) {
  if (!sub.term_prox)
    throw Error(ErrorKind::Configuration, "inner solver: block term has no prox oracle");
  if (!sub.coupling.value || !sub.coupling.gradient)
    throw Error(ErrorKind::Configuration, "inner solver: coupling oracle missing");
  const double lip = sub.coupling.lipschitz + sub.generator.lipschitz_L;
  if (!std::isfinite(lip))
    throw Error(ErrorKind::Configuration,
                "inner solver: smooth part has no finite Lipschitz bound (generator '" +
                    sub.generator.label + "')");

  InnerResult result;
  result.x = sub.anchor;
  const double anchor_obj = inner_objective(sub, sub.anchor);
  if (!std::isfinite(anchor_obj))
    throw Error(ErrorKind::Evaluation, "inner solver: non-finite objective at the anchor");
  if (keep_history) result.objective_history.push_back(anchor_obj);

  // A constant-gradient smooth part admits any step; use unit step then.
  const double lip_eff = lip > 0.0 ? lip : 1.0;
  const double step = 1.0 / lip_eff;
  const Vector anchor_grad = sub.generator.gradient(sub.anchor);

  // Monotone FISTA with gradient-based restart: x is the best point so far,
  // y the extrapolated point the prox-gradient step is taken from.
  Vector x = sub.anchor;
  Vector x_prev = x;
  Vector y = x;
  double obj = anchor_obj;
  double t = 1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector g = smooth_gradient(sub, y, anchor_grad);
    Vector z = sub.term_prox(y - step * g, step);
    const double residual = lip_eff * (z - y).norm();
    const double z_obj = inner_objective(sub, z);
    if (!std::isfinite(z_obj))
      throw Error(ErrorKind::Evaluation, "inner solver: non-finite objective");
    ++result.iterations;
    result.residual = residual;
    x_prev = x;
    if (z_obj <= obj) {
      x = z;
      obj = z_obj;
    }
    if (keep_history) result.objective_history.push_back(obj);
    if (residual <= tol) {
      result.converged = true;
      break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - z).dot(z - x_prev) > 0.0) {
      // Momentum points uphill: restart from the best point.
      t = 1.0;
      y = x;
      continue;
    }
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
  }
  result.x = std::move(x);
  return result;
}

}  // namespace bam
