#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "bam/blockvec.hpp"
#include "bam/bregman.hpp"

namespace bam {

/// Partition of {0..n-1} into index groups.
using Groups = std::vector<std::vector<Eigen::Index>>;

/// Throws InvalidInput unless `groups` partitions {0..n-1} with no empty group.
void validate_partition(const Groups& groups, Eigen::Index n);

/// Contiguous groups of `group_size` (the last one may be shorter).
Groups contiguous_groups(Eigen::Index n, Eigen::Index group_size);

/// argmin_u tau*|u|_1 + 1/2|u - v|^2. Ties at |v_i| = tau resolve to 0.
Vector soft_threshold(const Vector& v, double tau);

/// argmin_u tau*sum_g |u_g|_2 + 1/2|u - v|^2. Zero-norm groups map to 0.
Vector group_soft_threshold(const Vector& v, const Groups& groups, double tau);

/// One block's Bregman subproblem
///   min_x  H(x, frozen) + f(x) + B_phi(x, anchor)
/// solved by proximal gradient on the smooth part H + B_phi(., anchor).
struct InnerSubproblem {
  PartialCoupling coupling;
  std::function<double(const Vector&)> term_value;
  std::function<Vector(const Vector&, double)> term_prox;  // (v, tau) -> prox_{tau f}(v)
  BregmanGenerator generator;
  Vector anchor;
};

struct InnerResult {
  Vector x;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;  // gradient-mapping norm L*|x+ - x| at the returned point
  std::vector<double> objective_history;
};

double inner_objective(const InnerSubproblem& sub, const Vector& x);

/// Monotone accelerated proximal gradient (FISTA with restart), step
/// 1/(L_H + L_phi), started at the anchor.
/// Stops when the gradient-mapping norm drops to `tol` or after `max_iter`
/// steps; never returns a point with a larger objective than the anchor.
InnerResult inner_exact_min(const InnerSubproblem& sub, double tol = 1e-10,
                            std::size_t max_iter = 5000, bool keep_history = false);

}  // namespace bam
