#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bam/blockvec.hpp"
#include "bam/bregman.hpp"
#include "bam/driver.hpp"
#include "bam/problem.hpp"
#include "bam/report.hpp"

namespace bam {

// Runtime checks of the convergence guarantees of Bregman alternating
// minimization. Every check is a pure function of its inputs and reports
// violations instead of throwing on them.

/// Phi(x^k) >= Phi after each block update >= Phi(x^{k+1}) for every recorded
/// sweep, with slack 1e-10 * (1 + |Phi(x^0)|).
CheckReport check_monotone_descent(const IterateTrace& trace);

/// Phi(x^k) - Phi(x^{k+1}) >= (nu_min/2)|x^{k+1} - x^k|^2 - 1e-10 per sweep.
/// Skipped when nu_min <= 0. The note records the smallest observed ratio
/// (Phi decrease)/|step|^2 and whether the data also supports nu_min itself.
CheckReport check_sufficient_decrease(const IterateTrace& trace, double nu_min);

/// Per-block form: each block update with a strongly convex generator
/// (modulus nu_i > 0, read from the trace) lowers Phi by at least
/// (nu_i/2)|x_i^{k+1} - x_i^k|^2 - 1e-10. Skipped when no block qualifies.
CheckReport check_blockwise_sufficient_decrease(const IterateTrace& trace);

struct SubgradientResidual {
  BlockVector v;
  double norm = 0.0;
};

/// Explicit element of dPhi(x_next) assembled from the block subproblems'
/// optimality conditions:
///   v_i = grad_i H(x_next) - grad_i H(m_i) + grad phi_i(x_prev_i) - grad phi_i(x_next_i)
/// where m_i = (x_next_1..x_next_i, x_prev_{i+1}..x_prev_n).
SubgradientResidual subgradient_residual(const Problem& p, const BlockVector& x_prev,
                                         const BlockVector& x_next,
                                         const std::vector<BregmanGenerator>& generators);

/// |v^{k+1}| <= L_hat |x^{k+1} - x^k| + 1e-10 per sweep.
CheckReport check_residual_bound(const IterateTrace& trace, double L_hat);

/// sqrt(n_blocks) * (L_cross + max generator Lipschitz bound); equals the
/// two-block constant sqrt(2)(L_cross + max L) for n = 2.
double residual_bound_constant(std::size_t n_blocks, double cross_lipschitz,
                               double generator_lipschitz);

/// Trend surrogate for residual -> 0: median residual of the last 10% of
/// records <= 10 * median step norm * L_hat, and the final residual is below
/// the smallest of the first 10. Inconclusive for traces under 20 records.
CheckReport check_residual_vanishes(const IterateTrace& trace, double L_hat);

/// -grad_i H(x) in df_i(x_i) for every block, measured by each term's
/// subdifferential certificate.
CheckReport critical_point_certificate(const Problem& p, const BlockVector& x, double tol);

/// Central differences of H against partial_grad at x and at seeded
/// perturbations of x. Relative error |fd - g| / max(1, |fd|, |g|).
CheckReport gradcheck(const Problem& p, const BlockVector& x, double h = 1e-6,
                      double tol = 1e-6, std::size_t probes = 10, std::uint64_t seed = 0);

struct FiniteLengthReport {
  std::vector<double> cum_step;  // starts at 0 for x^0
  double total = 0.0;
  double tail_increment = 0.0;
  bool plateau = false;
};

/// Cumulative path length; plateau when the last 10% of sweeps add < 1%.
FiniteLengthReport finite_length_monitor(const IterateTrace& trace);
CheckReport to_check_report(const FiniteLengthReport& r);

/// Prox output beats seeded perturbations on tau f(u) + 1/2|u - v|^2.
CheckReport check_prox_optimality(const BlockTerm& term, Eigen::Index dim, std::size_t cases,
                                  std::uint64_t seed);

CheckReport to_check_report(const std::string& name, const ConvexityReport& r);

void to_json(nlohmann::json& j, const CheckReport& r);

}  // namespace bam
