#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bam/blockvec.hpp"
#include "bam/bregman.hpp"
#include "bam/problem.hpp"
#include "bam/report.hpp"

namespace bam {

/// How alpha_k is chosen for Linearized / Augmented blocks.
struct AlphaRule {
  enum class Kind { Constant, SafetyFactor };
  Kind kind = Kind::SafetyFactor;
  double value = 1.1;  // the constant c, or gamma in gamma * L_i

  static AlphaRule constant(double c) { return {Kind::Constant, c}; }
  static AlphaRule safety(double gamma) { return {Kind::SafetyFactor, gamma}; }

  double alpha(double partial_lipschitz) const {
    return kind == Kind::Constant ? value : value * partial_lipschitz;
  }
};

/// (iteration k, current mixed point, block) -> generator for that block.
using GeneratorFactory =
    std::function<BregmanGenerator(std::size_t, const BlockVector&, std::size_t)>;

/// Per-block update rule. Exact -> zero generator (AM); Linearized ->
/// (alpha/2)|x|^2 - H(x, frozen) (PLAM); Augmented -> (alpha/2)|x|^2 (AAM).
struct BlockStrategy {
  enum class Kind { Exact, Linearized, Augmented, Custom };
  Kind kind = Kind::Exact;
  AlphaRule alpha_rule;
  GeneratorFactory generator_factory;

  static BlockStrategy exact() { return {Kind::Exact, {}, {}}; }
  static BlockStrategy linearized(AlphaRule rule = AlphaRule::safety(1.1)) {
    return {Kind::Linearized, rule, {}};
  }
  static BlockStrategy augmented(AlphaRule rule = AlphaRule::constant(1.0)) {
    return {Kind::Augmented, rule, {}};
  }
  static BlockStrategy custom(GeneratorFactory factory) {
    return {Kind::Custom, {}, std::move(factory)};
  }
};

const char* to_string(BlockStrategy::Kind kind);

struct SolverConfig {
  std::size_t max_outer_iter = 1000;
  double residual_tol = 1e-8;
  double step_tol = 1e-12;
  double inner_tol = 1e-10;
  std::size_t inner_max_iter = 5000;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  double certificate_tol = 1e-6;
  double divergence_bound = 1e12;
};

/// One Gauss-Seidel sweep x^k -> x^{k+1}.
struct TraceRecord {
  std::size_t k = 0;                 // sweep index, starting at 1
  double phi_prev = 0.0;             // Phi(x^{k-1})
  std::vector<double> phi_partial;   // Phi after each block update; back() == phi
  double phi = 0.0;                  // Phi(x^k)
  std::vector<double> block_step_sq; // |x_i^k - x_i^{k-1}|^2
  double step_norm_sq = 0.0;
  std::vector<double> block_bregman; // B_{phi_i}(x_i^k, x_i^{k-1})
  double bregman_paid = 0.0;
  double residual = 0.0;             // |v^k|
  double cum_step = 0.0;             // sum of |x^j - x^{j-1}| for j <= k
  std::vector<double> block_nu;      // modulus of the generator used per block
  std::vector<double> block_gen_L;   // Lipschitz bound of the generator used
  bool inner_hit_cap = false;
  bool subproblem_increase = false;  // subproblem objective rose above the anchor's

  double phi_half() const { return phi_partial.empty() ? phi : phi_partial.front(); }
};

struct IterateTrace {
  double phi0 = 0.0;
  std::size_t num_blocks = 0;
  std::vector<TraceRecord> records;

  double nu_min() const;
  double generator_lipschitz_max() const;
  bool any_inner_hit_cap() const;
};

enum class RunStatus { ResidualConverged, StepConverged, MaxIter, Diverged };
const char* to_string(RunStatus status);

struct StepOutcome {
  Vector value;
  BregmanGenerator generator;
  enum class Inner { NotUsed, Converged, HitCap } inner = Inner::NotUsed;
  std::size_t inner_iterations = 0;
  double subproblem_before = 0.0;
  double subproblem_after = 0.0;
};

struct RunResult {
  BlockVector final_x;
  IterateTrace trace;
  RunStatus status = RunStatus::MaxIter;
  std::size_t sweeps = 0;
  double final_phi = 0.0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  CheckReport certificate;
};

/// Builds the generator block i would use at the mixed point x on sweep k.
BregmanGenerator build_generator(const Problem& p, const BlockVector& x, std::size_t i,
                                 const BlockStrategy& strategy, std::size_t k);

/// argmin over block i of H(x with block i free) + f_i + B_{phi_i^k}(., x_i).
StepOutcome step_block(const Problem& p, const BlockVector& x, std::size_t i,
                       const BlockStrategy& strategy, std::size_t k, const SolverConfig& cfg);

/// Rejects strategy lists that the problem's oracles cannot serve, before any
/// iteration runs.
void validate_strategies(const Problem& p, const std::vector<BlockStrategy>& strategies);

/// Gauss-Seidel sweeps in declaration order until a stopping rule fires.
RunResult run(const Problem& p, const std::vector<BlockStrategy>& strategies,
              const SolverConfig& cfg, const std::optional<BlockVector>& x0 = std::nullopt);

/// am | plam | aam | am-plam | plam-am. "custom" has no preset and is rejected.
std::vector<BlockStrategy> resolve_strategy_preset(const std::string& name, std::size_t n_blocks);

}  // namespace bam
