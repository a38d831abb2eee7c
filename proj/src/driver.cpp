#include "bam/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bam/diagnostics.hpp"
#include "bam/error.hpp"
#include "bam/prox.hpp"

namespace bam {

const char* to_string(BlockStrategy::Kind kind) {
  switch (kind) {
    case BlockStrategy::Kind::Exact: return "exact";
    case BlockStrategy::Kind::Linearized: return "linearized";
    case BlockStrategy::Kind::Augmented: return "augmented";
    case BlockStrategy::Kind::Custom: return "custom";
  }
  return "unknown";
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ResidualConverged: return "residual-converged";
    case RunStatus::StepConverged: return "step-converged";
    case RunStatus::MaxIter: return "max-iter";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

double IterateTrace::nu_min() const {
  double nu = std::numeric_limits<double>::infinity();
  for (const auto& r : records)
    for (double v : r.block_nu) nu = std::min(nu, v);
  return records.empty() ? 0.0 : nu;
}

double IterateTrace::generator_lipschitz_max() const {
  double L = 0.0;
  for (const auto& r : records)
    for (double v : r.block_gen_L) L = std::max(L, v);
  return L;
}

bool IterateTrace::any_inner_hit_cap() const {
  return std::any_of(records.begin(), records.end(),
                     [](const TraceRecord& r) { return r.inner_hit_cap; });
}

namespace {

std::string block_name(const Problem& p, std::size_t i) {
  return "block '" + p.structure().id(i) + "'";
}

double subproblem_objective(const Problem& p, const BlockVector& x, std::size_t i,
                            const BregmanGenerator& gen, const Vector& u) {
  return p.coupling().value(x.with_block(i, u)) + p.term(i).value(u) +
         bregman_distance(gen, u, x.block(i));
}

}  // namespace

BregmanGenerator build_generator(const Problem& p, const BlockVector& x, std::size_t i,
                                 const BlockStrategy& strategy, std::size_t k) {
  const Eigen::Index dim = x.block(i).size();
  switch (strategy.kind) {
    case BlockStrategy::Kind::Exact:
      return make_zero_generator(dim);
    case BlockStrategy::Kind::Linearized: {
      const PartialCoupling coupling = restrict_coupling(p, x, i);
      return make_linearization_generator(strategy.alpha_rule.alpha(coupling.lipschitz), coupling);
    }
    case BlockStrategy::Kind::Augmented: {
      const double L = strategy.alpha_rule.kind == AlphaRule::Kind::SafetyFactor
                           ? partial_lipschitz(p, x, i)
                           : 0.0;
      return make_augmented_generator(strategy.alpha_rule.alpha(L), dim);
    }
    case BlockStrategy::Kind::Custom: {
      if (!strategy.generator_factory)
        throw Error(ErrorKind::Configuration, block_name(p, i) + ": custom strategy has no factory");
      BregmanGenerator gen = strategy.generator_factory(k, x, i);
      if (gen.dim != dim)
        throw Error(ErrorKind::Shape, block_name(p, i) + ": custom generator has dimension " +
                                          std::to_string(gen.dim));
      return gen;
    }
  }
  throw Error(ErrorKind::Configuration, "unknown strategy kind");
}

StepOutcome step_block(const Problem& p, const BlockVector& x, std::size_t i,
                       const BlockStrategy& strategy, std::size_t k, const SolverConfig& cfg) {
  const BlockTerm& term = p.term(i);
  StepOutcome out;
  out.generator = build_generator(p, x, i, strategy, k);
  const BregmanGenerator& gen = out.generator;
  const Vector& anchor = x.block(i);

  if (gen.kind == BregmanGenerator::Kind::Linearization) {
    // The linearized subproblem is a single prox step of weight 1/alpha.
    if (!term.prox)
      throw Error(ErrorKind::Configuration, block_name(p, i) + ": linearized step needs a prox oracle");
    const Vector g = partial_gradient(p, x, i);
    out.value = term.prox(anchor - g / gen.alpha, 1.0 / gen.alpha);
  } else {
    std::optional<Vector> closed;
    if (term.exact_coupled_min) closed = term.exact_coupled_min(x, i, gen);
    if (closed) {
      out.value = std::move(*closed);
    } else {
      if (!term.prox)
        throw Error(ErrorKind::Configuration,
                    block_name(p, i) + ": no closed-form minimizer for generator '" + gen.label +
                        "' and no prox oracle for the inner solver");
      InnerSubproblem sub{restrict_coupling(p, x, i), term.value, term.prox, gen, anchor};
      InnerResult inner = inner_exact_min(sub, cfg.inner_tol, cfg.inner_max_iter);
      out.inner = inner.converged ? StepOutcome::Inner::Converged : StepOutcome::Inner::HitCap;
      out.inner_iterations = inner.iterations;
      out.value = std::move(inner.x);
    }
  }
  if (out.value.size() != anchor.size())
    throw Error(ErrorKind::Shape, block_name(p, i) + ": block update has the wrong length");
  if (out.value.allFinite()) {
    out.subproblem_before = subproblem_objective(p, x, i, gen, anchor);
    out.subproblem_after = subproblem_objective(p, x, i, gen, out.value);
  }
  return out;
}

void validate_strategies(const Problem& p, const std::vector<BlockStrategy>& strategies) {
  if (strategies.size() != p.num_blocks())
    throw Error(ErrorKind::Configuration, std::to_string(strategies.size()) + " strategies for " +
                                              std::to_string(p.num_blocks()) + " blocks");
  const BlockVector& x0 = p.initial_point();
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const BlockStrategy& s = strategies[i];
    const BlockTerm& term = p.term(i);
    const std::string where = block_name(p, i) + " (" + to_string(s.kind) + ")";
    switch (s.kind) {
      case BlockStrategy::Kind::Linearized: {
        if (!term.prox) throw Error(ErrorKind::Configuration, where + ": block term has no prox oracle");
        const double L = partial_lipschitz(p, x0, i);
        if (s.alpha_rule.kind == AlphaRule::Kind::SafetyFactor) {
          if (!(s.alpha_rule.value > 1.0)) {
            std::ostringstream os;
            os << where << ": safety factor gamma = " << s.alpha_rule.value
               << " must exceed 1 (alpha_k > L_i is required for the linearization generator "
                  "to be convex)";
            throw Error(ErrorKind::Configuration, os.str());
          }
        } else if (!(s.alpha_rule.value > L)) {
          std::ostringstream os;
          os << where << ": constant alpha = " << s.alpha_rule.value
             << " must exceed L_i = " << L
             << " (alpha_k > L_i is required for the linearization generator to be convex)";
          throw Error(ErrorKind::Configuration, os.str());
        }
        break;
      }
      case BlockStrategy::Kind::Augmented:
        if (!(s.alpha_rule.value > 0.0))
          throw Error(ErrorKind::Configuration, where + ": alpha rule must be positive");
        [[fallthrough]];
      case BlockStrategy::Kind::Exact: {
        if (term.prox) break;
        const BregmanGenerator probe = build_generator(p, x0, i, s, 0);
        if (!term.exact_coupled_min || !term.exact_coupled_min(x0, i, probe))
          throw Error(ErrorKind::Configuration,
                      where + ": needs an exact coupled minimizer or a prox oracle");
        break;
      }
      case BlockStrategy::Kind::Custom:
        if (!s.generator_factory)
          throw Error(ErrorKind::Configuration, where + ": no generator factory");
        if (!term.prox && !term.exact_coupled_min)
          throw Error(ErrorKind::Configuration,
                      where + ": needs an exact coupled minimizer or a prox oracle");
        break;
    }
  }
}

RunResult run(const Problem& p, const std::vector<BlockStrategy>& strategies,
              const SolverConfig& cfg, const std::optional<BlockVector>& x0) {
  if (cfg.max_outer_iter < 1) throw Error(ErrorKind::Configuration, "max_outer_iter must be >= 1");
  if (cfg.record_every < 1) throw Error(ErrorKind::Configuration, "record_every must be >= 1");
  if (cfg.residual_tol < 0.0 || cfg.step_tol < 0.0 || cfg.inner_tol < 0.0)
    throw Error(ErrorKind::Configuration, "tolerances must be nonnegative");
  validate_strategies(p, strategies);

  BlockVector x = x0 ? *x0 : p.initial_point();
  if (!(x.structure() == p.structure()))
    throw Error(ErrorKind::Shape, "initial point does not match the problem structure");
  const std::size_t n = p.num_blocks();

  RunResult result{x, {}, RunStatus::MaxIter, 0, phi_value(p, x), {}, {}};
  result.trace.phi0 = result.final_phi;
  result.trace.num_blocks = n;

  double phi = result.final_phi;
  double cum_step = 0.0;
  for (std::size_t k = 1; k <= cfg.max_outer_iter; ++k) {
    const BlockVector x_prev = x;
    TraceRecord rec;
    rec.k = k;
    rec.phi_prev = phi;
    std::vector<BregmanGenerator> generators;
    bool diverged = false;
    try {
      for (std::size_t i = 0; i < n; ++i) {
        StepOutcome out = step_block(p, x, i, strategies[i], k - 1, cfg);
        if (!out.value.allFinite()) {
          diverged = true;
          break;
        }
        const double breg = bregman_distance(out.generator, out.value, x.block(i));
        rec.block_bregman.push_back(breg);
        rec.bregman_paid += breg;
        rec.block_step_sq.push_back((out.value - x.block(i)).squaredNorm());
        rec.block_nu.push_back(out.generator.modulus_nu);
        rec.block_gen_L.push_back(out.generator.lipschitz_L);
        rec.inner_hit_cap |= out.inner == StepOutcome::Inner::HitCap;
        rec.subproblem_increase |= out.subproblem_after >
                                   out.subproblem_before + 1e-12 * (1.0 + std::abs(out.subproblem_before));
        x = x.with_block(i, std::move(out.value));
        rec.phi_partial.push_back(phi_value(p, x));
        generators.push_back(std::move(out.generator));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Evaluation && e.kind() != ErrorKind::InvalidInput) throw;
      diverged = true;
    }
    result.sweeps = k;
    if (diverged) {
      result.status = RunStatus::Diverged;
      break;
    }

    phi = rec.phi_partial.back();
    rec.phi = phi;
    for (double s : rec.block_step_sq) rec.step_norm_sq += s;
    const double step = std::sqrt(rec.step_norm_sq);
    cum_step += step;
    rec.cum_step = cum_step;
    rec.residual = subgradient_residual(p, x_prev, x, generators).norm;

    result.final_x = x;
    result.final_phi = phi;
    result.final_residual = rec.residual;

    bool stop = true;
    if (!std::isfinite(phi) || norm(x) > cfg.divergence_bound)
      result.status = RunStatus::Diverged;
    else if (step <= cfg.step_tol)
      result.status = RunStatus::StepConverged;
    else if (rec.residual <= cfg.residual_tol)
      result.status = RunStatus::ResidualConverged;
    else
      stop = false;

    if (stop || k % cfg.record_every == 0 || k == cfg.max_outer_iter)
      result.trace.records.push_back(std::move(rec));
    if (stop) break;
  }

  result.certificate = critical_point_certificate(p, result.final_x, cfg.certificate_tol);
  return result;
}

std::vector<BlockStrategy> resolve_strategy_preset(const std::string& name, std::size_t n_blocks) {
  if (n_blocks < 1) throw Error(ErrorKind::Configuration, "preset needs at least one block");
  std::vector<BlockStrategy> out;
  if (name == "am") {
    out.assign(n_blocks, BlockStrategy::exact());
  } else if (name == "plam") {
    out.assign(n_blocks, BlockStrategy::linearized(AlphaRule::safety(1.1)));
  } else if (name == "aam") {
    out.assign(n_blocks, BlockStrategy::augmented(AlphaRule::constant(1.0)));
  } else if (name == "am-plam") {
    out.assign(n_blocks, BlockStrategy::linearized(AlphaRule::safety(1.1)));
    out.front() = BlockStrategy::exact();
  } else if (name == "plam-am") {
    out.assign(n_blocks, BlockStrategy::exact());
    out.front() = BlockStrategy::linearized(AlphaRule::safety(1.1));
  } else if (name == "custom") {
    throw Error(ErrorKind::Configuration, "preset 'custom' requires explicit per-block strategies");
  } else {
    throw Error(ErrorKind::Configuration, "unknown preset '" + name + "'");
  }
  return out;
}

}  // namespace bam
