#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bam/blockvec.hpp"
#include "bam/bregman.hpp"
#include "bam/prox.hpp"

namespace bam {

/// Smooth coupling term H(x_1, ..., x_n).
struct CouplingOracle {
  std::function<double(const BlockVector&)> value;
  std::function<Vector(const BlockVector&, std::size_t)> partial_grad;
  /// L_i such that grad_i H is L_i-Lipschitz in x_i with the other blocks at
  /// the given point. Empty means "unknown"; callers fall back to
  /// estimate_partial_lipschitz.
  std::function<double(const BlockVector&, std::size_t)> partial_lipschitz;
  /// Bound on |grad_i H(x) - grad_i H(x')| / |x_{-i} - x'_{-i}| when only the
  /// other blocks move. Empty means "unknown".
  std::function<double(const BlockVector&, std::size_t)> cross_lipschitz;
};

/// Per-block term f_i with its optional oracles.
struct BlockTerm {
  std::function<double(const Vector&)> value;
  /// (v, tau) -> argmin_u tau f(u) + 1/2|u - v|^2
  std::function<Vector(const Vector&, double)> prox;
  /// (x, i, generator) -> closed-form argmin over block i of
  /// H(x with block i free) + f_i + B_gen(., x_i), or nullopt when the
  /// generator kind is not covered.
  std::function<std::optional<Vector>(const BlockVector&, std::size_t, const BregmanGenerator&)>
      exact_coupled_min;
  /// (x_i, g) -> distance from -g to the subdifferential of f_i at x_i.
  std::function<double(const Vector&, const Vector&)> subdiff_certificate;
  std::string label;
};

/// min H(x) + sum_i f_i(x_i).
class Problem {
 public:
  Problem(std::string name, std::shared_ptr<const BlockStructure> structure,
          CouplingOracle coupling, std::vector<BlockTerm> terms, BlockVector initial_point);

  const std::string& name() const { return name_; }
  const BlockStructure& structure() const { return *structure_; }
  const std::shared_ptr<const BlockStructure>& structure_ptr() const { return structure_; }
  std::size_t num_blocks() const { return structure_->num_blocks(); }
  const CouplingOracle& coupling() const { return coupling_; }
  const BlockTerm& term(std::size_t i) const { return terms_.at(i); }
  const std::vector<BlockTerm>& terms() const { return terms_; }
  const BlockVector& initial_point() const { return initial_point_; }

  /// Analytic global minimizer, when the instance knows one.
  const std::optional<BlockVector>& reference_minimizer() const { return reference_minimizer_; }
  void set_reference_minimizer(BlockVector x) { reference_minimizer_ = std::move(x); }

  BlockVector make_point(std::vector<Vector> blocks) const {
    return BlockVector(structure_, std::move(blocks));
  }

 private:
  std::string name_;
  std::shared_ptr<const BlockStructure> structure_;
  CouplingOracle coupling_;
  std::vector<BlockTerm> terms_;
  BlockVector initial_point_;
  std::optional<BlockVector> reference_minimizer_;
};

/// H(x) + sum_i f_i(x_i).
double phi_value(const Problem& p, const BlockVector& x);

/// grad_i H at x, with shape and finiteness checks.
Vector partial_gradient(const Problem& p, const BlockVector& x, std::size_t i);

/// Declared L_i at x, or the empirical estimate when none is declared.
double partial_lipschitz(const Problem& p, const BlockVector& x, std::size_t i);

/// H restricted to block i with the other blocks frozen at x.
PartialCoupling restrict_coupling(const Problem& p, const BlockVector& x, std::size_t i);

/// max over seeded probe pairs of |d grad_i H| / |d x_i| (other blocks fixed at
/// x), times 1.5, capped by the declared constant when one exists.
double estimate_partial_lipschitz(const Problem& p, const BlockVector& x, std::size_t i,
                                  std::size_t probes, std::uint64_t seed);

/// Same, but perturbing every block except i.
double estimate_cross_lipschitz(const Problem& p, const BlockVector& x, std::size_t i,
                                std::size_t probes, std::uint64_t seed);

// -- Built-in instances ------------------------------------------------------

/// f(y) = (y-1)^2, H(y,z) = (y-z)^2, g(z) = (z+1)^2; minimizer (1/3, -1/3).
Problem build_separable_quadratic();

/// Data for lambda1|y|_1 + |Ay - z|^2 + lambda2 |z|_{1,2}.
struct SparseGroupData {
  Eigen::MatrixXd A;  // n2 x n1, i.i.d. standard normal
  Groups groups;      // partition of {0..n2-1}
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  double lipschitz_y = 0.0;   // 2 * lambda_max(A^T A)
  double sigma_max = 0.0;     // sqrt(lambda_max(A^T A))
  std::uint64_t seed = 0;
};

SparseGroupData make_sparse_group_data(Eigen::Index n1, Eigen::Index n2, Groups groups,
                                       std::uint64_t seed, double lambda1, double lambda2);

Problem build_sparse_group_instance(const SparseGroupData& data);
Problem build_sparse_group_instance(Eigen::Index n1, Eigen::Index n2, Groups groups,
                                    std::uint64_t seed, double lambda1, double lambda2);

/// H(x) = sum_{i<j} c_ij (x_i - x_j)^2, f_i(x_i) = (x_i - t_i)^2, scalar blocks.
struct MultiblockData {
  Eigen::MatrixXd weights;  // symmetric, zero diagonal, c_ij in [0.1, 1]
  Vector targets;           // t_i in [-1, 1]
};

MultiblockData make_multiblock_data(std::size_t n_blocks, std::uint64_t seed);
Problem build_multiblock_quadratic(const MultiblockData& data);
Problem build_multiblock_quadratic(std::size_t n_blocks, std::uint64_t seed);

/// Copy of `base` whose partial gradient for `block` is off by `delta` at
/// coordinate `index`. Used to exercise gradient checking.
Problem make_corrupted_gradient_problem(const Problem& base, std::size_t block,
                                        Eigen::Index index, double delta);

/// Largest eigenvalue of the symmetric PSD matrix M by seeded power iteration.
double power_iteration_lambda_max(const Eigen::MatrixXd& M, std::uint64_t seed,
                                  std::size_t max_iter = 1000, double rel_tol = 1e-8);

// Oracles for the regularizers used by the built-ins.
BlockTerm make_l1_term(double lambda);
BlockTerm make_group_l12_term(double lambda, Groups groups);
/// (x - target)^2 componentwise summed.
BlockTerm make_shifted_square_term(Vector target);

}  // namespace bam
