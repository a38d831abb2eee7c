#include "bam/problem.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "bam/error.hpp"

namespace bam {

Problem::Problem(std::string name, std::shared_ptr<const BlockStructure> structure,
                 CouplingOracle coupling, std::vector<BlockTerm> terms,
                 BlockVector initial_point)
    : name_(std::move(name)),
      structure_(std::move(structure)),
      coupling_(std::move(coupling)),
      terms_(std::move(terms)),
      initial_point_(std::move(initial_point)) {
  if (terms_.size() != structure_->num_blocks())
    throw Error(ErrorKind::Shape, "problem '" + name_ + "': " + std::to_string(terms_.size()) +
                                      " terms for " + std::to_string(structure_->num_blocks()) +
                                      " blocks");
  if (!coupling_.value || !coupling_.partial_grad)
    throw Error(ErrorKind::Configuration, "problem '" + name_ + "': coupling oracle incomplete");
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (!terms_[i].value)
      throw Error(ErrorKind::Configuration,
                  "problem '" + name_ + "': block '" + structure_->id(i) + "' has no value oracle");
  if (!(initial_point_.structure() == *structure_))
    throw Error(ErrorKind::Shape, "problem '" + name_ + "': initial point has the wrong structure");
  phi_value(*this, initial_point_);
}

namespace {

void require_structure(const Problem& p, const BlockVector& x) {
  if (!(x.structure() == p.structure()))
    throw Error(ErrorKind::Shape, "point does not match the block structure of '" + p.name() + "'");
}

}  // namespace

double phi_value(const Problem& p, const BlockVector& x) {
  require_structure(p, x);
  const double h = p.coupling().value(x);
  if (!std::isfinite(h))
    throw Error(ErrorKind::Evaluation, "coupling value is non-finite");
  double total = h;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const double fi = p.term(i).value(x.block(i));
    if (!std::isfinite(fi))
      throw Error(ErrorKind::Evaluation, "term of block '" + x.id(i) + "' is non-finite");
    total += fi;
  }
  return total;
}

Vector partial_gradient(const Problem& p, const BlockVector& x, std::size_t i) {
  require_structure(p, x);
  Vector g = p.coupling().partial_grad(x, i);
  if (g.size() != x.block(i).size())
    throw Error(ErrorKind::Shape, "partial gradient of block '" + x.id(i) + "' has wrong length");
  if (!g.allFinite())
    throw Error(ErrorKind::Evaluation, "partial gradient of block '" + x.id(i) + "' is non-finite");
  return g;
}

double partial_lipschitz(const Problem& p, const BlockVector& x, std::size_t i) {
  if (p.coupling().partial_lipschitz) return p.coupling().partial_lipschitz(x, i);
  return estimate_partial_lipschitz(p, x, i, 20, 0);
}

PartialCoupling restrict_coupling(const Problem& p, const BlockVector& x, std::size_t i) {
  require_structure(p, x);
  PartialCoupling c;
  const auto& oracle = p.coupling();
  c.value = [oracle, x, i](const Vector& u) { return oracle.value(x.with_block(i, u)); };
  c.gradient = [oracle, x, i](const Vector& u) -> Vector {
    return oracle.partial_grad(x.with_block(i, u), i);
  };
  c.lipschitz = partial_lipschitz(p, x, i);
  c.dim = x.block(i).size();
  c.frozen = x;
  c.block = i;
  return c;
}

namespace {

constexpr double kSafetyFactor = 1.5;
constexpr int kMaxDegenerate = 100;

template <typename Perturb>
double max_ratio(const Problem& p, const BlockVector& x, std::size_t i, std::size_t probes,
                 std::uint64_t seed, Perturb perturb) {
  if (probes < 2) throw Error(ErrorKind::Parameter, "Lipschitz estimation needs >= 2 probes");
  require_structure(p, x);
  std::mt19937_64 rng(seed);
  double best = 0.0;
  int degenerate = 0;
  for (std::size_t k = 0; k < probes; ++k) {
    const BlockVector a = perturb(rng);
    const BlockVector b = perturb(rng);
    const double dx = norm(combine(1.0, a, -1.0, b));
    if (dx == 0.0) {
      if (++degenerate > kMaxDegenerate)
        throw Error(ErrorKind::Estimation, "Lipschitz estimation: too many degenerate probes");
      --k;
      continue;
    }
    const Vector ga = partial_gradient(p, a, i);
    const Vector gb = partial_gradient(p, b, i);
    best = std::max(best, (ga - gb).norm() / dx);
  }
  return best * kSafetyFactor;
}

}  // namespace

double estimate_partial_lipschitz(const Problem& p, const BlockVector& x, std::size_t i,
                                  std::size_t probes, std::uint64_t seed) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto perturb = [&](std::mt19937_64& rng) {
    Vector u = x.block(i);
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] += unif(rng);
    return x.with_block(i, std::move(u));
  };
  double est = max_ratio(p, x, i, probes, seed, perturb);
  if (p.coupling().partial_lipschitz) est = std::min(est, p.coupling().partial_lipschitz(x, i));
  return est;
}

double estimate_cross_lipschitz(const Problem& p, const BlockVector& x, std::size_t i,
                                std::size_t probes, std::uint64_t seed) {
  if (p.num_blocks() < 2) return 0.0;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto perturb = [&](std::mt19937_64& rng) {
    BlockVector out = x;
    for (std::size_t b = 0; b < x.num_blocks(); ++b) {
      if (b == i) continue;
      Vector u = x.block(b);
      for (Eigen::Index j = 0; j < u.size(); ++j) u[j] += unif(rng);
      out = out.with_block(b, std::move(u));
    }
    return out;
  };
  double est = max_ratio(p, x, i, probes, seed, perturb);
  if (p.coupling().cross_lipschitz) est = std::min(est, p.coupling().cross_lipschitz(x, i));
  return est;
}

double power_iteration_lambda_max(const Eigen::MatrixXd& M, std::uint64_t seed,
                                  std::size_t max_iter, double rel_tol) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw Error(ErrorKind::Shape, "power iteration needs a nonempty square matrix");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(M.rows());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
  v.normalize();
  double lambda = v.dot(M * v);
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vector w = M * v;
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    v = w / nrm;
    const double next = v.dot(M * v);
    const bool done = std::abs(next - lambda) <= rel_tol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return lambda;
}

// -- Terms -------------------------------------------------------------------

BlockTerm make_l1_term(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Parameter, "l1 term: lambda must be > 0");
  BlockTerm t;
  t.label = "l1";
  t.value = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
  t.prox = [lambda](const Vector& v, double tau) { return soft_threshold(v, tau * lambda); };
  t.subdiff_certificate = [lambda](const Vector& x, const Vector& g) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      double d;
      if (x[j] != 0.0)
        d = std::abs(-g[j] - lambda * (x[j] > 0.0 ? 1.0 : -1.0));
      else
        d = std::max(0.0, std::abs(g[j]) - lambda);
      sq += d * d;
    }
    return std::sqrt(sq);
  };
  return t;
}

BlockTerm make_group_l12_term(double lambda, Groups groups) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Parameter, "l12 term: lambda must be > 0");
  auto shared = std::make_shared<const Groups>(std::move(groups));
  BlockTerm t;
  t.label = "l12";
  t.value = [lambda, shared](const Vector& x) {
    double total = 0.0;
    for (const auto& g : *shared) {
      double sq = 0.0;
      for (Eigen::Index idx : g) sq += x[idx] * x[idx];
      total += std::sqrt(sq);
    }
    return lambda * total;
  };
  t.prox = [lambda, shared](const Vector& v, double tau) {
    return group_soft_threshold(v, *shared, tau * lambda);
  };
  t.subdiff_certificate = [lambda, shared](const Vector& x, const Vector& g) {
    double sq = 0.0;
    for (const auto& grp : *shared) {
      double xn = 0.0;
      for (Eigen::Index idx : grp) xn += x[idx] * x[idx];
      xn = std::sqrt(xn);
      if (xn > 0.0) {
        for (Eigen::Index idx : grp) {
          const double d = -g[idx] - lambda * x[idx] / xn;
          sq += d * d;
        }
      } else {
        double gn = 0.0;
        for (Eigen::Index idx : grp) gn += g[idx] * g[idx];
        const double d = std::max(0.0, std::sqrt(gn) - lambda);
        sq += d * d;
      }
    }
    return std::sqrt(sq);
  };
  return t;
}

BlockTerm make_shifted_square_term(Vector target) {
  BlockTerm t;
  t.label = "square";
  t.value = [target](const Vector& x) { return (x - target).squaredNorm(); };
  t.prox = [target](const Vector& v, double tau) -> Vector {
    if (!(tau > 0.0)) throw Error(ErrorKind::Parameter, "square prox: tau must be > 0");
    return (v + 2.0 * tau * target) / (1.0 + 2.0 * tau);
  };
  t.subdiff_certificate = [target](const Vector& x, const Vector& g) {
    return (2.0 * (x - target) + g).norm();
  };
  return t;
}

// -- Pairwise quadratic (separable quadratic and multi-block) ----------------

namespace {

/// Weight a of the quadratic proximity term for generators with a closed form.
std::optional<double> quadratic_weight(const BregmanGenerator& gen) {
  switch (gen.kind) {
    case BregmanGenerator::Kind::Zero: return 0.0;
    case BregmanGenerator::Kind::Augmented: return gen.alpha;
    default: return std::nullopt;
  }
}

Problem build_pairwise_quadratic(std::string name, std::vector<std::string> ids,
                                 const Eigen::MatrixXd& weights, const Vector& targets) {
  const auto n = static_cast<std::size_t>(targets.size());
  auto structure = std::make_shared<const BlockStructure>(
      std::move(ids), std::vector<Eigen::Index>(n, 1));
  auto c = std::make_shared<const Eigen::MatrixXd>(weights);
  auto t = std::make_shared<const Vector>(targets);

  auto flat = [](const BlockVector& x) { return x.flatten(); };

  CouplingOracle coupling;
  coupling.value = [c, flat](const BlockVector& x) {
    const Vector v = flat(x);
    double h = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (Eigen::Index j = i + 1; j < v.size(); ++j) {
        const double d = v[i] - v[j];
        h += (*c)(i, j) * d * d;
      }
    return h;
  };
  coupling.partial_grad = [c, flat](const BlockVector& x, std::size_t i) -> Vector {
    const Vector v = flat(x);
    const auto ii = static_cast<Eigen::Index>(i);
    double g = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (j != ii) g += 2.0 * (*c)(ii, j) * (v[ii] - v[j]);
    return Vector::Constant(1, g);
  };
  coupling.partial_lipschitz = [c](const BlockVector&, std::size_t i) {
    return 2.0 * c->row(static_cast<Eigen::Index>(i)).sum();
  };
  coupling.cross_lipschitz = [c](const BlockVector&, std::size_t i) {
    return 2.0 * c->row(static_cast<Eigen::Index>(i)).norm();
  };

  std::vector<BlockTerm> terms;
  for (std::size_t i = 0; i < n; ++i) {
    BlockTerm term = make_shifted_square_term(Vector::Constant(1, (*t)[static_cast<Eigen::Index>(i)]));
    // argmin_u (u - t_i)^2 + sum_j c_ij (u - x_j)^2 + (a/2)(u - x_i)^2
    term.exact_coupled_min = [c, t, flat](const BlockVector& x, std::size_t i,
                                          const BregmanGenerator& gen) -> std::optional<Vector> {
      const auto a = quadratic_weight(gen);
      if (!a) return std::nullopt;
      const Vector v = flat(x);
      const auto ii = static_cast<Eigen::Index>(i);
      double num = 2.0 * (*t)[ii] + *a * v[ii];
      double den = 2.0 + *a;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (j == ii) continue;
        num += 2.0 * (*c)(ii, j) * v[j];
        den += 2.0 * (*c)(ii, j);
      }
      return Vector::Constant(1, num / den);
    };
    terms.push_back(std::move(term));
  }

  // Stationarity: (I + Laplacian(c)) x = t.
  Eigen::MatrixXd system = -weights;
  for (Eigen::Index i = 0; i < system.rows(); ++i)
    system(i, i) = 1.0 + weights.row(i).sum() - weights(i, i);
  const Vector xstar = system.ldlt().solve(targets);

  Problem p(std::move(name), structure, std::move(coupling), std::move(terms),
            BlockVector::zeros(structure));
  p.set_reference_minimizer(BlockVector::from_flat(structure, xstar));
  return p;
}

}  // namespace

Problem build_separable_quadratic() {
  Eigen::MatrixXd c(2, 2);
  c << 0.0, 1.0, 1.0, 0.0;
  Vector t(2);
  t << 1.0, -1.0;
  return build_pairwise_quadratic("separable_quadratic", {"y", "z"}, c, t);
}

MultiblockData make_multiblock_data(std::size_t n_blocks, std::uint64_t seed) {
  if (n_blocks < 3)
    throw Error(ErrorKind::Parameter, "multiblock quadratic needs n_blocks >= 3");
  const auto n = static_cast<Eigen::Index>(n_blocks);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.1, 1.0);
  std::uniform_real_distribution<double> target(-1.0, 1.0);
  MultiblockData data;
  data.weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) data.weights(i, j) = data.weights(j, i) = coef(rng);
  data.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) data.targets[i] = target(rng);
  return data;
}

Problem build_multiblock_quadratic(const MultiblockData& data) {
  const auto n = data.targets.size();
  if (n < 3) throw Error(ErrorKind::Parameter, "multiblock quadratic needs n_blocks >= 3");
  if (data.weights.rows() != n || data.weights.cols() != n)
    throw Error(ErrorKind::Shape, "multiblock quadratic: weight matrix has the wrong shape");
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i + 1));
  return build_pairwise_quadratic("multiblock_quadratic", std::move(ids), data.weights,
                                  data.targets);
}

Problem build_multiblock_quadratic(std::size_t n_blocks, std::uint64_t seed) {
  return build_multiblock_quadratic(make_multiblock_data(n_blocks, seed));
}

// -- Sparse group instance ---------------------------------------------------

SparseGroupData make_sparse_group_data(Eigen::Index n1, Eigen::Index n2, Groups groups,
                                       std::uint64_t seed, double lambda1, double lambda2) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::Parameter, "sparse group: n1, n2 must be >= 1");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw Error(ErrorKind::Parameter, "sparse group: lambda1 and lambda2 must be > 0");
  validate_partition(groups, n2);

  SparseGroupData data;
  data.seed = seed;
  data.lambda1 = lambda1;
  data.lambda2 = lambda2;
  data.groups = std::move(groups);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  data.A.resize(n2, n1);
  for (Eigen::Index j = 0; j < n1; ++j)
    for (Eigen::Index i = 0; i < n2; ++i) data.A(i, j) = normal(rng);
  const Eigen::MatrixXd gram = data.A.transpose() * data.A;
  const double lmax = power_iteration_lambda_max(gram, seed);
  data.lipschitz_y = 2.0 * lmax;
  data.sigma_max = std::sqrt(lmax);
  return data;
}

Problem build_sparse_group_instance(const SparseGroupData& data) {
  auto d = std::make_shared<const SparseGroupData>(data);
  auto structure = std::make_shared<const BlockStructure>(
      std::vector<std::string>{"y", "z"},
      std::vector<Eigen::Index>{d->A.cols(), d->A.rows()});

  CouplingOracle coupling;
  coupling.value = [d](const BlockVector& x) {
    return (d->A * x.block(0) - x.block(1)).squaredNorm();
  };
  coupling.partial_grad = [d](const BlockVector& x, std::size_t i) -> Vector {
    const Vector r = d->A * x.block(0) - x.block(1);
    if (i == 0) return 2.0 * (d->A.transpose() * r);
    return -2.0 * r;
  };
  coupling.partial_lipschitz = [d](const BlockVector&, std::size_t i) {
    return i == 0 ? d->lipschitz_y : 2.0;
  };
  coupling.cross_lipschitz = [d](const BlockVector&, std::size_t) { return 2.0 * d->sigma_max; };

  std::vector<BlockTerm> terms;
  terms.push_back(make_l1_term(d->lambda1));
  BlockTerm g = make_group_l12_term(d->lambda2, d->groups);
  // argmin_z |Ay - z|^2 + lambda2 |z|_{1,2} + (a/2)|z - z_k|^2
  //   = prox_{lambda2/(2+a) |.|_{1,2}}((2 Ay + a z_k) / (2 + a))
  g.exact_coupled_min = [d](const BlockVector& x, std::size_t i,
                            const BregmanGenerator& gen) -> std::optional<Vector> {
    if (i != 1) return std::nullopt;
    const auto a = quadratic_weight(gen);
    if (!a) return std::nullopt;
    const Vector w = (2.0 * (d->A * x.block(0)) + *a * x.block(1)) / (2.0 + *a);
    return group_soft_threshold(w, d->groups, d->lambda2 / (2.0 + *a));
  };
  terms.push_back(std::move(g));

  // Start away from the origin, which is itself critical.
  std::mt19937_64 rng(d->seed + 1);
  std::normal_distribution<double> normal;
  Vector y0(d->A.cols());
  for (Eigen::Index j = 0; j < y0.size(); ++j) y0[j] = normal(rng);
  Vector z0(d->A.rows());
  for (Eigen::Index j = 0; j < z0.size(); ++j) z0[j] = normal(rng);
  BlockVector x0(structure, {y0, z0});

  return Problem("sparse_group", structure, std::move(coupling), std::move(terms), std::move(x0));
}

Problem build_sparse_group_instance(Eigen::Index n1, Eigen::Index n2, Groups groups,
                                    std::uint64_t seed, double lambda1, double lambda2) {
  return build_sparse_group_instance(
      make_sparse_group_data(n1, n2, std::move(groups), seed, lambda1, lambda2));
}

Problem make_corrupted_gradient_problem(const Problem& base, std::size_t block, Eigen::Index index,
                                        double delta) {
  if (block >= base.num_blocks() || index < 0 || index >= base.structure().dim(block))
    throw Error(ErrorKind::Shape, "corrupted gradient: coordinate out of range");
  CouplingOracle coupling = base.coupling();
  auto inner = coupling.partial_grad;
  coupling.partial_grad = [inner, block, index, delta](const BlockVector& x, std::size_t i) {
    Vector g = inner(x, i);
    if (i == block) g[index] += delta;
    return g;
  };
  Problem p(base.name() + "+fault", base.structure_ptr(), std::move(coupling), base.terms(),
            base.initial_point());
  return p;
}

}  // namespace bam
