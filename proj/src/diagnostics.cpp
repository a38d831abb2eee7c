#include "bam/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bam/error.hpp"

namespace bam {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

constexpr double kDescentSlack = 1e-10;
constexpr double kDecreaseSlack = 1e-10;
constexpr double kResidualSlack = 1e-10;
constexpr std::size_t kMinTrendRecords = 20;

/// Fills worst_violation / worst_iteration from per-record margins (margin < 0
/// means violated) and sets the verdict against `tol`.
void finish(CheckReport& r, const IterateTrace& trace) {
  double worst = 0.0;
  std::size_t at = 0;
  for (std::size_t j = 0; j < r.margins.size(); ++j) {
    if (-r.margins[j] > worst) {
      worst = -r.margins[j];
      at = trace.records.empty() ? j : trace.records[j].k;
    }
  }
  r.worst_violation = worst;
  r.worst_iteration = at;
  r.verdict = worst <= r.tolerance ? Verdict::Pass : Verdict::Fail;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

std::size_t tail_count(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n))));
}

}  // namespace

CheckReport check_monotone_descent(const IterateTrace& trace) {
  CheckReport r;
  r.name = "monotone_descent";
  r.tolerance = kDescentSlack * (1.0 + std::abs(trace.phi0));
  for (const auto& rec : trace.records) {
    double prev = rec.phi_prev;
    double worst_rise = -std::numeric_limits<double>::infinity();
    const std::vector<double> chain = rec.phi_partial.empty() ? std::vector<double>{rec.phi}
                                                              : rec.phi_partial;
    for (double next : chain) {
      worst_rise = std::max(worst_rise, next - prev);
      prev = next;
    }
    r.margins.push_back(-worst_rise);
  }
  finish(r, trace);
  if (trace.records.empty()) r.note = "no sweeps recorded";
  return r;
}

CheckReport check_sufficient_decrease(const IterateTrace& trace, double nu_min) {
  CheckReport r;
  r.name = "sufficient_decrease";
  r.tolerance = kDecreaseSlack;
  if (!(nu_min > 0.0)) {
    r.verdict = Verdict::Skipped;
    r.note = "minimum generator modulus is 0; sufficient decrease is not claimed";
    return r;
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    const double drop = rec.phi_prev - rec.phi;
    r.margins.push_back(drop - 0.5 * nu_min * rec.step_norm_sq);
    if (rec.step_norm_sq >= 1e-12) min_ratio = std::min(min_ratio, drop / rec.step_norm_sq);
  }
  finish(r, trace);
  std::ostringstream os;
  os.precision(6);
  os << "nu_min=" << nu_min << "; asserted constant nu_min/2=" << 0.5 * nu_min;
  if (std::isfinite(min_ratio)) {
    os << "; observed min ratio " << min_ratio << " ("
       << (min_ratio >= nu_min ? "data also supports nu_min" : "data supports nu_min/2 only") << ")";
  } else {
    os << "; no sweep with |step|^2 >= 1e-12 to estimate the ratio";
  }
  r.note = os.str();
  return r;
}

CheckReport check_blockwise_sufficient_decrease(const IterateTrace& trace) {
  CheckReport r;
  r.name = "blockwise_sufficient_decrease";
  r.tolerance = kDecreaseSlack;
  bool any = false;
  for (const auto& rec : trace.records) {
    double margin = std::numeric_limits<double>::infinity();
    double prev = rec.phi_prev;
    for (std::size_t i = 0; i < rec.phi_partial.size(); ++i) {
      const double next = rec.phi_partial[i];
      const double nu = i < rec.block_nu.size() ? rec.block_nu[i] : 0.0;
      if (nu > 0.0) {
        any = true;
        margin = std::min(margin, (prev - next) - 0.5 * nu * rec.block_step_sq[i]);
      }
      prev = next;
    }
    r.margins.push_back(std::isfinite(margin) ? margin : 0.0);
  }
  if (!any) {
    r.margins.clear();
    r.verdict = Verdict::Skipped;
    r.note = "no block used a strongly convex generator";
    return r;
  }
  finish(r, trace);
  return r;
}

SubgradientResidual subgradient_residual(const Problem& p, const BlockVector& x_prev,
                                         const BlockVector& x_next,
                                         const std::vector<BregmanGenerator>& generators) {
  const std::size_t n = p.num_blocks();
  if (!(x_prev.structure() == p.structure()) || !(x_next.structure() == p.structure()))
    throw Error(ErrorKind::Shape, "subgradient residual: points do not match the problem");
  if (generators.size() != n)
    throw Error(ErrorKind::Configuration, "subgradient residual: one generator per block required");

  std::vector<Vector> v;
  v.reserve(n);
  BlockVector before = x_prev;  // point block i's subproblem was posed at
  for (std::size_t i = 0; i < n; ++i) {
    const BregmanGenerator& gen = generators[i];
    if (gen.frozen) {
      bool match = gen.frozen_block == i && gen.frozen->structure() == p.structure();
      for (std::size_t j = 0; match && j < n; ++j)
        match = gen.frozen->block(j) == before.block(j);
      if (!match)
        throw Error(ErrorKind::Configuration,
                    "subgradient residual: generator of block '" + p.structure().id(i) +
                        "' was frozen at a different point than the sweep used");
    }
    const BlockVector mixed = before.with_block(i, x_next.block(i));
    v.push_back(partial_gradient(p, x_next, i) - partial_gradient(p, mixed, i) +
                gen.gradient(x_prev.block(i)) - gen.gradient(x_next.block(i)));
    before = mixed;
  }
  SubgradientResidual out{BlockVector(p.structure_ptr(), std::move(v)), 0.0};
  out.norm = norm(out.v);
  return out;
}

CheckReport check_residual_bound(const IterateTrace& trace, double L_hat) {
  CheckReport r;
  r.name = "residual_bound";
  r.tolerance = kResidualSlack;
  for (const auto& rec : trace.records)
    r.margins.push_back(L_hat * std::sqrt(rec.step_norm_sq) - rec.residual);
  finish(r, trace);
  std::ostringstream os;
  os << "L_hat=" << L_hat;
  r.note = os.str();
  return r;
}

double residual_bound_constant(std::size_t n_blocks, double cross_lipschitz,
                               double generator_lipschitz) {
  return std::sqrt(static_cast<double>(n_blocks)) * (cross_lipschitz + generator_lipschitz);
}

CheckReport check_residual_vanishes(const IterateTrace& trace, double L_hat) {
  CheckReport r;
  r.name = "residual_vanishes";
  r.tolerance = 0.0;
  const std::size_t n = trace.records.size();
  if (n < kMinTrendRecords) {
    r.verdict = Verdict::Inconclusive;
    r.note = "trace has " + std::to_string(n) + " records; need at least " +
             std::to_string(kMinTrendRecords);
    return r;
  }
  const std::size_t tail = tail_count(n);
  std::vector<double> res, steps;
  for (std::size_t j = n - tail; j < n; ++j) {
    res.push_back(trace.records[j].residual);
    steps.push_back(std::sqrt(trace.records[j].step_norm_sq));
  }
  const double med_res = median(res);
  const double med_step = median(steps);
  const double trend_excess = med_res - 10.0 * med_step * L_hat;

  double first_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 10; ++j) first_min = std::min(first_min, trace.records[j].residual);
  const double final_res = trace.records.back().residual;
  // Strictly below the early minimum, unless the residual reached exactly 0.
  double drop_excess = final_res - first_min;
  if (final_res > 0.0 && drop_excess >= 0.0)
    drop_excess = std::max(drop_excess, std::numeric_limits<double>::denorm_min());

  r.margins = {-trend_excess, -drop_excess};
  r.worst_violation = std::max({0.0, trend_excess, drop_excess});
  r.worst_iteration = trace.records.back().k;
  r.verdict = (trend_excess <= 0.0 && drop_excess <= 0.0) ? Verdict::Pass : Verdict::Fail;
  std::ostringstream os;
  os << "tail median residual " << med_res << ", tail median step " << med_step << ", L_hat "
     << L_hat << "; final residual " << final_res << " vs early minimum " << first_min;
  r.note = os.str();
  return r;
}

CheckReport critical_point_certificate(const Problem& p, const BlockVector& x, double tol) {
  CheckReport r;
  r.name = "critical_point";
  r.tolerance = tol;
  std::string missing;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const BlockTerm& term = p.term(i);
    if (!term.subdiff_certificate) {
      missing += (missing.empty() ? "" : ", ") + p.structure().id(i);
      r.margins.push_back(0.0);
      continue;
    }
    const double d = term.subdiff_certificate(x.block(i), partial_gradient(p, x, i));
    r.margins.push_back(tol - d);
    if (d > r.worst_violation) {
      r.worst_violation = d;
      r.worst_iteration = i;
    }
  }
  const bool ok = r.worst_violation <= tol;
  if (!ok) {
    r.verdict = Verdict::Fail;
    r.note = "block '" + p.structure().id(r.worst_iteration) + "' violates -grad H in df";
  } else if (!missing.empty()) {
    r.verdict = Verdict::Inconclusive;
    r.note = "no subdifferential certificate for block(s) " + missing;
  } else {
    r.verdict = Verdict::Pass;
  }
  return r;
}

CheckReport gradcheck(const Problem& p, const BlockVector& x, double h, double tol,
                      std::size_t probes, std::uint64_t seed) {
  CheckReport r;
  r.name = "gradcheck";
  r.tolerance = tol;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto& H = p.coupling().value;
  std::string where;
  for (std::size_t probe = 0; probe < std::max<std::size_t>(probes, 1); ++probe) {
    BlockVector pt = x;
    if (probe > 0) {
      for (std::size_t b = 0; b < x.num_blocks(); ++b) {
        Vector u = x.block(b);
        for (Eigen::Index j = 0; j < u.size(); ++j) u[j] += unif(rng);
        pt = pt.with_block(b, std::move(u));
      }
    }
    double probe_worst = 0.0;
    for (std::size_t b = 0; b < pt.num_blocks(); ++b) {
      const Vector g = partial_gradient(p, pt, b);
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        Vector up = pt.block(b), dn = pt.block(b);
        const double step = h * std::max(1.0, std::abs(up[j]));
        up[j] += step;
        dn[j] -= step;
        const double fd = (H(pt.with_block(b, up)) - H(pt.with_block(b, dn))) / (2.0 * step);
        const double err = std::abs(fd - g[j]) / std::max({1.0, std::abs(fd), std::abs(g[j])});
        probe_worst = std::max(probe_worst, err);
        if (err > r.worst_violation) {
          r.worst_violation = err;
          r.worst_iteration = probe;
          where = "probe " + std::to_string(probe) + ", block '" + pt.id(b) + "', coordinate " +
                  std::to_string(j);
        }
      }
    }
    r.margins.push_back(tol - probe_worst);
  }
  r.verdict = r.worst_violation <= tol ? Verdict::Pass : Verdict::Fail;
  std::ostringstream os;
  os << "worst relative error " << r.worst_violation;
  if (!where.empty()) os << " at " << where;
  r.note = os.str();
  return r;
}

FiniteLengthReport finite_length_monitor(const IterateTrace& trace) {
  FiniteLengthReport out;
  out.cum_step.push_back(0.0);
  for (const auto& rec : trace.records) out.cum_step.push_back(rec.cum_step);
  const std::size_t m = out.cum_step.size() - 1;
  out.total = out.cum_step.back();
  if (m == 0) return out;
  const std::size_t tail = tail_count(m);
  out.tail_increment = out.cum_step[m] - out.cum_step[m - tail];
  out.plateau = out.total > 0.0 && out.tail_increment < 0.01 * out.total;
  return out;
}

CheckReport to_check_report(const FiniteLengthReport& fl) {
  CheckReport r;
  r.name = "finite_length";
  r.tolerance = 0.01 * fl.total;
  r.worst_violation = fl.tail_increment;
  r.worst_iteration = fl.cum_step.empty() ? 0 : fl.cum_step.size() - 1;
  std::ostringstream os;
  os << "total length " << fl.total << ", last-10% increment " << fl.tail_increment;
  if (fl.plateau) {
    r.verdict = Verdict::Pass;
    os << " (plateau)";
  } else {
    r.verdict = Verdict::Inconclusive;
    os << " (no plateau yet)";
  }
  r.note = os.str();
  return r;
}

CheckReport check_prox_optimality(const BlockTerm& term, Eigen::Index dim, std::size_t cases,
                                  std::uint64_t seed) {
  CheckReport r;
  r.name = "prox_optimality";
  r.tolerance = 1e-10;
  if (!term.prox) {
    r.verdict = Verdict::Skipped;
    r.note = "term '" + term.label + "' has no prox oracle";
    return r;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> vdist(-3.0, 3.0);
  std::uniform_real_distribution<double> tdist(0.05, 2.0);
  std::uniform_real_distribution<double> ddist(-1.0, 1.0);
  for (std::size_t c = 0; c < cases; ++c) {
    Vector v(dim);
    for (Eigen::Index j = 0; j < dim; ++j) v[j] = vdist(rng);
    const double tau = tdist(rng);
    auto objective = [&](const Vector& u) { return tau * term.value(u) + 0.5 * (u - v).squaredNorm(); };
    const Vector u = term.prox(v, tau);
    const double best = objective(u);
    double margin = objective(v) - best;
    for (int k = 0; k < 100; ++k) {
      Vector d(dim);
      for (Eigen::Index j = 0; j < dim; ++j) d[j] = ddist(rng);
      const double dn = d.norm();
      if (dn > 0.0) d *= 0.1 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) / dn;
      margin = std::min(margin, objective(u + d) - best);
    }
    r.margins.push_back(margin);
  }
  IterateTrace none;
  finish(r, none);
  r.note = "term '" + term.label + "', " + std::to_string(cases) + " cases";
  return r;
}

CheckReport to_check_report(const std::string& name, const ConvexityReport& cr) {
  CheckReport r;
  r.name = name;
  r.tolerance = 1e-8;
  r.worst_violation = std::max(0.0, cr.modulus_nu - cr.min_ratio);
  r.verdict = cr.pass ? Verdict::Pass : Verdict::Fail;
  std::ostringstream os;
  os << "min monotonicity ratio " << cr.min_ratio << " vs declared modulus " << cr.modulus_nu
     << " over " << cr.probes << " probes";
  r.note = os.str();
  return r;
}

void to_json(nlohmann::json& j, const CheckReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"pass", r.pass()},
                     {"verdict", to_string(r.verdict)},
                     {"worst_violation", r.worst_violation},
                     {"worst_iteration", r.worst_iteration},
                     {"tolerance", r.tolerance}};
  if (!r.note.empty()) j["note"] = r.note;
}

}  // namespace bam
