#include "bam/bam.h"

#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "bam/diagnostics.hpp"
#include "bam/driver.hpp"
#include "bam/error.hpp"
#include "bam/experiment.hpp"

struct bam_problem {
  std::shared_ptr<const bam::Problem> problem;
};

struct bam_result {
  bam::RunResult result;
};

namespace {

thread_local std::string g_last_error;

bam_status code_for(bam::ErrorKind kind) {
  switch (kind) {
    case bam::ErrorKind::InvalidInput: return BAM_ERR_INVALID_INPUT;
    case bam::ErrorKind::Shape: return BAM_ERR_SHAPE;
    case bam::ErrorKind::Parameter: return BAM_ERR_PARAMETER;
    case bam::ErrorKind::Evaluation: return BAM_ERR_EVALUATION;
    case bam::ErrorKind::Configuration: return BAM_ERR_CONFIGURATION;
    case bam::ErrorKind::Estimation: return BAM_ERR_ESTIMATION;
    case bam::ErrorKind::Io: return BAM_ERR_IO;
  }
  return BAM_ERR_INTERNAL;
}

template <typename Body>
bam_status guard(Body body) {
  g_last_error.clear();
  try {
    body();
    return BAM_OK;
  } catch (const bam::Error& e) {
    g_last_error = e.what();
    return code_for(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BAM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return BAM_ERR_INTERNAL;
  }
}

bam_status null_arg(const char* what) {
  g_last_error = std::string(what) + " is NULL";
  return BAM_ERR_NULL_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void check_length(const bam::Problem& p, size_t len) {
  const auto n = static_cast<size_t>(p.structure().total_dim());
  if (len != n)
    throw bam::Error(bam::ErrorKind::Shape, "flat point has length " + std::to_string(len) +
                                                 ", expected " + std::to_string(n));
}

bam::BlockVector from_flat(const bam::Problem& p, const double* x, size_t len) {
  check_length(p, len);
  bam::Vector flat = Eigen::Map<const bam::Vector>(x, static_cast<Eigen::Index>(len));
  return bam::BlockVector::from_flat(p.structure_ptr(), flat);
}

bam::AlphaRule to_rule(const bam_strategy& s) {
  return s.alpha_kind == BAM_ALPHA_CONSTANT ? bam::AlphaRule::constant(s.alpha_value)
                                            : bam::AlphaRule::safety(s.alpha_value);
}

std::vector<bam::BlockStrategy> to_strategies(const bam::Problem& p, const bam_strategy* s,
                                              size_t n) {
  if (n != p.num_blocks())
    throw bam::Error(bam::ErrorKind::Configuration,
                     "got " + std::to_string(n) + " strategies for " +
                         std::to_string(p.num_blocks()) + " blocks");
  std::vector<bam::BlockStrategy> out;
  for (size_t i = 0; i < n; ++i) {
    switch (s[i].kind) {
      case BAM_STRATEGY_EXACT:
        out.push_back(bam::BlockStrategy::exact());
        break;
      case BAM_STRATEGY_LINEARIZED:
        out.push_back(bam::BlockStrategy::linearized(to_rule(s[i])));
        break;
      case BAM_STRATEGY_AUGMENTED:
        out.push_back(bam::BlockStrategy::augmented(to_rule(s[i])));
        break;
      case BAM_STRATEGY_CUSTOM: {
        const bam_custom_generator g = s[i].custom;
        if (!g.value || !g.gradient)
          throw bam::Error(bam::ErrorKind::Configuration,
                           "custom strategy for block " + std::to_string(i) + " lacks callbacks");
        const Eigen::Index dim = p.structure().dim(i);
        out.push_back(bam::BlockStrategy::custom(
            [g, dim](std::size_t, const bam::BlockVector&, std::size_t) {
              return bam::make_custom_generator(
                  dim,
                  [g](const bam::Vector& x) {
                    return g.value(x.data(), static_cast<size_t>(x.size()), g.user);
                  },
                  [g](const bam::Vector& x) {
                    bam::Vector out(x.size());
                    g.gradient(x.data(), static_cast<size_t>(x.size()), out.data(), g.user);
                    return out;
                  },
                  g.modulus, g.lipschitz, "custom");
            }));
        break;
      }
      default:
        throw bam::Error(bam::ErrorKind::Configuration,
                         "unknown strategy kind for block " + std::to_string(i));
    }
  }
  bam::validate_strategies(p, out);
  return out;
}

bam::SolverConfig to_config(const bam_solver_config* c) {
  bam::SolverConfig cfg;
  if (!c) return cfg;
  cfg.max_outer_iter = c->max_outer_iter;
  cfg.residual_tol = c->residual_tol;
  cfg.step_tol = c->step_tol;
  cfg.inner_tol = c->inner_tol;
  cfg.inner_max_iter = c->inner_max_iter;
  cfg.record_every = c->record_every;
  cfg.seed = c->seed;
  cfg.certificate_tol = c->certificate_tol;
  if (cfg.max_outer_iter < 1 || cfg.record_every < 1 || cfg.inner_max_iter < 1)
    throw bam::Error(bam::ErrorKind::Configuration,
                     "max_outer_iter, record_every and inner_max_iter must be >= 1");
  return cfg;
}

}  // namespace

extern "C" {

const char* bam_last_error(void) { return g_last_error.c_str(); }

const char* bam_status_string(bam_status status) {
  switch (status) {
    case BAM_OK: return "ok";
    case BAM_ERR_INVALID_INPUT: return "invalid input";
    case BAM_ERR_SHAPE: return "shape mismatch";
    case BAM_ERR_PARAMETER: return "invalid parameter";
    case BAM_ERR_EVALUATION: return "evaluation error";
    case BAM_ERR_CONFIGURATION: return "configuration error";
    case BAM_ERR_ESTIMATION: return "estimation error";
    case BAM_ERR_IO: return "i/o error";
    case BAM_ERR_NULL_ARGUMENT: return "null argument";
    case BAM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bam_string_free(char* s) { delete[] s; }

bam_status bam_problem_create(const char* name, const char* params_json, uint64_t seed,
                              bam_problem** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    nlohmann::json problem{{"name", name}, {"seed", seed}};
    if (params_json) {
      try {
        problem["params"] = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw bam::Error(bam::ErrorKind::Configuration, std::string("params: ") + e.what());
      }
    }
    const auto cfg = bam::experiment::parse_config(nlohmann::json{{"problem", problem}});
    auto handle = std::make_unique<bam_problem>();
    handle->problem = std::make_shared<const bam::Problem>(bam::experiment::build_problem(cfg.problem));
    *out = handle.release();
  });
}

void bam_problem_destroy(bam_problem* p) { delete p; }

size_t bam_problem_num_blocks(const bam_problem* p) { return p ? p->problem->num_blocks() : 0; }

size_t bam_problem_total_dim(const bam_problem* p) {
  return p ? static_cast<size_t>(p->problem->structure().total_dim()) : 0;
}

bam_status bam_problem_block_dim(const bam_problem* p, size_t block, size_t* out) {
  if (!p) return null_arg("problem");
  if (!out) return null_arg("out");
  return guard([&] {
    if (block >= p->problem->num_blocks())
      throw bam::Error(bam::ErrorKind::InvalidInput, "block index out of range");
    *out = static_cast<size_t>(p->problem->structure().dim(block));
  });
}

bam_status bam_problem_initial_point(const bam_problem* p, double* out, size_t len) {
  if (!p) return null_arg("problem");
  if (!out) return null_arg("out");
  return guard([&] {
    check_length(*p->problem, len);
    const bam::Vector flat = p->problem->initial_point().flatten();
    std::memcpy(out, flat.data(), len * sizeof(double));
  });
}

bam_status bam_problem_phi(const bam_problem* p, const double* x, size_t len, double* out) {
  if (!p) return null_arg("problem");
  if (!x) return null_arg("x");
  if (!out) return null_arg("out");
  return guard([&] { *out = bam::phi_value(*p->problem, from_flat(*p->problem, x, len)); });
}

bam_status bam_resolve_preset(const char* name, size_t n_blocks, bam_strategy* out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto strategies = bam::resolve_strategy_preset(name, n_blocks);
    for (size_t i = 0; i < strategies.size(); ++i) {
      bam_strategy s{};
      const auto& st = strategies[i];
      switch (st.kind) {
        case bam::BlockStrategy::Kind::Exact: s.kind = BAM_STRATEGY_EXACT; break;
        case bam::BlockStrategy::Kind::Linearized: s.kind = BAM_STRATEGY_LINEARIZED; break;
        case bam::BlockStrategy::Kind::Augmented: s.kind = BAM_STRATEGY_AUGMENTED; break;
        case bam::BlockStrategy::Kind::Custom: s.kind = BAM_STRATEGY_CUSTOM; break;
      }
      s.alpha_kind = st.alpha_rule.kind == bam::AlphaRule::Kind::Constant ? BAM_ALPHA_CONSTANT
                                                                          : BAM_ALPHA_SAFETY;
      s.alpha_value = st.alpha_rule.value;
      out[i] = s;
    }
  });
}

bam_solver_config bam_solver_config_default(void) {
  const bam::SolverConfig d;
  return bam_solver_config{d.max_outer_iter, d.residual_tol,   d.step_tol, d.inner_tol,
                           d.inner_max_iter, d.record_every,   d.seed,     d.certificate_tol};
}

bam_status bam_run(const bam_problem* p, const bam_strategy* strategies, size_t n,
                   const bam_solver_config* cfg, const double* x0, size_t x0_len,
                   bam_result** out) {
  if (!p) return null_arg("problem");
  if (!strategies) return null_arg("strategies");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    const auto s = to_strategies(*p->problem, strategies, n);
    std::optional<bam::BlockVector> start;
    if (x0) start = from_flat(*p->problem, x0, x0_len);
    auto handle = std::make_unique<bam_result>(
        bam_result{bam::run(*p->problem, s, to_config(cfg), start)});
    *out = handle.release();
  });
}

void bam_result_destroy(bam_result* r) { delete r; }

bam_run_status bam_result_status(const bam_result* r) {
  if (!r) return BAM_RUN_DIVERGED;
  switch (r->result.status) {
    case bam::RunStatus::ResidualConverged: return BAM_RUN_RESIDUAL_CONVERGED;
    case bam::RunStatus::StepConverged: return BAM_RUN_STEP_CONVERGED;
    case bam::RunStatus::MaxIter: return BAM_RUN_MAX_ITER;
    case bam::RunStatus::Diverged: return BAM_RUN_DIVERGED;
  }
  return BAM_RUN_DIVERGED;
}

size_t bam_result_sweeps(const bam_result* r) { return r ? r->result.sweeps : 0; }
double bam_result_final_phi(const bam_result* r) { return r ? r->result.final_phi : 0.0; }
double bam_result_final_residual(const bam_result* r) {
  return r ? r->result.final_residual : 0.0;
}
double bam_result_phi0(const bam_result* r) { return r ? r->result.trace.phi0 : 0.0; }
size_t bam_result_num_records(const bam_result* r) {
  return r ? r->result.trace.records.size() : 0;
}

bam_status bam_result_record(const bam_result* r, size_t index, bam_record* out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto& recs = r->result.trace.records;
    if (index >= recs.size())
      throw bam::Error(bam::ErrorKind::InvalidInput, "record index out of range");
    const auto& rec = recs[index];
    *out = bam_record{rec.k,        rec.phi,      rec.phi_half(), rec.step_norm_sq,
                      rec.bregman_paid, rec.residual, rec.cum_step,   rec.inner_hit_cap ? 1 : 0};
  });
}

bam_status bam_result_final_x(const bam_result* r, double* out, size_t len) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  return guard([&] {
    const bam::Vector flat = r->result.final_x.flatten();
    if (static_cast<size_t>(flat.size()) != len)
      throw bam::Error(bam::ErrorKind::Shape, "output buffer has the wrong length");
    std::memcpy(out, flat.data(), len * sizeof(double));
  });
}

bam_status bam_result_trace_csv(const bam_result* r, char** out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    std::ostringstream os;
    bam::experiment::write_trace_csv(os, r->result.trace);
    *out = dup_string(os.str());
  });
}

bam_status bam_check(const bam_problem* p, const bam_strategy* strategies, size_t n,
                     const bam_solver_config* cfg, const bam_result* r, const char* check_name,
                     bam_check_report* out, char** note_out) {
  if (!p) return null_arg("problem");
  if (!strategies) return null_arg("strategies");
  if (!r) return null_arg("result");
  if (!check_name) return null_arg("check_name");
  if (!out) return null_arg("out");
  if (note_out) *note_out = nullptr;
  return guard([&] {
    const auto s = to_strategies(*p->problem, strategies, n);
    const auto reports =
        bam::experiment::run_checks(*p->problem, s, r->result, to_config(cfg), {check_name});
    const bam::CheckReport& rep = reports.front();
    bam_verdict v = BAM_VERDICT_INCONCLUSIVE;
    switch (rep.verdict) {
      case bam::Verdict::Pass: v = BAM_VERDICT_PASS; break;
      case bam::Verdict::Fail: v = BAM_VERDICT_FAIL; break;
      case bam::Verdict::Skipped: v = BAM_VERDICT_SKIPPED; break;
      case bam::Verdict::Inconclusive: v = BAM_VERDICT_INCONCLUSIVE; break;
    }
    *out = bam_check_report{v, rep.worst_violation, rep.tolerance, rep.worst_iteration};
    if (note_out) *note_out = dup_string(rep.note);
  });
}

int bam_cli_execute(const char* command, const char* config_path, const char* out_dir,
                    int has_seed, uint64_t seed, int quiet) {
  namespace ex = bam::experiment;
  if (!command || !config_path) {
    g_last_error = "command and config_path are required";
    return ex::kExitConfig;
  }
  ex::Options opts;
  if (out_dir) opts.out_dir = out_dir;
  if (has_seed) opts.seed = seed;
  opts.quiet = quiet != 0;
  const std::string cmd = command;
  try {
    if (cmd == "run") return ex::cmd_run(config_path, opts);
    if (cmd == "compare") return ex::cmd_compare(config_path, opts);
    if (cmd == "check") return ex::cmd_check(config_path, opts);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ex::kExitConfig;
  }
  g_last_error = "unknown command '" + cmd + "' (expected run|compare|check)";
  return ex::kExitConfig;
}

}  // extern "C"
