#include "bam/experiment.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "bam/diagnostics.hpp"
#include "bam/error.hpp"

namespace bam::experiment {

using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_logger_mt("bam");
    l->set_pattern("[bam] [%l] %v");
    return l;
  }();
  return log;
}

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::Configuration, field + ": " + message);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) config_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_error(join(path, key), "expected a number");
  return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& path, const char* key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) config_error(join(path, key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) config_error(join(path, key), "expected a string");
  return v.get<std::string>();
}

BlockStrategy::Kind parse_kind(const std::string& s, const std::string& field) {
  if (s == "exact") return BlockStrategy::Kind::Exact;
  if (s == "linearized") return BlockStrategy::Kind::Linearized;
  if (s == "augmented") return BlockStrategy::Kind::Augmented;
  config_error(field, "unknown strategy kind '" + s + "' (expected exact|linearized|augmented)");
}

ProblemSpec parse_problem(const json& j) {
  reject_unknown(j, "problem", {"name", "params", "seed", "fault"});
  if (!j.contains("name")) config_error("problem.name", "required");
  ProblemSpec spec;
  spec.name = get_string(j, "problem", "name");
  spec.seed = get_uint(j, "problem", "seed", spec.seed);
  if (j.contains("params")) {
    spec.params = j.at("params");
    if (!spec.params.is_object()) config_error("problem.params", "expected an object");
  }
  if (spec.name == "separable_quadratic") {
    reject_unknown(spec.params, "problem.params", {});
  } else if (spec.name == "sparse_group") {
    reject_unknown(spec.params, "problem.params",
                   {"n1", "n2", "group_size", "groups", "lambda1", "lambda2"});
    if (spec.params.contains("group_size") && spec.params.contains("groups"))
      config_error("problem.params", "give either group_size or groups, not both");
  } else if (spec.name == "multiblock_quadratic") {
    reject_unknown(spec.params, "problem.params", {"n_blocks"});
  } else {
    config_error("problem.name", "unknown problem '" + spec.name +
                                     "' (expected separable_quadratic|sparse_group|multiblock_quadratic)");
  }
  if (j.contains("fault")) {
    const json& f = j.at("fault");
    reject_unknown(f, "problem.fault", {"block", "index", "delta"});
    FaultSpec fault;
    fault.block = get_uint(f, "problem.fault", "block", 0);
    fault.index = static_cast<Eigen::Index>(get_uint(f, "problem.fault", "index", 0));
    fault.delta = get_number(f, "problem.fault", "delta", fault.delta);
    spec.fault = fault;
  }
  return spec;
}

StrategySpec parse_strategy(const json& j, const std::string& path) {
  reject_unknown(j, path, {"kind", "gamma", "alpha"});
  if (!j.contains("kind")) config_error(join(path, "kind"), "required");
  StrategySpec s;
  s.kind = parse_kind(get_string(j, path, "kind"), join(path, "kind"));
  if (j.contains("gamma")) s.gamma = get_number(j, path, "gamma", 0.0);
  if (j.contains("alpha")) s.alpha = get_number(j, path, "alpha", 0.0);
  if (s.gamma && s.alpha) config_error(path, "give either gamma or alpha, not both");
  if (s.kind == BlockStrategy::Kind::Exact && (s.gamma || s.alpha))
    config_error(path, "exact strategy takes no gamma/alpha");
  if (s.kind == BlockStrategy::Kind::Linearized && s.gamma && !(*s.gamma > 1.0))
    config_error(join(path, "gamma"),
                 "linearized safety factor must exceed 1 (alpha_k > L_i keeps the generator convex)");
  if (s.kind == BlockStrategy::Kind::Augmented && ((s.gamma && !(*s.gamma > 0.0)) ||
                                                   (s.alpha && !(*s.alpha > 0.0))))
    config_error(path, "augmented alpha rule must be positive");
  return s;
}

SolverConfig parse_solver(const json& j) {
  reject_unknown(j, "solver",
                 {"max_outer_iter", "residual_tol", "step_tol", "inner_tol", "inner_max_iter",
                  "record_every", "seed", "certificate_tol"});
  SolverConfig s;
  s.max_outer_iter = get_uint(j, "solver", "max_outer_iter", s.max_outer_iter);
  s.residual_tol = get_number(j, "solver", "residual_tol", s.residual_tol);
  s.step_tol = get_number(j, "solver", "step_tol", s.step_tol);
  s.inner_tol = get_number(j, "solver", "inner_tol", s.inner_tol);
  s.inner_max_iter = get_uint(j, "solver", "inner_max_iter", s.inner_max_iter);
  s.record_every = get_uint(j, "solver", "record_every", s.record_every);
  s.seed = get_uint(j, "solver", "seed", s.seed);
  s.certificate_tol = get_number(j, "solver", "certificate_tol", s.certificate_tol);
  if (s.max_outer_iter < 1) config_error("solver.max_outer_iter", "must be >= 1");
  if (s.record_every < 1) config_error("solver.record_every", "must be >= 1");
  if (s.inner_max_iter < 1) config_error("solver.inner_max_iter", "must be >= 1");
  if (s.residual_tol < 0.0) config_error("solver.residual_tol", "must be >= 0");
  if (s.step_tol < 0.0) config_error("solver.step_tol", "must be >= 0");
  if (s.inner_tol < 0.0) config_error("solver.inner_tol", "must be >= 0");
  if (!(s.certificate_tol > 0.0)) config_error("solver.certificate_tol", "must be > 0");
  return s;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"am", "plam", "aam", "am-plam", "plam-am"};
  return names;
}

void check_preset_name(const std::string& name, const std::string& field) {
  const auto& names = preset_names();
  if (name == "custom") return;
  if (std::find(names.begin(), names.end(), name) == names.end())
    config_error(field, "unknown preset '" + name + "' (expected am|plam|aam|am-plam|plam-am|custom)");
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "monotone_descent",  "sufficient_decrease", "blockwise_sufficient_decrease",
      "residual_bound",    "residual_vanishes",   "critical_point",
      "finite_length",     "gradcheck",           "generator_convexity",
      "prox_optimality"};
  return names;
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j, "", {"problem", "preset", "presets", "strategies", "solver", "checks", "output"});
  ExperimentConfig cfg;
  if (!j.contains("problem")) config_error("problem", "required");
  cfg.problem = parse_problem(j.at("problem"));
  if (j.contains("preset")) {
    cfg.preset = get_string(j, "", "preset");
    check_preset_name(*cfg.preset, "preset");
  }
  if (j.contains("presets")) {
    const json& list = j.at("presets");
    if (!list.is_array()) config_error("presets", "expected an array of preset names");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "presets[" + std::to_string(i) + "]";
      if (!list[i].is_string()) config_error(field, "expected a string");
      cfg.presets.push_back(list[i].get<std::string>());
      check_preset_name(cfg.presets.back(), field);
    }
  }
  if (j.contains("strategies")) {
    const json& list = j.at("strategies");
    if (!list.is_array() || list.empty()) config_error("strategies", "expected a nonempty array");
    std::vector<StrategySpec> specs;
    for (std::size_t i = 0; i < list.size(); ++i)
      specs.push_back(parse_strategy(list[i], "strategies[" + std::to_string(i) + "]"));
    cfg.strategies = std::move(specs);
  }
  if (cfg.preset && *cfg.preset != "custom" && cfg.strategies)
    config_error("strategies", "explicit strategies require preset 'custom' or no preset");
  if (cfg.preset && *cfg.preset == "custom" && !cfg.strategies)
    config_error("strategies", "preset 'custom' requires explicit per-block strategies");
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("checks")) {
    const json& list = j.at("checks");
    if (!list.is_array()) config_error("checks", "expected an array of check names");
    std::vector<std::string> checks;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "checks[" + std::to_string(i) + "]";
      if (!list[i].is_string()) config_error(field, "expected a string");
      const std::string name = list[i].get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end())
        config_error(field, "unknown check '" + name + "'");
      checks.push_back(name);
    }
    cfg.checks = std::move(checks);
  }
  if (j.contains("output")) {
    const json& out = j.at("output");
    reject_unknown(out, "output", {"trace", "report"});
    if (out.contains("trace")) cfg.trace_path = get_string(out, "output", "trace");
    if (out.contains("report")) cfg.report_path = get_string(out, "output", "report");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::Configuration, path.string() + ":" + std::to_string(line) + ":" +
                                              std::to_string(col) + ": malformed JSON: " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

Problem build_problem(const ProblemSpec& spec) {
  const json& p = spec.params;
  auto problem = [&]() -> Problem {
    if (spec.name == "separable_quadratic") return build_separable_quadratic();
    if (spec.name == "multiblock_quadratic") {
      const auto n = get_uint(p, "problem.params", "n_blocks", 4);
      return build_multiblock_quadratic(static_cast<std::size_t>(n), spec.seed);
    }
    if (spec.name == "sparse_group") {
      const auto n1 = static_cast<Eigen::Index>(get_uint(p, "problem.params", "n1", 50));
      const auto n2 = static_cast<Eigen::Index>(get_uint(p, "problem.params", "n2", 40));
      Groups groups;
      if (p.contains("groups")) {
        const json& list = p.at("groups");
        if (!list.is_array()) config_error("problem.params.groups", "expected an array of arrays");
        for (const auto& g : list) {
          if (!g.is_array()) config_error("problem.params.groups", "expected an array of arrays");
          std::vector<Eigen::Index> idx;
          for (const auto& v : g) {
            if (!v.is_number_unsigned())
              config_error("problem.params.groups", "indices must be nonnegative integers");
            idx.push_back(v.get<Eigen::Index>());
          }
          groups.push_back(std::move(idx));
        }
      } else {
        const auto gs = static_cast<Eigen::Index>(get_uint(p, "problem.params", "group_size", 5));
        groups = contiguous_groups(n2, gs);
      }
      return build_sparse_group_instance(n1, n2, std::move(groups), spec.seed,
                                         get_number(p, "problem.params", "lambda1", 0.1),
                                         get_number(p, "problem.params", "lambda2", 0.1));
    }
    config_error("problem.name", "unknown problem '" + spec.name + "'");
  }();
  if (spec.fault)
    return make_corrupted_gradient_problem(problem, spec.fault->block, spec.fault->index,
                                           spec.fault->delta);
  return problem;
}

std::vector<BlockStrategy> to_strategies(const std::vector<StrategySpec>& specs) {
  std::vector<BlockStrategy> out;
  for (const auto& s : specs) {
    switch (s.kind) {
      case BlockStrategy::Kind::Exact:
        out.push_back(BlockStrategy::exact());
        break;
      case BlockStrategy::Kind::Linearized:
        out.push_back(BlockStrategy::linearized(s.alpha ? AlphaRule::constant(*s.alpha)
                                                        : AlphaRule::safety(s.gamma.value_or(1.1))));
        break;
      case BlockStrategy::Kind::Augmented:
        out.push_back(BlockStrategy::augmented(s.gamma ? AlphaRule::safety(*s.gamma)
                                                       : AlphaRule::constant(s.alpha.value_or(1.0))));
        break;
      case BlockStrategy::Kind::Custom:
        throw Error(ErrorKind::Configuration, "custom generators are not expressible in JSON");
    }
  }
  return out;
}

std::vector<BlockStrategy> resolve_strategies(const ExperimentConfig& cfg, const Problem& p,
                                              const std::string& preset) {
  std::vector<BlockStrategy> s = (preset == "custom" || preset.empty())
                                     ? to_strategies(cfg.strategies.value_or(std::vector<StrategySpec>{}))
                                     : resolve_strategy_preset(preset, p.num_blocks());
  validate_strategies(p, s);
  return s;
}

void write_trace_csv(std::ostream& os, const IterateTrace& trace, bool with_header,
                     const std::string& preset) {
  if (with_header) {
    if (!preset.empty()) os << "preset,";
    os << "k,phi,phi_half,step_norm_sq,bregman_paid,residual,cum_step,inner_flag\n";
  }
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : trace.records) {
    if (!preset.empty()) os << preset << ',';
    os << r.k << ',' << num(r.phi) << ',' << num(r.phi_half()) << ',' << num(r.step_norm_sq) << ','
       << num(r.bregman_paid) << ',' << num(r.residual) << ',' << num(r.cum_step) << ','
       << (r.inner_hit_cap ? 1 : 0) << '\n';
  }
}

namespace {

double cross_constant(const Problem& p, const BlockVector& x, std::uint64_t seed) {
  double Lc = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const double c = p.coupling().cross_lipschitz ? p.coupling().cross_lipschitz(x, i)
                                                  : estimate_cross_lipschitz(p, x, i, 50, seed + i);
    Lc = std::max(Lc, c);
  }
  return Lc;
}

CheckReport convexity_report(const Problem& p, const std::vector<BlockStrategy>& strategies,
                             std::uint64_t seed) {
  CheckReport worst;
  worst.name = "generator_convexity";
  worst.verdict = Verdict::Pass;
  worst.tolerance = 1e-8;
  std::string notes;
  const BlockVector& x0 = p.initial_point();
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const BregmanGenerator gen = build_generator(p, x0, i, strategies[i], 0);
    const CheckReport r = to_check_report(
        "generator_convexity", check_generator_convexity(gen, 200, seed + i, 10.0, x0.block(i)));
    notes += (notes.empty() ? "" : "; ") + p.structure().id(i) + " [" + gen.label + "]: " + r.note;
    if (r.worst_violation >= worst.worst_violation) {
      worst.worst_violation = r.worst_violation;
      worst.worst_iteration = i;
    }
    if (!r.pass()) worst.verdict = Verdict::Fail;
  }
  worst.note = notes;
  return worst;
}

CheckReport prox_report(const Problem& p, std::uint64_t seed) {
  CheckReport out;
  out.name = "prox_optimality";
  out.verdict = Verdict::Skipped;
  out.tolerance = 1e-10;
  std::string notes;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const CheckReport r = check_prox_optimality(p.term(i), p.structure().dim(i), 100, seed + i);
    notes += (notes.empty() ? "" : "; ") + p.structure().id(i) + ": " + to_string(r.verdict);
    if (r.verdict == Verdict::Skipped) continue;
    if (out.verdict == Verdict::Skipped) out.verdict = Verdict::Pass;
    if (r.worst_violation >= out.worst_violation) {
      out.worst_violation = r.worst_violation;
      out.worst_iteration = i;
    }
    if (!r.pass()) out.verdict = Verdict::Fail;
  }
  out.note = notes;
  return out;
}

}  // namespace

std::vector<CheckReport> run_checks(const Problem& p, const std::vector<BlockStrategy>& strategies,
                                    const RunResult& result, const SolverConfig& solver,
                                    const std::vector<std::string>& checks) {
  std::vector<CheckReport> out;
  std::optional<double> L_hat;
  auto residual_constant = [&] {
    if (!L_hat)
      L_hat = residual_bound_constant(p.num_blocks(), cross_constant(p, result.final_x, solver.seed),
                                      result.trace.generator_lipschitz_max());
    return *L_hat;
  };
  for (const auto& name : checks) {
    if (name == "monotone_descent") {
      out.push_back(check_monotone_descent(result.trace));
    } else if (name == "sufficient_decrease") {
      out.push_back(check_sufficient_decrease(result.trace, result.trace.nu_min()));
    } else if (name == "blockwise_sufficient_decrease") {
      out.push_back(check_blockwise_sufficient_decrease(result.trace));
    } else if (name == "residual_bound") {
      out.push_back(check_residual_bound(result.trace, residual_constant()));
    } else if (name == "residual_vanishes") {
      out.push_back(check_residual_vanishes(result.trace, residual_constant()));
    } else if (name == "critical_point") {
      if (result.status == RunStatus::ResidualConverged || result.status == RunStatus::StepConverged) {
        out.push_back(critical_point_certificate(p, result.final_x, solver.certificate_tol));
      } else {
        CheckReport r;
        r.name = "critical_point";
        r.verdict = Verdict::Inconclusive;
        r.note = std::string("run ended with status ") + to_string(result.status);
        out.push_back(r);
      }
    } else if (name == "finite_length") {
      out.push_back(to_check_report(finite_length_monitor(result.trace)));
    } else if (name == "gradcheck") {
      out.push_back(gradcheck(p, p.initial_point(), 1e-6, 1e-6, 10, solver.seed));
    } else if (name == "generator_convexity") {
      out.push_back(convexity_report(p, strategies, solver.seed));
    } else if (name == "prox_optimality") {
      out.push_back(prox_report(p, solver.seed));
    } else {
      throw Error(ErrorKind::Configuration, "unknown check '" + name + "'");
    }
  }
  return out;
}

void configure_logging(bool quiet) {
  auto log = logger();
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("BAM_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "debug") level = spdlog::level::debug;
    else if (v == "info") level = spdlog::level::info;
    else log->warn("ignoring BAM_LOG='{}' (expected error|info|debug)", v);
  }
  if (quiet) level = spdlog::level::err;
  log->set_level(level);
}

namespace {

const std::vector<std::string> kDefaultRunChecks{
    "monotone_descent", "sufficient_decrease", "blockwise_sufficient_decrease", "residual_bound",
    "residual_vanishes", "critical_point", "finite_length"};

const std::vector<std::string> kPreRunChecks{"gradcheck", "generator_convexity", "prox_optimality"};

struct Prepared {
  ExperimentConfig cfg;
  std::shared_ptr<const Problem> problem;
};

Prepared prepare(const std::filesystem::path& config_path, const Options& opts) {
  Prepared out{load_config(config_path), nullptr};
  if (opts.seed) {
    out.cfg.problem.seed = *opts.seed;
    out.cfg.solver.seed = *opts.seed;
  }
  out.problem = std::make_shared<const Problem>(build_problem(out.cfg.problem));
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw Error(ErrorKind::Io, path.string() + ": write failed");
}

json run_summary(const RunResult& r) {
  return json{{"status", to_string(r.status)},
              {"sweeps", r.sweeps},
              {"final_phi", r.final_phi},
              {"final_residual", r.final_residual},
              {"certificate", r.certificate}};
}

bool all_acceptable(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.acceptable(); });
}

template <typename Body>
int guarded(const char* command, Body body) {
  try {
    return body();
  } catch (const Error& e) {
    logger()->error("{}: {} error: {}", command, to_string(e.kind()), e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    logger()->error("{}: {}", command, e.what());
    return kExitConfig;
  }
}

std::string single_preset(const ExperimentConfig& cfg) {
  if (cfg.preset) return *cfg.preset;
  if (cfg.strategies) return "custom";
  if (cfg.presets.size() == 1) return cfg.presets.front();
  config_error("preset", "run needs a preset or explicit strategies");
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const Options& opts) {
  configure_logging(opts.quiet);
  return guarded("run", [&] {
    Prepared prep = prepare(config_path, opts);
    const ExperimentConfig& cfg = prep.cfg;
    const Problem& p = *prep.problem;
    const std::string preset = single_preset(cfg);
    const auto strategies = resolve_strategies(cfg, p, preset);
    logger()->info("run: problem={} preset={} max_outer_iter={}", p.name(), preset,
                   cfg.solver.max_outer_iter);

    const RunResult result = run(p, strategies, cfg.solver);
    const auto reports = run_checks(p, strategies, result, cfg.solver,
                                    cfg.checks.value_or(kDefaultRunChecks));

    std::ostringstream csv;
    write_trace_csv(csv, result.trace);
    const bool ok = result.status != RunStatus::Diverged && all_acceptable(reports);
    json report{{"command", "run"},
                {"problem", p.name()},
                {"preset", preset},
                {"result", run_summary(result)},
                {"checks", reports},
                {"ok", ok}};
    write_text(opts.out_dir / cfg.trace_path, csv.str());
    write_text(opts.out_dir / cfg.report_path, report.dump(2) + "\n");

    if (!opts.quiet) {
      std::printf("%s / %s: %s after %zu sweeps, phi = %.12g, residual = %.3g\n", p.name().c_str(),
                  preset.c_str(), to_string(result.status), result.sweeps, result.final_phi,
                  result.final_residual);
      for (const auto& r : reports)
        std::printf("  %-30s %s\n", r.name.c_str(), to_string(r.verdict));
    }
    for (const auto& r : reports)
      if (!r.acceptable()) logger()->error("check {} failed: {}", r.name, r.note);
    if (result.status == RunStatus::Diverged) logger()->error("run diverged");
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_compare(const std::filesystem::path& config_path, const Options& opts) {
  configure_logging(opts.quiet);
  return guarded("compare", [&] {
    Prepared prep = prepare(config_path, opts);
    const ExperimentConfig& cfg = prep.cfg;
    if (cfg.presets.size() < 2) config_error("presets", "compare needs at least 2 presets");
    for (const auto& name : cfg.presets)
      if (name == "custom") config_error("presets", "compare accepts named presets only");
    const auto problem = prep.problem;

    // Validate every preset before any run starts.
    std::vector<std::vector<BlockStrategy>> all;
    for (const auto& name : cfg.presets) all.push_back(resolve_strategies(cfg, *problem, name));

    std::vector<std::future<RunResult>> futures;
    for (const auto& strategies : all)
      futures.push_back(std::async(std::launch::async, [problem, strategies, &cfg] {
        return run(*problem, strategies, cfg.solver);
      }));
    std::vector<RunResult> results;
    for (auto& f : futures) results.push_back(f.get());

    const auto checks = cfg.checks.value_or(std::vector<std::string>{"monotone_descent"});
    std::ostringstream csv;
    json runs = json::array();
    bool ok = true;
    if (!opts.quiet)
      std::printf("%-10s %-20s %22s %16s %16s\n", "preset", "status", "final_phi",
                  "sweeps_to_tol", "cum_step");
    for (std::size_t r = 0; r < results.size(); ++r) {
      const RunResult& res = results[r];
      write_trace_csv(csv, res.trace, r == 0, cfg.presets[r]);
      const auto reports = run_checks(*problem, all[r], res, cfg.solver, checks);
      std::optional<std::size_t> to_tol;
      for (const auto& rec : res.trace.records)
        if (rec.residual <= cfg.solver.residual_tol) {
          to_tol = rec.k;
          break;
        }
      const double cum = res.trace.records.empty() ? 0.0 : res.trace.records.back().cum_step;
      const bool run_ok = res.status != RunStatus::Diverged && all_acceptable(reports);
      ok = ok && run_ok;
      json entry = run_summary(res);
      entry["preset"] = cfg.presets[r];
      entry["sweeps_to_residual_tol"] = to_tol ? json(*to_tol) : json(nullptr);
      entry["cum_step"] = cum;
      entry["checks"] = reports;
      entry["ok"] = run_ok;
      runs.push_back(entry);
      if (!opts.quiet)
        std::printf("%-10s %-20s %22.15g %16s %16.6g\n", cfg.presets[r].c_str(),
                    to_string(res.status), res.final_phi,
                    to_tol ? std::to_string(*to_tol).c_str() : "-", cum);
    }
    json report{{"command", "compare"}, {"problem", problem->name()}, {"runs", runs}, {"ok", ok}};
    write_text(opts.out_dir / cfg.trace_path, csv.str());
    write_text(opts.out_dir / cfg.report_path, report.dump(2) + "\n");
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_check(const std::filesystem::path& config_path, const Options& opts) {
  configure_logging(opts.quiet);
  return guarded("check", [&] {
    Prepared prep = prepare(config_path, opts);
    const ExperimentConfig& cfg = prep.cfg;
    const Problem& p = *prep.problem;

    std::vector<std::string> presets;
    if (cfg.preset) presets.push_back(*cfg.preset);
    else if (cfg.strategies) presets.push_back("custom");
    else if (!cfg.presets.empty()) presets = cfg.presets;
    else presets = preset_names();

    std::vector<std::vector<BlockStrategy>> all;
    for (const auto& name : presets) all.push_back(resolve_strategies(cfg, p, name));

    std::vector<std::string> run_checks_list = cfg.checks.value_or(kDefaultRunChecks);
    run_checks_list.erase(std::remove_if(run_checks_list.begin(), run_checks_list.end(),
                                         [](const std::string& c) {
                                           return std::find(kPreRunChecks.begin(), kPreRunChecks.end(),
                                                            c) != kPreRunChecks.end();
                                         }),
                          run_checks_list.end());

    json entries = json::array();
    bool ok = true;
    std::ostringstream csv;
    for (std::size_t r = 0; r < presets.size(); ++r) {
      // Oracle battery first, then a run with the trajectory diagnostics.
      RunResult dummy{p.initial_point(), {}, RunStatus::MaxIter, 0, 0.0, 0.0, {}};
      auto reports = run_checks(p, all[r], dummy, cfg.solver, kPreRunChecks);
      const RunResult res = run(p, all[r], cfg.solver);
      const auto post = run_checks(p, all[r], res, cfg.solver, run_checks_list);
      reports.insert(reports.end(), post.begin(), post.end());
      write_trace_csv(csv, res.trace, r == 0, presets[r]);
      const bool run_ok = res.status != RunStatus::Diverged && all_acceptable(reports);
      ok = ok && run_ok;
      json entry = run_summary(res);
      entry["preset"] = presets[r];
      entry["checks"] = reports;
      entry["ok"] = run_ok;
      entries.push_back(entry);
      if (!opts.quiet) {
        std::printf("%s / %s: %s after %zu sweeps\n", p.name().c_str(), presets[r].c_str(),
                    to_string(res.status), res.sweeps);
        for (const auto& c : reports) std::printf("  %-30s %s\n", c.name.c_str(), to_string(c.verdict));
      }
      for (const auto& c : reports)
        if (!c.acceptable()) logger()->error("{}: check {} failed: {}", presets[r], c.name, c.note);
    }
    json report{{"command", "check"}, {"problem", p.name()}, {"runs", entries}, {"ok", ok}};
    write_text(opts.out_dir / cfg.trace_path, csv.str());
    write_text(opts.out_dir / cfg.report_path, report.dump(2) + "\n");
    return ok ? kExitOk : kExitCheckFailed;
  });
}

}  // namespace bam::experiment
