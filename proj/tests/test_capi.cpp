#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "bam/bam.h"

namespace {

double half_sq_value(const double* x, size_t n, void*) {
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += 0.5 * x[i] * x[i];
  return s;
}

void half_sq_gradient(const double* x, size_t n, double* out, void* user) {
  ++*static_cast<int*>(user);
  for (size_t i = 0; i < n; ++i) out[i] = x[i];
}

}  // namespace

TEST_CASE("problem handles") {
  bam_problem* p = nullptr;
  REQUIRE(bam_problem_create("separable_quadratic", nullptr, 7, &p) == BAM_OK);
  CHECK(bam_problem_num_blocks(p) == 2);
  CHECK(bam_problem_total_dim(p) == 2);
  size_t dim = 0;
  CHECK(bam_problem_block_dim(p, 1, &dim) == BAM_OK);
  CHECK(dim == 1);
  CHECK(bam_problem_block_dim(p, 2, &dim) == BAM_ERR_INVALID_INPUT);

  double x[2] = {1.0 / 3, -1.0 / 3};
  double phi = 0;
  CHECK(bam_problem_phi(p, x, 2, &phi) == BAM_OK);
  CHECK(phi == doctest::Approx(4.0 / 3));
  CHECK(bam_problem_phi(p, x, 3, &phi) == BAM_ERR_SHAPE);
  CHECK(std::string(bam_last_error()).find("length") != std::string::npos);
  double x0[2] = {9, 9};
  CHECK(bam_problem_initial_point(p, x0, 2) == BAM_OK);
  CHECK(x0[0] == 0.0);
  bam_problem_destroy(p);
}

TEST_CASE("problem creation errors") {
  bam_problem* p = reinterpret_cast<bam_problem*>(0x1);
  CHECK(bam_problem_create("lasso", nullptr, 0, &p) == BAM_ERR_CONFIGURATION);
  CHECK(p == nullptr);
  CHECK(bam_problem_create("sparse_group", "{\"n3\": 1}", 0, &p) == BAM_ERR_CONFIGURATION);
  CHECK(std::string(bam_last_error()).find("n3") != std::string::npos);
  CHECK(bam_problem_create("sparse_group", "{not json", 0, &p) == BAM_ERR_CONFIGURATION);
  CHECK(bam_problem_create(nullptr, nullptr, 0, &p) == BAM_ERR_NULL_ARGUMENT);
  CHECK(bam_problem_create("sparse_group", nullptr, 0, nullptr) == BAM_ERR_NULL_ARGUMENT);
  CHECK(std::string(bam_status_string(BAM_ERR_SHAPE)) == "shape mismatch");
}

TEST_CASE("run through the C interface") {
  bam_problem* p = nullptr;
  REQUIRE(bam_problem_create("separable_quadratic", nullptr, 7, &p) == BAM_OK);
  bam_strategy s[2];
  REQUIRE(bam_resolve_preset("am", 2, s) == BAM_OK);
  CHECK(s[0].kind == BAM_STRATEGY_EXACT);
  bam_solver_config cfg = bam_solver_config_default();
  CHECK(cfg.max_outer_iter == 1000);
  CHECK(cfg.residual_tol == 1e-8);
  bam_result* r = nullptr;
  REQUIRE(bam_run(p, s, 2, &cfg, nullptr, 0, &r) == BAM_OK);
  CHECK(bam_result_status(r) == BAM_RUN_RESIDUAL_CONVERGED);
  CHECK(bam_result_phi0(r) == doctest::Approx(2.0));
  CHECK(std::abs(bam_result_final_phi(r) - 4.0 / 3) <= 1e-8);
  double x[2];
  CHECK(bam_result_final_x(r, x, 2) == BAM_OK);
  CHECK(std::abs(x[0] - 1.0 / 3) <= 1e-8);
  CHECK(bam_result_final_x(r, x, 1) == BAM_ERR_SHAPE);

  const size_t n = bam_result_num_records(r);
  REQUIRE(n == bam_result_sweeps(r));
  bam_record rec;
  CHECK(bam_result_record(r, 0, &rec) == BAM_OK);
  CHECK(rec.k == 1);
  CHECK(rec.phi_half == doctest::Approx(1.5));
  CHECK(bam_result_record(r, n, &rec) == BAM_ERR_INVALID_INPUT);

  char* csv = nullptr;
  CHECK(bam_result_trace_csv(r, &csv) == BAM_OK);
  CHECK(std::strncmp(csv, "k,phi,phi_half,step_norm_sq,bregman_paid,residual,cum_step,inner_flag\n",
                     69) == 0);
  bam_string_free(csv);

  bam_check_report rep;
  char* note = nullptr;
  CHECK(bam_check(p, s, 2, &cfg, r, "monotone_descent", &rep, &note) == BAM_OK);
  CHECK(rep.verdict == BAM_VERDICT_PASS);
  bam_string_free(note);
  CHECK(bam_check(p, s, 2, &cfg, r, "sufficient_decrease", &rep, nullptr) == BAM_OK);
  CHECK(rep.verdict == BAM_VERDICT_SKIPPED);
  CHECK(bam_check(p, s, 2, &cfg, r, "speed", &rep, nullptr) == BAM_ERR_CONFIGURATION);

  double start[2] = {1.0 / 3, -1.0 / 3};
  bam_result* fixed = nullptr;
  REQUIRE(bam_run(p, s, 2, &cfg, start, 2, &fixed) == BAM_OK);
  CHECK(bam_result_status(fixed) == BAM_RUN_STEP_CONVERGED);
  bam_result_destroy(fixed);

  bam_result_destroy(r);
  bam_problem_destroy(p);
}

TEST_CASE("invalid strategies are rejected before running") {
  bam_problem* p = nullptr;
  REQUIRE(bam_problem_create("separable_quadratic", nullptr, 7, &p) == BAM_OK);
  bam_strategy s[2];
  REQUIRE(bam_resolve_preset("plam", 2, s) == BAM_OK);
  s[0].alpha_value = 0.9;
  bam_result* r = nullptr;
  CHECK(bam_run(p, s, 2, nullptr, nullptr, 0, &r) == BAM_ERR_CONFIGURATION);
  CHECK(std::string(bam_last_error()).find("alpha_k > L_i") != std::string::npos);
  CHECK(r == nullptr);
  CHECK(bam_run(p, s, 1, nullptr, nullptr, 0, &r) == BAM_ERR_CONFIGURATION);
  CHECK(bam_resolve_preset("custom", 2, s) == BAM_ERR_CONFIGURATION);
  bam_problem_destroy(p);
}

TEST_CASE("custom generator callbacks reproduce AAM") {
  bam_problem* p = nullptr;
  REQUIRE(bam_problem_create("separable_quadratic", nullptr, 7, &p) == BAM_OK);
  int calls = 0;
  bam_strategy custom[2];
  for (auto& s : custom) {
    s = bam_strategy{};
    s.kind = BAM_STRATEGY_CUSTOM;
    s.custom = bam_custom_generator{half_sq_value, half_sq_gradient, 1.0, 1.0, &calls};
  }
  bam_strategy aam[2];
  REQUIRE(bam_resolve_preset("aam", 2, aam) == BAM_OK);
  bam_solver_config cfg = bam_solver_config_default();
  cfg.max_outer_iter = 20;
  cfg.inner_tol = 1e-14;
  bam_result *a = nullptr, *b = nullptr;
  REQUIRE(bam_run(p, custom, 2, &cfg, nullptr, 0, &a) == BAM_OK);
  REQUIRE(bam_run(p, aam, 2, &cfg, nullptr, 0, &b) == BAM_OK);
  CHECK(calls > 0);
  double xa[2], xb[2];
  bam_result_final_x(a, xa, 2);
  bam_result_final_x(b, xb, 2);
  CHECK(std::abs(xa[0] - xb[0]) <= 1e-10);
  CHECK(std::abs(xa[1] - xb[1]) <= 1e-10);
  bam_result_destroy(a);
  bam_result_destroy(b);

  custom[1].custom.gradient = nullptr;
  bam_result* r = nullptr;
  CHECK(bam_run(p, custom, 2, &cfg, nullptr, 0, &r) == BAM_ERR_CONFIGURATION);
  bam_problem_destroy(p);
}

TEST_CASE("null handles are reported, not dereferenced") {
  CHECK(bam_problem_num_blocks(nullptr) == 0);
  CHECK(bam_result_num_records(nullptr) == 0);
  double v;
  CHECK(bam_problem_phi(nullptr, &v, 1, &v) == BAM_ERR_NULL_ARGUMENT);
  bam_problem_destroy(nullptr);
  bam_result_destroy(nullptr);
  CHECK(bam_cli_execute("fly", "x.json", nullptr, 0, 0, 1) == 1);
  CHECK(std::string(bam_last_error()).find("unknown command") != std::string::npos);
}
