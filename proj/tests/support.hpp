#pragma once

// Test-side oracles. Nothing here calls into the solver beyond the problem
// definitions, so results can be compared against the library independently.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "bam/blockvec.hpp"
#include "bam/problem.hpp"

namespace bamtest {

using bam::Vector;

struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  Vector uniform_vec(Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  std::mt19937_64 engine;
};

/// argmin of f over lo, lo+step, ..., hi.
inline double grid_argmin_1d(const std::function<double(double)>& f, double lo, double hi,
                             double step) {
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long k = 0; k <= n; ++k) {
    const double u = lo + static_cast<double>(k) * step;
    const double val = f(u);
    if (val < best_val) {
      best_val = val;
      best = u;
    }
  }
  return best;
}

/// argmin of f over the grid (lo0 + i*step, lo1 + j*step) inside the box.
inline Eigen::Vector2d grid_argmin_2d(const std::function<double(double, double)>& f,
                                      Eigen::Vector2d lo, Eigen::Vector2d hi, double step) {
  Eigen::Vector2d best = lo;
  double best_val = std::numeric_limits<double>::infinity();
  const auto n0 = static_cast<long>(std::floor((hi[0] - lo[0]) / step + 0.5));
  const auto n1 = static_cast<long>(std::floor((hi[1] - lo[1]) / step + 0.5));
  for (long i = 0; i <= n0; ++i) {
    const double u0 = lo[0] + static_cast<double>(i) * step;
    for (long j = 0; j <= n1; ++j) {
      const double u1 = lo[1] + static_cast<double>(j) * step;
      const double val = f(u0, u1);
      if (val < best_val) {
        best_val = val;
        best = {u0, u1};
      }
    }
  }
  return best;
}

/// Central-difference gradient of H with respect to block i.
inline Vector fd_partial(const bam::Problem& p, const bam::BlockVector& x, std::size_t i,
                         double h = 1e-6) {
  const Vector xi = x.block(i);
  Vector g(xi.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    Vector plus = xi, minus = xi;
    plus[j] += h;
    minus[j] -= h;
    g[j] = (p.coupling().value(x.with_block(i, plus)) -
            p.coupling().value(x.with_block(i, minus))) /
           (2.0 * h);
  }
  return g;
}

inline double scalar_soft(double v, double tau) {
  return std::copysign(std::max(std::abs(v) - tau, 0.0), v);
}

/// PLAM written out by hand for lambda1|y|_1 + |Ay - z|^2 + lambda2|z|_{1,2}:
/// each block takes a gradient step of length 1/alpha and shrinks.
struct HandPlam {
  const bam::SparseGroupData& d;
  double gamma = 1.1;

  void sweep(Vector& y, Vector& z) const {
    const double a1 = gamma * d.lipschitz_y;
    const Vector gy = 2.0 * d.A.transpose() * (d.A * y - z);
    Vector vy = y - gy / a1;
    for (Eigen::Index j = 0; j < vy.size(); ++j) vy[j] = scalar_soft(vy[j], d.lambda1 / a1);
    y = vy;

    const double a2 = gamma * 2.0;
    const Vector gz = -2.0 * (d.A * y - z);
    const Vector vz = z - gz / a2;
    Vector out = Vector::Zero(vz.size());
    for (const auto& g : d.groups) {
      double nrm = 0.0;
      for (auto j : g) nrm += vz[j] * vz[j];
      nrm = std::sqrt(nrm);
      const double tau = d.lambda2 / a2;
      if (nrm > tau)
        for (auto j : g) out[j] = (1.0 - tau / nrm) * vz[j];
    }
    z = out;
  }
};

/// Dense solve of the multiblock stationarity system (I + Laplacian(c)) x = t.
inline Vector multiblock_dense_minimizer(const bam::MultiblockData& d) {
  const auto n = d.targets.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) {
        M(i, i) += d.weights(i, j);
        M(i, j) -= d.weights(i, j);
      }
  return M.fullPivLu().solve(d.targets);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bam_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace bamtest
