#pragma once

#include "stokesmor/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace stokesmor::testing {

inline Mat3 shear_matrix() {
  Mat3 m = Mat3::Zero();
  m(0, 1) = m(1, 0) = 0.5;
  return m;
}

inline TracelessSym3 shear() { return TracelessSym3::project(shear_matrix()); }

inline TracelessSym3 random_strain(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  return TracelessSym3::project(m);
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Mat3 sample_rotation() {
  return Eigen::AngleAxisd(0.83, Vec3(0.3, -0.5, 0.8).normalized()).toRotationMatrix();
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

/// Mutual-distance oracle for theta_max, d_min and phi0.
inline ValidationReport brute_validation(const ParticleConfig& cfg) {
  ValidationReport r;
  for (const auto& p : cfg.particles) r.r_max = std::max(r.r_max, p.radius);
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = 0; j < cfg.size(); ++j) {
      if (i == j) continue;
      const double d = (cfg[i].center - cfg[j].center).norm();
      r.d_min = std::min(r.d_min, d);
      r.theta_max = std::min(r.theta_max, d / (cfg[i].radius + cfg[j].radius));
    }
  r.phi0 = cfg.size() > 1 ? std::pow(r.r_max / r.d_min, 3) : 0.0;
  return r;
}

}  // namespace stokesmor::testing
