// Per-particle moments of a field: rigid projection, simple-dipole coefficient,
// and the least-squares collocation fit of the remainder.
#pragma once

#include "stokesmor/fields.hpp"
#include "stokesmor/quadrature.hpp"

#include <optional>
#include <vector>

namespace stokesmor {

/// Field gradients at the ball nodes of one particle, in quadrature order.
inline std::vector<Mat3> ball_gradients(const FlowField& field, const Particle& p, const SphereQuadrature& quad) {
  std::vector<Mat3> out(quad.ball_size());
  for (std::size_t k = 0; k < quad.ball_size(); ++k) out[k] = field.gradient(p.center + p.radius * quad.ball_node(k));
  return out;
}

/// Field velocities at the surface nodes of one particle.
inline std::vector<Vec3> surface_velocities(const FlowField& field, const Particle& p, const SphereQuadrature& quad) {
  std::vector<Vec3> out(quad.surface_size());
  for (std::size_t b = 0; b < quad.surface_size(); ++b) out[b] = field.velocity(p.center + p.radius * quad.nodes()[b]);
  return out;
}

/// Ball average of the gradient from node values.
inline Mat3 average_gradient(const std::vector<Mat3>& grads, const SphereQuadrature& quad) {
  CompensatedSum<Mat3> sum;
  const double norm = 3.0 / (4.0 * kPi);
  for (std::size_t k = 0; k < grads.size(); ++k) sum.add((norm * quad.ball_weight(k)) * grads[k]);
  return sum.value();
}

inline Vec3 average_velocity(const std::vector<Vec3>& vels, const SphereQuadrature& quad) {
  CompensatedSum<Vec3> sum;
  for (std::size_t b = 0; b < vels.size(); ++b) sum.add((quad.weights()[b] / (4.0 * kPi)) * vels[b]);
  return sum.value();
}

/// Integral over the ball of |e v|_F^q from node gradients.
inline double ball_strain_power(const std::vector<Mat3>& grads, double radius, double q, const SphereQuadrature& quad) {
  CompensatedSum<double> sum;
  for (std::size_t k = 0; k < grads.size(); ++k) sum.add(quad.ball_weight(k) * std::pow(sym(grads[k]).norm(), q));
  return radius * radius * radius * sum.value();
}

inline const Particle& particle_at(const ParticleConfig& cfg, std::size_t i) {
  if (i >= cfg.size()) throw Error(ErrorKind::invalid_input, "particle index " + std::to_string(i) + " out of range");
  return cfg[i];
}

/// P_i restricted to the ball: V = surface average of v, omega = half the ball
/// average of curl v.
inline RigidMotion rigid_projection(const FlowField& field, const ParticleConfig& cfg, std::size_t i,
                                    const SphereQuadrature& quad) {
  const Particle& p = particle_at(cfg, i);
  const Vec3 v = average_velocity(surface_velocities(field, p, quad), quad);
  const Mat3 g = average_gradient(ball_gradients(field, p, quad), quad);
  return RigidMotion{v, 0.5 * curl_from_gradient(g), p.center};
}

/// Simple-dipole coefficient: the ball average of the strain, projected to
/// symmetric traceless.
inline TracelessSym3 dipole_coefficient(const FlowField& field, const ParticleConfig& cfg, std::size_t i,
                                        const SphereQuadrature& quad) {
  const Particle& p = particle_at(cfg, i);
  return TracelessSym3::project(average_gradient(ball_gradients(field, p, quad), quad));
}

/// Q_i^d applied to the field: the simple dipole at particle i with the
/// ball-averaged strain as coefficient.
inline DipoleTerm apply_Qd(const FlowField& field, const ParticleConfig& cfg, std::size_t i,
                           const SphereQuadrature& quad) {
  const Particle& p = particle_at(cfg, i);
  return DipoleTerm{p.center, p.radius, dipole_coefficient(field, cfg, i, quad)};
}

/// Least-squares operator for the collocation family on a sphere rule.
class CollocationFit {
 public:
  explicit CollocationFit(const SphereQuadrature& quad) : nodes_(quad.nodes()), sqrt_w_(quad.surface_size()) {
    const std::size_t n = quad.surface_size();
    Eigen::MatrixXd a(3 * n, kCollocationSize);
    for (std::size_t b = 0; b < n; ++b) {
      sqrt_w_[b] = std::sqrt(quad.weights()[b]);
      for (int m = 0; m < kCollocationSize; ++m) {
        a.block<3, 1>(3 * b, m) = sqrt_w_[b] * collocation_basis_field<double>(m, nodes_[b]);
      }
    }
    svd_.compute(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd_.singularValues();
    condition_ = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  }

  double condition() const { return condition_; }

  /// Coefficients minimizing the weighted surface misfit to `data` (values at
  /// the unit-sphere nodes, already in unit-ball coordinates).
  CollocationCoefficients solve(const std::vector<Vec3>& data) const {
    Eigen::VectorXd rhs(3 * data.size());
    for (std::size_t b = 0; b < data.size(); ++b) rhs.segment<3>(3 * b) = sqrt_w_[b] * data[b];
    return svd_.solve(rhs);
  }

  /// Weighted L2 norm on the unit sphere of data - fit.
  double misfit(const std::vector<Vec3>& data, const CollocationCoefficients& c) const {
    const CollocationTensors d = collocation_tensor(c);
    double sum = 0;
    for (std::size_t b = 0; b < data.size(); ++b) {
      sum += sqrt_w_[b] * sqrt_w_[b] * (data[b] - collocation_exterior<double>(d, nodes_[b])).squaredNorm();
    }
    return std::sqrt(sum);
  }

 private:
  std::vector<Vec3> nodes_;
  std::vector<double> sqrt_w_;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
  double condition_ = 0;
};

struct CollocationResult {
  DipoleTerm dipole;
  std::optional<CollocationTerm> remainder;
  /// P_i part of the field on the ball (V + omega x (x - X_i)).
  RigidMotion rigid;
  /// Surface L2 misfit of (field - rigid) by the radiated part, relative to
  /// the surface L2 norm of (field - rigid). Zero when that norm vanishes.
  double fit_residual = 0;
  double condition = 1;
};

inline constexpr double kCollocationConditionLimit = 1e8;

/// Surface data of field - rigid - dipole at particle i, in unit-ball coordinates.
inline std::vector<Vec3> remainder_boundary_data(const std::vector<Vec3>& surface_vel, const Particle& p,
                                                 const RigidMotion& rigid, const TracelessSym3& s,
                                                 const SphereQuadrature& quad) {
  const Mat3 sm = s.matrix();
  std::vector<Vec3> data(surface_vel.size());
  for (std::size_t b = 0; b < data.size(); ++b) {
    const Vec3 x = p.center + p.radius * quad.nodes()[b];
    data[b] = surface_vel[b] - rigid.at(x) - sm * (x - p.center);
  }
  return data;
}

/// Approximation of Q_i beyond the dipole: the dipole coefficient comes from
/// the exact ball-average formula, the remainder from a least-squares fit of
/// the surface data by the collocation family. Degree 1 returns the dipole
/// alone. Throws ill_conditioned when the sampled family is too degenerate.
inline CollocationResult apply_Q_collocation(const FlowField& field, const ParticleConfig& cfg, std::size_t i,
                                             int degree, const SphereQuadrature& quad,
                                             double condition_limit = kCollocationConditionLimit) {
  if (degree != 1 && degree != 2) throw Error(ErrorKind::invalid_input, "collocation degree must be 1 or 2");
  const Particle& p = particle_at(cfg, i);
  const auto grads = ball_gradients(field, p, quad);
  const auto vels = surface_velocities(field, p, quad);
  const Mat3 g = average_gradient(grads, quad);

  CollocationResult out;
  out.rigid = RigidMotion{average_velocity(vels, quad), 0.5 * curl_from_gradient(g), p.center};
  const TracelessSym3 s = TracelessSym3::project(g);
  out.dipole = DipoleTerm{p.center, p.radius, s};

  const auto data = remainder_boundary_data(vels, p, out.rigid, s, quad);
  double total = 0, dipole_misfit = 0;
  for (std::size_t b = 0; b < data.size(); ++b) {
    const Vec3 x = p.center + p.radius * quad.nodes()[b];
    total += quad.weights()[b] * (vels[b] - out.rigid.at(x)).squaredNorm();
    dipole_misfit += quad.weights()[b] * data[b].squaredNorm();
  }
  total = std::sqrt(total);
  dipole_misfit = std::sqrt(dipole_misfit);
  if (degree == 1) {
    out.fit_residual = total > 0 ? dipole_misfit / total : 0.0;
    return out;
  }
  const CollocationFit fit(quad);
  out.condition = fit.condition();
  if (!(fit.condition() <= condition_limit)) {
    throw Error(ErrorKind::ill_conditioned, "collocation basis condition number " + std::to_string(fit.condition()) +
                                                " exceeds limit; reduce the degree");
  }
  const CollocationCoefficients c = fit.solve(data);
  out.remainder = CollocationTerm(p.center, p.radius, c);
  out.fit_residual = total > 0 ? fit.misfit(data, c) / total : 0.0;
  return out;
}

}  // namespace stokesmor
