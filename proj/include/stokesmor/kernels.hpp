// Closed-form Stokes kernels (viscosity 1): stokeslet, simple dipole, far-field
// strain kernel, and the degree-2 collocation family used beyond the dipole.
#pragma once

#include "stokesmor/core.hpp"
#include "stokesmor/quadrature.hpp"

#include <ceres/jet.h>

#include <array>
#include <string>

namespace stokesmor {

// ---------------------------------------------------------------------------
// Stokeslet

/// Velocity of a point force F at `source`:
/// (1 / 8 pi) (F / |r| + r (F . r) / |r|^3), r = x - source.
inline Vec3 stokeslet_velocity(const Vec3& force, const Vec3& source, const Vec3& x) {
  const Vec3 r = x - source;
  const double d2 = r.squaredNorm();
  if (d2 == 0.0) throw Error(ErrorKind::singular_evaluation, "stokeslet evaluated at its source point");
  const double d = std::sqrt(d2);
  return (force / d + r * (force.dot(r) / (d2 * d))) / (8.0 * kPi);
}

/// grad(i, k) = d u_i / d x_k of stokeslet_velocity.
inline Mat3 stokeslet_gradient(const Vec3& force, const Vec3& source, const Vec3& x) {
  const Vec3 r = x - source;
  const double d2 = r.squaredNorm();
  if (d2 == 0.0) throw Error(ErrorKind::singular_evaluation, "stokeslet evaluated at its source point");
  const double d = std::sqrt(d2);
  const double inv3 = 1.0 / (d2 * d);
  const double fr = force.dot(r);
  Mat3 g = -force * r.transpose() * inv3 + (fr * inv3) * Mat3::Identity() + r * force.transpose() * inv3 -
           (3.0 * fr * inv3 / d2) * r * r.transpose();
  return g / (8.0 * kPi);
}

// ---------------------------------------------------------------------------
// Simple dipole
//
// For a ball of radius R centred at X with coefficient S, y = (x - X) / R and
//   w(x) = R * ( S y )                                              |y| <= 1
//   w(x) = R * ( 5/2 y (y.Sy)/|y|^5 + S y/|y|^5 - 5/2 y (y.Sy)/|y|^7 )  |y| > 1
// so the interior strain is exactly S for every radius.

/// Points within this relative distance of the sphere count as on-surface for
/// gradient evaluation.
inline constexpr double kSurfaceTolerance = 1e-12;

inline Vec3 dipole_velocity(const Mat3& s, const Vec3& center, double radius, const Vec3& x) {
  const Vec3 y = (x - center) / radius;
  const double r2 = y.squaredNorm();
  if (r2 <= 1.0) return s * (x - center);
  const Vec3 sy = s * y;
  const double ysy = y.dot(sy);
  const double inv2 = 1.0 / r2;
  const double inv5 = inv2 * inv2 / std::sqrt(r2);
  const double inv7 = inv5 * inv2;
  return radius * (2.5 * ysy * (inv5 - inv7) * y + inv5 * sy);
}

inline Vec3 dipole_velocity(const TracelessSym3& s, const Vec3& center, double radius, const Vec3& x) {
  return dipole_velocity(s.matrix(), center, radius, x);
}

/// Analytic gradient of dipole_velocity. Constant S inside the ball; throws
/// on_surface within kSurfaceTolerance of the sphere where the gradient jumps.
inline Mat3 dipole_gradient(const Mat3& s, const Vec3& center, double radius, const Vec3& x) {
  const Vec3 y = (x - center) / radius;
  const double r2 = y.squaredNorm();
  const double r = std::sqrt(r2);
  if (std::abs(r - 1.0) <= kSurfaceTolerance) {
    throw Error(ErrorKind::on_surface, "dipole gradient requested on the source sphere surface");
  }
  if (r < 1.0) return s;
  const Vec3 sy = s * y;
  const double ysy = y.dot(sy);
  const double inv2 = 1.0 / r2;
  const double inv5 = inv2 * inv2 / r;
  const double inv7 = inv5 * inv2;
  const double inv9 = inv7 * inv2;
  const double a = 2.5 * (inv5 - inv7);
  const double da = 2.5 * (-5.0 * inv7 + 7.0 * inv9);  // (1/r) da/dr
  const double db = -5.0 * inv7;                       // (1/r) d(r^-5)/dr
  Mat3 g = (da * ysy) * y * y.transpose();
  g.diagonal().array() += a * ysy;
  g += (2.0 * a) * y * sy.transpose() + inv5 * s + db * sy * y.transpose();
  return g;
}

inline Mat3 dipole_gradient(const TracelessSym3& s, const Vec3& center, double radius, const Vec3& x) {
  return dipole_gradient(s.matrix(), center, radius, x);
}

/// Strain of the leading far-field dipole term, e(5/2 x (x.Sx) / |x|^5).
/// Homogeneous of degree -3 in x.
inline TracelessSym3 strain_kernel(const Vec3& x, const TracelessSym3& s) {
  const double r2 = x.squaredNorm();
  if (r2 == 0.0) throw Error(ErrorKind::singular_evaluation, "strain kernel evaluated at the origin");
  const Mat3 sm = s.matrix();
  const Vec3 sx = sm * x;
  const double xsx = x.dot(sx);
  const double inv5 = 1.0 / (r2 * r2 * std::sqrt(r2));
  Mat3 g = (2.0 * inv5) * x * sx.transpose() - (5.0 * xsx * inv5 / r2) * x * x.transpose();
  g.diagonal().array() += xsx * inv5;
  return TracelessSym3::project(2.5 * g);
}

// ---------------------------------------------------------------------------
// Degree-2 collocation family
//
// Decaying exterior Stokes solutions without net force or torque:
//  * force quadrupoles u_i = d_k d_l G_ij, G_ij(y) = delta_ij / |y| + y_i y_j / |y|^3,
//    decaying like |y|^-3. The contraction d_j d_l G_ij vanishes, so the
//    slots (j, k, l) = (2, 2, l) are dropped, leaving 15 fields;
//  * potential octupoles u = grad d_j d_k d_l (1/|y|) / 15, the Laplacians of
//    the force quadrupoles up to a factor, decaying like |y|^-5; the harmonic
//    constraint removes the slots containing (2, 2), leaving 7;
// The octupoles are needed to reproduce quadratic boundary data; the force
// quadrupoles alone cannot. (Potential dipoles, the Laplacians of the
// point-force solution, are already the traces D_jkk of the quadrupoles.)

inline constexpr int kForceQuadrupoleCount = 15;
inline constexpr int kPotentialOctupoleCount = 7;
inline constexpr int kCollocationSize = kForceQuadrupoleCount + kPotentialOctupoleCount;
using CollocationCoefficients = Eigen::Matrix<double, kCollocationSize, 1>;

struct CollocationSlot {
  int j, k, l;
};

inline constexpr std::array<CollocationSlot, kForceQuadrupoleCount> kQuadrupoleSlots{{
    {0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 1}, {0, 1, 2}, {0, 2, 2},
    {1, 0, 0}, {1, 0, 1}, {1, 0, 2}, {1, 1, 1}, {1, 1, 2}, {1, 2, 2},
    {2, 0, 0}, {2, 0, 1}, {2, 1, 1},
}};

inline constexpr std::array<CollocationSlot, kPotentialOctupoleCount> kOctupoleSlots{{
    {0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 1}, {0, 1, 2}, {1, 1, 1}, {1, 1, 2},
}};

/// Dense coefficient tensors of a collocation combination.
struct CollocationTensors {
  /// D(j, k, l), symmetric in (k, l).
  std::array<std::array<std::array<double, 3>, 3>, 3> quadrupole{};
  /// O(j, k, l), fully symmetric.
  std::array<std::array<std::array<double, 3>, 3>, 3> octupole{};
};

inline CollocationTensors collocation_tensor(const CollocationCoefficients& c) {
  CollocationTensors t;
  for (int m = 0; m < kForceQuadrupoleCount; ++m) {
    const auto [j, k, l] = kQuadrupoleSlots[m];
    const double v = c(m);
    if (k == l) {
      t.quadrupole[j][k][l] += v;
    } else {
      t.quadrupole[j][k][l] += 0.5 * v;
      t.quadrupole[j][l][k] += 0.5 * v;
    }
  }
  for (int m = 0; m < kPotentialOctupoleCount; ++m) {
    const auto [j, k, l] = kOctupoleSlots[m];
    const std::array<std::array<int, 3>, 6> perms{{{j, k, l}, {j, l, k}, {k, j, l}, {k, l, j}, {l, j, k}, {l, k, j}}};
    for (const auto& p : perms) t.octupole[p[0]][p[1]][p[2]] += c(kForceQuadrupoleCount + m) / 6.0;
  }
  return t;
}

namespace detail {

inline double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

template <typename T>
Eigen::Matrix<T, 3, 1> quadrupole_field(const CollocationSlot& slot, const Eigen::Matrix<T, 3, 1>& y) {
  using std::sqrt;
  const T r2 = y.squaredNorm();
  const T r = sqrt(r2);
  const T i3 = T(1.0) / (r2 * r);
  const T i5 = i3 / r2;
  const T i7 = i5 / r2;
  const auto [j, k, l] = slot;
  Eigen::Matrix<T, 3, 1> u;
  for (int i = 0; i < 3; ++i) {
    u(i) = -kron(i, j) * kron(k, l) * i3 + 3.0 * kron(i, j) * y(k) * y(l) * i5 +
           (kron(i, k) * kron(j, l) + kron(j, k) * kron(i, l)) * i3 -
           3.0 * (kron(i, k) * y(j) + kron(j, k) * y(i)) * y(l) * i5 -
           3.0 * (kron(i, l) * y(j) * y(k) + kron(j, l) * y(i) * y(k) + kron(k, l) * y(i) * y(j)) * i5 +
           15.0 * y(i) * y(j) * y(k) * y(l) * i7;
  }
  return u;
}

template <typename T>
Eigen::Matrix<T, 3, 1> octupole_field(const CollocationSlot& slot, const Eigen::Matrix<T, 3, 1>& y) {
  using std::sqrt;
  const T r2 = y.squaredNorm();
  const T r = sqrt(r2);
  const T i5 = T(1.0) / (r2 * r2 * r);
  const T i7 = i5 / r2;
  const T i9 = i7 / r2;
  const auto [j, k, l] = slot;
  Eigen::Matrix<T, 3, 1> u;
  for (int i = 0; i < 3; ++i) {
    const T four = 105.0 * y(i) * y(j) * y(k) * y(l) * i9 -
                   15.0 *
                       (kron(i, j) * y(k) * y(l) + kron(i, k) * y(j) * y(l) + kron(i, l) * y(j) * y(k) +
                        kron(j, k) * y(i) * y(l) + kron(j, l) * y(i) * y(k) + kron(k, l) * y(i) * y(j)) *
                       i7 +
                   3.0 * (kron(j, k) * kron(i, l) + kron(j, l) * kron(i, k) + kron(k, l) * kron(i, j)) * i5;
    u(i) = four / 15.0;
  }
  return u;
}

}  // namespace detail

/// Basis field m of the collocation family at y (unit source radius).
template <typename T>
Eigen::Matrix<T, 3, 1> collocation_basis_field(int m, const Eigen::Matrix<T, 3, 1>& y) {
  if (m < kForceQuadrupoleCount) return detail::quadrupole_field<T>(kQuadrupoleSlots[m], y);
  m -= kForceQuadrupoleCount;
  return detail::octupole_field<T>(kOctupoleSlots[m], y);
}

/// Contracted exterior field of a collocation combination.
template <typename T>
Eigen::Matrix<T, 3, 1> collocation_exterior(const CollocationTensors& ct, const Eigen::Matrix<T, 3, 1>& y) {
  using std::sqrt;
  using V = Eigen::Matrix<T, 3, 1>;
  const auto& d = ct.quadrupole;
  const auto& o = ct.octupole;
  const T r2 = y.squaredNorm();
  const T r = sqrt(r2);
  const T i3 = T(1.0) / (r2 * r);
  const T i5 = i3 / r2;
  const T i7 = i5 / r2;
  const T i9 = i7 / r2;
  // Force quadrupoles: t_j = D_jkk, v_i = D_jij, q_j = y.D_j.y, m_i = y_j D_jil y_l, c3 = D_jkl y_j y_k y_l
  V t = V::Zero(), v = V::Zero(), q = V::Zero(), m = V::Zero();
  // Octupoles: a_i = O_ikk, b_i = O_ikl y_k y_l, c = O_jkl y_j y_k y_l
  V a = V::Zero(), b = V::Zero();
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      t(j) += T(d[j][k][k]);
      v(k) += T(d[j][k][j]);
      a(j) += T(o[j][k][k]);
      for (int l = 0; l < 3; ++l) {
        q(j) += d[j][k][l] * y(k) * y(l);
        m(k) += y(j) * d[j][k][l] * y(l);
        b(j) += o[j][k][l] * y(k) * y(l);
      }
    }
  }
  const T c3 = q.dot(y);
  const T vy = v.dot(y);
  const T ty = t.dot(y);
  V u = (2.0 * v - t) * i3 + (3.0 * q - 6.0 * m - (6.0 * vy + 3.0 * ty) * y) * i5 + (15.0 * c3 * i7) * y;

  const T oc = b.dot(y);
  const T ay = a.dot(y);
  u += (105.0 * oc * i9 / 15.0) * y - (45.0 * i7 / 15.0) * (b + ay * y) + (9.0 * i5 / 15.0) * a;
  return u;
}

/// Value and gradient (d u_i / d y_k) of the exterior collocation field.
inline std::pair<Vec3, Mat3> collocation_exterior_jet(const CollocationTensors& ct, const Vec3& y) {
  using J = ceres::Jet<double, 3>;
  Eigen::Matrix<J, 3, 1> yj;
  for (int k = 0; k < 3; ++k) yj(k) = J(y(k), k);
  const auto u = collocation_exterior<J>(ct, yj);
  Vec3 val;
  Mat3 grad;
  for (int i = 0; i < 3; ++i) {
    val(i) = u(i).a;
    grad.row(i) = u(i).v.transpose();
  }
  return {val, grad};
}

// Interior partners. Inside the unit ball each basis field is continued by the
// polynomial Stokes solution (div u = 0, Lap u = grad p) with the same values
// on the unit sphere. The partners are found once by least squares over a
// polynomial space of velocity degree <= kInteriorDegree constrained to the
// Stokes equations, sampled on the 434-point Lebedev rule.

inline constexpr int kInteriorDegree = 6;

namespace detail {

struct Monomials {
  std::vector<std::array<int, 3>> exps;
  int index(int a, int b, int c) const {
    for (std::size_t n = 0; n < exps.size(); ++n) {
      if (exps[n][0] == a && exps[n][1] == b && exps[n][2] == c) return int(n);
    }
    return -1;
  }
};

inline Monomials monomials_up_to(int degree) {
  Monomials m;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) m.exps.push_back({a, b, d - a - b});
  return m;
}

inline const Monomials& velocity_monomials() {
  static const Monomials m = monomials_up_to(kInteriorDegree);
  return m;
}

inline Eigen::VectorXd monomial_values(const Vec3& y) {
  const auto& mono = velocity_monomials();
  std::array<std::array<double, kInteriorDegree + 1>, 3> pw;
  for (int c = 0; c < 3; ++c) {
    pw[c][0] = 1.0;
    for (int p = 1; p <= kInteriorDegree; ++p) pw[c][p] = pw[c][p - 1] * y(c);
  }
  Eigen::VectorXd v(mono.exps.size());
  for (std::size_t n = 0; n < mono.exps.size(); ++n) {
    const auto& e = mono.exps[n];
    v(n) = pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
  }
  return v;
}

/// Row k holds d/dy_k of every monomial.
inline Eigen::MatrixXd monomial_gradients(const Vec3& y) {
  const auto& mono = velocity_monomials();
  std::array<std::array<double, kInteriorDegree + 1>, 3> pw;
  for (int c = 0; c < 3; ++c) {
    pw[c][0] = 1.0;
    for (int p = 1; p <= kInteriorDegree; ++p) pw[c][p] = pw[c][p - 1] * y(c);
  }
  Eigen::MatrixXd g(3, mono.exps.size());
  for (std::size_t n = 0; n < mono.exps.size(); ++n) {
    const auto& e = mono.exps[n];
    for (int k = 0; k < 3; ++k) {
      if (e[k] == 0) {
        g(k, n) = 0.0;
        continue;
      }
      double v = e[k];
      for (int c = 0; c < 3; ++c) v *= pw[c][c == k ? e[c] - 1 : e[c]];
      g(k, n) = v;
    }
  }
  return g;
}

struct InteriorPartners {
  /// partners[m] is 3 x n_monomials: velocity coefficients of basis field m.
  std::array<Eigen::MatrixXd, kCollocationSize> partners;
  double max_boundary_mismatch = 0;
};

inline InteriorPartners build_interior_partners() {
  const auto& vm = velocity_monomials();
  const Monomials pm = monomials_up_to(kInteriorDegree - 1);
  const Monomials dm = monomials_up_to(kInteriorDegree - 1);  // rows of div u
  const Monomials sm = monomials_up_to(kInteriorDegree - 2);  // rows of Lap u - grad p
  const int nv = int(vm.exps.size());
  const int np = int(pm.exps.size());
  const int nz = 3 * nv + np;
  Eigen::MatrixXd con = Eigen::MatrixXd::Zero(dm.exps.size() + 3 * sm.exps.size(), nz);
  for (int c = 0; c < 3; ++c) {
    for (int n = 0; n < nv; ++n) {
      auto e = vm.exps[n];
      if (e[c] > 0) {
        auto f = e;
        --f[c];
        con(dm.index(f[0], f[1], f[2]), c * nv + n) += e[c];
      }
      for (int d = 0; d < 3; ++d) {
        if (e[d] < 2) continue;
        auto f = e;
        f[d] -= 2;
        con(dm.exps.size() + c * sm.exps.size() + sm.index(f[0], f[1], f[2]), c * nv + n) += e[d] * (e[d] - 1);
      }
    }
    for (int n = 0; n < np; ++n) {
      auto e = pm.exps[n];
      if (e[c] == 0) continue;
      auto f = e;
      --f[c];
      con(dm.exps.size() + c * sm.exps.size() + sm.index(f[0], f[1], f[2]), 3 * nv + n) -= e[c];
    }
  }
  const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(con).kernel();

  // Sample on the finest tabulated sphere rule.
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  const auto& rule = lebedev::kRules.back();
  for (const auto& orbit : rule.orbits) expand_orbit(orbit, nodes, weights);
  const int rows = 3 * int(nodes.size());
  Eigen::MatrixXd design(rows, kernel.cols());
  Eigen::MatrixXd vel_to_z = Eigen::MatrixXd::Zero(rows, nz);
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    const Eigen::VectorXd mv = monomial_values(nodes[p]);
    const double sw = std::sqrt(weights[p]);
    for (int c = 0; c < 3; ++c) vel_to_z.block(3 * p + c, c * nv, 1, nv) = sw * mv.transpose();
  }
  design = vel_to_z * kernel;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);

  InteriorPartners out;
  for (int m = 0; m < kCollocationSize; ++m) {
    Eigen::VectorXd target(rows);
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      const Vec3 u = collocation_basis_field<double>(m, nodes[p]);
      target.segment<3>(3 * p) = std::sqrt(weights[p]) * u;
    }
    const Eigen::VectorXd sol = cod.solve(target);
    const Eigen::VectorXd z = kernel * sol;
    const Eigen::VectorXd fit = vel_to_z * z;
    out.max_boundary_mismatch = std::max(out.max_boundary_mismatch, (fit - target).norm() / target.norm());
    Eigen::MatrixXd coeffs(3, nv);
    for (int c = 0; c < 3; ++c) coeffs.row(c) = z.segment(c * nv, nv).transpose();
    out.partners[m] = coeffs;
  }
  return out;
}

}  // namespace detail

inline const detail::InteriorPartners& interior_partners() {
  static const detail::InteriorPartners p = detail::build_interior_partners();
  return p;
}

}  // namespace stokesmor
