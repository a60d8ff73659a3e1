// Verification instruments: contraction sweeps, the dipole interaction matrix
// and its spectrum, decay slopes, boundary averages and the dilute viscosity.
#pragma once

#include "stokesmor/reflections.hpp"

#include <Eigen/Cholesky>

#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace stokesmor {

// ---------------------------------------------------------------------------
// Dipole interaction matrix

/// Dense map on stacked dipole coefficients (five orthonormal components per
/// particle): block (i, j) sends S_j to the ball average over B_i of e(w_{S_j}).
struct DipoleInteractionMatrix {
  Eigen::MatrixXd matrix;
  /// Diagonal of the energy pairing, 5 |B_i| per component.
  Eigen::VectorXd energy_weights;
};

namespace detail {

/// Column b: orthonormal components of e(w_{E_b}) at unit-radius position y
/// outside the ball, E_b the b-th basis element.
inline Eigen::Matrix<double, 5, 5> dipole_strain_columns(const Vec3& y, const std::array<Mat3, 5>& basis) {
  const double r2 = y.squaredNorm();
  const double r = std::sqrt(r2);
  const double inv2 = 1.0 / r2;
  const double inv5 = inv2 * inv2 / r;
  const double inv7 = inv5 * inv2;
  const double inv9 = inv7 * inv2;
  const double a = 2.5 * (inv5 - inv7);
  const double da = 2.5 * (-5.0 * inv7 + 7.0 * inv9);
  const double c = a - 2.5 * inv7;
  const Mat3 yy = y * y.transpose();
  Eigen::Matrix<double, 5, 5> out;
  for (int b = 0; b < 5; ++b) {
    const Vec3 g = basis[b] * y;
    const double s = y.dot(g);
    const Mat3 yg = y * g.transpose();
    out.col(b) = TracelessSym3::project((da * s) * yy + c * (yg + yg.transpose()) + inv5 * basis[b]).components();
  }
  return out;
}

}  // namespace detail

inline DipoleInteractionMatrix build_interaction_matrix(const ParticleConfig& cfg, const SphereQuadrature& quad,
                                                        unsigned threads = 1) {
  constexpr int d = TracelessSym3::kDim;
  const std::size_t n = cfg.size();
  DipoleInteractionMatrix out;
  out.matrix = Eigen::MatrixXd::Zero(d * Eigen::Index(n), d * Eigen::Index(n));
  out.energy_weights.resize(d * Eigen::Index(n));
  std::array<Mat3, d> basis;
  for (int b = 0; b < d; ++b) basis[b] = TracelessSym3::basis(b).matrix();
  const double norm = 3.0 / (4.0 * kPi);

  parallel_for(n, threads, [&](std::size_t i) {
    const Particle& pi = cfg[i];
    for (std::size_t j = 0; j < n; ++j) {
      const Particle& pj = cfg[j];
      Eigen::Matrix<double, d, d> block;
      if (i == j) {
        // interior strain of w_S is S at every node
        CompensatedSum<double> w;
        for (std::size_t k = 0; k < quad.ball_size(); ++k) w.add(norm * quad.ball_weight(k));
        block = w.value() * Eigen::Matrix<double, d, d>::Identity();
      } else {
        CompensatedSum<Eigen::Matrix<double, d, d>> sum;
        for (std::size_t k = 0; k < quad.ball_size(); ++k) {
          const Vec3 y = (pi.center + pi.radius * quad.ball_node(k) - pj.center) / pj.radius;
          sum.add((norm * quad.ball_weight(k)) * detail::dipole_strain_columns(y, basis));
        }
        block = sum.value();
      }
      out.matrix.block<d, d>(d * Eigen::Index(i), d * Eigen::Index(j)) = block;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    const double vol = 4.0 * kPi / 3.0 * std::pow(cfg[i].radius, 3);
    out.energy_weights.segment<d>(d * Eigen::Index(i)).setConstant(5.0 * vol);
  }
  return out;
}

/// D^{1/2} M D^{-1/2} symmetrized; its eigenvalues are the Rayleigh quotients
/// of M in the energy pairing.
inline Eigen::MatrixXd symmetrized_energy_form(const DipoleInteractionMatrix& m) {
  const Eigen::VectorXd s = m.energy_weights.cwiseSqrt();
  const Eigen::MatrixXd a = s.asDiagonal() * m.matrix * s.cwiseInverse().asDiagonal();
  return 0.5 * (a + a.transpose());
}

/// ||DM - (DM)^T||_F / ||DM||_F.
inline double energy_asymmetry(const DipoleInteractionMatrix& m) {
  const Eigen::MatrixXd dm = m.energy_weights.asDiagonal() * m.matrix;
  const double nrm = dm.norm();
  return nrm > 0 ? (dm - dm.transpose()).norm() / nrm : 0.0;
}

struct OperatorSpectrum {
  double largest = 0;
  double smallest = 0;
  double asymmetry = 0;
  int power_iterations = 0;
  int inverse_iterations = 0;
};

namespace detail {

inline Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index p) {
  UniformStream rng(0x5eedULL);
  Eigen::MatrixXd v(n, p);
  for (Eigen::Index c = 0; c < p; ++c)
    for (Eigen::Index k = 0; k < n; ++k) v(k, c) = rng.next() - 0.5;
  return v;
}

[[noreturn]] inline void eigen_failure(const char* what, int budget, double prev, double last) {
  std::ostringstream os;
  os.precision(17);
  os << what << " did not converge in " << budget << " iterations; last iterates " << prev << ", " << last;
  throw Error(ErrorKind::non_convergence, os.str());
}

/// Blocked power iteration with Rayleigh-Ritz on a symmetric matrix, driven by
/// `apply` (A for the top of the spectrum, A^{-1} for the bottom). Returns the
/// extreme Ritz value of A; stops when the Ritz residual |A v - lambda v| falls
/// below tolerance * |lambda|. The block absorbs near-degenerate clusters
/// (lattice symmetry) that stall the single-vector iteration.
template <typename Apply>
double subspace_iteration(const Eigen::MatrixXd& a, Apply&& apply, bool largest, int max_iterations, double tolerance,
                          int& iterations, const char* what) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, 8);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(start_block(n, p)).householderQ() *
                      Eigen::MatrixXd::Identity(n, p);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1;; ++it) {
    const Eigen::MatrixXd w = apply(q);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(w).householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd aq = a * q;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(q.transpose() * aq);
    const Eigen::Index pick = largest ? p - 1 : 0;
    const double lambda = ritz.eigenvalues()(pick);
    const Eigen::VectorXd y = ritz.eigenvectors().col(pick);
    const double res = (aq * y - lambda * (q * y)).norm();
    iterations = it;
    if (res <= tolerance * std::abs(lambda)) return lambda;
    if (it >= max_iterations) eigen_failure(what, max_iterations, prev, lambda);
    prev = lambda;
  }
}

}  // namespace detail

/// Largest and smallest Rayleigh quotients of the dipole interaction matrix in
/// the energy pairing: blocked power iteration on A - mu and on (A - mu)^{-1}
/// (Cholesky), mu a Gershgorin lower bound of the spectrum.
inline OperatorSpectrum operator_norm_estimate(const ParticleConfig& cfg, const SphereQuadrature& quad,
                                               int max_iterations = 5000, double tolerance = 1e-10,
                                               unsigned threads = 1) {
  const ValidationReport vr = validate_config(cfg);
  if (!vr.separated()) throw Error(ErrorKind::overlap, "operator estimate needs a separated configuration");
  const DipoleInteractionMatrix m = build_interaction_matrix(cfg, quad, threads);
  const Eigen::MatrixXd a = symmetrized_energy_form(m);
  OperatorSpectrum out;
  out.asymmetry = energy_asymmetry(m);
  if (Eigen::LLT<Eigen::MatrixXd>(a).info() != Eigen::Success) {
    throw Error(ErrorKind::non_convergence, "interaction matrix is not positive definite; inverse iteration refused");
  }
  // Shifting by a lower bound of the spectrum spreads clusters near 1 (dilute
  // configurations) that the unshifted iterations cannot separate.
  const Eigen::Index n = a.rows();
  double floor = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) floor = std::min(floor, 2.0 * a(i, i) - a.row(i).cwiseAbs().sum());
  floor = std::max(floor, 0.0);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd top = a - floor * eye;
  out.largest = detail::subspace_iteration(
      a, [&](const Eigen::MatrixXd& q) -> Eigen::MatrixXd { return top * q; }, true, max_iterations, tolerance,
      out.power_iterations, "power iteration");
  const double shift = floor - 1e-2 * std::max(out.largest - floor, 1e-3 * out.largest);
  const Eigen::LLT<Eigen::MatrixXd> llt(a - shift * eye);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::non_convergence, "shifted interaction matrix is not positive definite");
  }
  out.smallest = detail::subspace_iteration(
      a, [&](const Eigen::MatrixXd& q) -> Eigen::MatrixXd { return llt.solve(q); }, false, max_iterations, tolerance,
      out.inverse_iterations, "inverse iteration");
  return out;
}

// ---------------------------------------------------------------------------
// Decay slopes

enum class DecayKind { dipole, collocation };

struct DecayFit {
  /// True when the coefficient is zero: no fit, the field is exactly zero.
  bool zero = false;
  double velocity_slope = std::numeric_limits<double>::quiet_NaN();
  double gradient_slope = std::numeric_limits<double>::quiet_NaN();
};

inline TracelessSym3 generic_dipole_coefficient() {
  return (1.0 / 3.0) * TracelessSym3(0.8, -0.3, 0.45, -0.6, 0.25);
}

inline CollocationCoefficients generic_collocation_coefficients() {
  CollocationCoefficients c;
  for (int m = 0; m < kCollocationSize; ++m) c(m) = std::cos(1.0 + 0.7 * m);
  return c;
}

/// Log-log slope of the max over sphere directions of |u| and |grad u| for a
/// unit-radius source at the origin, on `samples` log-spaced distances in
/// [r_lo, r_hi] (units of the source radius).
inline DecayFit decay_slope_check(DecayKind kind, double r_lo = 10.0, double r_hi = 1e4, int samples = 25,
                                  std::optional<TracelessSym3> dipole = std::nullopt,
                                  std::optional<CollocationCoefficients> collocation = std::nullopt) {
  if (!(r_lo >= 10.0 && r_hi <= 1e4 && r_lo < r_hi) || samples < 2) {
    throw Error(ErrorKind::invalid_input, "decay window must lie within [10, 1e4] source radii");
  }
  const TracelessSym3 s = dipole.value_or(generic_dipole_coefficient());
  const CollocationCoefficients c = collocation.value_or(generic_collocation_coefficients());
  DecayFit out;
  if ((kind == DecayKind::dipole && s.is_zero()) || (kind == DecayKind::collocation && c.isZero(0))) {
    out.zero = true;
    return out;
  }
  const DipoleTerm dterm{Vec3::Zero(), 1.0, s};
  const CollocationTerm cterm(Vec3::Zero(), 1.0, c);
  const SphereQuadrature dirs(kDefaultSurfaceDegree, kMinRadialNodes);
  std::vector<double> lr, lu, lg;
  for (int k = 0; k < samples; ++k) {
    const double r = r_lo * std::pow(r_hi / r_lo, double(k) / (samples - 1));
    double umax = 0, gmax = 0;
    for (const Vec3& n : dirs.nodes()) {
      const Vec3 x = r * n;
      const Vec3 u = kind == DecayKind::dipole ? dterm.velocity(x) : cterm.velocity(x);
      const Mat3 g = kind == DecayKind::dipole ? dterm.gradient(x) : cterm.gradient(x);
      umax = std::max(umax, u.norm());
      gmax = std::max(gmax, g.norm());
    }
    lr.push_back(std::log(r));
    lu.push_back(std::log(umax));
    lg.push_back(std::log(gmax));
  }
  out.velocity_slope = fit_line(lr, lu).slope;
  out.gradient_slope = fit_line(lr, lg).slope;
  return out;
}

// ---------------------------------------------------------------------------
// Boundary averages

struct BoundaryAverageError {
  std::vector<double> per_particle;
  double sup = 0;
};

/// |avg over the sphere of (v_k - v_ref)| for every particle.
inline BoundaryAverageError boundary_average_error(const FlowField& vk, const FlowField& vref,
                                                   const ParticleConfig& cfg, const SphereQuadrature& quad) {
  check_terms_match(vk, cfg);
  check_terms_match(vref, cfg);
  BoundaryAverageError out;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const Vec3 avg = quad.surface_average(cfg[i].center, cfg[i].radius,
                                          [&](const Vec3& x) -> Vec3 { return vk.velocity(x) - vref.velocity(x); });
    out.per_particle.push_back(avg.norm());
    out.sup = std::max(out.sup, avg.norm());
  }
  return out;
}

/// sup over ball and surface nodes of |v_k - v_ref|.
inline double ball_velocity_error(const FlowField& vk, const FlowField& vref, const ParticleConfig& cfg,
                                  const SphereQuadrature& quad) {
  check_terms_match(vk, cfg);
  check_terms_match(vref, cfg);
  double sup = 0;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const Particle& p = cfg[i];
    for (std::size_t k = 0; k < quad.ball_size(); ++k) {
      const Vec3 x = p.center + p.radius * quad.ball_node(k);
      sup = std::max(sup, (vk.velocity(x) - vref.velocity(x)).norm());
    }
    for (const Vec3& n : quad.nodes()) {
      const Vec3 x = p.center + p.radius * n;
      sup = std::max(sup, (vk.velocity(x) - vref.velocity(x)).norm());
    }
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Dilute viscosity

struct EinsteinEstimate {
  /// (mu_eff - mu) / (mu phi).
  double normalized = 0;
  double increment = 0;
  double phi = 0;
  double volume = 0;
  std::size_t particles = 0;
};

/// Bounding box of the particle cloud (centers +- radii).
inline Box cloud_bounds(const ParticleConfig& cfg) {
  Box b{Vec3::Constant(std::numeric_limits<double>::infinity()),
        Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& p : cfg.particles) {
    b.lo = b.lo.cwiseMin(p.center - Vec3::Constant(p.radius));
    b.hi = b.hi.cwiseMax(p.center + Vec3::Constant(p.radius));
  }
  return b;
}

/// Viscosity increment from the stresslets (20 pi / 3) R_i^3 S_i of the
/// particles whose centers lie in the sample box. The default sample is the
/// cloud bounds shrunk by 2 d_min on every side (the whole cloud for a single
/// particle); an explicit sample must respect that inset.
inline EinsteinEstimate einstein_viscosity_estimate(const FlowField& converged, const ParticleConfig& cfg,
                                                    const AmbientField& ambient,
                                                    std::optional<Box> sample = std::nullopt) {
  const auto e = ambient.as_linear_strain();
  if (!e) {
    if (std::holds_alternative<RigidMotion>(ambient.variant())) {
      throw Error(ErrorKind::undefined_normalization, "ambient strain is zero; viscosity increment undefined");
    }
    throw Error(ErrorKind::invalid_input, "viscosity estimate needs a linear-strain ambient");
  }
  const double e2 = e->contract(*e);
  if (e2 == 0) throw Error(ErrorKind::undefined_normalization, "ambient strain is zero; viscosity increment undefined");
  check_terms_match(converged, cfg);
  const ValidationReport vr = validate_config(cfg);

  const Box cloud = cloud_bounds(cfg);
  const double layer = cfg.size() > 1 ? 2.0 * vr.d_min : 0.0;
  const Box inner{cloud.lo + Vec3::Constant(layer), cloud.hi - Vec3::Constant(layer)};
  Box region = inner;
  if (sample) {
    if ((sample->lo.array() < inner.lo.array()).any() || (sample->hi.array() > inner.hi.array()).any()) {
      throw Error(ErrorKind::invalid_input, "sample volume must exclude a boundary layer of width 2 d_min");
    }
    region = *sample;
  }
  if (!((region.hi.array() > region.lo.array()).all())) {
    throw Error(ErrorKind::undefined_normalization, "sample volume is empty after removing the boundary layer");
  }

  EinsteinEstimate out;
  out.volume = region.volume();
  CompensatedSum<double> vol, stress;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    if (!region.contains(cfg[i].center)) continue;
    const double r3 = std::pow(cfg[i].radius, 3);
    vol.add(4.0 * kPi / 3.0 * r3);
    // the radiated terms carry -S_i, S_i being the accumulated Q_i output
    stress.add(-20.0 * kPi / 3.0 * r3 * converged.terms()[i].dipole.coefficient.contract(*e));
    ++out.particles;
  }
  if (out.particles == 0) throw Error(ErrorKind::undefined_normalization, "no particle centers in the sample volume");
  out.phi = vol.value() / out.volume;
  out.increment = stress.value() / (2.0 * e2 * out.volume);
  out.normalized = out.increment / out.phi;
  return out;
}

// ---------------------------------------------------------------------------
// Contraction sweeps

struct SweepFamily {
  enum class Kind { lattice, fcc, random };
  Kind kind = Kind::lattice;
  /// Lattice: n_per_side^3 particles at the given spacing. Fcc: the even
  /// sites of that cube, nearest neighbours `spacing` apart.
  int n_per_side = 5;
  double spacing = 1.0;
  /// Random: `count` spheres in a cube of side `box_side` with centers at
  /// least `min_gap` apart.
  std::size_t count = 64;
  double box_side = 10.0;
  double min_gap = 1.0;
  std::uint64_t seed = 0;
  AmbientField ambient = LinearStrain{TracelessSym3(0, 0, 0.5, 0, 0)};
};

/// Configuration of the family at target phi0 (radius = gap * phi0^(1/3)).
inline ParticleConfig family_config(const SweepFamily& f, double phi0) {
  if (!(phi0 > 0)) throw Error(ErrorKind::invalid_input, "phi0 must be positive");
  if (f.kind == SweepFamily::Kind::lattice) return generate_lattice(f.n_per_side, f.spacing, f.spacing * std::cbrt(phi0));
  if (f.kind == SweepFamily::Kind::fcc) return generate_fcc(f.n_per_side, f.spacing, f.spacing * std::cbrt(phi0));
  const Box box{Vec3::Zero(), Vec3::Constant(f.box_side)};
  return generate_poisson_disk(f.count, box, f.min_gap, f.min_gap * std::cbrt(phi0), f.seed);
}

struct SweepPoint {
  double phi0 = 0;
  double target_phi0 = 0;
  double rho = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double theta_max = 0;
  int iterations = 0;
  Termination terminated = Termination::max_iterations;
  bool excluded = false;
  std::string note;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  /// log rho against log phi0 over the included points.
  std::optional<LineFit> fit;
};

inline std::optional<LineFit> fit_sweep(const std::vector<SweepPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    if (p.excluded) continue;
    x.push_back(std::log(p.phi0));
    y.push_back(std::log(p.rho));
  }
  if (x.size() < 2) return std::nullopt;
  return fit_line(x, y);
}

/// Runs the iteration per phi0 and fits log rho against log phi0. Divergent
/// runs and points with rho = 0 (one-step exact) are flagged and excluded.
inline SweepResult contraction_sweep(const SweepFamily& family, const std::vector<double>& phi0_list,
                                     const SolverOptions& opts) {
  if (phi0_list.empty()) throw Error(ErrorKind::invalid_input, "phi0 list is empty");
  opts.validate();
  SweepResult out;
  out.points.resize(phi0_list.size());
  SolverOptions inner = opts;
  const unsigned outer_threads = phi0_list.size() > 1 ? opts.threads : 1;
  if (outer_threads > 1) inner.threads = 1;
  parallel_for(phi0_list.size(), outer_threads, [&](std::size_t k) {
    SweepPoint& pt = out.points[k];
    pt.target_phi0 = phi0_list[k];
    pt.seed = family.seed;
    const ParticleConfig cfg = family_config(family, phi0_list[k]);
    const ValidationReport vr = validate_config(cfg);
    pt.phi0 = vr.phi0;
    pt.n = cfg.size();
    pt.theta_max = vr.theta_max;
    if (cfg.size() < 2) {
      pt.excluded = true;
      pt.note = "single particle";
      return;
    }
    try {
      const RunResult r = run(cfg, family.ambient, inner);
      pt.rho = r.report.rho;
      pt.iterations = r.report.iterations;
      pt.terminated = r.report.terminated;
      if (!(pt.rho > 0)) {
        pt.excluded = true;
        pt.note = "zero contraction rate";
      }
    } catch (const DivergenceError& e) {
      pt.rho = e.report().rho;
      pt.iterations = e.report().iterations;
      pt.terminated = Termination::divergence;
      pt.excluded = true;
      pt.note = "diverged";
    }
  });
  out.fit = fit_sweep(out.points);
  return out;
}

}  // namespace stokesmor
