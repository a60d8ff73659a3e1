// The iteration v_{k+1} = v_k - gamma * sum_i Q_i v_k with residual tracking.
#pragma once

#include "stokesmor/moments.hpp"

#include <chrono>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stokesmor {

struct SolverOptions {
  /// 1 = simple dipole only, 2 = dipole plus collocation remainder.
  int truncation = 1;
  double gamma = 1.0;
  int max_iterations = 50;
  double tolerance = 1e-10;
  double residual_exponent = 2.0;
  int quad_degree = kDefaultSurfaceDegree;
  int radial_nodes = kDefaultRadialNodes;
  int fit_window = 5;
  bool keep_history = false;
  unsigned threads = 1;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorKind::invalid_input, m); };
    if (truncation != 1 && truncation != 2) bad("truncation must be 1 or 2");
    if (!(gamma >= 0.0 && gamma <= 1.0)) bad("relaxation gamma must lie in [0, 1]");
    if (max_iterations < 0) bad("max_iterations must be non-negative");
    if (!(tolerance > 0)) bad("tolerance must be positive");
    if (!(residual_exponent > 1.0) || !std::isfinite(residual_exponent)) bad("residual exponent must exceed 1");
    if (fit_window < 2) bad("fit window must be at least 2");
  }
};

enum class Termination { tolerance, max_iterations, divergence };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance:
      return "tol";
    case Termination::max_iterations:
      return "max";
    case Termination::divergence:
      return "div";
  }
  return "?";
}

/// Radiated coefficients of every particle at one iterate.
struct CoefficientSnapshot {
  std::vector<TracelessSym3> dipoles;
  std::vector<CollocationCoefficients> collocation;
};

struct IterationReport {
  /// r_k = ||e v_k||_{L^q(union of balls)}, k = 0..iterations.
  std::vector<double> residuals;
  /// (sum_i |B_i| |avg_{B_i} e v_k|^q)^{1/q}: the part of r_k the truncated
  /// step acts on. Termination, divergence and rho use this sequence.
  std::vector<double> resolved_residuals;
  /// max_i |gamma S_i| of the update taken after iterate k.
  std::vector<double> max_updates;
  std::vector<double> wall_seconds;
  double rho = 0;
  int iterations = 0;
  Termination terminated = Termination::max_iterations;
  double phi0 = 0;
  SolverOptions options;
  std::vector<CoefficientSnapshot> history;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, IterationReport report)
      : Error(ErrorKind::divergence, what), report_(std::move(report)) {}
  const IterationReport& report() const { return report_; }

 private:
  IterationReport report_;
};

/// Per-particle quantities of one iterate.
struct IterateMoments {
  std::vector<double> strain_power;    // int_{B_i} |e v|^q
  std::vector<TracelessSym3> dipole;   // avg_{B_i} e v
  std::vector<CollocationCoefficients> remainder;  // only for truncation 2
  double residual = 0;
  double resolved = 0;
};

inline void check_terms_match(const FlowField& field, const ParticleConfig& cfg) {
  if (field.terms().size() != cfg.size()) {
    throw Error(ErrorKind::mismatched_config, "field has " + std::to_string(field.terms().size()) +
                                                  " particle terms for a configuration of " +
                                                  std::to_string(cfg.size()));
  }
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto& t = field.terms()[i];
    if (t.particle != i || t.dipole.center != cfg[i].center || t.dipole.radius != cfg[i].radius) {
      throw Error(ErrorKind::mismatched_config, "field term " + std::to_string(i) + " does not match particle " +
                                                    std::to_string(i));
    }
  }
}

inline IterateMoments compute_moments(const FlowField& field, const ParticleConfig& cfg, double q, int truncation,
                                      const SphereQuadrature& quad, unsigned threads,
                                      const CollocationFit* fit = nullptr) {
  const std::size_t n = cfg.size();
  IterateMoments m;
  m.strain_power.resize(n);
  m.dipole.resize(n);
  if (truncation == 2) m.remainder.assign(n, CollocationCoefficients::Zero());
  parallel_for(n, threads, [&](std::size_t i) {
    const Particle& p = cfg[i];
    const auto grads = ball_gradients(field, p, quad);
    m.strain_power[i] = ball_strain_power(grads, p.radius, q, quad);
    const Mat3 g = average_gradient(grads, quad);
    m.dipole[i] = TracelessSym3::project(g);
    if (truncation == 2) {
      const auto vels = surface_velocities(field, p, quad);
      const RigidMotion rigid{average_velocity(vels, quad), 0.5 * curl_from_gradient(g), p.center};
      m.remainder[i] = fit->solve(remainder_boundary_data(vels, p, rigid, m.dipole[i], quad));
    }
  });
  CompensatedSum<double> full, resolved;
  for (std::size_t i = 0; i < n; ++i) {
    const double vol = 4.0 * kPi / 3.0 * std::pow(cfg[i].radius, 3);
    full.add(m.strain_power[i]);
    resolved.add(vol * std::pow(m.dipole[i].norm(), q));
  }
  m.residual = std::pow(full.value(), 1.0 / q);
  m.resolved = std::pow(resolved.value(), 1.0 / q);
  return m;
}

/// (sum_i int_{B_i} |e field|_F^q)^{1/q} by ball quadrature.
inline double residual_norm(const FlowField& field, const ParticleConfig& cfg, double q,
                            const SphereQuadrature& quad) {
  if (!(q > 1.0)) throw Error(ErrorKind::invalid_input, "residual exponent must exceed 1");
  CompensatedSum<double> sum;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    sum.add(ball_strain_power(ball_gradients(field, cfg[i], quad), cfg[i].radius, q, quad));
  }
  return std::pow(sum.value(), 1.0 / q);
}

inline FlowField apply_update(const FlowField& field, const IterateMoments& m, double gamma, int truncation) {
  FlowField next = field;
  if (gamma == 0.0) return next;
  for (std::size_t i = 0; i < next.terms().size(); ++i) {
    auto& t = next.terms()[i];
    t.dipole.coefficient -= gamma * m.dipole[i];
    if (truncation == 2) {
      CollocationCoefficients c = t.collocation ? t.collocation->coefficients() : CollocationCoefficients::Zero();
      c -= gamma * m.remainder[i];
      t.collocation = CollocationTerm(t.dipole.center, t.dipole.radius, c);
    }
    const auto& s = t.dipole.coefficient;
    if (!std::isfinite(s.xx()) || !std::isfinite(s.yy()) || !std::isfinite(s.xy()) || !std::isfinite(s.xz()) ||
        !std::isfinite(s.yz())) {
      throw Error(ErrorKind::divergence, "non-finite dipole coefficient at particle " + std::to_string(i));
    }
  }
  return next;
}

/// Field with one zero radiated term per particle when `field` has none.
inline FlowField with_terms(const FlowField& field, const ParticleConfig& cfg) {
  if (!field.terms().empty()) return field;
  return FlowField::for_config(field.ambient(), cfg);
}

/// One simultaneous step: every correction is computed from the current field
/// and subtracted, scaled by gamma, at once.
inline FlowField reflection_step(const FlowField& field, const ParticleConfig& cfg, const SolverOptions& opts) {
  opts.validate();
  const FlowField cur = with_terms(field, cfg);
  check_terms_match(cur, cfg);
  const SphereQuadrature quad(opts.quad_degree, opts.radial_nodes);
  std::optional<CollocationFit> fit;
  if (opts.truncation == 2) fit.emplace(quad);
  const auto m = compute_moments(cur, cfg, opts.residual_exponent, opts.truncation, quad, opts.threads,
                                 fit ? &*fit : nullptr);
  return apply_update(cur, m, opts.gamma, opts.truncation);
}

/// Least-squares geometric rate over the final window of a residual sequence,
/// skipping the first two iterations when the run is long enough. Exact zero
/// residuals give rate 0.
inline double fit_contraction(const std::vector<double>& r, int window) {
  if (r.size() < 2) return 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (r[k] == 0.0) return 0.0;
  }
  const std::size_t last = r.size() - 1;
  const std::size_t first = std::min<std::size_t>(2, last - 1);
  const std::size_t start = std::max<std::size_t>(first, last + 1 >= std::size_t(window) ? last + 1 - window : 0);
  std::vector<double> x, y;
  for (std::size_t k = start; k <= last; ++k) {
    x.push_back(double(k));
    y.push_back(std::log(r[k]));
  }
  return std::exp(fit_line(x, y).slope);
}

struct RunResult {
  FlowField field;
  IterationReport report;
};

inline CoefficientSnapshot snapshot(const FlowField& f) {
  CoefficientSnapshot s;
  for (const auto& t : f.terms()) {
    s.dipoles.push_back(t.dipole.coefficient);
    s.collocation.push_back(t.collocation ? t.collocation->coefficients() : CollocationCoefficients::Zero());
  }
  return s;
}

/// Iterates from v_0 = ambient until the resolved residual drops to
/// tolerance * r_0 or max_iterations steps are taken. Throws DivergenceError
/// when it exceeds 10 r_0.
inline RunResult run(const ParticleConfig& cfg, const AmbientField& ambient, const SolverOptions& opts) {
  opts.validate();
  if (opts.gamma == 0.0) throw Error(ErrorKind::invalid_input, "relaxation gamma must be positive for a run");
  const ValidationReport vr = validate_config(cfg);
  if (!vr.separated()) {
    std::string msg = "configuration is not separated (theta_max = " + std::to_string(vr.theta_max) + ")";
    for (const auto& [a, b] : vr.overlapping_pairs) msg += " overlap " + std::to_string(a) + "-" + std::to_string(b);
    throw Error(ErrorKind::overlap, msg);
  }
  for (const Vec3& s : ambient.singular_points()) {
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if ((s - cfg[i].center).norm() <= cfg[i].radius) {
        throw Error(ErrorKind::invalid_input, "point force lies inside particle " + std::to_string(i));
      }
    }
  }
  const SphereQuadrature quad(opts.quad_degree, opts.radial_nodes);
  std::optional<CollocationFit> fit;
  if (opts.truncation == 2) {
    fit.emplace(quad);
    if (!(fit->condition() <= kCollocationConditionLimit)) {
      throw Error(ErrorKind::ill_conditioned, "collocation basis is ill-conditioned; reduce the truncation degree");
    }
  }

  RunResult out{FlowField::for_config(ambient, cfg), {}};
  IterationReport& rep = out.report;
  rep.options = opts;
  rep.phi0 = vr.phi0;
  if (opts.keep_history) rep.history.push_back(snapshot(out.field));

  using Clock = std::chrono::steady_clock;
  for (int k = 0;; ++k) {
    const auto t0 = Clock::now();
    const auto m = compute_moments(out.field, cfg, opts.residual_exponent, opts.truncation, quad, opts.threads,
                                   fit ? &*fit : nullptr);
    rep.residuals.push_back(m.residual);
    rep.resolved_residuals.push_back(m.resolved);
    const double r0 = rep.resolved_residuals.front();
    const double rk = m.resolved;
    if (!std::isfinite(rk) || rk > 10.0 * r0) {
      rep.iterations = k;
      rep.terminated = Termination::divergence;
      rep.wall_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      rep.rho = fit_contraction(rep.resolved_residuals, opts.fit_window);
      throw DivergenceError("resolved residual exceeded 10 r_0 at iteration " + std::to_string(k), rep);
    }
    if (rk <= opts.tolerance * r0) {
      rep.iterations = k;
      rep.terminated = Termination::tolerance;
      rep.wall_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      break;
    }
    if (k == opts.max_iterations) {
      rep.iterations = k;
      rep.terminated = Termination::max_iterations;
      rep.wall_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      break;
    }
    double max_update = 0;
    for (const auto& s : m.dipole) max_update = std::max(max_update, opts.gamma * s.norm());
    rep.max_updates.push_back(max_update);
    try {
      out.field = apply_update(out.field, m, opts.gamma, opts.truncation);
    } catch (const Error& e) {
      rep.iterations = k;
      rep.terminated = Termination::divergence;
      throw DivergenceError(e.what(), rep);
    }
    if (opts.keep_history) rep.history.push_back(snapshot(out.field));
    rep.wall_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  rep.rho = fit_contraction(rep.resolved_residuals, opts.fit_window);
  return out;
}

/// Field v_k rebuilt from a stored coefficient snapshot.
inline FlowField field_from_snapshot(const AmbientField& ambient, const ParticleConfig& cfg,
                                     const CoefficientSnapshot& s) {
  FlowField f = FlowField::for_config(ambient, cfg);
  if (s.dipoles.size() != cfg.size()) throw Error(ErrorKind::mismatched_config, "snapshot size differs from config");
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    f.terms()[i].dipole.coefficient = s.dipoles[i];
    if (i < s.collocation.size() && !s.collocation[i].isZero(0)) {
      f.terms()[i].collocation = CollocationTerm(cfg[i].center, cfg[i].radius, s.collocation[i]);
    }
  }
  return f;
}

}  // namespace stokesmor
