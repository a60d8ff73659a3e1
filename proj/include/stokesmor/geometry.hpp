// Particle configurations, separation metrics and deterministic generators.
#pragma once

#include "stokesmor/core.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace stokesmor {

struct Particle {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  double volume() const { return (hi - lo).prod(); }
  bool contains(const Vec3& x) const { return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all(); }
};

/// Finite set of spheres. Construction does not validate; use validate_config.
struct ParticleConfig {
  std::vector<Particle> particles;
  std::optional<Box> box;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
  const Particle& operator[](std::size_t i) const { return particles[i]; }
};

struct ValidationReport {
  bool disjoint = true;
  double d_min = std::numeric_limits<double>::infinity();
  double r_max = 0;
  double phi0 = 0;
  double theta_max = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs;

  /// Disjoint and strictly theta-separated for some theta > 1.
  bool separated() const { return disjoint && theta_max > 1.0; }
};

/// Separation metrics of a configuration.
///
/// For a single particle d_min and theta_max are +inf and phi0 is 0.
/// Throws invalid_input for an empty configuration or a non-positive radius.
inline ValidationReport validate_config(const ParticleConfig& cfg) {
  if (cfg.empty()) throw Error(ErrorKind::invalid_input, "configuration has no particles");
  ValidationReport rep;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const double r = cfg[i].radius;
    if (!(r > 0) || !std::isfinite(r)) {
      throw Error(ErrorKind::invalid_input, "particle " + std::to_string(i) + " has non-positive radius");
    }
    if (!cfg[i].center.allFinite()) {
      throw Error(ErrorKind::invalid_input, "particle " + std::to_string(i) + " has a non-finite center");
    }
    rep.r_max = std::max(rep.r_max, r);
  }
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.size(); ++j) {
      const double d = (cfg[i].center - cfg[j].center).norm();
      const double rsum = cfg[i].radius + cfg[j].radius;
      rep.d_min = std::min(rep.d_min, d);
      rep.theta_max = std::min(rep.theta_max, d / rsum);
      if (!(d > rsum)) {
        rep.disjoint = false;
        rep.overlapping_pairs.emplace_back(i, j);
      }
    }
  }
  if (cfg.size() > 1) {
    const double ratio = rep.r_max / rep.d_min;
    rep.phi0 = ratio * ratio * ratio;
  }
  return rep;
}

/// sup_i sum_{j != i} R_j^3 / |X_i - X_j|^(2q).
inline double compute_lambda_q(const ParticleConfig& cfg, double q) {
  if (!(q > 0)) throw Error(ErrorKind::invalid_input, "lambda_q exponent must be positive");
  double best = 0;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    CompensatedSum<double> sum;
    for (std::size_t j = 0; j < cfg.size(); ++j) {
      if (j == i) continue;
      const double d = (cfg[i].center - cfg[j].center).norm();
      const double rj = cfg[j].radius;
      sum.add(rj * rj * rj / std::pow(d, 2.0 * q));
    }
    best = std::max(best, sum.value());
  }
  return best;
}

/// n^3 spheres on a cubic lattice with the first center at the origin.
/// Ordering is lexicographic in (ix, iy, iz) with iz fastest.
inline ParticleConfig generate_lattice(int n_per_side, double spacing, double radius) {
  if (n_per_side < 1) throw Error(ErrorKind::invalid_input, "lattice needs at least one particle per side");
  if (!(radius > 0)) throw Error(ErrorKind::invalid_input, "lattice radius must be positive");
  if (n_per_side > 1 && !(spacing > 2.0 * radius)) {
    throw Error(ErrorKind::overlap, "lattice spacing must exceed twice the radius");
  }
  ParticleConfig cfg;
  cfg.particles.reserve(std::size_t(n_per_side) * n_per_side * n_per_side);
  for (int ix = 0; ix < n_per_side; ++ix) {
    for (int iy = 0; iy < n_per_side; ++iy) {
      for (int iz = 0; iz < n_per_side; ++iz) {
        cfg.particles.push_back({Vec3(ix * spacing, iy * spacing, iz * spacing), radius});
      }
    }
  }
  const double h = n_per_side > 1 ? 0.5 * spacing : radius;
  cfg.box = Box{Vec3::Constant(-h), Vec3::Constant((n_per_side - 1) * spacing + h)};
  return cfg;
}

/// Face-centred cubic cluster: sites (ix, iy, iz) of an n^3 cube with even
/// ix + iy + iz, nearest-neighbour distance `spacing`.
inline ParticleConfig generate_fcc(int n_per_side, double spacing, double radius) {
  if (n_per_side < 2) throw Error(ErrorKind::invalid_input, "fcc cluster needs at least two sites per side");
  if (!(radius > 0)) throw Error(ErrorKind::invalid_input, "fcc radius must be positive");
  if (!(spacing > 2.0 * radius)) throw Error(ErrorKind::overlap, "fcc spacing must exceed twice the radius");
  const double a = spacing / std::sqrt(2.0);
  ParticleConfig cfg;
  for (int ix = 0; ix < n_per_side; ++ix) {
    for (int iy = 0; iy < n_per_side; ++iy) {
      for (int iz = 0; iz < n_per_side; ++iz) {
        if ((ix + iy + iz) % 2 == 0) cfg.particles.push_back({Vec3(ix * a, iy * a, iz * a), radius});
      }
    }
  }
  cfg.box = Box{Vec3::Constant(-0.5 * a), Vec3::Constant((n_per_side - 0.5) * a)};
  return cfg;
}

/// Seeded uniform doubles in [0, 1) from std::mt19937_64.
///
/// The engine's output sequence is fixed by the standard; the conversion to
/// double takes the top 53 bits, so the stream is identical on every
/// conforming platform (std::uniform_real_distribution is not).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return double(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

class GenerationFailed : public Error {
 public:
  GenerationFailed(std::size_t achieved, std::size_t requested)
      : Error(ErrorKind::generation_failed, "placed " + std::to_string(achieved) + " of " + std::to_string(requested) +
                                                " particles before exhausting the retry budget"),
        achieved_(achieved) {}
  std::size_t achieved() const { return achieved_; }

 private:
  std::size_t achieved_;
};

/// Attempts allowed per requested particle in generate_poisson_disk.
inline constexpr std::size_t kPoissonAttemptsPerParticle = 2000;

/// Random sequential addition of `count` spheres in `box` with pairwise
/// center distance >= min_gap. Each sphere lies entirely inside the box.
///
/// Refuses when count * min_gap^3 > 0.3 * volume(box). Candidates are drawn
/// from UniformStream(seed), three draws per candidate (x, y, z), and the
/// total number of candidates is capped at count * kPoissonAttemptsPerParticle.
inline ParticleConfig generate_poisson_disk(std::size_t count, const Box& box, double min_gap, double radius,
                                            std::uint64_t seed) {
  if (!(radius > 0)) throw Error(ErrorKind::invalid_input, "radius must be positive");
  if (!(min_gap > 2.0 * radius)) throw Error(ErrorKind::overlap, "min_gap must exceed twice the radius");
  const Vec3 lo = box.lo.array() + radius;
  const Vec3 hi = box.hi.array() - radius;
  if (count > 0 && !(hi.array() >= lo.array()).all()) {
    throw Error(ErrorKind::invalid_input, "box too small for the requested radius");
  }
  if (double(count) * min_gap * min_gap * min_gap > 0.3 * box.volume()) {
    throw Error(ErrorKind::invalid_input, "infeasible packing: count * min_gap^3 exceeds 0.3 * box volume");
  }
  ParticleConfig cfg;
  cfg.box = box;
  cfg.particles.reserve(count);
  UniformStream rng(seed);
  const std::size_t budget = count * kPoissonAttemptsPerParticle;
  const double gap2 = min_gap * min_gap;
  for (std::size_t attempt = 0; attempt < budget && cfg.size() < count; ++attempt) {
    Vec3 c;
    for (int k = 0; k < 3; ++k) c(k) = lo(k) + (hi(k) - lo(k)) * rng.next();
    bool ok = true;
    for (const auto& p : cfg.particles) {
      if ((p.center - c).squaredNorm() < gap2) {
        ok = false;
        break;
      }
    }
    if (ok) cfg.particles.push_back({c, radius});
  }
  if (cfg.size() < count) throw GenerationFailed(cfg.size(), count);
  return cfg;
}

/// Copy of `cfg` with every length multiplied by s.
inline ParticleConfig scaled(const ParticleConfig& cfg, double s) {
  ParticleConfig out = cfg;
  for (auto& p : out.particles) {
    p.center *= s;
    p.radius *= s;
  }
  if (out.box) out.box = Box{out.box->lo * s, out.box->hi * s};
  return out;
}

/// Copy of `cfg` with centers mapped by x -> rot x.
inline ParticleConfig rotated(const ParticleConfig& cfg, const Mat3& rot) {
  ParticleConfig out = cfg;
  for (auto& p : out.particles) p.center = rot * p.center;
  out.box.reset();
  return out;
}

}  // namespace stokesmor
