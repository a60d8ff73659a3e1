// Background flows and the composite field "ambient + radiated particle terms".
#pragma once

#include "stokesmor/core.hpp"
#include "stokesmor/geometry.hpp"
#include "stokesmor/kernels.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace stokesmor {

struct LinearStrain {
  TracelessSym3 strain;
};

/// V + omega x (x - center).
struct RigidMotion {
  Vec3 velocity = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 center = Vec3::Zero();

  Vec3 at(const Vec3& x) const { return velocity + omega.cross(x - center); }
  bool is_zero() const { return velocity.isZero(0) && omega.isZero(0); }
};

struct Stokeslet {
  Vec3 force = Vec3::Zero();
  Vec3 location = Vec3::Zero();
};

class AmbientField;

struct Superposition {
  std::vector<AmbientField> parts;
};

inline Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return m;
}

/// Analytic Stokes solution in free space used as the zeroth iterate.
class AmbientField {
 public:
  using Variant = std::variant<LinearStrain, RigidMotion, Stokeslet, Superposition>;

  AmbientField() : v_(Superposition{}) {}
  AmbientField(LinearStrain s) : v_(std::move(s)) {}
  AmbientField(RigidMotion r) : v_(std::move(r)) {}
  AmbientField(Stokeslet s) : v_(std::move(s)) {}
  AmbientField(Superposition s) : v_(std::move(s)) {}

  const Variant& variant() const { return v_; }

  Vec3 velocity(const Vec3& x) const {
    return std::visit(
        [&](const auto& f) -> Vec3 {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearStrain>) {
            return f.strain.matrix() * x;
          } else if constexpr (std::is_same_v<T, RigidMotion>) {
            return f.at(x);
          } else if constexpr (std::is_same_v<T, Stokeslet>) {
            return stokeslet_velocity(f.force, f.location, x);
          } else {
            Vec3 sum = Vec3::Zero();
            for (const auto& p : f.parts) sum += p.velocity(x);
            return sum;
          }
        },
        v_);
  }

  /// grad(i, k) = d u_i / d x_k.
  Mat3 gradient(const Vec3& x) const {
    return std::visit(
        [&](const auto& f) -> Mat3 {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearStrain>) {
            return f.strain.matrix();
          } else if constexpr (std::is_same_v<T, RigidMotion>) {
            return skew(f.omega);
          } else if constexpr (std::is_same_v<T, Stokeslet>) {
            return stokeslet_gradient(f.force, f.location, x);
          } else {
            Mat3 sum = Mat3::Zero();
            for (const auto& p : f.parts) sum += p.gradient(x);
            return sum;
          }
        },
        v_);
  }

  /// Field multiplied by a scalar.
  AmbientField scaled(double a) const {
    return std::visit(
        [&](const auto& f) -> AmbientField {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearStrain>) {
            return LinearStrain{a * f.strain};
          } else if constexpr (std::is_same_v<T, RigidMotion>) {
            return RigidMotion{a * f.velocity, a * f.omega, f.center};
          } else if constexpr (std::is_same_v<T, Stokeslet>) {
            return Stokeslet{a * f.force, f.location};
          } else {
            Superposition s;
            for (const auto& p : f.parts) s.parts.push_back(p.scaled(a));
            return s;
          }
        },
        v_);
  }

  /// Field x -> R u(R^T x).
  AmbientField rotated(const Mat3& r) const {
    return std::visit(
        [&](const auto& f) -> AmbientField {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearStrain>) {
            return LinearStrain{f.strain.rotated(r)};
          } else if constexpr (std::is_same_v<T, RigidMotion>) {
            return RigidMotion{r * f.velocity, r * f.omega, r * f.center};
          } else if constexpr (std::is_same_v<T, Stokeslet>) {
            return Stokeslet{r * f.force, r * f.location};
          } else {
            Superposition s;
            for (const auto& p : f.parts) s.parts.push_back(p.rotated(r));
            return s;
          }
        },
        v_);
  }

  /// Field x -> s u(x / s); strain rates are unchanged.
  AmbientField length_scaled(double s) const {
    return std::visit(
        [&](const auto& f) -> AmbientField {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearStrain>) {
            return f;
          } else if constexpr (std::is_same_v<T, RigidMotion>) {
            return RigidMotion{s * f.velocity, f.omega, s * f.center};
          } else if constexpr (std::is_same_v<T, Stokeslet>) {
            return Stokeslet{s * s * f.force, s * f.location};
          } else {
            Superposition out;
            for (const auto& p : f.parts) out.parts.push_back(p.length_scaled(s));
            return out;
          }
        },
        v_);
  }

  /// Locations of point forces (where evaluation is singular).
  std::vector<Vec3> singular_points() const {
    std::vector<Vec3> out;
    collect_singular(out);
    return out;
  }

  /// True when the field is a pure linear strain (possibly nested in superpositions).
  std::optional<TracelessSym3> as_linear_strain() const {
    if (const auto* ls = std::get_if<LinearStrain>(&v_)) return ls->strain;
    if (const auto* sp = std::get_if<Superposition>(&v_)) {
      TracelessSym3 sum;
      for (const auto& p : sp->parts) {
        auto e = p.as_linear_strain();
        if (!e) return std::nullopt;
        sum += *e;
      }
      return sum;
    }
    return std::nullopt;
  }

  friend AmbientField operator+(const AmbientField& a, const AmbientField& b) {
    return Superposition{{a, b}};
  }

 private:
  void collect_singular(std::vector<Vec3>& out) const {
    if (const auto* s = std::get_if<Stokeslet>(&v_)) out.push_back(s->location);
    if (const auto* sp = std::get_if<Superposition>(&v_)) {
      for (const auto& p : sp->parts) p.collect_singular(out);
    }
  }

  Variant v_;
};

// ---------------------------------------------------------------------------

/// Simple dipole radiated by one sphere.
struct DipoleTerm {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  TracelessSym3 coefficient;

  Vec3 velocity(const Vec3& x) const { return dipole_velocity(coefficient, center, radius, x); }
  Mat3 gradient(const Vec3& x) const { return dipole_gradient(coefficient, center, radius, x); }
};

/// Degree-2 remainder radiated by one sphere: exterior combination of the
/// collocation family, continued inside the ball by the matching polynomial
/// Stokes solution. Coefficients carry velocity units.
class CollocationTerm {
 public:
  CollocationTerm() : CollocationTerm(Vec3::Zero(), 1.0, CollocationCoefficients::Zero()) {}
  CollocationTerm(const Vec3& center, double radius, const CollocationCoefficients& c)
      : center_(center), radius_(radius), coeffs_(c), tensor_(collocation_tensor(c)) {
    const auto& partners = interior_partners().partners;
    interior_ = Eigen::MatrixXd::Zero(3, partners[0].cols());
    for (int m = 0; m < kCollocationSize; ++m) {
      if (c(m) != 0.0) interior_ += c(m) * partners[m];
    }
  }

  const Vec3& center() const { return center_; }
  double radius() const { return radius_; }
  const CollocationCoefficients& coefficients() const { return coeffs_; }

  Vec3 velocity(const Vec3& x) const {
    if (coeffs_.isZero(0)) return Vec3::Zero();
    const Vec3 y = (x - center_) / radius_;
    if (y.squaredNorm() <= 1.0) return interior_ * detail::monomial_values(y);
    return collocation_exterior<double>(tensor_, y);
  }

  Mat3 gradient(const Vec3& x) const {
    if (coeffs_.isZero(0)) return Mat3::Zero();
    const Vec3 y = (x - center_) / radius_;
    const double r = y.norm();
    if (std::abs(r - 1.0) <= kSurfaceTolerance) {
      throw Error(ErrorKind::on_surface, "collocation gradient requested on the source sphere surface");
    }
    if (r < 1.0) return (interior_ * detail::monomial_gradients(y).transpose()) / radius_;
    return collocation_exterior_jet(tensor_, y).second / radius_;
  }

 private:
  Vec3 center_;
  double radius_;
  CollocationCoefficients coeffs_;
  CollocationTensors tensor_;
  Eigen::MatrixXd interior_;
};

/// Everything radiated by particle `particle`.
struct ParticleTerm {
  std::size_t particle = 0;
  DipoleTerm dipole;
  std::optional<CollocationTerm> collocation;
  /// Added only at points inside this particle's ball. The iteration leaves it
  /// at zero; it exists for assembling piecewise fields by hand.
  RigidMotion rigid_correction;
};

/// v = ambient + sum of particle terms, summed in term order.
class FlowField {
 public:
  FlowField() = default;
  explicit FlowField(AmbientField ambient) : ambient_(std::move(ambient)) {}

  /// Ambient plus one zero term per particle of `cfg`.
  static FlowField for_config(AmbientField ambient, const ParticleConfig& cfg) {
    FlowField f(std::move(ambient));
    f.terms_.reserve(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      ParticleTerm t;
      t.particle = i;
      t.dipole = DipoleTerm{cfg[i].center, cfg[i].radius, {}};
      t.rigid_correction.center = cfg[i].center;
      f.terms_.push_back(std::move(t));
    }
    return f;
  }

  const AmbientField& ambient() const { return ambient_; }
  const std::vector<ParticleTerm>& terms() const { return terms_; }
  std::vector<ParticleTerm>& terms() { return terms_; }
  void add_term(ParticleTerm t) { terms_.push_back(std::move(t)); }

  std::vector<TracelessSym3> dipole_coefficients() const {
    std::vector<TracelessSym3> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back(t.dipole.coefficient);
    return out;
  }

  Vec3 velocity(const Vec3& x) const {
    CompensatedSum<Vec3> sum;
    sum.add(ambient_.velocity(x));
    for (const auto& t : terms_) {
      sum.add(t.dipole.velocity(x));
      if (t.collocation) sum.add(t.collocation->velocity(x));
      if (!t.rigid_correction.is_zero() && (x - t.dipole.center).norm() < t.dipole.radius) {
        sum.add(t.rigid_correction.at(x));
      }
    }
    return sum.value();
  }

  Mat3 gradient(const Vec3& x) const {
    CompensatedSum<Mat3> sum;
    sum.add(ambient_.gradient(x));
    for (const auto& t : terms_) {
      sum.add(t.dipole.gradient(x));
      if (t.collocation) sum.add(t.collocation->gradient(x));
      if (!t.rigid_correction.is_zero() && (x - t.dipole.center).norm() < t.dipole.radius) {
        sum.add(skew(t.rigid_correction.omega));
      }
    }
    return sum.value();
  }

  TracelessSym3 strain(const Vec3& x) const { return TracelessSym3::project(gradient(x)); }

  /// Field x -> R v(R^T x). Only dipole-level terms can be rotated.
  FlowField rotated(const Mat3& r) const {
    FlowField out(ambient_.rotated(r));
    for (auto t : terms_) {
      if (t.collocation) throw Error(ErrorKind::invalid_input, "cannot rotate a field with collocation terms");
      t.dipole.center = r * t.dipole.center;
      t.dipole.coefficient = t.dipole.coefficient.rotated(r);
      t.rigid_correction = RigidMotion{r * t.rigid_correction.velocity, r * t.rigid_correction.omega,
                                       r * t.rigid_correction.center};
      out.terms_.push_back(std::move(t));
    }
    return out;
  }

 private:
  AmbientField ambient_;
  std::vector<ParticleTerm> terms_;
};

inline Vec3 evaluate_velocity(const FlowField& f, const Vec3& x) { return f.velocity(x); }
inline TracelessSym3 evaluate_strain(const FlowField& f, const Vec3& x) { return f.strain(x); }

}  // namespace stokesmor
