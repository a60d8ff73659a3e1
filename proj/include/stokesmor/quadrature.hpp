// Quadrature on the unit sphere (Lebedev) and on the unit ball (Lebedev x radial Gauss).
#pragma once

#include "stokesmor/core.hpp"
#include "stokesmor/lebedev_tables.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <string>
#include <vector>

namespace stokesmor {

/// Lowest accepted surface degree and radial node count.
inline constexpr int kMinSurfaceDegree = 11;
inline constexpr int kMinRadialNodes = 4;
inline constexpr int kDefaultSurfaceDegree = 17;
inline constexpr int kDefaultRadialNodes = 8;

namespace detail {

inline void expand_orbit(const lebedev::OrbitEntry& e, std::vector<Vec3>& pts, std::vector<double>& w) {
  auto push = [&](double x, double y, double z) {
    pts.emplace_back(x, y, z);
    w.push_back(e.weight);
  };
  const double a = e.a;
  switch (e.kind) {
    case lebedev::Orbit::a1:
      for (int d = 0; d < 3; ++d) {
        for (int s = -1; s <= 1; s += 2) {
          Vec3 v = Vec3::Zero();
          v(d) = s;
          push(v(0), v(1), v(2));
        }
      }
      break;
    case lebedev::Orbit::a2: {
      const double h = std::sqrt(0.5);
      for (int d = 0; d < 3; ++d) {
        for (int s1 = -1; s1 <= 1; s1 += 2) {
          for (int s2 = -1; s2 <= 1; s2 += 2) {
            Vec3 v;
            v(d) = 0;
            v((d + 1) % 3) = s1 * h;
            v((d + 2) % 3) = s2 * h;
            push(v(0), v(1), v(2));
          }
        }
      }
      break;
    }
    case lebedev::Orbit::a3: {
      const double h = std::sqrt(1.0 / 3.0);
      for (int s3 = -1; s3 <= 1; s3 += 2)
        for (int s2 = -1; s2 <= 1; s2 += 2)
          for (int s1 = -1; s1 <= 1; s1 += 2) push(s1 * h, s2 * h, s3 * h);
      break;
    }
    case lebedev::Orbit::bk: {
      // (a, a, b) and permutations
      const double b = std::sqrt(1.0 - 2.0 * a * a);
      for (int d = 0; d < 3; ++d)
        for (int s3 = -1; s3 <= 1; s3 += 2)
          for (int s2 = -1; s2 <= 1; s2 += 2)
            for (int s1 = -1; s1 <= 1; s1 += 2) {
              Vec3 v;
              v(d) = b * s3;
              v((d + 1) % 3) = a * s1;
              v((d + 2) % 3) = a * s2;
              push(v(0), v(1), v(2));
            }
      break;
    }
    case lebedev::Orbit::ck: {
      // (a, b, 0) and permutations
      const double b = std::sqrt(1.0 - a * a);
      double p = a, q = b;
      for (int swap = 0; swap < 2; ++swap) {
        for (int d = 0; d < 3; ++d)
          for (int s2 = -1; s2 <= 1; s2 += 2)
            for (int s1 = -1; s1 <= 1; s1 += 2) {
              Vec3 v;
              v(d) = 0;
              v((d + 1) % 3) = p * s1;
              v((d + 2) % 3) = q * s2;
              push(v(0), v(1), v(2));
            }
        std::swap(p, q);
      }
      break;
    }
    case lebedev::Orbit::dk: {
      // (a, b, c) and permutations
      const double b = e.b;
      const double c = std::sqrt(1.0 - a * a - b * b);
      const double perm[2][5] = {{a, b, c, a, b}, {b, a, c, b, a}};
      for (int rev = 0; rev < 2; ++rev)
        for (int d = 0; d < 3; ++d)
          for (int s3 = -1; s3 <= 1; s3 += 2)
            for (int s2 = -1; s2 <= 1; s2 += 2)
              for (int s1 = -1; s1 <= 1; s1 += 2)
                push(perm[rev][d] * s1, perm[rev][d + 1] * s2, perm[rev][d + 2] * s3);
      break;
    }
  }
}

}  // namespace detail

/// Surface rule on the unit sphere plus a radial Gauss rule for ball integrals.
///
/// Surface weights sum to 4 pi; the ball rule integrates over the unit ball
/// with weights summing to 4 pi / 3. Nodes of the ball rule are strictly
/// interior (no node on the sphere), ordered radial-major.
class SphereQuadrature {
 public:
  /// Smallest tabulated Lebedev rule of degree >= `degree`. Throws
  /// quadrature_floor when below the documented floors and invalid_input when
  /// no tabulated rule is large enough.
  explicit SphereQuadrature(int degree = kDefaultSurfaceDegree, int radial_nodes = kDefaultRadialNodes) {
    if (degree < kMinSurfaceDegree || radial_nodes < kMinRadialNodes) {
      throw Error(ErrorKind::quadrature_floor,
                  "quadrature below floor: need surface degree >= " + std::to_string(kMinSurfaceDegree) +
                      " and radial nodes >= " + std::to_string(kMinRadialNodes));
    }
    const lebedev::Rule* rule = nullptr;
    for (const auto& r : lebedev::kRules) {
      if (r.degree >= degree) {
        rule = &r;
        break;
      }
    }
    if (rule == nullptr) {
      throw Error(ErrorKind::invalid_input, "no tabulated sphere rule of degree " + std::to_string(degree));
    }
    degree_ = rule->degree;
    for (const auto& e : rule->orbits) detail::expand_orbit(e, nodes_, weights_);
    for (auto& w : weights_) w *= 4.0 * kPi;

    const auto zeros = boost::math::legendre_p_zeros<double>(radial_nodes);
    std::vector<double> x;
    for (double z : zeros) {
      if (z != 0.0) x.push_back(-z);
    }
    for (double z : zeros) x.push_back(z);
    std::sort(x.begin(), x.end());
    for (double xi : x) {
      const double dp = boost::math::legendre_p_prime(radial_nodes, xi);
      const double wgl = 2.0 / ((1.0 - xi * xi) * dp * dp);
      const double t = 0.5 * (1.0 + xi);
      radii_.push_back(t);
      radial_weights_.push_back(0.5 * wgl * t * t);
    }
  }

  int degree() const { return degree_; }
  int radial_count() const { return int(radii_.size()); }
  std::size_t surface_size() const { return nodes_.size(); }
  std::size_t ball_size() const { return nodes_.size() * radii_.size(); }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& radial_weights() const { return radial_weights_; }

  /// Unit-ball node k (radial-major) and its weight.
  Vec3 ball_node(std::size_t k) const { return radii_[k / nodes_.size()] * nodes_[k % nodes_.size()]; }
  double ball_weight(std::size_t k) const { return radial_weights_[k / nodes_.size()] * weights_[k % nodes_.size()]; }

  /// Average of f over the sphere |x - c| = r.
  template <typename F>
  auto surface_average(const Vec3& c, double r, F&& f) const {
    using T = std::decay_t<decltype(f(c))>;
    CompensatedSum<T> sum;
    for (std::size_t b = 0; b < nodes_.size(); ++b) sum.add((weights_[b] / (4.0 * kPi)) * f(Vec3(c + r * nodes_[b])));
    return T(sum.value());
  }

  /// Average of f over the ball |x - c| < r.
  template <typename F>
  auto ball_average(const Vec3& c, double r, F&& f) const {
    using T = std::decay_t<decltype(f(c))>;
    CompensatedSum<T> sum;
    const double norm = 3.0 / (4.0 * kPi);
    for (std::size_t k = 0; k < ball_size(); ++k) sum.add((norm * ball_weight(k)) * f(Vec3(c + r * ball_node(k))));
    return T(sum.value());
  }

 private:
  int degree_ = 0;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::vector<double> radii_;
  std::vector<double> radial_weights_;
};

}  // namespace stokesmor
