// Shared value types, error types and small numeric helpers.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace stokesmor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  invalid_input,
  overlap,
  generation_failed,
  singular_evaluation,
  on_surface,
  quadrature_floor,
  ill_conditioned,
  divergence,
  non_convergence,
  mismatched_config,
  undefined_normalization,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Symmetric traceless 3x3 matrix with five independent entries.
///
/// The stored entries are xx, yy, xy, xz, yz; zz = -(xx + yy), so symmetry and
/// tracelessness hold by construction. `components()` returns coordinates in a
/// Frobenius-orthonormal basis, which is the coordinate system used for dense
/// operators on stacked coefficients.
class TracelessSym3 {
 public:
  static constexpr int kDim = 5;
  using Components = Eigen::Matrix<double, kDim, 1>;

  constexpr TracelessSym3() = default;
  constexpr TracelessSym3(double xx, double yy, double xy, double xz, double yz)
      : xx_(xx), yy_(yy), xy_(xy), xz_(xz), yz_(yz) {}

  /// Symmetric traceless part of an arbitrary matrix.
  static TracelessSym3 project(const Mat3& m) {
    const double tr3 = m.trace() / 3.0;
    return {m(0, 0) - tr3, m(1, 1) - tr3, 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
            0.5 * (m(1, 2) + m(2, 1))};
  }

  static TracelessSym3 from_components(const Components& c) {
    constexpr double s2 = std::numbers::sqrt2;
    const double s6 = std::sqrt(6.0);
    // c0 = (xx - yy)/sqrt2, c1 = 3 (xx + yy)/sqrt6
    const double sum = c(1) * s6 / 3.0;
    const double diff = c(0) * s2;
    return {0.5 * (sum + diff), 0.5 * (sum - diff), c(2) / s2, c(3) / s2, c(4) / s2};
  }

  /// Basis element a of the orthonormal basis used by `components()`.
  static TracelessSym3 basis(int a) {
    Components c = Components::Zero();
    c(a) = 1.0;
    return from_components(c);
  }

  Components components() const {
    constexpr double s2 = std::numbers::sqrt2;
    const double s6 = std::sqrt(6.0);
    Components c;
    c << (xx_ - yy_) / s2, 3.0 * (xx_ + yy_) / s6, s2 * xy_, s2 * xz_, s2 * yz_;
    return c;
  }

  Mat3 matrix() const {
    Mat3 m;
    m << xx_, xy_, xz_, xy_, yy_, yz_, xz_, yz_, zz();
    return m;
  }

  double xx() const { return xx_; }
  double yy() const { return yy_; }
  double zz() const { return -(xx_ + yy_); }
  double xy() const { return xy_; }
  double xz() const { return xz_; }
  double yz() const { return yz_; }

  /// Double contraction S : T.
  double contract(const TracelessSym3& o) const {
    return xx_ * o.xx_ + yy_ * o.yy_ + zz() * o.zz() + 2.0 * (xy_ * o.xy_ + xz_ * o.xz_ + yz_ * o.yz_);
  }
  double norm() const { return std::sqrt(contract(*this)); }
  bool is_zero() const { return xx_ == 0 && yy_ == 0 && xy_ == 0 && xz_ == 0 && yz_ == 0; }

  TracelessSym3 rotated(const Mat3& r) const { return project(r * matrix() * r.transpose()); }

  TracelessSym3& operator+=(const TracelessSym3& o) {
    xx_ += o.xx_;
    yy_ += o.yy_;
    xy_ += o.xy_;
    xz_ += o.xz_;
    yz_ += o.yz_;
    return *this;
  }
  TracelessSym3& operator-=(const TracelessSym3& o) { return *this += (-1.0) * o; }
  friend TracelessSym3 operator+(TracelessSym3 a, const TracelessSym3& b) { return a += b; }
  friend TracelessSym3 operator-(TracelessSym3 a, const TracelessSym3& b) { return a -= b; }
  friend TracelessSym3 operator*(double s, const TracelessSym3& a) {
    return {s * a.xx_, s * a.yy_, s * a.xy_, s * a.xz_, s * a.yz_};
  }
  friend bool operator==(const TracelessSym3&, const TracelessSym3&) = default;

 private:
  double xx_ = 0, yy_ = 0, xy_ = 0, xz_ = 0, yz_ = 0;
};

inline Mat3 sym(const Mat3& g) { return 0.5 * (g + g.transpose()); }

inline Vec3 curl_from_gradient(const Mat3& g) {
  // g(i, k) = d u_i / d x_k
  return {g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1)};
}

/// Neumaier-compensated accumulator over a fixed-size Eigen value or double.
template <typename T>
class CompensatedSum {
 public:
  CompensatedSum() { zero(sum_), zero(comp_); }

  void add(const T& v) {
    if constexpr (std::is_arithmetic_v<T>) {
      step(sum_, comp_, v);
    } else {
      for (Eigen::Index k = 0; k < v.size(); ++k) step(sum_.data()[k], comp_.data()[k], v.data()[k]);
    }
  }
  T value() const { return sum_ + comp_; }

 private:
  static void zero(T& v) {
    if constexpr (std::is_arithmetic_v<T>) {
      v = 0;
    } else {
      v.setZero();
    }
  }
  static void step(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  T sum_;
  T comp_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled by exactly one worker, so results written per index do not depend
/// on the thread count.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Least-squares fit y = intercept + slope x with the standard error of the slope.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::invalid_input, "line fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw Error(ErrorKind::invalid_input, "line fit with degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      ssr += r * r;
    }
    f.slope_stderr = std::sqrt(ssr / double(n - 2) / sxx);
  }
  return f;
}

}  // namespace stokesmor
