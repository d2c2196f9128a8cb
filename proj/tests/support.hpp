#pragma once

// independent oracles used across the test suites: adaptive quadrature of
// the multivariate t density, a normal-kernel SOV recursion, brute-force
// sampling helpers, and higher-order numeric differentiation

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "gcmt/tdist.hpp"

namespace testsupport {

using gcmt::kInf;
using gcmt::Matrix;
using gcmt::Vector;

inline double quad1(const std::function<double(double)>& f, double a,
                    double b, double tol = 1e-9) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 12, tol);
}

/// t density written out directly (explicit inverse and determinant), so it
/// shares no code with the library's LLT-based implementation.
inline double mvt_density_direct(const Vector& x, const Matrix& omega,
                                 double dof) {
  const int p = static_cast<int>(x.size());
  const double det = omega.determinant();
  const double q = x.dot(omega.inverse() * x);
  const double kappa = std::exp(std::lgamma(0.5 * (dof + p)) -
                                std::lgamma(0.5 * dof)) /
                       std::pow(M_PI * dof, 0.5 * p);
  return kappa / std::sqrt(det) *
         std::pow(1.0 + q / dof, -0.5 * (dof + p));
}

/// Adaptive nested quadrature of the centered MVT density over a rectangle,
/// p in {1,2,3}.
inline double mvt_rect_quad(const gcmt::Rectangle& rect, const Matrix& omega,
                            double dof) {
  const int p = rect.dim();
  if (p == 1) {
    return quad1(
        [&](double x) {
          Vector v(1);
          v << x;
          return mvt_density_direct(v, omega, dof);
        },
        rect.lower[0], rect.upper[0]);
  }
  if (p == 2) {
    return quad1(
        [&](double x) {
          return quad1(
              [&](double y) {
                Vector v(2);
                v << x, y;
                return mvt_density_direct(v, omega, dof);
              },
              rect.lower[1], rect.upper[1], 1e-10);
        },
        rect.lower[0], rect.upper[0], 1e-8);
  }
  if (p == 3) {
    return quad1(
        [&](double x) {
          return quad1(
              [&](double y) {
                return quad1(
                    [&](double z) {
                      Vector v(3);
                      v << x, y, z;
                      return mvt_density_direct(v, omega, dof);
                    },
                    rect.lower[2], rect.upper[2], 1e-10);
              },
              rect.lower[1], rect.upper[1], 1e-9);
        },
        rect.lower[0], rect.upper[0], 1e-7);
  }
  throw std::runtime_error("mvt_rect_quad supports p <= 3");
}

/// Normal-kernel SOV recursion (the GHK construction) over a prepared
/// point set; the t-kernel simulator must approach this as dof grows.
inline double normal_sov(const gcmt::Rectangle& rect, const Matrix& chol,
                         const Matrix& points) {
  const boost::math::normal_distribution<double> stdnorm;
  const int p = rect.dim();
  const int n = static_cast<int>(points.rows());
  Vector w(p);
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    double prod = 1.0;
    for (int i = 0; i < p; ++i) {
      double shift = 0.0;
      for (int j = 0; j < i; ++j) shift += chol(i, j) * w[j];
      const double a = rect.lower[i], b = rect.upper[i];
      const double d =
          (a == -kInf) ? 0.0
                       : boost::math::cdf(stdnorm, (a - shift) / chol(i, i));
      const double e =
          (b == kInf) ? 1.0
                      : boost::math::cdf(stdnorm, (b - shift) / chol(i, i));
      const double width = e - d;
      if (width <= 0.0) {
        prod = 0.0;
        break;
      }
      prod *= width;
      if (i + 1 < p) {
        double z = d + points(r, i) * width;
        z = std::min(std::max(z, 1e-15), 1.0 - 1e-15);
        w[i] = boost::math::quantile(stdnorm, z);
      }
    }
    total += prod;
  }
  return total / n;
}

/// 4-point Richardson-extrapolated central difference.
inline Vector richardson_grad(const std::function<double(const Vector&)>& f,
                              const Vector& x, double step) {
  const int n = static_cast<int>(x.size());
  Vector g(n);
  Vector xp = x;
  for (int i = 0; i < n; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    auto at = [&](double delta) {
      xp[i] = x[i] + delta;
      const double v = f(xp);
      xp[i] = x[i];
      return v;
    };
    g[i] = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  }
  return g;
}

/// Random correlation-like scale matrix with unit-order diagonals.
inline Matrix random_spd(int p, std::mt19937_64& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = normal(eng);
  Matrix s = a * a.transpose() / p + 0.3 * Matrix::Identity(p, p);
  const Vector d = s.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * s * d.asDiagonal();
}

}  // namespace testsupport
