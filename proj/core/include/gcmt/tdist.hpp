#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "gcmt/transforms.hpp"

namespace gcmt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDofFloor = 0.05;

class parameter_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multivariate t law: location, scale matrix (not covariance; the
/// covariance is omega * dof/(dof-2) when dof > 2), degrees of freedom.
struct MvtDist {
  Vector mu;
  Matrix omega;
  double dof = 1.0;

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

/// Axis-aligned integration region; entries may be +-infinity.
struct Rectangle {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  void validate() const;
};

enum class QmcRandomization { none, random_shift };

struct QmcConfig {
  int n_draws = 200;
  int skip = 100;
  QmcRandomization randomization = QmcRandomization::none;
  std::uint64_t seed = 0;
  int replicates = 10;  // shifted replicates when randomization is on
};

struct ProbEstimate {
  double value = 0.0;
  double mc_std_error = 0.0;
};

// univariate t kernel
double t_pdf(double x, double dof);
double t_cdf(double x, double dof);
double t_inv_cdf(double p, double dof);

double mvt_logpdf(const Vector& x, const MvtDist& dist);

/// Halton points in the first `dim` prime bases, `skip` points dropped.
/// Row r is point r. Optional random shift modulo 1 (seeded).
Matrix halton(const QmcConfig& config, int dim);

/// Rectangle probability of a centered MVT via the sequential
/// separation-of-variables recursion, averaged over QMC points.
/// With random-shift randomization the estimate averages `replicates`
/// shifted point sets and reports their across-replicate standard error;
/// otherwise the across-point sample error is reported.
ProbEstimate mvtcd_sov(const Rectangle& rect, const MvtDist& dist,
                       const QmcConfig& qmc);

/// Low-level SOV pass over a prepared point set (rows = points, cols = p-1
/// coordinates). `chol` is the lower Cholesky factor of the scale matrix.
double sov_mean(const Rectangle& rect, const Matrix& chol, double dof,
                const Matrix& points, double* sum_sq = nullptr);

/// Draws from MvtDist via x = mu + L z sqrt(dof/w), z normal, w chi^2(dof).
/// Rows are draws. Reproducible for a given seed.
Matrix mvt_sample(int n, const MvtDist& dist, std::uint64_t seed);

}  // namespace gcmt
