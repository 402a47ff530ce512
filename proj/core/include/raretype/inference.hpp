#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raretype/partition.hpp"
#include "raretype/pitman.hpp"

namespace raretype {

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Log-likelihood of a partition with analytic first and second partials in
/// (alpha, theta).
struct EppfDerivatives {
  double value;
  std::array<double, 2> gradient;  // d/dalpha, d/dtheta
  Matrix2 hessian;
};

EppfDerivatives eppf_log_derivatives(const IntegerPartition& partition, const PdParams& params);

/// phi = n (1 - alpha) / (n + 1 + theta).
double phi_of(const PdParams& params, std::uint64_t n);

/// Inverse of phi_of at fixed theta. Throws DomainError when the implied
/// alpha leaves (0, 1) or theta <= -alpha.
PdParams theta_alpha_of(double phi, double theta, std::uint64_t n);

struct FitOptions {
  // n used in phi = n (1 - alpha) / (n + 1 + theta). Defaults to the size of
  // the fitted partition. Pass the database size when fitting Db+.
  std::optional<std::uint64_t> phi_n;
  std::size_t small_sample_warning = 500;
  double gradient_tolerance = 1e-6;
  double boundary_tolerance = 1e-4;
  std::size_t max_iterations = 5000;
};

struct MleFit {
  double alpha_hat = 0.0;
  double theta_hat = 0.0;
  double phi_hat = 0.0;
  std::uint64_t phi_n = 0;
  double loglik_at_max = 0.0;
  // Second partials of the log-likelihood at the optimum in (phi, theta),
  // central differences. Observed information stands in for the Fisher
  // information.
  Matrix2 hessian{};
  double gradient_norm = 0.0;  // in (logit alpha, log(theta + alpha))
  bool converged = false;
  bool at_boundary = false;
  std::size_t iterations = 0;
  std::string diagnosis;  // empty when converged
  std::vector<std::string> warnings;

  PdParams params() const { return PdParams(alpha_hat, theta_hat); }
};

/// Maximum-likelihood (alpha, theta) under the Pitman sampling formula.
/// Never throws for valid partitions: degenerate inputs come back with
/// converged == false and a diagnosis.
MleFit fit_mle(const IntegerPartition& partition, const FitOptions& options = {});

struct SurfaceGridSpec {
  std::size_t points_per_axis = 41;  // odd, so the mode is a grid node
  double span_sd = 4.0;              // half-width in Gaussian standard deviations
};

struct SurfacePoint {
  double phi;
  double theta;
  double rel_loglik;     // NaN when invalid
  double gauss_overlay;  // 0.5 d' H d
  bool valid;
};

struct LoglikSurface {
  std::size_t points_per_axis = 0;
  double mode_phi = 0.0;
  double mode_theta = 0.0;
  std::uint64_t phi_n = 0;
  Matrix2 covariance{};  // inverse of the negated Hessian
  std::vector<SurfacePoint> points;  // row-major, phi varies fastest

  const SurfacePoint& at(std::size_t theta_index, std::size_t phi_index) const {
    return points[theta_index * points_per_axis + phi_index];
  }
};

/// Relative log-likelihood on a (phi, theta) grid centred at the fitted mode.
/// Throws DomainError when the fit has not converged or the Hessian is not
/// negative definite.
LoglikSurface loglik_surface(const IntegerPartition& partition, const MleFit& fit,
                             const SurfaceGridSpec& grid = {});

struct SymmetryReport {
  double asymmetry_score = 0.0;
  std::size_t pairs_compared = 0;
};

/// max over mirrored grid pairs of |l(mode + d) - l(mode - d)| / |l(mode + d)|.
/// Diagnostic only.
SymmetryReport symmetry_diagnostic(const LoglikSurface& surface);

}  // namespace raretype
