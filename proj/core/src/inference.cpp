#include "raretype/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "raretype/error.hpp"

namespace raretype {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Box on the unconstrained coordinates; reaching it counts as a boundary.
constexpr double kLogitCap = 30.0;
constexpr double kLogShiftCap = 25.0;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct Transformed {
  double u;  // logit(alpha)
  double v;  // log(theta + alpha)
};

std::pair<double, double> from_transformed(Transformed x) {
  const double alpha = sigmoid(x.u);
  return {alpha, std::exp(x.v) - alpha};
}

double loglik_or_neg_inf(const IntegerPartition& partition, double alpha, double theta) {
  if (!PdParams::valid(alpha, theta)) return kNegInf;
  try {
    return eppf_log(partition, PdParams(alpha, theta));
  } catch (const DomainError&) {
    return kNegInf;
  }
}

double transformed_loglik(const IntegerPartition& partition, Transformed x) {
  if (std::abs(x.u) > kLogitCap || std::abs(x.v) > kLogShiftCap) return kNegInf;
  const auto [alpha, theta] = from_transformed(x);
  return loglik_or_neg_inf(partition, alpha, theta);
}

struct SearchResult {
  Transformed x;
  double value;
  std::size_t iterations;
};

// Nelder-Mead maximization in two dimensions. Stops once the spread of
// simplex values drops below f_tol and its diameter below x_tol.
SearchResult nelder_mead(const std::function<double(Transformed)>& f, Transformed start,
                         double step, std::size_t max_iterations, double f_tol = 1e-9,
                         double x_tol = 1e-8) {
  std::array<Transformed, 3> simplex{start, {start.u + step, start.v}, {start.u, start.v + step}};
  std::array<double, 3> values{};
  for (std::size_t i = 0; i < 3; ++i) values[i] = f(simplex[i]);

  std::size_t iter = 0;
  for (; iter < max_iterations; ++iter) {
    std::array<std::size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    const auto best = order[0], mid = order[1], worst = order[2];

    const double spread = values[best] - values[worst];
    double diameter = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      diameter = std::max({diameter, std::abs(simplex[i].u - simplex[best].u),
                           std::abs(simplex[i].v - simplex[best].v)});
    if (std::isfinite(spread) && spread < f_tol && diameter < x_tol) break;

    const Transformed centroid{0.5 * (simplex[best].u + simplex[mid].u),
                               0.5 * (simplex[best].v + simplex[mid].v)};
    auto along = [&](double t) {
      return Transformed{centroid.u + t * (simplex[worst].u - centroid.u),
                         centroid.v + t * (simplex[worst].v - centroid.v)};
    };

    const Transformed reflected = along(-1.0);
    const double f_reflected = f(reflected);
    if (f_reflected > values[best]) {
      const Transformed expanded = along(-2.0);
      const double f_expanded = f(expanded);
      if (f_expanded > f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected > values[mid]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected > values[worst];
    const Transformed contracted = along(outside ? -0.5 : 0.5);
    const double f_contracted = f(contracted);
    if (f_contracted > (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (auto i : {mid, worst}) {
      simplex[i] = {simplex[best].u + 0.5 * (simplex[i].u - simplex[best].u),
                    simplex[best].v + 0.5 * (simplex[i].v - simplex[best].v)};
      values[i] = f(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                             values.begin());
  return {simplex[best], values[best], iter};
}

double scaled_gradient_norm(const EppfDerivatives& d, double alpha, double theta) {
  const double dsig = alpha * (1.0 - alpha);
  const double gu = dsig * (d.gradient[0] - d.gradient[1]);
  const double gv = d.gradient[1] * (theta + alpha);
  return std::hypot(gu, gv);
}

struct PolishResult {
  double alpha;
  double theta;
  double value;
  double gradient_norm;
  std::size_t iterations;
};

// Damped Newton ascent in (alpha, theta) using the analytic Hessian, with a
// gradient step whenever the Hessian is not negative definite.
PolishResult newton_polish(const IntegerPartition& partition, double alpha, double theta,
                           double tolerance) {
  PolishResult out{alpha, theta, loglik_or_neg_inf(partition, alpha, theta), kNaN, 0};
  for (std::size_t it = 0; it < 200; ++it) {
    const auto d = eppf_log_derivatives(partition, PdParams(out.alpha, out.theta));
    out.value = d.value;
    out.gradient_norm = scaled_gradient_norm(d, out.alpha, out.theta);
    out.iterations = it;
    if (out.gradient_norm < tolerance) break;

    const auto& h = d.hessian;
    const auto& g = d.gradient;
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    double sa, st;
    if (h[0][0] < 0.0 && det > 0.0) {
      sa = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
      st = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
    } else {
      const double gn = std::hypot(g[0], g[1]);
      sa = 1e-3 * g[0] / gn;
      st = 1e-3 * g[1] / gn;
    }
    // Summing thousands of log terms leaves rounding noise proportional to |l|.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(out.value));
    bool moved = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const double na = out.alpha + t * sa;
      const double nt = out.theta + t * st;
      const double nv = loglik_or_neg_inf(partition, na, nt);
      if (nv >= out.value - slack) {
        moved = (na != out.alpha || nt != out.theta);
        out.alpha = na;
        out.theta = nt;
        break;
      }
    }
    if (!moved) {
      const auto last = eppf_log_derivatives(partition, PdParams(out.alpha, out.theta));
      out.value = last.value;
      out.gradient_norm = scaled_gradient_norm(last, out.alpha, out.theta);
      break;
    }
  }
  return out;
}

// Central differences of the (phi, theta) gradient. The cube-root step is the
// right scale for differencing a first derivative; second differences of the
// log-likelihood itself drown in its rounding noise at that step.
Matrix2 hessian_phi_theta(const IntegerPartition& partition, double phi, double theta,
                          std::uint64_t phi_n) {
  const double n = static_cast<double>(phi_n);
  auto grad = [&](double p, double t) {
    const double alpha = 1.0 - p * (n + 1.0 + t) / n;
    if (!PdParams::valid(alpha, t)) return std::array<double, 2>{kNaN, kNaN};
    const auto d = eppf_log_derivatives(partition, PdParams(alpha, t));
    // alpha(phi, theta): d alpha / d phi = -(n + 1 + theta) / n, d alpha / d theta = -phi / n
    return std::array<double, 2>{d.gradient[0] * -(n + 1.0 + t) / n,
                                 d.gradient[0] * -p / n + d.gradient[1]};
  };
  const double eps_cbrt = std::cbrt(std::numeric_limits<double>::epsilon());
  const double hp = eps_cbrt * std::max(std::abs(phi), 1.0);
  const double ht = eps_cbrt * std::max(std::abs(theta), 1.0);
  const auto gp_plus = grad(phi + hp, theta), gp_minus = grad(phi - hp, theta);
  const auto gt_plus = grad(phi, theta + ht), gt_minus = grad(phi, theta - ht);
  Matrix2 h{};
  h[0][0] = (gp_plus[0] - gp_minus[0]) / (2.0 * hp);
  h[1][1] = (gt_plus[1] - gt_minus[1]) / (2.0 * ht);
  h[0][1] = h[1][0] = 0.5 * ((gp_plus[1] - gp_minus[1]) / (2.0 * hp) +
                             (gt_plus[0] - gt_minus[0]) / (2.0 * ht));
  return h;
}

}  // namespace

EppfDerivatives eppf_log_derivatives(const IntegerPartition& partition, const PdParams& params) {
  const double alpha = params.alpha();
  const double theta = params.theta();
  EppfDerivatives d{eppf_log(partition, params), {0.0, 0.0}, {}};

  // [theta + alpha]_{k-1; alpha} = prod_{i=1}^{k-1} (theta + i alpha)
  double ga = 0.0, gt = 0.0, haa = 0.0, hat = 0.0, htt = 0.0;
  for (std::uint64_t i = 1; i < partition.num_blocks(); ++i) {
    const double x = static_cast<double>(i);
    const double inv = 1.0 / (theta + x * alpha);
    ga += x * inv;
    gt += inv;
    haa -= x * x * inv * inv;
    hat -= x * inv * inv;
    htt -= inv * inv;
  }
  // [theta + 1]_{n-1; 1}
  for (std::uint64_t i = 1; i < partition.n(); ++i) {
    const double inv = 1.0 / (theta + static_cast<double>(i));
    gt -= inv;
    htt += inv * inv;
  }
  // prod_j [1 - alpha]_{a_j - 1; 1}^{r_j}
  const auto& a = partition.a();
  const auto& r = partition.r();
  for (std::size_t j = 0; j < a.size(); ++j) {
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t l = 1; l < a[j]; ++l) {
      const double inv = 1.0 / (static_cast<double>(l) - alpha);
      s1 += inv;
      s2 += inv * inv;
    }
    ga -= static_cast<double>(r[j]) * s1;
    haa -= static_cast<double>(r[j]) * s2;
  }
  d.gradient = {ga, gt};
  d.hessian = {{{haa, hat}, {hat, htt}}};
  return d;
}

double phi_of(const PdParams& params, std::uint64_t n) {
  if (n == 0) throw DomainError("phi_of: n must be at least 1");
  const double nd = static_cast<double>(n);
  return nd * (1.0 - params.alpha()) / (nd + 1.0 + params.theta());
}

PdParams theta_alpha_of(double phi, double theta, std::uint64_t n) {
  if (n == 0) throw DomainError("theta_alpha_of: n must be at least 1");
  const double nd = static_cast<double>(n);
  const double alpha = 1.0 - phi * (nd + 1.0 + theta) / nd;
  if (!PdParams::valid(alpha, theta))
    throw DomainError("theta_alpha_of: (phi, theta) maps outside 0 < alpha < 1, theta > -alpha");
  return PdParams(alpha, theta);
}

MleFit fit_mle(const IntegerPartition& partition, const FitOptions& options) {
  if (partition.empty()) throw DomainError("fit_mle: empty partition");
  MleFit fit;
  fit.phi_n = options.phi_n.value_or(partition.n());

  auto objective = [&](Transformed x) { return transformed_loglik(partition, x); };

  // Coarse 5x5 grid of starts; the three best seed independent searches.
  struct Start {
    Transformed x;
    double value;
  };
  std::vector<Start> starts;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double shift : {0.5, 5.0, 50.0, 500.0, 5000.0}) {
      const Transformed x{std::log(alpha / (1.0 - alpha)), std::log(shift)};
      starts.push_back({x, objective(x)});
    }
  std::sort(starts.begin(), starts.end(),
            [](const Start& a, const Start& b) { return a.value > b.value; });

  PolishResult best{kNaN, kNaN, kNegInf, kNaN, 0};
  std::size_t iterations = 0;
  for (std::size_t s = 0; s < 3 && s < starts.size(); ++s) {
    const auto nm = nelder_mead(objective, starts[s].x, 0.5, options.max_iterations);
    iterations += nm.iterations;
    if (!std::isfinite(nm.value)) continue;
    auto [alpha, theta] = from_transformed(nm.x);
    PolishResult polished{alpha, theta, nm.value, kNaN, 0};
    if (PdParams::valid(alpha, theta)) {
      polished = newton_polish(partition, alpha, theta, options.gradient_tolerance);
      iterations += polished.iterations;
    }
    if (polished.value > best.value) best = polished;
  }

  fit.iterations = iterations;
  fit.alpha_hat = best.alpha;
  fit.theta_hat = best.theta;
  fit.loglik_at_max = best.value;
  fit.gradient_norm = best.gradient_norm;

  const double tol = options.boundary_tolerance;
  const bool params_valid = PdParams::valid(fit.alpha_hat, fit.theta_hat);
  fit.at_boundary = !params_valid || fit.alpha_hat < tol || fit.alpha_hat > 1.0 - tol ||
                    fit.theta_hat + fit.alpha_hat < tol ||
                    std::log(fit.theta_hat + fit.alpha_hat) > kLogShiftCap - 1.0 ||
                    std::abs(std::log(fit.alpha_hat / (1.0 - fit.alpha_hat))) > kLogitCap - 1.0;

  if (partition.num_blocks() == partition.n()) {
    fit.diagnosis =
        "no coincidences observed: likelihood increases toward the boundary "
        "(theta -> infinity or alpha -> 1)";
    fit.at_boundary = true;
  } else if (partition.num_blocks() == 1) {
    fit.diagnosis = "single block: likelihood increases toward the alpha -> 0 boundary";
    fit.at_boundary = true;
  } else if (fit.at_boundary) {
    fit.diagnosis = "estimate within " + std::to_string(tol) + " of the parameter boundary";
  } else if (!(fit.gradient_norm < options.gradient_tolerance)) {
    fit.diagnosis = "gradient norm " + std::to_string(fit.gradient_norm) + " above tolerance";
  }
  fit.converged = fit.diagnosis.empty();

  if (params_valid) {
    fit.phi_hat = phi_of(PdParams(fit.alpha_hat, fit.theta_hat), fit.phi_n);
    fit.hessian = hessian_phi_theta(partition, fit.phi_hat, fit.theta_hat, fit.phi_n);
  } else {
    fit.phi_hat = kNaN;
    fit.hessian = {{{kNaN, kNaN}, {kNaN, kNaN}}};
  }
  if (partition.n() < options.small_sample_warning)
    fit.warnings.push_back("n=" + std::to_string(partition.n()) + " below " +
                           std::to_string(options.small_sample_warning) +
                           ": Gaussian shape of the likelihood is not established");
  return fit;
}

LoglikSurface loglik_surface(const IntegerPartition& partition, const MleFit& fit,
                             const SurfaceGridSpec& grid) {
  if (!fit.converged) throw DomainError("loglik_surface: fit did not converge");
  if (grid.points_per_axis < 3 || grid.points_per_axis % 2 == 0)
    throw DomainError("loglik_surface: points_per_axis must be odd and at least 3");
  const auto& h = fit.hessian;
  const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
  if (!(h[0][0] < 0.0 && det > 0.0))
    throw DomainError("loglik_surface: Hessian at the mode is not negative definite");

  LoglikSurface s;
  s.points_per_axis = grid.points_per_axis;
  s.mode_phi = fit.phi_hat;
  s.mode_theta = fit.theta_hat;
  s.phi_n = fit.phi_n;
  // covariance = (-H)^{-1}
  s.covariance = {{{-h[1][1] / det, h[0][1] / det}, {h[1][0] / det, -h[0][0] / det}}};

  const double sd_phi = std::sqrt(s.covariance[0][0]);
  const double sd_theta = std::sqrt(s.covariance[1][1]);
  const std::size_t m = grid.points_per_axis;
  const double half = static_cast<double>(m / 2);
  const double nd = static_cast<double>(fit.phi_n);

  s.points.reserve(m * m);
  for (std::size_t ti = 0; ti < m; ++ti) {
    for (std::size_t pi = 0; pi < m; ++pi) {
      const double dp = (static_cast<double>(pi) - half) / half * grid.span_sd * sd_phi;
      const double dt = (static_cast<double>(ti) - half) / half * grid.span_sd * sd_theta;
      // The mode itself is exact, not reconstructed through the grid arithmetic.
      const double phi = (pi == m / 2) ? s.mode_phi : s.mode_phi + dp;
      const double theta = (ti == m / 2) ? s.mode_theta : s.mode_theta + dt;
      const double overlay = 0.5 * (h[0][0] * dp * dp + 2.0 * h[0][1] * dp * dt + h[1][1] * dt * dt);
      const double alpha = 1.0 - phi * (nd + 1.0 + theta) / nd;
      const double ll = loglik_or_neg_inf(partition, alpha, theta);
      const bool valid = std::isfinite(ll);
      s.points.push_back({phi, theta, valid ? ll - fit.loglik_at_max : kNaN, overlay, valid});
    }
  }
  // Grid values are relative to their own maximum.
  double grid_max = kNegInf;
  for (const auto& p : s.points)
    if (p.valid) grid_max = std::max(grid_max, p.rel_loglik);
  for (auto& p : s.points)
    if (p.valid) p.rel_loglik -= grid_max;
  return s;
}

SymmetryReport symmetry_diagnostic(const LoglikSurface& surface) {
  SymmetryReport report;
  const std::size_t m = surface.points_per_axis;
  if (m == 0) return report;
  const auto& center = surface.at(m / 2, m / 2);
  if (!center.valid) return report;
  for (std::size_t ti = 0; ti < m; ++ti) {
    for (std::size_t pi = 0; pi < m; ++pi) {
      const auto& plus = surface.at(ti, pi);
      const auto& minus = surface.at(m - 1 - ti, m - 1 - pi);
      if (!plus.valid || !minus.valid) continue;
      const double lp = plus.rel_loglik - center.rel_loglik;
      const double lm = minus.rel_loglik - center.rel_loglik;
      if (lp == 0.0) continue;
      report.asymmetry_score = std::max(report.asymmetry_score, std::abs(lp - lm) / std::abs(lp));
      ++report.pairs_compared;
    }
  }
  return report;
}

}  // namespace raretype
