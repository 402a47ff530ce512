#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "raretype/error.hpp"
#include "raretype/inference.hpp"
#include "raretype/workbench.hpp"

using namespace raretype;
using doctest::Approx;

namespace {

PdParams random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> ua(0.05, 0.95), ut(0.0, 300.0);
  const double alpha = ua(gen);
  return PdParams(alpha, ut(gen) - alpha * 0.9);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("phi reparametrization") {
  CHECK(phi_of(PdParams(0.51, 216.0), 18925) == Approx(0.48444519903876293).epsilon(1e-12));
  CHECK(phi_of(PdParams(1.0 - 1e-12, 5.0), 100) < 1e-10);

  std::mt19937_64 gen(17);
  for (int i = 0; i < 200; ++i) {
    const auto params = random_params(gen);
    const std::uint64_t n = 1 + gen() % 50000;
    const double phi = phi_of(params, n);
    const auto back = theta_alpha_of(phi, params.theta(), n);
    CHECK(back.alpha() == Approx(params.alpha()).epsilon(1e-12));
    CHECK(phi_of(back, n) == Approx(phi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(theta_alpha_of(1.5, 1.0, 100), DomainError);   // alpha < 0
  CHECK_THROWS_AS(theta_alpha_of(0.0, 1.0, 100), DomainError);   // alpha = 1
  CHECK_THROWS_AS(phi_of(PdParams(0.5, 1.0), 0), DomainError);
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const auto partition = dutch_fixture();
  std::mt19937_64 gen(23);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_params(gen);
    const auto d = eppf_log_derivatives(partition, p);
    const double ha = 1e-6 * p.alpha(), ht = 1e-6 * std::max(1.0, std::abs(p.theta()));
    auto f = [&](double a, double t) { return eppf_log(partition, PdParams(a, t)); };
    const double fa = (f(p.alpha() + ha, p.theta()) - f(p.alpha() - ha, p.theta())) / (2 * ha);
    const double ft = (f(p.alpha(), p.theta() + ht) - f(p.alpha(), p.theta() - ht)) / (2 * ht);
    const double scale = std::max({std::abs(d.gradient[0]), std::abs(d.gradient[1]), 1.0});
    CHECK(std::abs(fa - d.gradient[0]) / std::max(std::abs(d.gradient[0]), scale * 1e-3) < 1e-5);
    CHECK(std::abs(ft - d.gradient[1]) / std::max(std::abs(d.gradient[1]), scale * 1e-3) < 1e-5);

    auto g = [&](double a, double t) { return eppf_log_derivatives(partition, PdParams(a, t)).gradient; };
    const double haa = (g(p.alpha() + ha, p.theta())[0] - g(p.alpha() - ha, p.theta())[0]) / (2 * ha);
    const double htt = (g(p.alpha(), p.theta() + ht)[1] - g(p.alpha(), p.theta() - ht)[1]) / (2 * ht);
    const double hat = (g(p.alpha(), p.theta() + ht)[0] - g(p.alpha(), p.theta() - ht)[0]) / (2 * ht);
    CHECK(haa == Approx(d.hessian[0][0]).epsilon(1e-4));
    CHECK(htt == Approx(d.hessian[1][1]).epsilon(1e-4));
    CHECK(hat == Approx(d.hessian[0][1]).epsilon(1e-4));
  }
}

TEST_CASE("Dutch fixture MLE") {
  // Frozen from an independent scipy Nelder-Mead fit on the log-gamma form.
  const auto fit = fit_mle(dutch_fixture());
  CHECK(fit.converged);
  CHECK_FALSE(fit.at_boundary);
  CHECK(fit.alpha_hat == Approx(0.621797).epsilon(2e-5));
  CHECK(fit.theta_hat == Approx(20.7304).epsilon(1e-4));
  CHECK(fit.loglik_at_max == Approx(-7566.2405627).epsilon(1e-10));
  CHECK(fit.gradient_norm < 1e-6);
  CHECK(fit.phi_n == 2085);
  CHECK(fit.phi_hat == Approx(phi_of(fit.params(), 2085)));
  CHECK(fit.warnings.empty());
}

TEST_CASE("fitted maximum dominates random parameter points") {
  const auto partition = dutch_fixture();
  const auto fit = fit_mle(partition);
  REQUIRE(fit.converged);
  std::mt19937_64 gen(29);
  for (int i = 0; i < 100; ++i)
    CHECK(fit.loglik_at_max >= eppf_log(partition, random_params(gen)));
}

TEST_CASE("finite-difference Hessian in (phi, theta) matches the chain rule") {
  const auto partition = dutch_fixture();
  const auto fit = fit_mle(partition);
  REQUIRE(fit.converged);
  const auto d = eppf_log_derivatives(partition, fit.params());
  const double n = static_cast<double>(fit.phi_n);
  const double a_phi = -(n + 1.0 + fit.theta_hat) / n;
  const double a_theta = -fit.phi_hat / n;
  const double lphph = d.hessian[0][0] * a_phi * a_phi;
  const double lphth = d.hessian[0][0] * a_phi * a_theta + d.hessian[0][1] * a_phi +
                       d.gradient[0] * (-1.0 / n);
  const double lthth = d.hessian[0][0] * a_theta * a_theta + 2.0 * d.hessian[0][1] * a_theta +
                       d.hessian[1][1];
  CHECK(fit.hessian[0][0] == Approx(lphph).epsilon(1e-6));
  CHECK(fit.hessian[0][1] == Approx(lphth).epsilon(1e-6));
  CHECK(fit.hessian[1][1] == Approx(lthth).epsilon(1e-6));
}

TEST_CASE("degenerate partitions are reported, not fitted") {
  const auto pair = fit_mle(IntegerPartition({2}, {1}));
  CHECK_FALSE(pair.converged);
  CHECK(pair.at_boundary);
  CHECK(pair.diagnosis.find("single block") != std::string::npos);

  const auto singles = fit_mle(IntegerPartition({1}, {40}));
  CHECK_FALSE(singles.converged);
  CHECK(singles.diagnosis.find("no coincidences") != std::string::npos);

  const auto one = fit_mle(IntegerPartition({1}, {1}));
  CHECK_FALSE(one.converged);
}

TEST_CASE("small samples carry a warning") {
  const auto fit = fit_mle(IntegerPartition({1, 2, 3}, {30, 5, 2}));
  CHECK_FALSE(fit.warnings.empty());
  FitOptions quiet;
  quiet.small_sample_warning = 10;
  CHECK(fit_mle(IntegerPartition({1, 2, 3}, {30, 5, 2}), quiet).warnings.empty());
}

TEST_CASE("doubling a database changes the fit smoothly") {
  const auto base = dutch_fixture();
  std::vector<std::uint64_t> r2;
  for (auto r : base.r()) r2.push_back(2 * r);
  const auto doubled = IntegerPartition(base.a(), r2);
  const auto fit = fit_mle(doubled);
  CHECK(fit.converged);
  CHECK(std::isfinite(fit.loglik_at_max));
  CHECK(fit.alpha_hat > 0.5);
  CHECK(fit.alpha_hat < 0.8);
}

TEST_CASE("simulated partitions are recovered") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto plan = crp_sample(5000, PdParams(0.4, 50.0), seed);
    const auto fit = fit_mle(plan.to_integer_partition());
    CHECK(fit.converged);
    total += fit.alpha_hat;
  }
  CHECK(std::abs(total / 3.0 - 0.4) < 0.05);
}

TEST_CASE("log-likelihood surface") {
  const auto partition = dutch_fixture();
  const auto fit = fit_mle(partition);
  const auto s = loglik_surface(partition, fit);
  const std::size_t m = s.points_per_axis;
  REQUIRE(m == 41);
  CHECK(s.at(m / 2, m / 2).rel_loglik == 0.0);
  double max_value = -1e300;
  for (const auto& p : s.points)
    if (p.valid) max_value = std::max(max_value, p.rel_loglik);
  CHECK(max_value == 0.0);

  SUBCASE("unimodal on the default grid") {
    std::size_t local_maxima = 0;
    for (std::size_t ti = 0; ti < m; ++ti)
      for (std::size_t pi = 0; pi < m; ++pi) {
        const auto& c = s.at(ti, pi);
        if (!c.valid) continue;
        bool is_max = true;
        for (int dt = -1; dt <= 1; ++dt)
          for (int dp = -1; dp <= 1; ++dp) {
            if (dt == 0 && dp == 0) continue;
            const long t2 = static_cast<long>(ti) + dt, p2 = static_cast<long>(pi) + dp;
            if (t2 < 0 || p2 < 0 || t2 >= static_cast<long>(m) || p2 >= static_cast<long>(m)) continue;
            const auto& nb = s.at(static_cast<std::size_t>(t2), static_cast<std::size_t>(p2));
            if (nb.valid && nb.rel_loglik >= c.rel_loglik) is_max = false;
          }
        if (is_max) ++local_maxima;
      }
    CHECK(local_maxima == 1);
  }

  SUBCASE("Gaussian overlay matches to second order near the mode") {
    double previous = 0.0;
    for (double span : {0.04, 0.02, 0.01}) {
      SurfaceGridSpec g;
      g.points_per_axis = 3;
      g.span_sd = span;
      const auto tiny = loglik_surface(partition, fit, g);
      double worst = 0.0;
      for (const auto& p : tiny.points)
        if (p.gauss_overlay != 0.0)
          worst = std::max(worst, std::abs(p.rel_loglik - p.gauss_overlay) / std::abs(p.gauss_overlay));
      // Relative error of a second-order expansion shrinks linearly with the step.
      CHECK(worst < 0.05);
      if (previous > 0.0) CHECK(worst < 0.75 * previous);
      previous = worst;
    }
  }

  SUBCASE("points outside the domain are flagged") {
    SurfaceGridSpec wide;
    wide.span_sd = 400.0;
    const auto w = loglik_surface(partition, fit, wide);
    const auto invalid = std::count_if(w.points.begin(), w.points.end(), [](const auto& p) { return !p.valid; });
    CHECK(invalid > 0);
    CHECK(w.points.size() == 41u * 41u);
    for (const auto& p : w.points)
      if (!p.valid) CHECK(std::isnan(p.rel_loglik));
  }

  SUBCASE("symmetry diagnostic is finite") {
    const auto report = symmetry_diagnostic(s);
    CHECK(std::isfinite(report.asymmetry_score));
    CHECK(report.pairs_compared > 0);
  }

  CHECK_THROWS_AS(loglik_surface(IntegerPartition({2}, {1}), fit_mle(IntegerPartition({2}, {1}))),
                  DomainError);
}

TEST_CASE("symmetry diagnostic on synthetic surfaces") {
  LoglikSurface s;
  s.points_per_axis = 5;
  for (int ti = -2; ti <= 2; ++ti)
    for (int pi = -2; pi <= 2; ++pi) {
      const double v = -(0.5 * pi * pi + 0.3 * pi * ti + ti * ti);
      s.points.push_back({static_cast<double>(pi), static_cast<double>(ti), v, v, true});
    }
  CHECK(symmetry_diagnostic(s).asymmetry_score == 0.0);

  LoglikSurface skewed = s;
  for (auto& p : skewed.points) p.rel_loglik += 0.1 * p.phi * p.phi * p.phi;
  const double score = symmetry_diagnostic(skewed).asymmetry_score;
  CHECK(score > 0.0);

  LoglikSurface shifted = skewed;
  for (auto& p : shifted.points) p.rel_loglik += 17.0;
  CHECK(symmetry_diagnostic(shifted).asymmetry_score == Approx(score).epsilon(1e-12));
}

}  // TEST_SUITE
