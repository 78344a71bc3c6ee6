#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace shrinksel::test_util {

struct McEstimate {
  std::array<double, 2> beta{};
  std::array<double, 2> se{};
  std::size_t samples = 0;
};

/// Plain Monte Carlo for the bivariate horseshoe posterior mean with
/// X'X = [1 rho; rho 1], sigma2 = 1. Local scales are drawn from their
/// half-Cauchy prior; each draw is weighted by the marginal density of the
/// MLE, N(x; 0, (X'X)^{-1} + D), and contributes its conditional posterior
/// mean D (Sigma0 + D)^{-1} x. Standard errors use the delta method on the
/// ratio of sample means.
inline McEstimate horseshoe_mc(double rho, double tau, double x1, double x2, std::size_t samples,
                               std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  const double det0 = 1.0 - rho * rho;
  // Sigma0 = (X'X)^{-1}
  const double s11 = 1.0 / det0, s12 = -rho / det0, s22 = 1.0 / det0;
  const double t2 = tau * tau;

  // Running sums in the order w, w*m1, w*m2 and the cross moments for the delta method.
  long double sw = 0, sa1 = 0, sa2 = 0, sww = 0, sa1a1 = 0, sa2a2 = 0, swa1 = 0, swa2 = 0;
  // det(Sigma0 + D) >= det(Sigma0) and q >= 0 bound every log weight by log_ref.
  const double log_ref = 0.5 * std::log(det0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double l1 = std::abs(cauchy(gen));
    const double l2 = std::abs(cauchy(gen));
    const double d1 = t2 * l1 * l1;
    const double d2 = t2 * l2 * l2;
    const double m11 = s11 + d1, m12 = s12, m22 = s22 + d2;
    const double det = m11 * m22 - m12 * m12;
    const double i11 = m22 / det, i12 = -m12 / det, i22 = m11 / det;
    const double q = x1 * (i11 * x1 + i12 * x2) + x2 * (i12 * x1 + i22 * x2);
    const double log_w = -0.5 * std::log(det) - 0.5 * q;
    const double w = std::exp(log_w - log_ref);
    const double v1 = i11 * x1 + i12 * x2;
    const double v2 = i12 * x1 + i22 * x2;
    const double a1 = w * d1 * v1;
    const double a2 = w * d2 * v2;
    sw += w;
    sa1 += a1;
    sa2 += a2;
    sww += static_cast<long double>(w) * w;
    sa1a1 += static_cast<long double>(a1) * a1;
    sa2a2 += static_cast<long double>(a2) * a2;
    swa1 += static_cast<long double>(w) * a1;
    swa2 += static_cast<long double>(w) * a2;
  }
  const auto n = static_cast<long double>(samples);
  McEstimate out;
  out.samples = samples;
  const long double mw = sw / n;
  auto finish = [&](long double sa, long double saa, long double swa, std::size_t i) {
    const long double ma = sa / n;
    const long double r = ma / mw;
    // var(a - r w) = var(a) - 2 r cov(a, w) + r^2 var(w)
    const long double var_a = saa / n - ma * ma;
    const long double var_w = sww / n - mw * mw;
    const long double cov = swa / n - ma * mw;
    const long double var = std::max<long double>(0, var_a - 2 * r * cov + r * r * var_w);
    out.beta[i] = static_cast<double>(r);
    out.se[i] = static_cast<double>(std::sqrt(var / n) / mw);
  };
  finish(sa1, sa1a1, swa1, 0);
  finish(sa2, sa2a2, swa2, 1);
  return out;
}

}  // namespace shrinksel::test_util
