#include "shrinksel/shrinkage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "shrinksel/diagnostics.hpp"
#include "shrinksel/model.hpp"
#include "shrinksel/quadrature.hpp"

namespace shrinksel {

double TwoVarProblem::ratio() const { return std::abs(mle1 / mle2); }

void TwoVarProblem::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvariantError("rho must lie in [0, 1)");
  if (!(tau > 0.0 && std::isfinite(tau))) throw InvariantError("tau must be > 0");
  if (!(sigma2 > 0.0 && std::isfinite(sigma2))) throw InvariantError("sigma2 must be > 0");
  if (!(std::isfinite(mle1) && std::isfinite(mle2)) || mle1 == 0.0 || mle2 == 0.0) {
    throw InvariantError("both MLE components must be finite and non-zero");
  }
}

ShrinkFactors normal_shrink_factors(const TwoVarProblem& problem) {
  problem.validate();
  if (problem.ratio() < 1.0) throw InvariantError("ratio analysis needs |mle1| >= |mle2|");
  const double rho = problem.rho;
  const double rho2 = rho * rho;
  const double t2 = problem.tau * problem.tau;
  ShrinkFactors s;
  s.kappa = 1.0 / (1.0 + t2);
  const double mu = t2 / (1.0 + t2);  // 1 - kappa without cancellation
  const double denom = 1.0 - mu * mu * rho2;
  s.f1 = -(1.0 - rho2 * mu) * s.kappa / denom;
  s.f2 = s.f1;
  s.f3 = -rho * s.kappa * s.kappa / denom;

  const double r21 = problem.mle2 / problem.mle1;  // 1 / A for same-sign MLEs
  const double r12 = problem.mle1 / problem.mle2;
  s.R1 = -(s.f1 + s.f3 * r21);
  s.R2 = -(s.f2 + s.f3 * r12);
  s.S1 = (s.R1 - rho * s.R2 * r21) / (1.0 - rho2);
  s.S2 = (s.R2 - rho * s.R1 * r12) / (1.0 - rho2);
  return s;
}

std::array<double, 2> normal_estimator(const TwoVarProblem& problem) {
  const auto s = normal_shrink_factors(problem);
  return {(1.0 - s.S1) * problem.mle1, (1.0 - s.S2) * problem.mle2};
}

bool normal_ratio_below_mle(const TwoVarProblem& problem) {
  problem.validate();
  const double a = problem.ratio();
  if (!(a > 1.0)) throw InvariantError("ratio check needs A > 1");
  const auto est = normal_estimator(problem);
  return std::abs(est[0] / est[1]) < a;
}

namespace {

struct Weights {
  double f1, f2, f3, frame;  // frame = F without the (1 - k)^{-1/2} factors
};

// Terms shared by both coordinate systems, from k_i and mu_i = 1 - k_i.
Weights weights(double k1, double mu1, double k2, double mu2, double rho, double tau2) {
  const double rho2 = rho * rho;
  const double denom = 1.0 - mu1 * mu2 * rho2;
  Weights w;
  w.f1 = -(1.0 - rho2 * mu2) * k1 / denom;
  w.f2 = -(1.0 - rho2 * mu1) * k2 / denom;
  w.f3 = -rho * k1 * k2 / denom;
  w.frame = 1.0 / (std::sqrt(denom) * (mu1 + tau2 * k1) * (mu2 + tau2 * k2));
  return w;
}

double exponent(const Weights& w, double x1, double x2, double sigma2) {
  return (w.f1 * x1 * x1 + w.f2 * x2 * x2 + 2.0 * w.f3 * x1 * x2) / (2.0 * sigma2);
}

class HsKernel {
public:
  explicit HsKernel(const TwoVarProblem& p)
      : rho_(p.rho), tau2_(p.tau * p.tau), x1_(p.mle1), x2_(p.mle2), sigma2_(p.sigma2) {
    // Shared normalization of E over a coarse node grid; it cancels in R_i.
    constexpr int kScan = 33;
    shift_ = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kScan; ++a) {
      for (int b = 0; b < kScan; ++b) {
        const double t1 = (a + 0.5) / kScan * std::numbers::pi / 2.0;
        const double t2 = (b + 0.5) / kScan * std::numbers::pi / 2.0;
        shift_ = std::max(shift_, exponent(at(t1, t2), x1_, x2_, sigma2_));
      }
    }
  }

  // {F E, (f1 x1 + f3 x2) F E, (f2 x2 + f3 x1) F E} in theta coordinates, Jacobian included.
  quad::Vec<3> operator()(double theta1, double theta2) const {
    const auto w = at(theta1, theta2);
    const double s1 = std::sin(theta1);
    const double s2 = std::sin(theta2);
    // dk (1 - k)^{-1/2} = 2 sin(theta) dtheta
    const double base = 4.0 * s1 * s2 * w.frame * std::exp(exponent(w, x1_, x2_, sigma2_) - shift_);
    return {base, (w.f1 * x1_ + w.f3 * x2_) * base, (w.f2 * x2_ + w.f3 * x1_) * base};
  }

private:
  Weights at(double theta1, double theta2) const {
    const double s1 = std::sin(theta1), c1 = std::cos(theta1);
    const double s2 = std::sin(theta2), c2 = std::cos(theta2);
    return weights(s1 * s1, c1 * c1, s2 * s2, c2 * c2, rho_, tau2_);
  }

  double rho_, tau2_, x1_, x2_, sigma2_;
  double shift_ = 0.0;
};

}  // namespace

double hs_integrand(double k1, double k2, const TwoVarProblem& problem, HsTerm which) {
  problem.validate();
  if (!(k1 > 0.0 && k1 < 1.0 && k2 > 0.0 && k2 < 1.0)) {
    throw InvariantError("shrinkage weights must lie strictly inside (0, 1)");
  }
  const double tau2 = problem.tau * problem.tau;
  const auto w = weights(k1, 1.0 - k1, k2, 1.0 - k2, problem.rho, tau2);
  const double value = w.frame / std::sqrt((1.0 - k1) * (1.0 - k2)) *
                       std::exp(exponent(w, problem.mle1, problem.mle2, problem.sigma2));
  switch (which) {
    case HsTerm::F_only: return value;
    case HsTerm::numerator_1: return (w.f1 * problem.mle1 + w.f3 * problem.mle2) * value;
    case HsTerm::numerator_2: return (w.f2 * problem.mle2 + w.f3 * problem.mle1) * value;
  }
  return value;
}

HsEstimate hs_estimator(const TwoVarProblem& problem, const QuadratureOptions& options) {
  problem.validate();
  const HsKernel kernel(problem);
  constexpr double kHalfPi = std::numbers::pi / 2.0;

  const quad::Tolerance inner_tol{options.rel_tol / 40.0, 0.0, options.max_intervals};
  const quad::Tolerance outer_tol{options.rel_tol / 4.0, 0.0, options.max_intervals};
  bool inner_ok = true;
  std::size_t evaluations = 0;

  // Components 3..5 carry the inner error estimates so they integrate alongside.
  auto outer = [&](double theta1) {
    const auto inner = quad::integrate<3>([&](double theta2) { return kernel(theta1, theta2); }, 0.0, kHalfPi,
                                          inner_tol);
    inner_ok = inner_ok && inner.converged;
    evaluations += inner.evaluations;
    return quad::Vec<6>{inner.value[0], inner.value[1], inner.value[2],
                        inner.error[0], inner.error[1], inner.error[2]};
  };
  const auto res = quad::integrate<6, 3>(outer, 0.0, kHalfPi, outer_tol);

  const double den = res.value[0];
  std::array<double, 3> rel{};
  for (std::size_t c = 0; c < 3; ++c) {
    rel[c] = (res.error[c] + res.value[3 + c]) / std::abs(res.value[c]);
  }

  HsEstimate est;
  est.evaluations = evaluations;
  est.error_estimate = std::max(rel[0] + rel[1], rel[0] + rel[2]);
  if (!(den > 0.0) || !std::isfinite(est.error_estimate)) {
    throw QuadratureError("horseshoe integral underflowed", std::numeric_limits<double>::infinity());
  }
  if (!res.converged || !inner_ok || est.error_estimate > options.rel_tol) {
    throw QuadratureError("horseshoe quadrature did not reach relative tolerance " + format_real(options.rel_tol) +
                              " (achieved " + format_real(est.error_estimate) + ")",
                          est.error_estimate);
  }

  const double rho = problem.rho;
  const double r21 = problem.mle2 / problem.mle1;
  const double r12 = problem.mle1 / problem.mle2;
  est.R1 = -(res.value[1] / den) / problem.mle1;
  est.R2 = -(res.value[2] / den) / problem.mle2;
  est.S1 = (est.R1 - rho * est.R2 * r21) / (1.0 - rho * rho);
  est.S2 = (est.R2 - rho * est.R1 * r12) / (1.0 - rho * rho);
  est.beta = {(1.0 - est.S1) * problem.mle1, (1.0 - est.S2) * problem.mle2};
  return est;
}

std::vector<double> default_rho_grid() { return {0.94, 0.95, 0.96, 0.97, 0.98, 0.99}; }

std::vector<double> default_tau_grid() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(0.05 * k);
  return out;
}

std::vector<double> default_a_grid() { return {1.1, 1.5, 2.0, 3.0, 5.0, 10.0}; }

std::vector<ShrinkGridPoint> reverse_shrinkage_grid(std::span<const double> rho_grid,
                                                    std::span<const double> tau_grid,
                                                    std::span<const double> a_grid, double x2, std::size_t jobs,
                                                    const QuadratureOptions& options) {
  if (!(std::isfinite(x2) && x2 != 0.0)) throw InvariantError("x2 must be finite and non-zero");
  std::vector<ShrinkGridPoint> points;
  points.reserve(rho_grid.size() * tau_grid.size() * a_grid.size());
  for (double rho : rho_grid) {
    for (double tau : tau_grid) {
      for (double a : a_grid) {
        ShrinkGridPoint pt;
        pt.problem = TwoVarProblem{rho, tau, a * x2, x2, 1.0};
        pt.problem.validate();
        if (!(a > 0.0)) throw InvariantError("grid values of A must be > 0");
        pt.a = a;
        pt.x2 = x2;
        pt.ratio_mle = pt.problem.ratio();
        points.push_back(pt);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      auto& pt = points[k];
      try {
        const auto est = hs_estimator(pt.problem, options);
        pt.ratio_shrunk = std::abs(est.beta[0] / est.beta[1]);
        pt.reverse = pt.ratio_shrunk >= pt.ratio_mle;
        pt.quad_error_estimate = est.error_estimate;
        pt.sign_preserved = est.S1 < 1.0 && est.S2 < 1.0;
      } catch (const QuadratureError& e) {
        pt.failure = e.what();
        pt.quad_error_estimate = e.achieved();
        pt.ratio_shrunk = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, points.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto flips = std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.sign_preserved; });
  if (flips > 0) warn(std::to_string(flips) + " grid point(s) have a shrinkage factor >= 1 (sign flip)");
  const auto failed = std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.failure.empty(); });
  if (failed > 0) warn(std::to_string(failed) + " grid point(s) failed quadrature");
  return points;
}

std::string grid_csv(const std::vector<ShrinkGridPoint>& points) {
  std::ostringstream out;
  out << "rho,tau,a,x2,ratio_mle,ratio_shrunk,reverse,quad_error_estimate\n";
  for (const auto& p : points) {
    out << format_real(p.problem.rho) << ',' << format_real(p.problem.tau) << ',' << format_real(p.a) << ','
        << format_real(p.x2) << ',' << format_real(p.ratio_mle) << ','
        << (p.failure.empty() ? format_real(p.ratio_shrunk) : std::string("nan")) << ','
        << (p.failure.empty() ? (p.reverse ? "1" : "0") : "") << ',' << format_real(p.quad_error_estimate)
        << '\n';
  }
  return out.str();
}

}  // namespace shrinksel
