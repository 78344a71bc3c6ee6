#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shrinksel {

/// Bivariate problem with X'X = [1 rho; rho 1] and a given MLE pair.
struct TwoVarProblem {
  double rho = 0.0;
  double tau = 1.0;
  double mle1 = 1.0;
  double mle2 = 1.0;
  double sigma2 = 1.0;

  /// A = |mle1 / mle2|.
  [[nodiscard]] double ratio() const;
  void validate() const;
};

/// Normal-prior (global-only) shrinkage quantities. The R and S terms use the
/// signed MLE ratio, so they agree with the A-form whenever both MLEs share a sign.
struct ShrinkFactors {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
  double S1 = 0.0;
  double S2 = 0.0;
  double kappa = 0.0;  // 1 / (1 + tau^2)
};

ShrinkFactors normal_shrink_factors(const TwoVarProblem& problem);

/// Posterior mean under beta_i ~ N(0, sigma2 tau^2): (1 - S_j) * mle_j.
std::array<double, 2> normal_estimator(const TwoVarProblem& problem);

/// True iff the normal-prior estimate ratio is strictly below the MLE ratio.
/// Requires A > 1.
bool normal_ratio_below_mle(const TwoVarProblem& problem);

enum class HsTerm { F_only, numerator_1, numerator_2 };

/// F(k1, k2) * E(k1, k2), optionally times (f_i x_i + f_3 x_{3-i}), in the
/// shrinkage-weight coordinates k_i = 1 / (1 + tau^2 lambda_i^2). Both k_i
/// must lie strictly inside (0, 1).
double hs_integrand(double k1, double k2, const TwoVarProblem& problem, HsTerm which);

class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  [[nodiscard]] double achieved() const { return achieved_; }

private:
  double achieved_;
};

struct QuadratureOptions {
  double rel_tol = 1e-6;
  std::size_t max_intervals = 400;
};

struct HsEstimate {
  std::array<double, 2> beta{};
  double R1 = 0.0;
  double R2 = 0.0;
  double S1 = 0.0;
  double S2 = 0.0;
  double error_estimate = 0.0;  // relative, worst of R1 / R2
  std::size_t evaluations = 0;
};

/// Horseshoe posterior mean for the bivariate problem, from the ratio of
/// integrals over (0, 1)^2 evaluated by nested adaptive Gauss-Kronrod after
/// the substitution k_i = sin^2(theta_i). Throws QuadratureError when the
/// tolerance is not reached.
HsEstimate hs_estimator(const TwoVarProblem& problem, const QuadratureOptions& options = {});

struct ShrinkGridPoint {
  TwoVarProblem problem;
  double a = 0.0;
  double x2 = 0.0;
  double ratio_mle = 0.0;
  double ratio_shrunk = 0.0;
  bool reverse = false;
  double quad_error_estimate = 0.0;
  bool sign_preserved = true;
  std::string failure;  // non-empty when the quadrature failed
};

std::vector<double> default_rho_grid();
std::vector<double> default_tau_grid();
std::vector<double> default_a_grid();

/// Evaluates every (rho, tau, a) combination with mle = (a * x2, x2), in
/// rho-major, then tau, then a order. Quadrature failures are recorded per point.
std::vector<ShrinkGridPoint> reverse_shrinkage_grid(std::span<const double> rho_grid,
                                                    std::span<const double> tau_grid,
                                                    std::span<const double> a_grid, double x2,
                                                    std::size_t jobs = 1,
                                                    const QuadratureOptions& options = {});

/// CSV: rho,tau,a,x2,ratio_mle,ratio_shrunk,reverse,quad_error_estimate
std::string grid_csv(const std::vector<ShrinkGridPoint>& points);

}  // namespace shrinksel
