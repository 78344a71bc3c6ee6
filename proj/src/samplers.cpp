#include "shrinksel/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shrinksel/diagnostics.hpp"
#include "shrinksel/rng.hpp"

namespace shrinksel {

namespace {

// Keeps 1 / (lambda * tau) finite.
constexpr double kScaleFloor = 1e-150;
constexpr int kTauRetries = 100;

struct Prepared {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  double n_eff = 0.0;
};

// Centers X and y when the model carries an intercept; a flat prior on the
// intercept integrates out to the centered likelihood with n - 1 degrees of freedom.
Prepared prepare(const Dataset& data) {
  data.validate();
  if (data.n() < 2) throw InvariantError("sampler needs n >= 2");
  Prepared out{data.x, data.y, static_cast<double>(data.n())};
  if (data.intercept) {
    out.x.rowwise() -= out.x.colwise().mean();
    out.y.array() -= out.y.mean();
    out.n_eff -= 1.0;
  }
  const Eigen::VectorXd norms = out.x.colwise().squaredNorm();
  for (Eigen::Index j = 0; j < norms.size(); ++j) {
    if (norms(j) == 0.0) warn("design column " + std::to_string(j + 1) + " is constant after preparation");
  }
  return out;
}

void check_finite(double v, const char* what, std::size_t iter) {
  if (!std::isfinite(v)) {
    throw SamplerError(std::string("non-finite ") + what + " at iteration " + std::to_string(iter + 1));
  }
}

void check_finite(const Eigen::VectorXd& v, const char* what, std::size_t iter) {
  if (!v.allFinite()) {
    throw SamplerError(std::string("non-finite ") + what + " at iteration " + std::to_string(iter + 1));
  }
}

Eigen::VectorXd standard_normals(Rng& rng, Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = rng.normal();
  return out;
}

bool is_retained(std::size_t iter, const McmcConfig& mcmc) {
  return iter >= mcmc.burn_in && (iter - mcmc.burn_in) % mcmc.thin == mcmc.thin - 1;
}

}  // namespace

std::size_t McmcConfig::retained() const {
  return iterations > burn_in && thin > 0 ? (iterations - burn_in) / thin : 0;
}

void McmcConfig::validate() const {
  if (iterations == 0) throw InvariantError("iterations must be positive");
  if (burn_in >= iterations) throw InvariantError("burn_in must be smaller than iterations");
  if (thin == 0) throw InvariantError("thin must be positive");
  if (retained() < 1) throw InvariantError("configuration retains no draws");
}

PosteriorDraws fit_horseshoe(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                             const std::optional<Eigen::VectorXd>& beta_start) {
  if (prior.family != PriorFamily::Horseshoe) throw InvariantError("fit_horseshoe needs a horseshoe prior");
  prior.validate();
  mcmc.validate();
  const auto prep = prepare(data);
  const Eigen::MatrixXd& x = prep.x;
  const Eigen::VectorXd& y = prep.y;
  const auto n = x.rows();
  const auto p = x.cols();
  const bool wide = p > n;

  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  if (!wide) {
    xtx = x.transpose() * x;
    xty = x.transpose() * y;
  }

  Rng rng(mcmc.seed);
  HorseshoeState s;
  s.beta = Eigen::VectorXd::Zero(p);
  if (beta_start) {
    if (beta_start->size() != p) throw InvariantError("beta_start length differs from p");
    s.beta = *beta_start;
  }
  s.lambda = Eigen::VectorXd::Ones(p);
  s.nu = Eigen::VectorXd::Ones(p);
  if (prior.tau_upper) s.tau = std::min(s.tau, *prior.tau_upper);

  const auto kept = static_cast<Eigen::Index>(mcmc.retained());
  PosteriorDraws draws;
  draws.beta.resize(kept, p);
  draws.sigma2.resize(kept);
  draws.lambda = Eigen::MatrixXd(kept, p);
  draws.tau = Eigen::VectorXd(kept);

  Eigen::Index row = 0;
  for (std::size_t it = 0; it < mcmc.iterations; ++it) {
    const Eigen::VectorXd prior_var = (s.lambda * s.tau).cwiseMax(kScaleFloor);
    const double sigma = std::sqrt(s.sigma2);

    if (wide) {
      // beta = u + sigma * V X' (X V X' + I)^{-1} (y / sigma - X u / sigma - delta), V = diag(prior_var)
      const Eigen::VectorXd u = (s.sigma2 * prior_var).cwiseSqrt().cwiseProduct(standard_normals(rng, p));
      const Eigen::VectorXd delta = standard_normals(rng, n);
      const Eigen::MatrixXd xv = x * prior_var.asDiagonal();
      Eigen::MatrixXd m = xv * x.transpose();
      m.diagonal().array() += 1.0;
      const Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) throw SamplerError("n x n factorization failed at iteration " + std::to_string(it + 1));
      const Eigen::VectorXd rhs = (y - x * u) / sigma - delta;
      const Eigen::VectorXd w = llt.solve(rhs);
      s.beta = u + sigma * xv.transpose() * w;
    } else {
      Eigen::MatrixXd a = xtx;
      a.diagonal() += prior_var.cwiseInverse();
      const Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() != Eigen::Success) throw SamplerError("p x p factorization failed at iteration " + std::to_string(it + 1));
      const Eigen::VectorXd mean = llt.solve(xty);
      const Eigen::VectorXd noise = llt.matrixU().solve(standard_normals(rng, p));
      s.beta = mean + sigma * noise;
    }
    check_finite(s.beta, "beta", it);

    const double rss = (y - x * s.beta).squaredNorm();
    const double penalty = (s.beta.array().square() / prior_var.array()).sum();
    s.sigma2 = rng.inv_gamma(prior.ig_shape + 0.5 * (prep.n_eff + static_cast<double>(p)),
                             prior.ig_scale + 0.5 * (rss + penalty));
    check_finite(s.sigma2, "sigma2", it);

    for (Eigen::Index j = 0; j < p; ++j) {
      const double b2 = s.beta(j) * s.beta(j);
      s.lambda(j) = std::max(rng.inv_gamma(1.0, 1.0 / s.nu(j) + b2 / (2.0 * s.tau * s.sigma2)), kScaleFloor);
    }
    check_finite(s.lambda, "lambda", it);

    const double tau_shape = 0.5 * (static_cast<double>(p) + 1.0);
    const double tau_rate =
        1.0 / s.xi + (s.beta.array().square() / s.lambda.array()).sum() / (2.0 * s.sigma2);
    double tau = rng.inv_gamma(tau_shape, tau_rate);
    if (prior.tau_upper) {
      for (int attempt = 0; attempt < kTauRetries && tau > *prior.tau_upper; ++attempt) {
        tau = rng.inv_gamma(tau_shape, tau_rate);
      }
      tau = std::min(tau, *prior.tau_upper);
    }
    s.tau = std::max(tau, kScaleFloor);
    check_finite(s.tau, "tau", it);

    for (Eigen::Index j = 0; j < p; ++j) s.nu(j) = rng.inv_gamma(1.0, 1.0 + 1.0 / s.lambda(j));
    s.xi = rng.inv_gamma(1.0, 1.0 + 1.0 / s.tau);

    if (is_retained(it, mcmc)) {
      draws.beta.row(row) = s.beta.transpose();
      draws.sigma2(row) = s.sigma2;
      draws.lambda->row(row) = s.lambda.transpose();
      (*draws.tau)(row) = s.tau;
      ++row;
    }
  }
  return draws;
}

PosteriorDraws fit_spike_slab(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                              const std::optional<Eigen::VectorXd>& beta_start) {
  if (prior.family != PriorFamily::SpikeSlab) throw InvariantError("fit_spike_slab needs a spike-and-slab prior");
  prior.validate();
  mcmc.validate();
  const auto prep = prepare(data);
  const Eigen::MatrixXd& x = prep.x;
  const auto p = x.cols();
  const Eigen::VectorXd col_norm2 = x.colwise().squaredNorm();

  Rng rng(mcmc.seed);
  SpikeSlabState s;
  s.beta = Eigen::VectorXd::Zero(p);
  s.z = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>::Zero(p);
  if (beta_start) {
    if (beta_start->size() != p) throw InvariantError("beta_start length differs from p");
    s.beta = *beta_start;
    for (Eigen::Index j = 0; j < p; ++j) s.z(j) = s.beta(j) != 0.0 ? 1 : 0;
  }
  s.pi = 1.0 - prior.ss_beta_a / (prior.ss_beta_a + prior.ss_beta_b);
  s.slab_var = Eigen::VectorXd::Ones(p);

  Eigen::VectorXd resid = prep.y - x * s.beta;

  const auto kept = static_cast<Eigen::Index>(mcmc.retained());
  PosteriorDraws draws;
  draws.beta.resize(kept, p);
  draws.sigma2.resize(kept);
  draws.z = ByteMatrix(kept, p);
  draws.pi = Eigen::VectorXd(kept);

  constexpr double kWeightEps = 1e-12;
  Eigen::Index row = 0;
  for (std::size_t it = 0; it < mcmc.iterations; ++it) {
    const double incl = 1.0 - s.pi;
    const double prior_log_odds = std::log(incl) - std::log1p(-incl);

    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.beta(j) != 0.0) resid += x.col(j) * s.beta(j);
      const double v = s.slab_var(j);
      const double precision = 1.0 + v * col_norm2(j);
      const double xr = x.col(j).dot(resid);
      const double log_bf = -0.5 * std::log(precision) + v * xr * xr / (2.0 * s.sigma2 * precision);
      const double prob = 1.0 / (1.0 + std::exp(-(prior_log_odds + log_bf)));
      if (rng.uniform() < prob) {
        s.z(j) = 1;
        s.beta(j) = v * xr / precision + std::sqrt(s.sigma2 * v / precision) * rng.normal();
        resid -= x.col(j) * s.beta(j);
      } else {
        s.z(j) = 0;
        s.beta(j) = 0.0;
      }
    }
    check_finite(s.beta, "beta", it);

    double slab_penalty = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.z(j)) {
        const double b2 = s.beta(j) * s.beta(j);
        s.slab_var(j) = rng.inv_gamma(prior.ig_shape + 0.5, prior.ig_scale + b2 / (2.0 * s.sigma2));
        slab_penalty += b2 / s.slab_var(j);
      } else {
        s.slab_var(j) = rng.inv_gamma(prior.ig_shape, prior.ig_scale);
      }
    }
    check_finite(s.slab_var, "slab variance", it);

    const double active = static_cast<double>(s.z.cast<int>().sum());
    s.sigma2 = rng.inv_gamma(prior.ig_shape + 0.5 * (prep.n_eff + active),
                             prior.ig_scale + 0.5 * (resid.squaredNorm() + slab_penalty));
    check_finite(s.sigma2, "sigma2", it);

    const double w = rng.beta(prior.ss_beta_a + active, prior.ss_beta_b + static_cast<double>(p) - active);
    s.pi = 1.0 - std::clamp(w, kWeightEps, 1.0 - kWeightEps);

    if (is_retained(it, mcmc)) {
      draws.beta.row(row) = s.beta.transpose();
      draws.sigma2(row) = s.sigma2;
      draws.z->row(row) = s.z.transpose();
      (*draws.pi)(row) = s.pi;
      ++row;
    }
  }
  return draws;
}

PosteriorDraws fit(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc) {
  return prior.family == PriorFamily::Horseshoe ? fit_horseshoe(data, prior, mcmc)
                                                : fit_spike_slab(data, prior, mcmc);
}

std::string run_manifest(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                         double wall_seconds) {
  std::ostringstream out;
  out << "prior=" << to_string(prior.family) << '\n';
  out << "tau_upper=" << (prior.tau_upper ? format_real(*prior.tau_upper) : "none") << '\n';
  out << "ig_shape=" << format_real(prior.ig_shape) << '\n';
  out << "ig_scale=" << format_real(prior.ig_scale) << '\n';
  out << "ss_beta_a=" << format_real(prior.ss_beta_a) << '\n';
  out << "ss_beta_b=" << format_real(prior.ss_beta_b) << '\n';
  out << "iterations=" << mcmc.iterations << '\n';
  out << "burn_in=" << mcmc.burn_in << '\n';
  out << "thin=" << mcmc.thin << '\n';
  out << "seed=" << mcmc.seed << '\n';
  out << "retained=" << mcmc.retained() << '\n';
  out << "n=" << data.n() << '\n';
  out << "p=" << data.p() << '\n';
  out << "intercept=" << (data.intercept ? 1 : 0) << '\n';
  out << "wall_seconds=" << format_real(wall_seconds) << '\n';
  return out.str();
}

}  // namespace shrinksel
