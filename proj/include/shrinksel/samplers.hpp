#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "shrinksel/model.hpp"

namespace shrinksel {

/// Raised when a chain produces a non-finite value.
class SamplerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct McmcConfig {
  std::size_t iterations = 5000;
  std::size_t burn_in = 2000;
  std::uint64_t seed = 1;
  std::size_t thin = 1;

  /// Number of retained draws, (iterations - burn_in) / thin.
  [[nodiscard]] std::size_t retained() const;
  void validate() const;
};

struct HorseshoeState {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::VectorXd lambda;  // local variance scales
  double tau = 1.0;        // global variance scale
  Eigen::VectorXd nu;      // auxiliary for lambda
  double xi = 1.0;         // auxiliary for tau
};

struct SpikeSlabState {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> z;
  double pi = 15.0 / 16.0;  // spike weight
  Eigen::VectorXd slab_var;
};

/// Gibbs sampler for the horseshoe prior using the inverse-gamma
/// auxiliary-variable form of the half-Cauchy scales. Draws beta with an
/// n x n solve when p > n and a p x p Cholesky otherwise.
///
/// `beta_start` overrides the default all-zero starting point.
PosteriorDraws fit_horseshoe(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                             const std::optional<Eigen::VectorXd>& beta_start = std::nullopt);

/// Gibbs sampler for the point-mass spike-and-slab prior. Each (z_j, beta_j)
/// pair is drawn jointly given the rest, with beta_j integrated out of the
/// inclusion probability. Excluded slab variances are refreshed from their prior.
PosteriorDraws fit_spike_slab(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                              const std::optional<Eigen::VectorXd>& beta_start = std::nullopt);

/// Dispatches on prior.family.
PosteriorDraws fit(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc);

/// Plain key=value record of a fit for provenance.
std::string run_manifest(const Dataset& data, const PriorSpec& prior, const McmcConfig& mcmc,
                         double wall_seconds);

}  // namespace shrinksel
