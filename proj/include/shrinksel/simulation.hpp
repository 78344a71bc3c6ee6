#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shrinksel/model.hpp"
#include "shrinksel/samplers.hpp"
#include "shrinksel/selection.hpp"

namespace shrinksel {

struct SimConfig {
  std::size_t n = 50;
  std::size_t p = 300;
  std::size_t r = 10;
  std::vector<double> strengths = std::vector<double>(10, 4.0);
  bool correlated = false;
  std::size_t cor_pairs = 2;
  double cor_target = 0.99;
  double noise_sd = 1.0;
  bool intercept = true;
  bool standardize = false;
  std::uint64_t seed = 1;
  std::size_t replicates = 5;

  void validate() const;
  /// Short label such as "n50-p300-r10-uncor".
  [[nodiscard]] std::string setting_label() const;
};

/// Fixed covariates and signal placement shared by all replicates.
struct SimDesign {
  Eigen::MatrixXd x;           // n x p covariates (intercept implicit)
  IndexSet truth;              // sorted
  Eigen::VectorXd beta_true;   // p, strengths on truth
  std::vector<std::pair<std::size_t, std::size_t>> cor_pairs;  // (signal, noise)
  bool intercept = true;
};

/// Independent N(0, 1) covariates with signals placed uniformly at random.
/// Correlated designs overwrite cor_pairs noise columns with
/// signal + delta * N(0, 1), delta found by bisection so that the empirical
/// correlation exceeds cor_target.
SimDesign gen_design(const SimConfig& cfg);

/// y = X beta_true + noise_sd * eps.
Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const IndexSet& truth, std::span<const double> strengths,
                             double noise_sd, std::uint64_t seed);

struct ErrorCounts {
  int masking = 0;
  int swamping = 0;
};

/// masking = |truth \ selected|, swamping = |selected \ truth|.
ErrorCounts score(const IndexSet& selected, const IndexSet& truth);

struct ErrorReport {
  Method method = Method::S2M;
  double masking = 0.0;   // mean over successful replicates
  double swamping = 0.0;
  std::vector<ErrorCounts> per_replicate;
  std::vector<std::size_t> replicate_ids;
  std::vector<std::pair<std::size_t, std::string>> failures;
};

struct BenchmarkReport {
  std::string setting;
  PriorFamily prior = PriorFamily::Horseshoe;
  std::vector<ErrorReport> methods;
};

/// Response seed of replicate k: derive_seed(master, Response, k).
std::uint64_t response_seed(std::uint64_t master, std::size_t replicate);
/// Chain seed of replicate k: derive_seed(master, Chain, k).
std::uint64_t chain_seed(std::uint64_t master, std::size_t replicate);

/// One design, then per replicate: new response, one chain, every selector, scores.
/// Replicates may run on `jobs` threads; the fold is ordered by replicate index.
BenchmarkReport run_benchmark(const SimConfig& cfg, const PriorSpec& prior, const std::vector<Method>& methods,
                              const McmcConfig& mcmc, const S2mConfig& selection = {}, std::size_t jobs = 1);

/// CSV: method,setting,masking,swamping  (method tagged with the prior, e.g. "hs+s2m")
std::string benchmark_csv(const BenchmarkReport& report);
/// CSV: method,setting,replicate,masking,swamping,error
std::string benchmark_detail_csv(const BenchmarkReport& report);

/// Sample Pearson correlation of two equal-length columns.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace shrinksel
