#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shrinksel {

/// Raised when a value violates a documented type invariant.
class InvariantError : public std::invalid_argument {
public:
  explicit InvariantError(const std::string& what)
      : std::invalid_argument("invariant violation: " + what) {}
};

/// Raised for malformed external input (files, configs, flags).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using IndexSet = std::vector<std::size_t>;  // 0-based, sorted ascending
using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Gaussian linear model data: y = X beta + eps.
///
/// `x` holds the p covariates only. When `intercept` is set the model also
/// carries an unpenalized intercept whose all-ones column is implicit; it
/// never takes part in selection or scoring.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::optional<IndexSet> truth;
  bool intercept = false;

  [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(x.cols()); }

  void validate() const;
};

enum class PriorFamily { Horseshoe, SpikeSlab };

std::string to_string(PriorFamily family);
PriorFamily parse_prior_family(const std::string& name);

/// Hyperparameters for both supported prior families.
///
/// Horseshoe:  beta_j ~ N(0, lambda_j tau sigma2), sqrt(lambda_j), sqrt(tau) ~ C+(0,1),
///             optional truncation tau <= tau_upper.
/// SpikeSlab:  beta_j ~ pi delta_0 + (1 - pi) N(0, sigma2 sigma_j2),
///             sigma_j2 ~ IG(ig_shape, ig_scale), 1 - pi ~ Beta(ss_beta_a, ss_beta_b).
/// Both:       sigma2 ~ IG(ig_shape, ig_scale).
struct PriorSpec {
  PriorFamily family = PriorFamily::Horseshoe;
  std::optional<double> tau_upper;
  double ig_shape = 1.5;
  double ig_scale = 1.5;
  double ss_beta_a = 1.0;
  double ss_beta_b = 15.0;

  static PriorSpec horseshoe(std::optional<double> tau_upper = 1.0);
  static PriorSpec spike_slab();

  void validate() const;
};

/// Retained MCMC output, one row per retained iteration.
struct PosteriorDraws {
  Eigen::MatrixXd beta;    // T x p
  Eigen::VectorXd sigma2;  // T
  std::optional<Eigen::MatrixXd> lambda;  // T x p, horseshoe local variance scales
  std::optional<Eigen::VectorXd> tau;     // T, horseshoe global variance scale
  std::optional<ByteMatrix> z;            // T x p, spike-and-slab inclusion indicators
  std::optional<Eigen::VectorXd> pi;      // T, spike weight

  [[nodiscard]] std::size_t iterations() const { return static_cast<std::size_t>(beta.rows()); }
  [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(beta.cols()); }

  void validate() const;
};

enum class Method { S2M, TwoM, HPPM, MPM, CS, HT };

std::string to_string(Method method);
Method parse_method(const std::string& name);
const std::vector<std::string>& method_names();

struct SelectionResult {
  Method method = Method::S2M;
  IndexSet selected;
  std::vector<int> h_counts;  // per retained draw; empty unless S2M / 2-M
  int h_mode = 0;
  std::vector<std::pair<std::string, double>> params;

  void validate(std::size_t p) const;
};

/// Writes draws in the documented CSV layout (header, one row per draw).
void save_draws(const PosteriorDraws& draws, const std::filesystem::path& path);
PosteriorDraws load_draws(const std::filesystem::path& path);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest text that round-trips at 17 significant digits.
std::string format_real(double value);

}  // namespace shrinksel
