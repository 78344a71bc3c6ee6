#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shrinksel/model.hpp"

namespace shrinksel {

/// Optimal two-cluster split of a set of values. Indices refer to positions
/// in the input span.
struct TwoMeansSplit {
  IndexSet low_indices;
  IndexSet high_indices;
  double m = 0.0;  // low-cluster mean
  double M = 0.0;  // high-cluster mean
};

struct S2mConfig {
  /// Numeric b, or nullopt for the 2 * posterior-median(sigma2) rule.
  std::optional<double> b;
  double credible_level = 0.95;
  double kappa_threshold = 0.5;

  void validate() const;
};

/// Exact 1-D 2-means by scanning the contiguous splits of the sorted values.
/// Ties go to the split with the smaller high cluster. When every value is
/// identical, the last element forms a singleton high cluster and m == M.
TwoMeansSplit kmeans2_1d(std::span<const double> values);

/// Smaller cluster size of the 2-means split.
int count_signals_2m(std::span<const double> abs_beta);

/// Sequential 2-means: repeatedly re-split the low cluster while the gap
/// between the cluster means exceeds b; returns p minus the final low set.
/// Returns p when the first gap is already <= b.
int count_signals_s2m(std::span<const double> abs_beta, double b);

/// Most frequent count; ties go to the smaller count.
int aggregate_mode(std::span<const int> h_counts);

/// Indices of the H largest posterior medians of |beta_j|; ties go to the smaller index.
IndexSet select_top_h(const PosteriorDraws& draws, int h);

/// b resolved from the config: the numeric value or 2 * median(sigma2).
double resolve_b(const PosteriorDraws& draws, const S2mConfig& cfg);

SelectionResult select_s2m(const PosteriorDraws& draws, const S2mConfig& cfg);
SelectionResult select_2m(const PosteriorDraws& draws);
SelectionResult select_hppm(const PosteriorDraws& draws);
SelectionResult select_mpm(const PosteriorDraws& draws);
SelectionResult select_credible(const PosteriorDraws& draws, double level);
SelectionResult select_ht(const PosteriorDraws& draws, double threshold);

/// Runs one method with its parameters taken from cfg.
SelectionResult select(const PosteriorDraws& draws, Method method, const S2mConfig& cfg);

/// Type-7 (linear interpolation) empirical quantile.
double empirical_quantile(std::vector<double> values, double prob);
double median(std::vector<double> values);

/// CSV rows: method,h_mode,n_selected,selected,b,level,threshold,error.
/// Selected indices are 1-based and space separated.
std::string selection_csv_header();
std::string selection_csv_row(const SelectionResult& result);
std::string selection_csv_error_row(Method method, const std::string& error);

/// Human-readable summary of a result.
std::string selection_report(const SelectionResult& result);

/// Parses the selection CSV back into (method, selected) pairs; rows carrying an error are skipped.
std::vector<SelectionResult> read_selection_csv(const std::filesystem::path& path);

}  // namespace shrinksel
