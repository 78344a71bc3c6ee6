#include "shrinksel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "shrinksel/csv.hpp"
#include "shrinksel/diagnostics.hpp"

namespace shrinksel {

namespace {

std::vector<double> abs_row(const PosteriorDraws& draws, Eigen::Index i) {
  std::vector<double> out(draws.p());
  for (Eigen::Index j = 0; j < draws.beta.cols(); ++j) out[static_cast<std::size_t>(j)] = std::abs(draws.beta(i, j));
  return out;
}

SelectionResult finish(Method method, IndexSet selected) {
  SelectionResult r;
  r.method = method;
  r.h_mode = static_cast<int>(selected.size());
  r.selected = std::move(selected);
  return r;
}

void require_draws(const PosteriorDraws& draws) {
  draws.validate();
  if (draws.p() < 2) throw InvariantError("selection needs p >= 2");
}

std::string join_indices(const IndexSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k > 0) out += ' ';
    out += std::to_string(set[k] + 1);
  }
  return out;
}

}  // namespace

void S2mConfig::validate() const {
  if (b && !(*b > 0.0 && std::isfinite(*b))) throw InvariantError("b must be > 0");
  if (!(credible_level > 0.0 && credible_level < 1.0)) throw InvariantError("credible level must lie in (0, 1)");
  if (!(kappa_threshold > 0.0 && kappa_threshold < 1.0)) throw InvariantError("kappa threshold must lie in (0, 1)");
}

TwoMeansSplit kmeans2_1d(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw InvariantError("2-means needs at least 2 values");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvariantError("2-means values must be finite and >= 0");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  TwoMeansSplit split;
  std::size_t low_size = 0;
  if (values[order.front()] == values[order.back()]) {
    low_size = n - 1;
    split.m = split.M = values[order.front()];
  } else {
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + values[order[k]];
    const double total = prefix[n];
    const double dn = static_cast<double>(n);

    // Minimizing the within-cluster SS is maximizing k (n - k) / n * (M - m)^2.
    double best = -1.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double dk = static_cast<double>(k);
      const double gap = (total - prefix[k]) / (dn - dk) - prefix[k] / dk;
      const double between = dk * (dn - dk) / dn * gap * gap;
      if (between >= best) {
        best = between;
        low_size = k;
      }
    }
    split.m = prefix[low_size] / static_cast<double>(low_size);
    split.M = (total - prefix[low_size]) / static_cast<double>(n - low_size);
  }

  split.low_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(low_size));
  split.high_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(low_size), order.end());
  std::sort(split.low_indices.begin(), split.low_indices.end());
  std::sort(split.high_indices.begin(), split.high_indices.end());
  return split;
}

int count_signals_2m(std::span<const double> abs_beta) {
  const auto split = kmeans2_1d(abs_beta);
  return static_cast<int>(std::min(split.low_indices.size(), split.high_indices.size()));
}

int count_signals_s2m(std::span<const double> abs_beta, double b) {
  if (!(b > 0.0)) throw InvariantError("b must be > 0");
  const std::size_t p = abs_beta.size();
  auto split = kmeans2_1d(abs_beta);

  IndexSet noise;  // the set A, as positions in abs_beta
  std::vector<double> sub;
  while (split.M - split.m > b) {
    IndexSet next;
    next.reserve(split.low_indices.size());
    for (std::size_t k : split.low_indices) next.push_back(noise.empty() ? k : noise[k]);
    noise = std::move(next);
    if (noise.size() < 2) break;
    sub.clear();
    for (std::size_t k : noise) sub.push_back(abs_beta[k]);
    split = kmeans2_1d(sub);
  }
  return static_cast<int>(p - noise.size());
}

int aggregate_mode(std::span<const int> h_counts) {
  if (h_counts.empty()) throw InvariantError("mode of an empty count vector");
  std::map<int, std::size_t> freq;
  for (int h : h_counts) ++freq[h];
  int best = freq.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [h, c] : freq) {
    if (c > best_count) {  // ascending keys, so ties keep the smaller h
      best = h;
      best_count = c;
    }
  }
  return best;
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvariantError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return empirical_quantile(std::move(values), 0.5); }

IndexSet select_top_h(const PosteriorDraws& draws, int h) {
  const std::size_t p = draws.p();
  if (h < 0 || static_cast<std::size_t>(h) > p) {
    throw InvariantError("H = " + std::to_string(h) + " outside [0, " + std::to_string(p) + "]");
  }
  std::vector<double> med(p);
  std::vector<double> column(draws.iterations());
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < column.size(); ++i) {
      column[i] = std::abs(draws.beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    med[j] = median(column);
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return med[a] > med[b]; });
  IndexSet out(order.begin(), order.begin() + h);
  std::sort(out.begin(), out.end());
  return out;
}

double resolve_b(const PosteriorDraws& draws, const S2mConfig& cfg) {
  if (cfg.b) return *cfg.b;
  const auto& s = draws.sigma2;
  return 2.0 * median(std::vector<double>(s.data(), s.data() + s.size()));
}

SelectionResult select_s2m(const PosteriorDraws& draws, const S2mConfig& cfg) {
  require_draws(draws);
  cfg.validate();
  const double b = resolve_b(draws, cfg);
  SelectionResult r;
  r.method = Method::S2M;
  r.h_counts.reserve(draws.iterations());
  std::size_t saturated = 0;
  for (Eigen::Index i = 0; i < draws.beta.rows(); ++i) {
    const auto row = abs_row(draws, i);
    r.h_counts.push_back(count_signals_s2m(row, b));
    if (static_cast<std::size_t>(r.h_counts.back()) == draws.p()) ++saturated;
  }
  if (saturated > 0) {
    warn("s2m: " + std::to_string(saturated) + " of " + std::to_string(draws.iterations()) +
         " draws had a first cluster gap <= b and count every variable as a signal");
  }
  r.h_mode = aggregate_mode(r.h_counts);
  r.selected = select_top_h(draws, r.h_mode);
  r.params = {{"b", b}};
  return r;
}

SelectionResult select_2m(const PosteriorDraws& draws) {
  require_draws(draws);
  SelectionResult r;
  r.method = Method::TwoM;
  r.h_counts.reserve(draws.iterations());
  for (Eigen::Index i = 0; i < draws.beta.rows(); ++i) r.h_counts.push_back(count_signals_2m(abs_row(draws, i)));
  r.h_mode = aggregate_mode(r.h_counts);
  r.selected = select_top_h(draws, r.h_mode);
  return r;
}

SelectionResult select_hppm(const PosteriorDraws& draws) {
  draws.validate();
  if (!draws.z) throw InputError("hppm needs inclusion indicators (z columns)");
  const auto& z = *draws.z;
  std::map<IndexSet, std::size_t> freq;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    IndexSet pattern;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (z(i, j)) pattern.push_back(static_cast<std::size_t>(j));
    }
    ++freq[pattern];
  }
  const IndexSet* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [pattern, count] : freq) {
    // map order is lexicographic, so only strictly better candidates replace
    if (count > best_count || (count == best_count && pattern.size() < best->size())) {
      best = &pattern;
      best_count = count;
    }
  }
  return finish(Method::HPPM, *best);
}

SelectionResult select_mpm(const PosteriorDraws& draws) {
  draws.validate();
  if (!draws.z) throw InputError("mpm needs inclusion indicators (z columns)");
  const auto& z = *draws.z;
  IndexSet selected;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const auto hits = z.col(j).cast<std::size_t>().sum();
    if (2 * hits >= static_cast<std::size_t>(z.rows())) selected.push_back(static_cast<std::size_t>(j));
  }
  return finish(Method::MPM, std::move(selected));
}

SelectionResult select_credible(const PosteriorDraws& draws, double level) {
  draws.validate();
  if (!(level > 0.0 && level < 1.0)) throw InvariantError("credible level must lie in (0, 1)");
  const double tail = 0.5 * (1.0 - level);
  IndexSet selected;
  std::vector<double> column(draws.iterations());
  for (Eigen::Index j = 0; j < draws.beta.cols(); ++j) {
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = draws.beta(static_cast<Eigen::Index>(i), j);
    const double lo = empirical_quantile(column, tail);
    const double hi = empirical_quantile(column, 1.0 - tail);
    if (lo > 0.0 || hi < 0.0) selected.push_back(static_cast<std::size_t>(j));
  }
  auto r = finish(Method::CS, std::move(selected));
  r.params = {{"level", level}};
  return r;
}

SelectionResult select_ht(const PosteriorDraws& draws, double threshold) {
  draws.validate();
  if (!draws.lambda) throw InputError("ht needs local scale draws (lambda columns)");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvariantError("kappa threshold must lie in (0, 1)");
  const Eigen::VectorXd kappa = (1.0 + draws.lambda->array()).inverse().colwise().mean();
  IndexSet selected;
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    if (kappa(j) < threshold) selected.push_back(static_cast<std::size_t>(j));
  }
  auto r = finish(Method::HT, std::move(selected));
  r.params = {{"threshold", threshold}};
  return r;
}

SelectionResult select(const PosteriorDraws& draws, Method method, const S2mConfig& cfg) {
  switch (method) {
    case Method::S2M: return select_s2m(draws, cfg);
    case Method::TwoM: return select_2m(draws);
    case Method::HPPM: return select_hppm(draws);
    case Method::MPM: return select_mpm(draws);
    case Method::CS: return select_credible(draws, cfg.credible_level);
    case Method::HT: return select_ht(draws, cfg.kappa_threshold);
  }
  throw InvariantError("unknown method");
}

std::string selection_csv_header() { return "method,h_mode,n_selected,selected,b,level,threshold,error\n"; }

std::string selection_csv_row(const SelectionResult& result) {
  auto param = [&](const std::string& name) -> std::string {
    for (const auto& [k, v] : result.params) {
      if (k == name) return format_real(v);
    }
    return "";
  };
  return to_string(result.method) + ',' + std::to_string(result.h_mode) + ',' +
         std::to_string(result.selected.size()) + ',' + join_indices(result.selected) + ',' + param("b") + ',' +
         param("level") + ',' + param("threshold") + ",\n";
}

std::string selection_csv_error_row(Method method, const std::string& error) {
  std::string clean = error;
  std::replace(clean.begin(), clean.end(), ',', ';');
  std::replace(clean.begin(), clean.end(), '\n', ' ');
  return to_string(method) + ",,,,,,," + clean + '\n';
}

std::string selection_report(const SelectionResult& result) {
  std::ostringstream out;
  out << "method: " << to_string(result.method) << '\n';
  out << "H: " << result.h_mode << '\n';
  out << "selected (" << result.selected.size() << "): " << join_indices(result.selected) << '\n';
  for (const auto& [k, v] : result.params) out << k << ": " << format_real(v) << '\n';
  if (!result.h_counts.empty()) {
    std::map<int, std::size_t> freq;
    for (int h : result.h_counts) ++freq[h];
    out << "per-draw counts:";
    for (const auto& [h, c] : freq) out << ' ' << h << 'x' << c;
    out << '\n';
  }
  return out.str();
}

std::vector<SelectionResult> read_selection_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty selection file");
  const auto header = csv::split_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_method = col("method");
  const auto c_h = col("h_mode");
  const auto c_sel = col("selected");
  const auto c_err = col("error");

  std::vector<SelectionResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size()) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) + " has the wrong number of cells");
    }
    if (!cells[c_err].empty()) continue;
    SelectionResult r;
    r.method = parse_method(cells[c_method]);
    std::istringstream sel(cells[c_sel]);
    long idx = 0;
    while (sel >> idx) {
      if (idx < 1) throw InputError(path.string() + ": index below 1 at line " + std::to_string(line_no));
      r.selected.push_back(static_cast<std::size_t>(idx - 1));
    }
    if (!sel.eof()) throw InputError(path.string() + ": bad index list at line " + std::to_string(line_no));
    std::sort(r.selected.begin(), r.selected.end());
    double h = 0.0;
    r.h_mode = csv::parse_real(cells[c_h], h) ? static_cast<int>(h) : static_cast<int>(r.selected.size());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace shrinksel
