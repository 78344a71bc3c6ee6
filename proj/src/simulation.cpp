#include "shrinksel/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "shrinksel/diagnostics.hpp"
#include "shrinksel/rng.hpp"

namespace shrinksel {

namespace {

constexpr int kPairRetries = 20;

std::size_t uniform_index(Rng& rng, std::size_t bound) {
  return std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(bound)), bound - 1);
}

// First k entries of a Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::vector<std::size_t> pool, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

Eigen::VectorXd normal_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

std::string prior_tag(PriorFamily family) { return family == PriorFamily::Horseshoe ? "hs" : "ss"; }

}  // namespace

void SimConfig::validate() const {
  if (n == 0 || p == 0) throw InvariantError("n and p must be positive");
  if (r == 0 || r > p) throw InvariantError("r must lie in [1, p]");
  if (strengths.size() != r) throw InvariantError("strengths must have exactly r entries");
  for (double s : strengths) {
    if (!std::isfinite(s)) throw InvariantError("strengths must be finite");
  }
  if (correlated) {
    if (cor_pairs > r) throw InvariantError("cor_pairs must not exceed r");
    if (cor_pairs > p - r) throw InvariantError("cor_pairs must not exceed the number of noise columns");
    if (!(cor_target > 0.0 && cor_target < 1.0)) throw InvariantError("cor_target must lie in (0, 1)");
  }
  if (!(noise_sd >= 0.0 && std::isfinite(noise_sd))) throw InvariantError("noise_sd must be >= 0");
  if (replicates == 0) throw InvariantError("replicates must be positive");
}

std::string SimConfig::setting_label() const {
  return "n" + std::to_string(n) + "-p" + std::to_string(p) + "-r" + std::to_string(r) +
         (correlated ? "-cor" : "-uncor");
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  return (ca * cb).sum() / std::sqrt((ca * ca).sum() * (cb * cb).sum());
}

SimDesign gen_design(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, Stream::Design));
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto p = static_cast<Eigen::Index>(cfg.p);

  SimDesign d;
  d.intercept = cfg.intercept;
  d.x.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j) d.x.col(j) = normal_vector(rng, n);

  std::vector<std::size_t> all(cfg.p);
  for (std::size_t j = 0; j < cfg.p; ++j) all[j] = j;
  const auto signals = sample_without_replacement(rng, all, cfg.r);
  d.truth = signals;
  std::sort(d.truth.begin(), d.truth.end());
  d.beta_true = Eigen::VectorXd::Zero(p);
  for (std::size_t k = 0; k < cfg.r; ++k) d.beta_true(static_cast<Eigen::Index>(d.truth[k])) = cfg.strengths[k];

  if (cfg.correlated && cfg.cor_pairs > 0) {
    std::vector<std::size_t> noise;
    std::set_difference(all.begin(), all.end(), d.truth.begin(), d.truth.end(), std::back_inserter(noise));
    const auto paired_signals = sample_without_replacement(rng, d.truth, cfg.cor_pairs);
    const auto paired_noise = sample_without_replacement(rng, noise, cfg.cor_pairs);
    for (std::size_t k = 0; k < cfg.cor_pairs; ++k) {
      const auto s = static_cast<Eigen::Index>(paired_signals[k]);
      const auto z = static_cast<Eigen::Index>(paired_noise[k]);
      const Eigen::VectorXd signal = d.x.col(s);
      bool placed = false;
      for (int attempt = 0; attempt < kPairRetries && !placed; ++attempt) {
        const Eigen::VectorXd eps = normal_vector(rng, n);
        auto corr_at = [&](double delta) { return correlation(signal, signal + delta * eps); };
        double lo = 0.0;
        double hi = 1.0;
        while (corr_at(hi) > cfg.cor_target && hi < 1e6) hi *= 2.0;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          (corr_at(mid) > cfg.cor_target ? lo : hi) = mid;
        }
        if (lo > 0.0 && corr_at(lo) > cfg.cor_target) {
          d.x.col(z) = signal + lo * eps;
          placed = true;
        }
      }
      if (!placed) {
        throw InvariantError("correlation target " + format_real(cfg.cor_target) + " unattainable for column " +
                             std::to_string(s + 1));
      }
      d.cor_pairs.emplace_back(paired_signals[k], paired_noise[k]);
    }
  }

  if (cfg.standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      auto col = d.x.col(j);
      col.array() -= col.mean();
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
      if (sd > 0.0) col /= sd;
    }
  }
  return d;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const IndexSet& truth, std::span<const double> strengths,
                             double noise_sd, std::uint64_t seed) {
  if (truth.size() != strengths.size()) throw InvariantError("truth and strengths differ in length");
  if (!(noise_sd >= 0.0)) throw InvariantError("noise_sd must be >= 0");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] >= static_cast<std::size_t>(x.cols())) throw InvariantError("truth index outside the design");
    beta(static_cast<Eigen::Index>(truth[k])) = strengths[k];
  }
  Rng rng(seed);
  Eigen::VectorXd y = x * beta;
  if (noise_sd > 0.0) y += noise_sd * normal_vector(rng, x.rows());
  return y;
}

ErrorCounts score(const IndexSet& selected, const IndexSet& truth) {
  IndexSet sel = selected;
  IndexSet tru = truth;
  std::sort(sel.begin(), sel.end());
  std::sort(tru.begin(), tru.end());
  IndexSet both;
  std::set_intersection(sel.begin(), sel.end(), tru.begin(), tru.end(), std::back_inserter(both));
  return {static_cast<int>(tru.size() - both.size()), static_cast<int>(sel.size() - both.size())};
}

std::uint64_t response_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, Stream::Response, replicate);
}

std::uint64_t chain_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, Stream::Chain, replicate);
}

BenchmarkReport run_benchmark(const SimConfig& cfg, const PriorSpec& prior, const std::vector<Method>& methods,
                              const McmcConfig& mcmc, const S2mConfig& selection, std::size_t jobs) {
  cfg.validate();
  prior.validate();
  mcmc.validate();
  selection.validate();
  if (methods.empty()) throw InvariantError("no selection methods requested");
  const auto design = gen_design(cfg);

  struct Outcome {
    std::vector<ErrorCounts> counts;
    std::vector<std::string> errors;
  };
  std::vector<Outcome> outcomes(cfg.replicates);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cfg.replicates; k = next++) {
      auto& out = outcomes[k];
      out.counts.assign(methods.size(), {});
      out.errors.assign(methods.size(), {});
      try {
        Dataset data;
        data.x = design.x;
        data.y = gen_response(design.x, design.truth, cfg.strengths, cfg.noise_sd, response_seed(cfg.seed, k));
        data.truth = design.truth;
        data.intercept = design.intercept;
        McmcConfig chain = mcmc;
        chain.seed = chain_seed(cfg.seed, k);
        const auto draws = fit(data, prior, chain);
        for (std::size_t m = 0; m < methods.size(); ++m) {
          try {
            out.counts[m] = score(select(draws, methods[m], selection).selected, design.truth);
          } catch (const std::exception& e) {
            out.errors[m] = e.what();
          }
        }
      } catch (const std::exception& e) {
        std::fill(out.errors.begin(), out.errors.end(), std::string("replicate failed: ") + e.what());
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cfg.replicates));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchmarkReport report;
  report.setting = cfg.setting_label();
  report.prior = prior.family;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    ErrorReport er;
    er.method = methods[m];
    double mask = 0.0;
    double swamp = 0.0;
    for (std::size_t k = 0; k < cfg.replicates; ++k) {
      const auto& out = outcomes[k];
      if (!out.errors[m].empty()) {
        er.failures.emplace_back(k, out.errors[m]);
        continue;
      }
      er.per_replicate.push_back(out.counts[m]);
      er.replicate_ids.push_back(k);
      mask += out.counts[m].masking;
      swamp += out.counts[m].swamping;
    }
    if (!er.failures.empty()) {
      warn(prior_tag(prior.family) + "+" + to_string(methods[m]) + ": " + std::to_string(er.failures.size()) +
           " replicate(s) failed and are excluded from the mean");
    }
    const auto ok = static_cast<double>(er.per_replicate.size());
    er.masking = ok > 0 ? mask / ok : std::numeric_limits<double>::quiet_NaN();
    er.swamping = ok > 0 ? swamp / ok : std::numeric_limits<double>::quiet_NaN();
    report.methods.push_back(std::move(er));
  }
  return report;
}

std::string benchmark_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "method,setting,masking,swamping\n";
  for (const auto& m : report.methods) {
    out << prior_tag(report.prior) << '+' << to_string(m.method) << ',' << report.setting << ','
        << format_real(m.masking) << ',' << format_real(m.swamping) << '\n';
  }
  return out.str();
}

std::string benchmark_detail_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "method,setting,replicate,masking,swamping,error\n";
  for (const auto& m : report.methods) {
    const auto tag = prior_tag(report.prior) + '+' + to_string(m.method);
    for (std::size_t k = 0; k < m.per_replicate.size(); ++k) {
      out << tag << ',' << report.setting << ',' << m.replicate_ids[k] + 1 << ',' << m.per_replicate[k].masking
          << ',' << m.per_replicate[k].swamping << ",\n";
    }
    for (const auto& [k, err] : m.failures) {
      std::string clean = err;
      std::replace(clean.begin(), clean.end(), ',', ';');
      out << tag << ',' << report.setting << ',' << k + 1 << ",,," << clean << '\n';
    }
  }
  return out.str();
}

}  // namespace shrinksel
