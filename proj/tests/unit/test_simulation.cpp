#include <gtest/gtest.h>

#include <cmath>

#include "shrinksel/simulation.hpp"
#include "test_support.hpp"

using namespace shrinksel;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.n = 40;
  cfg.p = 60;
  cfg.r = 4;
  cfg.strengths = {6, 6, 6, 6};
  cfg.replicates = 3;
  return cfg;
}

McmcConfig short_chain() {
  McmcConfig m;
  m.iterations = 600;
  m.burn_in = 200;
  return m;
}

}  // namespace

TEST(Design, UncorrelatedColumns) {
  SimConfig cfg;
  const auto d = gen_design(cfg);
  ASSERT_EQ(d.x.rows(), 50);
  ASSERT_EQ(d.x.cols(), 300);
  EXPECT_TRUE(d.cor_pairs.empty());
  // With 44850 pairs at n = 50 the largest |r| lands near 0.55, so 0.5 bounds almost every pair, not all.
  double worst = 0.0;
  int above = 0;
  for (Eigen::Index a = 0; a < d.x.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < d.x.cols(); ++b) {
      const double r = std::abs(correlation(d.x.col(a), d.x.col(b)));
      worst = std::max(worst, r);
      above += r >= 0.5;
    }
  }
  EXPECT_LT(worst, 0.7);
  EXPECT_LT(above, 45);
  // Empirical entry moments of a standard normal matrix.
  EXPECT_NEAR(d.x.mean(), 0.0, 0.02);
  EXPECT_NEAR(d.x.array().square().mean(), 1.0, 0.03);
  ASSERT_EQ(d.truth.size(), 10u);
  EXPECT_TRUE(std::is_sorted(d.truth.begin(), d.truth.end()));
  EXPECT_LT(d.truth.back(), 300u);
  EXPECT_EQ((d.beta_true.array() != 0.0).count(), 10);
}

TEST(Design, CorrelatedPairsExceedTarget) {
  SimConfig cfg;
  cfg.correlated = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.seed = seed;
    const auto d = gen_design(cfg);
    ASSERT_EQ(d.cor_pairs.size(), 2u);
    for (const auto& [s, z] : d.cor_pairs) {
      EXPECT_TRUE(std::binary_search(d.truth.begin(), d.truth.end(), s));
      EXPECT_FALSE(std::binary_search(d.truth.begin(), d.truth.end(), z));
      EXPECT_GT(correlation(d.x.col(static_cast<Eigen::Index>(s)), d.x.col(static_cast<Eigen::Index>(z))), 0.99);
    }
  }
}

TEST(Design, DeterministicPerSeed) {
  SimConfig cfg = small_config();
  cfg.correlated = true;
  const auto a = gen_design(cfg);
  const auto b = gen_design(cfg);
  EXPECT_TRUE(a.x == b.x);
  EXPECT_EQ(a.truth, b.truth);
  cfg.seed = 2;
  EXPECT_FALSE(gen_design(cfg).x == a.x);
}

TEST(Design, Standardized) {
  SimConfig cfg;
  cfg.n = 100;
  cfg.p = 2000;
  cfg.r = 30;
  cfg.strengths.assign(30, 4.0);
  cfg.standardize = true;
  const auto d = gen_design(cfg);
  for (Eigen::Index j = 0; j < d.x.cols(); j += 97) {
    EXPECT_NEAR(d.x.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(d.x.col(j).squaredNorm() / 99.0, 1.0, 1e-12);
  }
  Dataset data;
  data.x = d.x;
  data.y = gen_response(d.x, d.truth, cfg.strengths, 1.0, 3);
  data.truth = d.truth;
  EXPECT_NO_THROW(data.validate());
}

TEST(Design, Validation) {
  SimConfig cfg = small_config();
  cfg.r = 61;
  cfg.strengths.assign(61, 1.0);
  EXPECT_THROW(gen_design(cfg), InvariantError);
  cfg = small_config();
  cfg.strengths.pop_back();
  EXPECT_THROW(cfg.validate(), InvariantError);
  cfg = small_config();
  cfg.correlated = true;
  cfg.cor_pairs = 5;
  EXPECT_THROW(cfg.validate(), InvariantError);
  cfg.cor_pairs = 2;
  cfg.cor_target = 1.0;
  EXPECT_THROW(cfg.validate(), InvariantError);
}

TEST(Response, NoiseFree) {
  const auto d = gen_design(small_config());
  const auto y = gen_response(d.x, d.truth, std::vector<double>{6, 6, 6, 6}, 0.0, 1);
  EXPECT_TRUE(y.isApprox(d.x * d.beta_true, 1e-15));
  EXPECT_TRUE(y == d.x * d.beta_true);
}

TEST(Response, NullModelVariance) {
  SimConfig cfg = small_config();
  cfg.n = 4000;
  const auto d = gen_design(cfg);
  const double sd = 2.5;
  const auto y = gen_response(d.x, d.truth, std::vector<double>(4, 0.0), sd, 9);
  const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
  const double se = sd * sd * std::sqrt(2.0 / static_cast<double>(y.size() - 1));
  EXPECT_NEAR(var, sd * sd, 3 * se);
}

TEST(Response, Validation) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  EXPECT_THROW(gen_response(x, IndexSet{0}, std::vector<double>{1, 2}, 1.0, 1), InvariantError);
  EXPECT_THROW(gen_response(x, IndexSet{5}, std::vector<double>{1}, 1.0, 1), InvariantError);
}

TEST(Score, Examples) {
  IndexSet truth;
  for (std::size_t i = 0; i < 10; ++i) truth.push_back(i);
  auto s = score(truth, truth);
  EXPECT_EQ(s.masking, 0);
  EXPECT_EQ(s.swamping, 0);
  s = score({}, truth);
  EXPECT_EQ(s.masking, 10);
  EXPECT_EQ(s.swamping, 0);
  IndexSet sel{0, 1, 2, 3, 4, 5, 6, 7, 8, 10};
  s = score(sel, truth);
  EXPECT_EQ(s.masking, 1);
  EXPECT_EQ(s.swamping, 1);
}

TEST(Seeds, DistinctStreams) {
  EXPECT_NE(response_seed(1, 0), response_seed(1, 1));
  EXPECT_NE(response_seed(1, 0), chain_seed(1, 0));
  EXPECT_NE(response_seed(1, 0), response_seed(2, 0));
  EXPECT_EQ(chain_seed(5, 3), chain_seed(5, 3));
}

TEST(Benchmark, MatchesManualComposition) {
  const auto cfg = small_config();
  const auto prior = PriorSpec::horseshoe();
  const std::vector<Method> methods{Method::S2M, Method::TwoM, Method::CS};
  const auto report = run_benchmark(cfg, prior, methods, short_chain());
  const auto design = gen_design(cfg);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    double mask = 0.0, swamp = 0.0;
    for (std::size_t k = 0; k < cfg.replicates; ++k) {
      Dataset data;
      data.x = design.x;
      data.y = gen_response(design.x, design.truth, cfg.strengths, cfg.noise_sd, response_seed(cfg.seed, k));
      data.intercept = cfg.intercept;
      auto chain = short_chain();
      chain.seed = chain_seed(cfg.seed, k);
      const auto s = score(select(fit(data, prior, chain), methods[m], S2mConfig{}).selected, design.truth);
      EXPECT_EQ(report.methods[m].per_replicate[k].masking, s.masking);
      EXPECT_EQ(report.methods[m].per_replicate[k].swamping, s.swamping);
      mask += s.masking;
      swamp += s.swamping;
    }
    EXPECT_DOUBLE_EQ(report.methods[m].masking, mask / static_cast<double>(cfg.replicates));
    EXPECT_DOUBLE_EQ(report.methods[m].swamping, swamp / static_cast<double>(cfg.replicates));
  }
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
  const auto cfg = small_config();
  const std::vector<Method> methods{Method::S2M, Method::HT};
  const auto one = run_benchmark(cfg, PriorSpec::horseshoe(), methods, short_chain(), {}, 1);
  const auto three = run_benchmark(cfg, PriorSpec::horseshoe(), methods, short_chain(), {}, 3);
  EXPECT_EQ(benchmark_csv(one), benchmark_csv(three));
  EXPECT_EQ(benchmark_detail_csv(one), benchmark_detail_csv(three));
}

TEST(Benchmark, FailuresAreExcludedAndReported) {
  test_util::WarningCapture capture;
  const auto cfg = small_config();
  const auto report =
      run_benchmark(cfg, PriorSpec::horseshoe(), {Method::S2M, Method::MPM}, short_chain());
  EXPECT_EQ(report.methods[0].failures.size(), 0u);
  EXPECT_EQ(report.methods[1].failures.size(), cfg.replicates);
  EXPECT_TRUE(std::isnan(report.methods[1].masking));
  EXPECT_FALSE(capture.messages.empty());
  const auto detail = benchmark_detail_csv(report);
  EXPECT_NE(detail.find("hs+mpm,n40-p60-r4-uncor,1,,,"), std::string::npos);
}

TEST(Benchmark, CsvLayout) {
  const auto report = run_benchmark(small_config(), PriorSpec::spike_slab(), {Method::MPM}, short_chain());
  const auto csv = benchmark_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,setting,masking,swamping");
  EXPECT_NE(csv.find("ss+mpm,n40-p60-r4-uncor,"), std::string::npos);
}
