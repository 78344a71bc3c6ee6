#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "config.hpp"
#include "shrinksel/csv.hpp"
#include "shrinksel/shrinkage.hpp"

namespace shrinksel::cli {

namespace fs = std::filesystem;

namespace {

// Flags that override RunConfig fields; unset optionals leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> jobs;

  std::optional<std::size_t> n, p, r, cor_pairs, replicates, replicate_index;
  std::optional<double> big_b, cor_target, noise_sd;
  std::optional<std::string> strengths;
  bool correlated = false, uncorrelated = false, no_intercept = false, standardize = false;
  std::optional<std::uint64_t> sim_seed;

  std::optional<std::string> prior;
  std::optional<double> tau_upper;
  bool no_tau_upper = false;
  std::optional<std::size_t> iterations, burn_in, thin;
  std::optional<std::uint64_t> chain_seed;

  std::optional<double> b, level, threshold;
  std::optional<std::string> methods;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON run configuration");
  cmd.add_option("--out-dir", o.output_dir, "Output directory (env SHRINKSEL_OUTPUT_DIR)");
  cmd.add_option("--jobs", o.jobs, "Worker threads (env SHRINKSEL_JOBS)")->check(CLI::PositiveNumber);
}

void add_simulation(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--n", o.n, "Sample size");
  cmd.add_option("--p", o.p, "Number of covariates");
  cmd.add_option("--r", o.r, "Number of signals");
  cmd.add_option("--B", o.big_b, "Common signal strength");
  cmd.add_option("--strengths", o.strengths, "Signal strengths, e.g. 15x3,4x7");
  cmd.add_flag("--cor", o.correlated, "Correlated design");
  cmd.add_flag("--uncor", o.uncorrelated, "Uncorrelated design");
  cmd.add_option("--cor-pairs", o.cor_pairs, "Signal/noise pairs to correlate");
  cmd.add_option("--cor-target", o.cor_target, "Minimum pair correlation");
  cmd.add_option("--noise-sd", o.noise_sd, "Noise standard deviation");
  cmd.add_flag("--no-intercept", o.no_intercept, "Omit the intercept");
  cmd.add_flag("--standardize", o.standardize, "Standardize covariates");
  cmd.add_option("--seed", o.sim_seed, "Master seed");
  cmd.add_option("--replicates", o.replicates, "Replicate count")->check(CLI::PositiveNumber);
}

void add_prior_mcmc(CLI::App& cmd, Overrides& o, bool with_seed) {
  cmd.add_option("--prior", o.prior, "horseshoe | spike-slab");
  cmd.add_option("--tau-upper", o.tau_upper, "Upper bound on the horseshoe global scale");
  cmd.add_flag("--no-tau-upper", o.no_tau_upper, "Leave the global scale untruncated");
  cmd.add_option("--iterations", o.iterations, "MCMC iterations");
  cmd.add_option("--burn-in", o.burn_in, "Discarded iterations");
  cmd.add_option("--thin", o.thin, "Thinning interval");
  if (with_seed) cmd.add_option("--chain-seed", o.chain_seed, "Chain seed");
}

void add_selection(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--methods", o.methods, "Comma list of s2m,2m,hppm,mpm,cs,ht");
  cmd.add_option("--b", o.b, "S2M tuning parameter (default 2 * median sigma2)");
  cmd.add_option("--level", o.level, "Credible level for cs");
  cmd.add_option("--threshold", o.threshold, "Kappa threshold for ht");
}

void fix_strengths(SimConfig& sim) {
  const auto& s = sim.strengths;
  if (!s.empty() && s.size() != sim.r && std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); })) {
    sim.strengths.assign(sim.r, s.front());
  }
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  fix_strengths(cfg.simulation);
  apply_environment(cfg);
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.jobs) cfg.jobs = *o.jobs;

  auto& sim = cfg.simulation;
  if (o.n) sim.n = *o.n;
  if (o.p) sim.p = *o.p;
  if (o.r) sim.r = *o.r;
  if (o.strengths) sim.strengths = parse_strengths(*o.strengths);
  if (o.big_b) sim.strengths.assign(sim.r, *o.big_b);
  fix_strengths(sim);
  if (o.correlated && o.uncorrelated) throw InputError("--cor and --uncor are exclusive");
  if (o.correlated) sim.correlated = true;
  if (o.uncorrelated) sim.correlated = false;
  if (o.cor_pairs) sim.cor_pairs = *o.cor_pairs;
  if (o.cor_target) sim.cor_target = *o.cor_target;
  if (o.noise_sd) sim.noise_sd = *o.noise_sd;
  if (o.no_intercept) sim.intercept = false;
  if (o.standardize) sim.standardize = true;
  if (o.sim_seed) sim.seed = *o.sim_seed;
  if (o.replicates) sim.replicates = *o.replicates;

  if (o.prior) {
    const auto family = parse_prior_family(*o.prior);
    if (family != cfg.prior.family) cfg.prior = family == PriorFamily::Horseshoe ? PriorSpec::horseshoe() : PriorSpec::spike_slab();
  }
  if (o.tau_upper && o.no_tau_upper) throw InputError("--tau-upper and --no-tau-upper are exclusive");
  if (o.tau_upper) cfg.prior.tau_upper = *o.tau_upper;
  if (o.no_tau_upper) cfg.prior.tau_upper.reset();
  if (o.iterations) cfg.mcmc.iterations = *o.iterations;
  if (o.burn_in) cfg.mcmc.burn_in = *o.burn_in;
  if (o.thin) cfg.mcmc.thin = *o.thin;
  if (o.chain_seed) cfg.mcmc.seed = *o.chain_seed;

  if (o.b) cfg.selection.b = *o.b;
  if (o.level) cfg.selection.credible_level = *o.level;
  if (o.threshold) cfg.selection.kappa_threshold = *o.threshold;
  if (o.methods) cfg.methods = parse_methods(*o.methods);

  try {
    cfg.validate();
  } catch (const InvariantError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

void prepare_output(const RunConfig& cfg, const std::string& command) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw InputError("cannot create output directory " + cfg.output_dir.string());
  write_file_atomic(cfg.output_dir / (command + "_config.json"), to_json(cfg).dump(2) + "\n");
}

std::string design_csv(const Eigen::MatrixXd& x, bool intercept) {
  std::string out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) out += (j ? ",x_" : "x_") + std::to_string(j + 1);
  if (intercept) out += ",intercept";
  out += '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out += ',';
      out += format_real(x(i, j));
    }
    if (intercept) out += ",1";
    out += '\n';
  }
  return out;
}

Dataset read_dataset(const fs::path& design_path, const fs::path& response_path) {
  const auto design = csv::read_numeric(design_path);
  const auto response = csv::read_numeric(response_path);
  if (response.values.cols() != 1) throw InputError(response_path.string() + ": expected a single response column");
  if (response.values.rows() != design.values.rows()) {
    throw InputError("design has " + std::to_string(design.values.rows()) + " rows but response has " +
                     std::to_string(response.values.rows()));
  }
  Dataset data;
  data.y = response.values.col(0);
  const int icol = design.find("intercept");
  data.intercept = icol >= 0;
  const auto p = design.values.cols() - (data.intercept ? 1 : 0);
  data.x.resize(design.values.rows(), p);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < design.values.cols(); ++j) {
    if (j == icol) {
      for (Eigen::Index i = 0; i < design.values.rows(); ++i) {
        if (design.values(i, j) != 1.0) {
          throw InputError(design_path.string() + ": intercept column is not all ones (data row " +
                           std::to_string(i + 1) + ")");
        }
      }
      continue;
    }
    data.x.col(k++) = design.values.col(j);
  }
  try {
    data.validate();
  } catch (const InvariantError& e) {
    throw InputError(e.what());
  }
  return data;
}

IndexSet read_truth(const fs::path& path) {
  const auto table = csv::read_numeric(path);
  const int c = table.find("index");
  if (c < 0) throw InputError(path.string() + ": missing index column");
  IndexSet out;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, c);
    if (v < 1 || v != std::floor(v)) throw InputError(path.string() + ": bad index at data row " + std::to_string(i + 1));
    out.push_back(static_cast<std::size_t>(v) - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
  const auto cfg = resolve(o);
  const auto& sim = cfg.simulation;
  const auto design = gen_design(sim);
  const std::size_t replicate = o.replicate_index.value_or(0);
  const auto y = gen_response(design.x, design.truth, sim.strengths, sim.noise_sd, response_seed(sim.seed, replicate));

  prepare_output(cfg, "simulate");
  write_file_atomic(cfg.output_dir / "design.csv", design_csv(design.x, sim.intercept));
  std::string resp = "y\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) resp += format_real(y(i)) + '\n';
  write_file_atomic(cfg.output_dir / "response.csv", resp);
  std::string truth = "index,beta\n";
  for (std::size_t k = 0; k < design.truth.size(); ++k) {
    truth += std::to_string(design.truth[k] + 1) + ',' + format_real(sim.strengths[k]) + '\n';
  }
  write_file_atomic(cfg.output_dir / "truth.csv", truth);
  std::string pairs = "signal,noise,correlation\n";
  for (const auto& [s, z] : design.cor_pairs) {
    const auto c = correlation(design.x.col(static_cast<Eigen::Index>(s)), design.x.col(static_cast<Eigen::Index>(z)));
    pairs += std::to_string(s + 1) + ',' + std::to_string(z + 1) + ',' + format_real(c) + '\n';
  }
  if (!design.cor_pairs.empty()) write_file_atomic(cfg.output_dir / "cor_pairs.csv", pairs);
  out << "wrote design (" << sim.n << " x " << sim.p << (sim.intercept ? " + intercept" : "") << "), response "
      << "(replicate " << replicate << ") and truth to " << cfg.output_dir.string() << '\n';
  return kOk;
}

int cmd_fit(const Overrides& o, const std::string& design, const std::string& response, std::ostream& out) {
  const auto cfg = resolve(o);
  const auto data = read_dataset(design, response);
  const auto start = std::chrono::steady_clock::now();
  const auto draws = fit(data, cfg.prior, cfg.mcmc);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  prepare_output(cfg, "fit");
  save_draws(draws, cfg.output_dir / "draws.csv");
  write_file_atomic(cfg.output_dir / "manifest.txt", run_manifest(data, cfg.prior, cfg.mcmc, wall));
  out << "wrote " << draws.iterations() << " draws to " << (cfg.output_dir / "draws.csv").string() << '\n';
  return kOk;
}

int cmd_select(const Overrides& o, const std::string& draws_path, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(o);
  const auto draws = load_draws(draws_path);
  std::string table = selection_csv_header();
  std::string report;
  int status = kOk;
  for (const auto method : cfg.methods) {
    try {
      const auto result = select(draws, method, cfg.selection);
      table += selection_csv_row(result);
      report += selection_report(result) + '\n';
    } catch (const std::exception& e) {
      table += selection_csv_error_row(method, e.what());
      report += "method: " + to_string(method) + "\nerror: " + e.what() + "\n\n";
      err << to_string(method) << ": " << e.what() << '\n';
      status = kUsage;
    }
  }
  prepare_output(cfg, "select");
  write_file_atomic(cfg.output_dir / "selection.csv", table);
  write_file_atomic(cfg.output_dir / "selection_report.txt", report);
  out << report;
  return status;
}

int cmd_evaluate(const Overrides& o, const std::string& selection_path, const std::string& truth_path,
                 std::ostream& out) {
  const auto cfg = resolve(o);
  const auto truth = read_truth(truth_path);
  const auto results = read_selection_csv(selection_path);
  std::string table = "method,masking,swamping\n";
  for (const auto& r : results) {
    const auto s = score(r.selected, truth);
    table += to_string(r.method) + ',' + std::to_string(s.masking) + ',' + std::to_string(s.swamping) + '\n';
  }
  prepare_output(cfg, "evaluate");
  write_file_atomic(cfg.output_dir / "evaluation.csv", table);
  out << table;
  return kOk;
}

int cmd_bench(const Overrides& o, std::ostream& out) {
  const auto cfg = resolve(o);
  const auto report = run_benchmark(cfg.simulation, cfg.prior, cfg.methods, cfg.mcmc, cfg.selection, cfg.jobs);
  prepare_output(cfg, "bench");
  const auto table = benchmark_csv(report);
  write_file_atomic(cfg.output_dir / "benchmark.csv", table);
  write_file_atomic(cfg.output_dir / "benchmark_detail.csv", benchmark_detail_csv(report));
  out << table;
  for (const auto& m : report.methods) {
    if (!m.failures.empty()) return kInternal;
  }
  return kOk;
}

struct GridFlags {
  std::string rho, tau, a;
  std::vector<double> x2{1.0};
  double rel_tol = 1e-6;
};

int cmd_shrinkmap(const Overrides& o, const GridFlags& g, std::ostream& out) {
  const auto cfg = resolve(o);
  const auto rho = g.rho.empty() ? default_rho_grid() : parse_grid(g.rho);
  const auto tau = g.tau.empty() ? default_tau_grid() : parse_grid(g.tau);
  const auto a = g.a.empty() ? default_a_grid() : parse_grid(g.a);
  auto check = [](const std::vector<double>& v, const char* name, double lo, double hi) {
    for (double x : v) {
      if (!(x >= lo && x < hi)) throw InputError(std::string("grid value out of range for ") + name + ": " + format_real(x));
    }
  };
  check(rho, "rho", 0.0, 1.0);
  check(tau, "tau", std::numeric_limits<double>::min(), std::numeric_limits<double>::infinity());
  check(a, "a", std::numeric_limits<double>::min(), std::numeric_limits<double>::infinity());

  for (double x2 : g.x2) {
    if (!(std::isfinite(x2) && x2 != 0.0)) throw InputError("--x2 must be finite and non-zero");
  }

  prepare_output(cfg, "shrinkmap");
  for (double x2 : g.x2) {
    QuadratureOptions q;
    q.rel_tol = g.rel_tol;
    const auto points = reverse_shrinkage_grid(rho, tau, a, x2, cfg.jobs, q);
    const auto name = "shrinkmap_x2_" + format_real(x2) + ".csv";
    write_file_atomic(cfg.output_dir / name, grid_csv(points));
    const auto blue = std::count_if(points.begin(), points.end(), [](const auto& p) { return p.failure.empty() && p.reverse; });
    out << "x2=" << format_real(x2) << ": " << points.size() << " points, " << blue << " reverse-shrinkage, wrote "
        << (cfg.output_dir / name).string() << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable selection with shrinkage priors"};
  app.require_subcommand(1);
  Overrides o;
  std::string design, response, draws, selection, truth;
  GridFlags grid;

  auto* simulate = app.add_subcommand("simulate", "Generate a design, response and truth set");
  add_common(*simulate, o);
  add_simulation(*simulate, o);
  simulate->add_option("--replicate", o.replicate_index, "Replicate whose response is written (0-based)");

  auto* fitc = app.add_subcommand("fit", "Run a Gibbs sampler on a dataset");
  add_common(*fitc, o);
  add_prior_mcmc(*fitc, o, true);
  fitc->add_option("--design", design, "Design CSV")->required();
  fitc->add_option("--response", response, "Response CSV")->required();

  auto* selectc = app.add_subcommand("select", "Apply selectors to a draw file");
  add_common(*selectc, o);
  add_selection(*selectc, o);
  selectc->add_option("--draws", draws, "Draw CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a selection against the truth");
  add_common(*evaluate, o);
  evaluate->add_option("--selection", selection, "Selection CSV")->required();
  evaluate->add_option("--truth", truth, "Truth CSV")->required();

  auto* bench = app.add_subcommand("bench", "Replicate benchmark: simulate, fit, select, score");
  add_common(*bench, o);
  add_simulation(*bench, o);
  add_prior_mcmc(*bench, o, false);
  add_selection(*bench, o);

  auto* shrinkmap = app.add_subcommand("shrinkmap", "Reverse-shrinkage classification grid");
  add_common(*shrinkmap, o);
  shrinkmap->add_option("--rho", grid.rho, "rho grid: list or start:stop:step");
  shrinkmap->add_option("--tau", grid.tau, "tau grid: list or start:stop:step");
  shrinkmap->add_option("--a", grid.a, "A grid: list or start:stop:step");
  shrinkmap->add_option("--x2", grid.x2, "Second MLE component(s)")->delimiter(',');
  shrinkmap->add_option("--rel-tol", grid.rel_tol, "Quadrature relative tolerance");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(o, out);
    if (*fitc) return cmd_fit(o, design, response, out);
    if (*selectc) return cmd_select(o, draws, out, err);
    if (*evaluate) return cmd_evaluate(o, selection, truth, out);
    if (*bench) return cmd_bench(o, out);
    if (*shrinkmap) return cmd_shrinkmap(o, grid, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace shrinksel::cli
