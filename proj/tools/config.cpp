#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shrinksel/csv.hpp"

namespace shrinksel::cli {

using nlohmann::json;

namespace {

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  if (!csv::parse_real(text, v)) throw InputError("malformed " + what + ": '" + text + "'");
  return v;
}

}  // namespace

void RunConfig::validate() const {
  simulation.validate();
  prior.validate();
  mcmc.validate();
  selection.validate();
  if (methods.empty()) throw InputError("no methods configured");
  if (jobs == 0) throw InputError("jobs must be positive");
}

void apply_json(const json& j, RunConfig& cfg) {
  try {
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      auto& sim = cfg.simulation;
      read_if(s, "n", sim.n);
      read_if(s, "p", sim.p);
      read_if(s, "r", sim.r);
      if (s.contains("B")) sim.strengths.assign(sim.r, s.at("B").get<double>());
      if (s.contains("strengths")) {
        const auto& st = s.at("strengths");
        sim.strengths = st.is_string() ? parse_strengths(st.get<std::string>()) : st.get<std::vector<double>>();
      }
      read_if(s, "correlated", sim.correlated);
      read_if(s, "cor_pairs", sim.cor_pairs);
      read_if(s, "cor_target", sim.cor_target);
      read_if(s, "noise_sd", sim.noise_sd);
      read_if(s, "intercept", sim.intercept);
      read_if(s, "standardize", sim.standardize);
      read_if(s, "seed", sim.seed);
      read_if(s, "replicates", sim.replicates);
    }
    if (j.contains("prior")) {
      const auto& p = j.at("prior");
      if (p.contains("family")) {
        const auto family = parse_prior_family(p.at("family").get<std::string>());
        if (family != cfg.prior.family) cfg.prior = family == PriorFamily::Horseshoe ? PriorSpec::horseshoe() : PriorSpec::spike_slab();
      }
      if (p.contains("tau_upper")) {
        cfg.prior.tau_upper = p.at("tau_upper").is_null() ? std::nullopt : std::optional<double>(p.at("tau_upper").get<double>());
      }
      read_if(p, "ig_shape", cfg.prior.ig_shape);
      read_if(p, "ig_scale", cfg.prior.ig_scale);
      read_if(p, "ss_beta_a", cfg.prior.ss_beta_a);
      read_if(p, "ss_beta_b", cfg.prior.ss_beta_b);
    }
    if (j.contains("mcmc")) {
      const auto& m = j.at("mcmc");
      read_if(m, "iterations", cfg.mcmc.iterations);
      read_if(m, "burn_in", cfg.mcmc.burn_in);
      read_if(m, "seed", cfg.mcmc.seed);
      read_if(m, "thin", cfg.mcmc.thin);
    }
    if (j.contains("selection")) {
      const auto& s = j.at("selection");
      if (s.contains("b")) {
        const auto& b = s.at("b");
        cfg.selection.b = (b.is_null() || (b.is_string() && b.get<std::string>() == "2sigma2"))
                              ? std::nullopt
                              : std::optional<double>(b.get<double>());
      }
      read_if(s, "level", cfg.selection.credible_level);
      read_if(s, "threshold", cfg.selection.kappa_threshold);
    }
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    read_if(j, "jobs", cfg.jobs);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  apply_json(j, cfg);
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const auto& s = cfg.simulation;
  json out;
  out["simulation"] = {{"n", s.n},
                       {"p", s.p},
                       {"r", s.r},
                       {"strengths", s.strengths},
                       {"correlated", s.correlated},
                       {"cor_pairs", s.cor_pairs},
                       {"cor_target", s.cor_target},
                       {"noise_sd", s.noise_sd},
                       {"intercept", s.intercept},
                       {"standardize", s.standardize},
                       {"seed", s.seed},
                       {"replicates", s.replicates}};
  out["prior"] = {{"family", to_string(cfg.prior.family)},
                  {"tau_upper", cfg.prior.tau_upper ? json(*cfg.prior.tau_upper) : json(nullptr)},
                  {"ig_shape", cfg.prior.ig_shape},
                  {"ig_scale", cfg.prior.ig_scale},
                  {"ss_beta_a", cfg.prior.ss_beta_a},
                  {"ss_beta_b", cfg.prior.ss_beta_b}};
  out["mcmc"] = {{"iterations", cfg.mcmc.iterations},
                 {"burn_in", cfg.mcmc.burn_in},
                 {"seed", cfg.mcmc.seed},
                 {"thin", cfg.mcmc.thin}};
  out["selection"] = {{"b", cfg.selection.b ? json(*cfg.selection.b) : json("2sigma2")},
                      {"level", cfg.selection.credible_level},
                      {"threshold", cfg.selection.kappa_threshold}};
  json methods = json::array();
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  out["methods"] = methods;
  out["output_dir"] = cfg.output_dir.string();
  out["jobs"] = cfg.jobs;
  return out;
}

void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("SHRINKSEL_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* jobs = std::getenv("SHRINKSEL_JOBS"); jobs && *jobs) {
    const double v = parse_number(jobs, "SHRINKSEL_JOBS");
    if (v < 1 || v != std::floor(v)) throw InputError("SHRINKSEL_JOBS must be a positive integer");
    cfg.jobs = static_cast<std::size_t>(v);
  }
}

std::vector<double> parse_strengths(const std::string& spec) {
  std::vector<double> out;
  for (const auto& item : csv::split_line(spec)) {
    const auto x = item.find('x');
    if (x == std::string::npos) {
      out.push_back(parse_number(item, "strength"));
      continue;
    }
    const double value = parse_number(item.substr(0, x), "strength");
    const double count = parse_number(item.substr(x + 1), "strength count");
    if (count < 1 || count != std::floor(count)) throw InputError("malformed strength count in '" + item + "'");
    out.insert(out.end(), static_cast<std::size_t>(count), value);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw InputError("grid range must be start:stop:step, got '" + spec + "'");
    const double start = parse_number(parts[0], "grid start");
    const double stop = parse_number(parts[1], "grid stop");
    const double step = parse_number(parts[2], "grid step");
    if (!(step > 0.0) || stop < start) throw InputError("grid range needs step > 0 and stop >= start: '" + spec + "'");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    for (const auto& item : csv::split_line(spec)) out.push_back(parse_number(item, "grid value"));
  }
  if (out.empty()) throw InputError("empty grid '" + spec + "'");
  return out;
}

std::vector<Method> parse_methods(const std::string& spec) {
  std::vector<Method> out;
  for (const auto& item : csv::split_line(spec)) out.push_back(parse_method(item));
  if (out.empty()) throw InputError("no methods given");
  return out;
}

}  // namespace shrinksel::cli
