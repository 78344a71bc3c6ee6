#include "shrinksel/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>
#include <thread>

#include "shrinksel/csv.hpp"

namespace shrinksel {

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

void check_index_set(const IndexSet& set, std::size_t p, const std::string& what) {
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k] >= p) {
      throw InvariantError(what + " index " + std::to_string(set[k] + 1) + " outside [1, " +
                           std::to_string(p) + "]");
    }
    if (k > 0 && set[k] <= set[k - 1]) throw InvariantError(what + " indices must be sorted and unique");
  }
}

}  // namespace

void Dataset::validate() const {
  if (x.rows() == 0 || x.cols() == 0) throw InvariantError("dataset needs n >= 1 and p >= 1");
  if (y.size() != x.rows()) {
    throw InvariantError("response length " + std::to_string(y.size()) + " != design rows " +
                         std::to_string(x.rows()));
  }
  if (!all_finite(x) || !y.allFinite()) throw InvariantError("dataset contains non-finite entries");
  if (truth) check_index_set(*truth, p(), "truth");
}

std::string to_string(PriorFamily family) {
  return family == PriorFamily::Horseshoe ? "horseshoe" : "spike-slab";
}

PriorFamily parse_prior_family(const std::string& name) {
  if (name == "horseshoe" || name == "hs") return PriorFamily::Horseshoe;
  if (name == "spike-slab" || name == "spike_slab" || name == "ss") return PriorFamily::SpikeSlab;
  throw InputError("unknown prior '" + name + "' (expected horseshoe or spike-slab)");
}

PriorSpec PriorSpec::horseshoe(std::optional<double> tau_upper) {
  PriorSpec spec;
  spec.family = PriorFamily::Horseshoe;
  spec.tau_upper = tau_upper;
  return spec;
}

PriorSpec PriorSpec::spike_slab() {
  PriorSpec spec;
  spec.family = PriorFamily::SpikeSlab;
  return spec;
}

void PriorSpec::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(ig_shape) || !positive(ig_scale)) throw InvariantError("inverse-gamma hyperparameters must be > 0");
  if (!positive(ss_beta_a) || !positive(ss_beta_b)) throw InvariantError("beta hyperparameters must be > 0");
  if (tau_upper && !positive(*tau_upper)) throw InvariantError("tau_upper must be > 0");
}

void PosteriorDraws::validate() const {
  const auto t = beta.rows();
  const auto p = beta.cols();
  if (t == 0 || p == 0) throw InvariantError("draws need at least one iteration and one coefficient");
  if (sigma2.size() != t) throw InvariantError("sigma2 length differs from beta rows");
  if (!all_finite(beta) || !sigma2.allFinite()) throw InvariantError("non-finite value in draws");
  if ((sigma2.array() <= 0.0).any()) throw InvariantError("sigma2 draws must be > 0");
  if (lambda) {
    if (lambda->rows() != t || lambda->cols() != p) throw InvariantError("lambda shape differs from beta");
    if (!all_finite(*lambda) || (lambda->array() <= 0.0).any()) throw InvariantError("lambda draws must be finite and > 0");
  }
  if (tau) {
    if (tau->size() != t) throw InvariantError("tau length differs from beta rows");
    if (!tau->allFinite() || (tau->array() <= 0.0).any()) throw InvariantError("tau draws must be finite and > 0");
  }
  if (z) {
    if (z->rows() != t || z->cols() != p) throw InvariantError("z shape differs from beta");
    if ((z->array() > 1).any()) throw InvariantError("z entries must be 0 or 1");
  }
  if (pi) {
    if (pi->size() != t) throw InvariantError("pi length differs from beta rows");
    if (!pi->allFinite() || (pi->array() <= 0.0).any() || (pi->array() >= 1.0).any()) {
      throw InvariantError("pi draws must lie in (0, 1)");
    }
  }
}

std::string to_string(Method method) {
  switch (method) {
    case Method::S2M: return "s2m";
    case Method::TwoM: return "2m";
    case Method::HPPM: return "hppm";
    case Method::MPM: return "mpm";
    case Method::CS: return "cs";
    case Method::HT: return "ht";
  }
  return "?";
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"s2m", "2m", "hppm", "mpm", "cs", "ht"};
  return names;
}

Method parse_method(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "s2m") return Method::S2M;
  if (lower == "2m" || lower == "2-m" || lower == "km") return Method::TwoM;
  if (lower == "hppm") return Method::HPPM;
  if (lower == "mpm") return Method::MPM;
  if (lower == "cs") return Method::CS;
  if (lower == "ht") return Method::HT;
  std::string valid;
  for (const auto& n : method_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InputError("unknown method '" + name + "' (valid: " + valid + ")");
}

void SelectionResult::validate(std::size_t p) const {
  check_index_set(selected, p, "selected");
  for (int h : h_counts) {
    if (h < 0 || static_cast<std::size_t>(h) > p) throw InvariantError("per-draw count outside [0, p]");
  }
  if ((method == Method::S2M || method == Method::TwoM) && selected.size() != static_cast<std::size_t>(h_mode)) {
    throw InvariantError("selected size differs from H");
  }
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf.data(), ptr};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tag = std::hash<std::thread::id>{}(std::this_thread::get_id());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tag);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at " + path.string());
  }
}

void save_draws(const PosteriorDraws& draws, const std::filesystem::path& path) {
  draws.validate();
  const auto t = draws.beta.rows();
  const auto p = draws.beta.cols();

  std::string out;
  out.reserve(static_cast<std::size_t>(t * (p + 2) * 24));
  auto header = [&](const char* stem) {
    for (Eigen::Index j = 0; j < p; ++j) {
      out += ',';
      out += stem;
      out += std::to_string(j + 1);
    }
  };
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j > 0) out += ',';
    out += "beta_" + std::to_string(j + 1);
  }
  out += ",sigma2";
  if (draws.lambda) header("lambda_");
  if (draws.tau) out += ",tau";
  if (draws.z) header("z_");
  if (draws.pi) out += ",pi";
  out += '\n';

  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j > 0) out += ',';
      out += format_real(draws.beta(i, j));
    }
    out += ',' + format_real(draws.sigma2(i));
    if (draws.lambda) {
      for (Eigen::Index j = 0; j < p; ++j) out += ',' + format_real((*draws.lambda)(i, j));
    }
    if (draws.tau) out += ',' + format_real((*draws.tau)(i));
    if (draws.z) {
      for (Eigen::Index j = 0; j < p; ++j) out += (*draws.z)(i, j) ? ",1" : ",0";
    }
    if (draws.pi) out += ',' + format_real((*draws.pi)(i));
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

// Positions of stem_1..stem_p, all present or all absent.
std::optional<std::vector<int>> indexed_columns(const csv::NumericTable& table, const std::string& stem,
                                                std::size_t p, bool required) {
  std::vector<int> cols;
  for (std::size_t j = 0; j < p; ++j) cols.push_back(table.find(stem + std::to_string(j + 1)));
  const auto present = std::count_if(cols.begin(), cols.end(), [](int c) { return c >= 0; });
  const auto named = std::count_if(table.header.begin(), table.header.end(),
                                   [&](const std::string& h) { return h.rfind(stem, 0) == 0; });
  if (named == 0 && !required) return std::nullopt;
  if (static_cast<std::size_t>(present) != p || static_cast<std::size_t>(named) != p) {
    throw InputError("draw file: columns " + stem + "1.." + stem + std::to_string(p) + " incomplete");
  }
  return cols;
}

}  // namespace

PosteriorDraws load_draws(const std::filesystem::path& path) {
  const auto table = csv::read_numeric(path);

  std::size_t p = 0;
  for (const auto& name : table.header) {
    if (name.rfind("beta_", 0) == 0) ++p;
  }
  if (p == 0) throw InputError("draw file: missing beta_1.. columns");
  for (const auto& name : table.header) {
    const bool known = name == "sigma2" || name == "tau" || name == "pi" || name.rfind("beta_", 0) == 0 ||
                       name.rfind("lambda_", 0) == 0 || name.rfind("z_", 0) == 0;
    if (!known) throw InputError("draw file: unknown column '" + name + "'");
  }
  const int sigma_col = table.find("sigma2");
  if (sigma_col < 0) throw InputError("draw file: missing sigma2 column");

  const auto t = table.values.rows();
  const auto pi_ = static_cast<Eigen::Index>(p);
  auto gather = [&](const std::vector<int>& cols) {
    Eigen::MatrixXd m(t, pi_);
    for (Eigen::Index j = 0; j < pi_; ++j) m.col(j) = table.values.col(cols[static_cast<std::size_t>(j)]);
    return m;
  };

  PosteriorDraws draws;
  draws.beta = gather(*indexed_columns(table, "beta_", p, true));
  draws.sigma2 = table.values.col(sigma_col);
  if (auto cols = indexed_columns(table, "lambda_", p, false)) draws.lambda = gather(*cols);
  if (const int c = table.find("tau"); c >= 0) draws.tau = Eigen::VectorXd(table.values.col(c));
  if (auto cols = indexed_columns(table, "z_", p, false)) {
    const Eigen::MatrixXd raw = gather(*cols);
    if (((raw.array() != 0.0) && (raw.array() != 1.0)).any()) throw InputError("draw file: z entries must be 0 or 1");
    draws.z = raw.cast<std::uint8_t>();
  }
  if (const int c = table.find("pi"); c >= 0) draws.pi = Eigen::VectorXd(table.values.col(c));

  try {
    draws.validate();
  } catch (const InvariantError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return draws;
}

}  // namespace shrinksel
