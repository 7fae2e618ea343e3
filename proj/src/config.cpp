#include "restrict_est/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "restrict_est/report.hpp"

namespace restrict_est {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  if (!v.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model", [](RunConfig& c, const std::string& v) { c.model = v; }},
      {"sigma1", [](RunConfig& c, const std::string& v) { c.sigma1 = to_double(v); }},
      {"sigma2", [](RunConfig& c, const std::string& v) { c.sigma2 = to_double(v); }},
      {"rho", [](RunConfig& c, const std::string& v) { c.rho = to_double(v); }},
      {"orientation", [](RunConfig& c, const std::string& v) { c.orientation = v; }},
      {"loss", [](RunConfig& c, const std::string& v) { c.loss = v; }},
      {"component", [](RunConfig& c, const std::string& v) { c.component = to_int(v); }},
      {"path", [](RunConfig& c, const std::string& v) { c.path = v; }},
      {"root_tol", [](RunConfig& c, const std::string& v) { c.root_tol = to_double(v); }},
      {"rel_tol", [](RunConfig& c, const std::string& v) { c.rel_tol = to_double(v); }},
      {"ratio_tol", [](RunConfig& c, const std::string& v) { c.ratio_tol = to_double(v); }},
      {"agreement_tol", [](RunConfig& c, const std::string& v) { c.agreement_tol = to_double(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); }},
      {"replications", [](RunConfig& c, const std::string& v) { c.replications = to_u64(v); }},
      {"lambda_max", [](RunConfig& c, const std::string& v) { c.lambda_max = to_double(v); }},
      {"grid_points", [](RunConfig& c, const std::string& v) { c.grid_points = to_u64(v); }},
      {"base_theta1", [](RunConfig& c, const std::string& v) { c.base_theta1 = to_double(v); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = to_int(v); }},
      {"data", [](RunConfig& c, const std::string& v) { c.data = v; }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    std::ostringstream where;
    where << "config line " << lineno << ": ";
    if (eq == std::string::npos) throw ConfigError(where.str() + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where.str() + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where.str() + "duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where.str() + key + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "model = " << c.model << '\n';
  os << "sigma1 = " << format_number(c.sigma1) << '\n';
  os << "sigma2 = " << format_number(c.sigma2) << '\n';
  os << "rho = " << format_number(c.rho) << '\n';
  if (!c.orientation.empty()) os << "orientation = " << c.orientation << '\n';
  os << "loss = " << c.loss << '\n';
  os << "component = " << c.component << '\n';
  os << "path = " << c.path << '\n';
  os << "root_tol = " << format_number(c.root_tol) << '\n';
  os << "rel_tol = " << format_number(c.rel_tol) << '\n';
  os << "ratio_tol = " << format_number(c.ratio_tol) << '\n';
  os << "agreement_tol = " << format_number(c.agreement_tol) << '\n';
  os << "seed = " << c.seed << '\n';
  os << "replications = " << c.replications << '\n';
  if (c.lambda_max) os << "lambda_max = " << format_number(*c.lambda_max) << '\n';
  os << "grid_points = " << c.grid_points << '\n';
  if (c.base_theta1) os << "base_theta1 = " << format_number(*c.base_theta1) << '\n';
  os << "threads = " << c.threads << '\n';
  if (!c.data.empty()) os << "data = " << c.data << '\n';
  os << "out_dir = " << c.out_dir << '\n';
  return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize(a) == serialize(b); }

void apply_env_overrides(RunConfig& cfg) {
  if (const char* s = std::getenv("RESTRICT_EST_SEED"); s != nullptr && *s != '\0') {
    try {
      cfg.seed = to_u64(s);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("RESTRICT_EST_SEED: ") + e.what());
    }
  }
}

void validate(const RunConfig& c) {
  if (c.model != "normal" && c.model != "cr-gamma") {
    throw ConfigError("model must be 'normal' or 'cr-gamma', got '" + c.model + "'");
  }
  const std::string natural = c.model == "normal" ? "location" : "scale";
  if (!c.orientation.empty() && c.orientation != natural) {
    throw ConfigError("orientation '" + c.orientation + "' does not match model '" + c.model +
                      "' (" + natural + ")");
  }
  if (c.loss != "squared-error") throw ConfigError("loss must be 'squared-error'");
  if (c.component != 1 && c.component != 2) throw ConfigError("component must be 1 or 2");
  if (c.path != "auto" && c.path != "generic" && c.path != "closed-form") {
    throw ConfigError("path must be auto, generic or closed-form");
  }
  for (double t : {c.root_tol, c.rel_tol, c.ratio_tol, c.agreement_tol}) {
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
  }
  if (c.replications < 100) throw ConfigError("replications must be at least 100");
  if (c.grid_points < 2) throw ConfigError("grid_points must be at least 2");
  if (c.threads < 0) throw ConfigError("threads must be non-negative");
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

ModelPtr build_model(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.model == "normal") return normal_model(NormalSpec(cfg.sigma1, cfg.sigma2, cfg.rho));
  return cr_gamma_model();
}

LossSpec build_loss(const RunConfig& cfg) {
  return squared_error(cfg.model == "normal" ? Orientation::location : Orientation::scale);
}

Component target_component(const RunConfig& cfg) { return component_from_int(cfg.component); }

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.path = cfg.path == "generic"       ? Path::generic
           : cfg.path == "closed-form" ? Path::closed_form
                                       : Path::automatic;
  o.root_tol = cfg.root_tol;
  o.rel_tol = cfg.rel_tol;
  return o;
}

}  // namespace restrict_est
