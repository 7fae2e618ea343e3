#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "restrict_est/commands.hpp"

using namespace restrict_est;

namespace {

RunConfig resolve(const std::string& config_path, const std::string& out_dir, bool out_dir_given) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  apply_env_overrides(cfg);
  if (out_dir_given || cfg.out_dir.empty()) cfg.out_dir = out_dir;
  validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-restricted equivariant estimation: estimates, psi tables, risk simulation"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir = "./out";
  std::optional<double> t_min, t_max;
  std::size_t points = 50;
  bool svg = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "configuration file (key = value)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  };

  auto* estimate = app.add_subcommand("estimate", "apply the estimators to (x1, x2) rows");
  add_common(estimate, true);
  estimate->add_option("--data", data_path, "CSV with header and x1,x2 rows");

  auto* psi = app.add_subcommand("psi-table", "tabulate psi for the configured component");
  add_common(psi, true);
  psi->add_option("--t-min", t_min, "smallest t");
  psi->add_option("--t-max", t_max, "largest t");
  psi->add_option("--points", points, "number of t values")->capture_default_str();

  auto* risk = app.add_subcommand("risk-sim", "Monte Carlo risk curves with common random numbers");
  add_common(risk, true);
  risk->add_flag("--svg", svg, "also write risk.svg");

  auto* verify = app.add_subcommand("verify-conditions", "check ratio monotonicity on grids");
  add_common(verify, true);

  auto* self = app.add_subcommand("selfcheck", "fast invariant suite");
  add_common(self, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = resolve(config_path, out_dir, app.get_subcommands().front()->count("--out-dir") > 0);
    if (estimate->parsed()) {
      const std::string data = data_path.empty() ? cfg.data : data_path;
      if (data.empty()) throw ConfigError("estimate needs --data or a 'data' key");
      run_estimate(cfg, data, std::cout);
    } else if (psi->parsed()) {
      run_psi_table(cfg, PsiTableRange{t_min, t_max, points}, std::cout);
    } else if (risk->parsed()) {
      run_risk_sim(cfg, svg, std::cout);
    } else if (verify->parsed()) {
      run_verify_conditions(cfg, std::cout);
    } else {
      for (const auto& r : run_selfcheck(cfg, std::cout)) {
        if (!r.passed) return 3;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
