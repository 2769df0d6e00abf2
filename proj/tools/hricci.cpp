#include "hricci/app.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int dispatch(const std::string &command, const std::string &config_path,
             const hricci::app::Overrides &ov, const std::string &offline) {
  using namespace hricci::app;
  if (command == "verify" && !offline.empty()) {
    Scenario s;
    if (!config_path.empty())
      s = load_scenario(config_path, ov);
    const fs::path out_dir = ov.out_dir.value_or(config_path.empty() ? fs::path(".") : s.out_dir);
    return run_verify_offline(offline, s.thresholds, s.monitors, out_dir, std::cout);
  }
  if (config_path.empty())
    throw CLI::RequiredError("--config");
  const Scenario s = load_scenario(config_path, ov);
  if (command == "simulate")
    return run_simulate(s, std::cout);
  if (command == "verify")
    return run_verify(s, std::cout);
  if (command == "detect")
    return run_detect(s, std::cout);
  return run_spectrum(s, std::cout);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App cli{"Homogeneous Ricci flow: simulate, verify, detect solitons, spectra"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string offline;
  std::string preset;
  std::string flow;
  double t_end = 0.0;

  cli.add_option("command", command, "simulate | verify | detect | spectrum")
      ->required()
      ->check(CLI::IsMember({"simulate", "verify", "detect", "spectrum"}));
  cli.add_option("--config", config_path, "scenario JSON");
  cli.add_option("--out", out_dir, "output directory (overrides the config)");
  cli.add_option("--offline", offline, "re-audit a stored trajectory JSON (verify only)");
  cli.add_option("--preset", preset, "replace the config geometry by a named preset");
  auto *t_end_opt = cli.add_option("--t-end", t_end, "integration horizon")
                        ->check(CLI::PositiveNumber);
  cli.add_option("--flow", flow, "ricci | unnormalized | normalized")
      ->check(CLI::IsMember({"ricci", "unnormalized", "normalized"}));

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : hricci::app::exit_error;
  }

  hricci::app::Overrides ov;
  if (!out_dir.empty())
    ov.out_dir = out_dir;
  if (!preset.empty())
    ov.preset = preset;
  if (*t_end_opt)
    ov.t_end = t_end;
  if (!flow.empty())
    ov.flow = hricci::parse_flow_kind(flow);

  try {
    if (!offline.empty() && command != "verify")
      throw CLI::ValidationError("--offline", "only valid with verify");
    return dispatch(command, config_path, ov, offline);
  } catch (const hricci::ConfigError &e) {
    std::cerr << "config error at " << e.path() << ": " << e.what() << '\n';
  } catch (const hricci::IntegrationError &e) {
    std::cerr << "integration error at t = " << e.time() << ": " << e.what() << '\n';
  } catch (const CLI::Error &e) {
    std::cerr << "usage error: " << e.what() << '\n';
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return hricci::app::exit_error;
}
