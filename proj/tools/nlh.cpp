#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "nlh/config.hpp"
#include "nlh/run.hpp"
#include "nlh/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual ground states of the mixed-dispersion nonlinear Helmholtz equation"};
  app.set_version_flag("--version", std::string(nlh::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string label;
  for (const char* name : {"solve", "limit", "energy-comparison", "concentration", "multiplicity", "offdiag", "kernel-bounds"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "YAML run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--label", label, "run label (overrides output.label)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nlh::kExitError;
  }

  const std::string mode_name = app.get_subcommands().front()->get_name();
  try {
    nlh::RunConfig cfg = nlh::parse_config(config_path, nlh::parse_mode(mode_name));
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!label.empty()) cfg.label = label;
    const nlh::RunOutcome res = nlh::run(cfg);
    for (const auto& f : res.files) std::cout << f << '\n';
    for (const auto& c : res.failed_checks) std::cerr << "check failed: " << c << '\n';
    if (!res.converged) std::cerr << "warning: at least one solve did not converge (outputs written)\n";
    return res.exit_code;
  } catch (const nlh::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nlh::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nlh::kExitError;
  }
}
