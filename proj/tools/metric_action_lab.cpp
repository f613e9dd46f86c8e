#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "metric_action_lab/commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Paths {
  std::string config;
  std::string out = ".";
};

mal::Json load_config(const std::string& path) {
  if (path.empty()) return mal::Json::object();
  mal::Json j;
  try {
    j = mal::Json::parse(mal::read_file(path));
  } catch (const mal::Json::parse_error& e) {
    throw mal::ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw mal::ConfigError(path + ": top level must be an object");
  j["_base"] = fs::absolute(path).parent_path().string();
  return j;
}

int report(const mal::CommandResult& r, bool verbose) {
  for (const mal::Check& c : r.checks)
    if (verbose || !c.passed)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  std::cout << r.summary << "\n";
  for (const fs::path& p : r.files) std::cout << "wrote " << p.string() << "\n";
  return r.ok() ? 0 : 1;
}

CLI::App* add_command(CLI::App& parent, const std::string& name, const std::string& help, Paths& paths,
                      bool config_required = true, bool out_required = true) {
  CLI::App* sub = parent.add_subcommand(name, help);
  auto* opt = sub->add_option("--config", paths.config, "JSON config file");
  if (config_required) opt->required();
  auto* out = sub->add_option("--out", paths.out, "output directory");
  if (out_required) out->required();
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric_action_lab: resolvents, gradient flows and action functionals on metric spaces"};
  app.set_version_flag("--version", std::string(mal::kVersion));
  app.require_subcommand(1);
  std::size_t threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency; capped by METRIC_ACTION_LAB_THREADS)");
  app.add_flag("-v,--verbose", verbose, "print every check, not only failures");

  Paths p;
  std::function<mal::CommandResult()> run;

  CLI::App* validate = add_command(app, "validate", "run all module validators", p, false, false);
  CLI::App* prox = add_command(*validate, "prox", "resolvent checks only", p, false);
  validate->callback([&] {
    if (prox->parsed()) return;
    if (validate->count("--out") == 0) throw CLI::RequiredError("--out");
    run = [&] { return mal::cmd_validate(load_config(p.config), p.out, false, threads); };
  });
  prox->callback([&] { run = [&] { return mal::cmd_validate(load_config(p.config), p.out, true, threads); }; });

  add_command(app, "flow", "minimizing-movement trajectory with EVI checks", p)->callback([&] {
    run = [&] { return mal::cmd_flow(load_config(p.config), p.out); };
  });
  add_command(app, "action", "evaluate the action of a curve", p)->callback([&] {
    run = [&] { return mal::cmd_action(load_config(p.config), p.out); };
  });
  add_command(app, "recovery", "build recovery sequences", p)->callback([&] {
    run = [&] { return mal::cmd_recovery(load_config(p.config), p.out, threads); };
  });

  CLI::App* gamma = app.add_subcommand("gamma", "Gamma-convergence experiments");
  gamma->require_subcommand(1);
  add_command(*gamma, "positive", "recovery sequences approaching the limit action", p)->callback([&] {
    run = [&] { return mal::cmd_gamma_positive(load_config(p.config), p.out, threads); };
  });
  add_command(*gamma, "example1", "vanishing potential eps/x^2 with blowing-up endpoint slope", p)->callback([&] {
    run = [&] { return mal::cmd_gamma_example1(load_config(p.config), p.out, threads); };
  });
  add_command(*gamma, "example2", "ramp potentials 1 - h x", p)->callback([&] {
    run = [&] { return mal::cmd_gamma_example2(load_config(p.config), p.out, threads); };
  });
  add_command(*gamma, "liminf", "liminf inequality along supplied curve sequences", p)->callback([&] {
    run = [&] { return mal::cmd_gamma_liminf(load_config(p.config), p.out, threads); };
  });

  CLI11_PARSE(app, argc, argv);
  if (!run) {
    std::cerr << app.help();
    return 2;
  }
  try {
    return report(run(), verbose);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
