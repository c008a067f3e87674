#include "vfp/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

vfp::RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return vfp::parse_config(text.str());
}

int report_config_error(const vfp::ConfigError& e) {
  std::cerr << "invalid configuration:\n";
  for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-particle Vlasov-Fokker-Planck toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "Override run.output_dir");
  run->add_option("--seed", seed, "Override initial_data.seed");
  run->add_option("--threads", threads, "Override run.threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse and validate a config file, print the resolved manifest");
  validate->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  auto* oracles = app.add_subcommand("oracles", "Run the closed-form oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*oracles) {
      bool ok = true;
      for (const auto& c : vfp::run_oracle_suite()) {
        std::cout << (c.passed() ? "ok   " : "FAIL ") << c.name << "  error=" << vfp::format_number(c.error)
                  << "  tol=" << vfp::format_number(c.tolerance) << '\n';
        ok = ok && c.passed();
      }
      return ok ? 0 : 1;
    }
    auto cfg = load(config_path);
    if (*validate) {
      std::cout << vfp::to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (output_dir) cfg.output_dir = *output_dir;
    if (seed) cfg.initial.seed = *seed;
    if (threads) cfg.threads = *threads;
    const auto result = vfp::run_experiment(cfg, cfg.output_dir);
    std::cout << result.summary.dump(2) << '\n';
    return result.passed ? 0 : 1;
  } catch (const vfp::ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
