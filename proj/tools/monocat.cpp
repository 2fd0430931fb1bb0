#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "monocat/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal monotone categorization solver"};
  monocat::cli::RunOptions opts;
  std::string config;
  std::string mode;
  std::string out = "out";
  std::uint64_t seed = 0;
  app.add_option("--config", config, "JSON run configuration")->required();
  auto* mode_opt = app.add_option("--mode", mode, "override the config's mode")
                       ->check(CLI::IsMember({"solve", "diagnose", "flip", "school", "sweep", "verify"}));
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the config's seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : monocat::cli::kInvalidConfig;
  }
  opts.config = config;
  opts.out = out;
  if (*mode_opt) opts.mode = mode;
  if (*seed_opt) opts.seed = seed;
  return monocat::cli::run(opts, std::cout, std::cerr);
}
