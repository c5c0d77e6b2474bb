#include "commands.hpp"
#include "suites.hpp"

#include "nosc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <stdexcept>

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

void add_flags(CLI::App* sub, Flags& f, bool config_required) {
  auto* c = sub->add_option("--config", f.config, "JSON configuration file");
  if (config_required) c->required();
  sub->add_option("--out", f.out, "output directory (created if missing)");
  sub->add_option("--seed", f.seed, "seed (overrides the config's seed)");
  sub->add_flag("--svg", f.svg, "also render SVG line charts");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace nosc;
  CLI::App app{"Neural oscillator toolkit: simulation, sine transforms, reconstruction plans, operator compilation "
               "and pendulum-network reduction sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NOSC_VERSION);

  Flags flags;
  std::string suite;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(cli::RunContext&);
  };
  const Entry entries[] = {
      {"simulate", "simulate a network on inputs; writes hidden/output CSVs", cli::cmd_simulate},
      {"transform", "windowed sine transforms of ensemble inputs, exact and by oscillator", cli::cmd_transform},
      {"reconstruct", "build and validate a reconstruction plan", cli::cmd_reconstruct},
      {"compile", "compile a causal operator into a three-layer oscillator network", cli::cmd_compile},
      {"approx-fn", "compile a continuous function on a box", cli::cmd_approx_fn},
      {"fk-sweep", "pendulum network: reduction error vs mass ordering", cli::cmd_fk_sweep},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_flags(sub, flags, true);
    subs.emplace_back(sub, &e);
  }
  auto* verify = app.add_subcommand("verify", "run property suites; writes verify.json");
  add_flags(verify, flags, false);
  std::string names;
  for (const auto& n : cli::suite_names()) names += (names.empty() ? "" : ", ") + n;
  verify->add_option("suite", suite, "suite: " + names)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, entry] : subs)
      if (sub->parsed()) {
        auto ctx = cli::make_context(entry->name, flags.config, flags.seed, flags.out, flags.svg);
        return entry->run(ctx);
      }
    if (suite.empty()) throw ConfigError("verify: empty suite name (expected one of: " + names + ")");
    auto ctx = cli::make_context("verify", flags.config, flags.seed, flags.out, flags.svg);
    return cli::cmd_verify(ctx, suite);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InstabilityError& e) {
    std::cerr << "numerical instability: " << e.what() << '\n';
    return 3;
  } catch (const BudgetError& e) {
    std::cerr << "budget miss in stage " << e.stage << ": " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
