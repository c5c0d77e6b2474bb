#pragma once

#include "nosc/compiler.hpp"
#include "nosc/serialization.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nosc::cli {

// Parsed command line plus the loaded configuration document.
struct RunContext {
  std::string command;
  json config = json::object();  // after applying --seed
  std::uint64_t seed = 0;
  std::string config_hash;       // FNV-1a of the canonical config text
  std::string out_dir = ".";
  bool svg = false;
  std::vector<std::string> written;  // files, relative to out_dir

  std::string path(const std::string& name) const;
  // Registers a file for the manifest and returns its full path.
  std::string output(const std::string& name);
  json provenance() const;
};

// Loads the config (or an empty object), applies the seed override and checks
// that a seed is present.
RunContext make_context(const std::string& command, const std::string& config_path,
                        std::optional<std::uint64_t> seed_override, const std::string& out_dir, bool svg);

// Rejects unknown fields so typos surface as configuration errors.
void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where);

const json& section(const json& cfg, const std::string& key);  // empty object when absent
double get_double(const json& obj, const std::string& key, double fallback, const std::string& where);
int get_int(const json& obj, const std::string& key, int fallback, const std::string& where);
bool get_bool(const json& obj, const std::string& key, bool fallback, const std::string& where);
std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where);
std::vector<double> get_doubles(const json& obj, const std::string& key, const std::vector<double>& fallback,
                                const std::string& where);

// {"p", "T", "K_max", "A_amp", "n_steps"}; the seed comes from the context.
InputEnsemble ensemble_from(const json& cfg, std::uint64_t seed);
// "family": "ensemble" (default) or "offset" with {"c_max", "t0"} for the warm-up.
std::shared_ptr<InputFamily> family_from(const json& cfg, std::uint64_t seed);
// {"name", "param", "t_hold"}
TargetOperator operator_from(const json& cfg, int p);
IntegratorConfig integrator_from(const json& cfg, const IntegratorConfig& fallback);
CompileOptions compile_options_from(const json& cfg);

std::string fnv1a_hex(const std::string& text);
void write_manifest(RunContext& ctx, const json& extra = json::object());

}  // namespace nosc::cli
