#include "run_config.hpp"

#include "nosc/errors.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace nosc::cli {

namespace fs = std::filesystem;

std::string RunContext::path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }

std::string RunContext::output(const std::string& name) {
  written.push_back(name);
  return path(name);
}

json RunContext::provenance() const {
  return {{"command", command}, {"config_hash", config_hash}, {"seed", seed}};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunContext make_context(const std::string& command, const std::string& config_path,
                        std::optional<std::uint64_t> seed_override, const std::string& out_dir, bool svg) {
  RunContext ctx;
  ctx.command = command;
  ctx.out_dir = out_dir.empty() ? "." : out_dir;
  ctx.svg = svg;
  if (!config_path.empty()) ctx.config = load_json(config_path);
  if (!ctx.config.is_object()) throw ConfigError("config: expected a JSON object at the top level");
  if (seed_override) ctx.config["seed"] = *seed_override;
  const auto it = ctx.config.find("seed");
  if (it == ctx.config.end()) throw ConfigError("config.seed: missing (give it in the config or with --seed)");
  if (!it->is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
  ctx.seed = it->get<std::uint64_t>();
  // object keys are sorted, so the dump is canonical
  ctx.config_hash = fnv1a_hex(ctx.config.dump());
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw ConfigError("--out: cannot create " + ctx.out_dir + ": " + ec.message());
  return ctx;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(where + "." + key + ": unknown field (expected one of: " + list + ")");
    }
}

const json& section(const json& cfg, const std::string& key) {
  static const json empty = json::object();
  const auto it = cfg.find(key);
  return it == cfg.end() ? empty : *it;
}

double get_double(const json& obj, const std::string& key, double fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return it->get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  const auto v = it->get<long long>();
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(where + "." + key + ": out of range");
  return static_cast<int>(v);
}

bool get_bool(const json& obj, const std::string& key, bool fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return it->get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

std::vector<double> get_doubles(const json& obj, const std::string& key, const std::vector<double>& fallback,
                                const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

InputEnsemble ensemble_from(const json& cfg, std::uint64_t seed) {
  const json& e = section(cfg, "ensemble");
  const std::string w = "config.ensemble";
  check_keys(e, {"p", "T", "K_max", "A_amp", "n_steps"}, w);
  InputEnsemble ens(get_int(e, "p", 1, w), get_double(e, "T", 1.0, w), get_int(e, "K_max", 8, w),
                    get_double(e, "A_amp", 1.0, w), seed, get_int(e, "n_steps", 1000, w));
  try {
    ens.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(w + ": " + err.what());
  }
  return ens;
}

std::shared_ptr<InputFamily> family_from(const json& cfg, std::uint64_t seed) {
  const std::string kind = get_string(cfg, "family", "ensemble", "config");
  InputEnsemble ens = ensemble_from(cfg, seed);
  if (kind == "ensemble") return std::make_shared<InputEnsemble>(ens);
  if (kind == "offset") {
    const json& o = section(cfg, "offset");
    const std::string w = "config.offset";
    check_keys(o, {"c_max", "t0"}, w);
    auto fam = std::make_shared<OffsetFamily>();
    fam->base = ens;
    fam->c_max = get_double(o, "c_max", 0.25, w);
    fam->t0 = get_double(o, "t0", 0.1 * ens.T, w);
    if (!(fam->c_max >= 0.0)) throw ConfigError(w + ".c_max: must be non-negative");
    const double steps = fam->t0 / ens.grid().h();
    if (!(fam->t0 > 0.0) || std::abs(steps - std::round(steps)) > 1e-9)
      throw ConfigError(w + ".t0: must be a positive whole number of grid steps");
    return fam;
  }
  throw ConfigError("config.family: unknown family '" + kind + "' (expected ensemble or offset)");
}

TargetOperator operator_from(const json& cfg, int p) {
  const auto it = cfg.find("operator");
  if (it == cfg.end()) throw ConfigError("config.operator: missing");
  const std::string w = "config.operator";
  check_keys(*it, {"name", "param", "t_hold"}, w);
  const std::string name = get_string(*it, "name", "", w);
  if (name.empty()) throw ConfigError(w + ".name: missing");
  try {
    return operator_from_name(name, get_double(*it, "param", 0.0, w), p, get_double(*it, "t_hold", 0.0, w));
  } catch (const ConfigError& err) {
    throw ConfigError(w + ": " + err.what());
  }
}

IntegratorConfig integrator_from(const json& cfg, const IntegratorConfig& fallback) {
  const json& s = section(cfg, "integrator");
  const std::string w = "config.integrator";
  check_keys(s, {"method", "substeps", "max_h_omega"}, w);
  IntegratorConfig out = fallback;
  const std::string m = get_string(s, "method", method_name(fallback.method), w);
  try {
    out.method = method_from_name(m);
  } catch (const ConfigError&) {
    throw ConfigError(w + ".method: unknown method '" + m + "' (expected rk4 or velocity_verlet)");
  }
  out.substeps = get_int(s, "substeps", fallback.substeps, w);
  out.max_h_omega = get_double(s, "max_h_omega", fallback.max_h_omega, w);
  if (out.substeps < 1) throw ConfigError(w + ".substeps: must be at least 1");
  if (!(out.max_h_omega >= 0.0)) throw ConfigError(w + ".max_h_omega: must be non-negative");
  return out;
}

CompileOptions compile_options_from(const json& cfg) {
  CompileOptions o;
  o.cfg = integrator_from(cfg, o.cfg);
  const json& s = section(cfg, "compile");
  const std::string w = "config.compile";
  check_keys(s, {"split", "activation", "validation_samples", "validate_from", "max_N", "bank_tol", "readout_H",
                 "readout_max_H", "readout_samples", "readout_times", "emulator_validation_samples"},
             w);
  const auto split = get_doubles(s, "split", {o.split.begin(), o.split.end()}, w);
  if (split.size() != 4) throw ConfigError(w + ".split: expected four shares");
  std::copy(split.begin(), split.end(), o.split.begin());
  try {
    o.act = Activation::from_name(get_string(s, "activation", o.act.name(), w));
  } catch (const ConfigError& err) {
    throw ConfigError(w + ".activation: " + err.what());
  }
  o.validation_samples = get_int(s, "validation_samples", o.validation_samples, w);
  o.validate_from = get_double(s, "validate_from", o.validate_from, w);
  o.plan.max_N = get_int(s, "max_N", o.plan.max_N, w);
  o.bank_tol = get_double(s, "bank_tol", o.bank_tol, w);
  o.readout.H = get_int(s, "readout_H", o.readout.H, w);
  o.readout.max_H = get_int(s, "readout_max_H", o.readout.max_H, w);
  o.readout.samples = get_int(s, "readout_samples", o.readout.samples, w);
  o.readout.times = get_int(s, "readout_times", o.readout.times, w);
  o.emulator.validation_samples = get_int(s, "emulator_validation_samples", o.emulator.validation_samples, w);
  if (o.validation_samples < 1) throw ConfigError(w + ".validation_samples: must be at least 1");
  if (o.plan.max_N < 2) throw ConfigError(w + ".max_N: must be at least 2");
  if (o.readout.H < 1 || o.readout.max_H < o.readout.H) throw ConfigError(w + ".readout_H: need 1 <= H <= max_H");
  return o;
}

void write_manifest(RunContext& ctx, const json& extra) {
  json files = json::array();
  for (const auto& f : ctx.written) files.push_back(f);
  json m = {{"kind", "run_manifest"},
            {"command", ctx.command},
            {"config_hash", ctx.config_hash},
            {"seed", ctx.seed},
            {"config", ctx.config},
            {"files", files},
            {"versions",
             {{"nosc", NOSC_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  save_json(ctx.path("manifest.json"), m, 2);
}

}  // namespace nosc::cli
