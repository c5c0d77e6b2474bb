#include "nosc/serialization.hpp"

#include "nosc/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nosc {

namespace {

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double get_num(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(where + ": expected a number");
}

const json& at(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing field '" + key + "'");
  return *it;
}

double num_at(const json& j, const std::string& key, const std::string& where) {
  return get_num(at(j, key, where), where + "." + key);
}

int int_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = at(j, key, where);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

bool bool_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = at(j, key, where);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string str_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = at(j, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Activation act_at(const json& j, const std::string& where) {
  return Activation::from_name(str_at(j, "activation", where));
}

json pairs_to_json(const std::vector<std::pair<double, double>>& v) {
  json a = json::array();
  for (const auto& [x, y] : v) a.push_back({num(x), num(y)});
  return a;
}

std::vector<std::pair<double, double>> pairs_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(where + ": expected [x, y] pairs");
    out.emplace_back(get_num(e[0], where), get_num(e[1], where));
  }
  return out;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j{{"rows", m.rows()}, {"cols", m.cols()}};
  long nnz = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) nnz += m.data()[i] != 0.0;
  json data = json::array();
  if (3 * nnz < m.size()) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0) data.push_back({r, c, num(m(r, c))});
    j["sparse"] = std::move(data);
  } else {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(num(m(r, c)));
    j["data"] = std::move(data);
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  const int rows = int_at(j, "rows", where), cols = int_at(j, "cols", where);
  if (rows < 0 || cols < 0) throw ConfigError(where + ": negative size");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (j.contains("sparse")) {
    for (const auto& e : at(j, "sparse", where)) {
      if (!e.is_array() || e.size() != 3) throw ConfigError(where + ".sparse: expected [row, col, value]");
      if (!e[0].is_number_integer() || !e[1].is_number_integer())
        throw ConfigError(where + ".sparse: indices must be integers");
      const long r = e[0].get<long>(), c = e[1].get<long>();
      if (r < 0 || r >= rows || c < 0 || c >= cols) throw ConfigError(where + ".sparse: index out of range");
      m(r, c) = get_num(e[2], where + ".sparse");
    }
    return m;
  }
  const json& d = at(j, "data", where);
  if (!d.is_array() || static_cast<long>(d.size()) != static_cast<long>(rows) * cols)
    throw ConfigError(where + ".data: expected " + std::to_string(static_cast<long>(rows) * cols) + " entries");
  for (int r = 0, k = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++k) m(r, c) = get_num(d[k], where + ".data");
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = get_num(j[i], where);
  return v;
}

json grid_to_json(const TimeGrid& g) {
  return {{"t_start", num(g.t_start)}, {"t_end", num(g.t_end)}, {"n_steps", g.n_steps}};
}

TimeGrid grid_from_json(const json& j) {
  return TimeGrid(num_at(j, "t_start", "grid"), num_at(j, "t_end", "grid"), int_at(j, "n_steps", "grid"));
}

json integrator_to_json(const IntegratorConfig& cfg) {
  return {{"method", method_name(cfg.method)}, {"substeps", cfg.substeps}, {"max_h_omega", num(cfg.max_h_omega)}};
}

IntegratorConfig integrator_from_json(const json& j) {
  IntegratorConfig cfg;
  cfg.method = method_from_name(str_at(j, "method", "integrator"));
  cfg.substeps = int_at(j, "substeps", "integrator");
  cfg.max_h_omega = num_at(j, "max_h_omega", "integrator");
  if (cfg.substeps < 1 || cfg.max_h_omega < 0.0) throw ConfigError("integrator: invalid substeps or max_h_omega");
  return cfg;
}

json signal_to_json(const Signal& s) { return {{"grid", grid_to_json(s.grid())}, {"values", matrix_to_json(s.values())}}; }

Signal signal_from_json(const json& j) {
  const TimeGrid g = grid_from_json(at(j, "grid", "signal"));
  Eigen::MatrixXd v = matrix_from_json(at(j, "values", "signal"), "signal.values");
  if (v.rows() != g.size()) throw ConfigError("signal: values do not match the grid");
  return Signal(g, std::move(v));
}

json network_to_json(const GeneralOscillator& osc) {
  return {{"kind", "general"},
          {"activation", osc.act.name()},
          {"W", matrix_to_json(osc.W)},
          {"V", matrix_to_json(osc.V)},
          {"b", vector_to_json(osc.b)},
          {"A", matrix_to_json(osc.A)},
          {"c", vector_to_json(osc.c)}};
}

GeneralOscillator general_from_json(const json& j) {
  if (str_at(j, "kind", "network") != "general") throw ConfigError("network: expected kind 'general'");
  GeneralOscillator g;
  g.act = act_at(j, "network");
  g.W = matrix_from_json(at(j, "W", "network"), "network.W");
  g.V = matrix_from_json(at(j, "V", "network"), "network.V");
  g.b = vector_from_json(at(j, "b", "network"), "network.b");
  g.A = matrix_from_json(at(j, "A", "network"), "network.A");
  g.c = vector_from_json(at(j, "c", "network"), "network.c");
  g.validate();
  return g;
}

json network_to_json(const MultiLayerOscillator& osc, bool include_right_factors) {
  json layers = json::array();
  for (const auto& l : osc.layers) {
    json lj{{"w", vector_to_json(l.w)}, {"b", vector_to_json(l.b)}, {"force_outside", l.force_outside}};
    if (l.factored()) {
      lj["V_left"] = matrix_to_json(l.V_left);
      if (include_right_factors) lj["V_right"] = matrix_to_json(l.V_right);
    } else {
      lj["V"] = matrix_to_json(l.V);
    }
    layers.push_back(std::move(lj));
  }
  return {{"kind", "multilayer"}, {"p", osc.p},          {"activation", osc.act.name()},
          {"layers", layers},     {"A", matrix_to_json(osc.A)}, {"c", vector_to_json(osc.c)}};
}

namespace {

// Layers without their right factors are returned with V empty.
MultiLayerOscillator multilayer_parts(const json& j) {
  if (str_at(j, "kind", "network") != "multilayer") throw ConfigError("network: expected kind 'multilayer'");
  MultiLayerOscillator m;
  m.p = int_at(j, "p", "network");
  m.act = act_at(j, "network");
  const json& layers = at(j, "layers", "network");
  if (!layers.is_array()) throw ConfigError("network.layers: expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "network.layers[" + std::to_string(i) + "]";
    const json& lj = layers[i];
    OscillatorLayer l;
    l.w = vector_from_json(at(lj, "w", where), where + ".w");
    l.b = vector_from_json(at(lj, "b", where), where + ".b");
    l.force_outside = bool_at(lj, "force_outside", where);
    if (lj.contains("V_left")) {
      l.V_left = matrix_from_json(lj["V_left"], where + ".V_left");
      if (lj.contains("V_right")) {
        l.V_right = matrix_from_json(lj["V_right"], where + ".V_right");
        if (l.V_left.cols() != l.V_right.rows()) throw ConfigError(where + ": coupling factors do not chain");
        l.V = l.V_left * l.V_right;
      }
    } else {
      l.V = matrix_from_json(at(lj, "V", where), where + ".V");
    }
    m.layers.push_back(std::move(l));
  }
  m.A = matrix_from_json(at(j, "A", "network"), "network.A");
  m.c = vector_from_json(at(j, "c", "network"), "network.c");
  return m;
}

}  // namespace

MultiLayerOscillator multilayer_from_json(const json& j) {
  MultiLayerOscillator m = multilayer_parts(j);
  for (std::size_t i = 0; i < m.layers.size(); ++i)
    if (m.layers[i].factored() && m.layers[i].V_right.size() == 0)
      throw ConfigError("network.layers[" + std::to_string(i) + "]: missing field 'V_right'");
  m.validate();
  return m;
}

json plan_to_json(const ReconstructionPlan& plan) {
  json hist = json::array();
  for (const auto& h : plan.history)
    hist.push_back({{"N", h.N}, {"eps_moll", num(h.eps_moll)}, {"L_cut", num(h.L_cut)},
                    {"validated_err", num(h.validated_err)}});
  return {{"N", plan.N},
          {"omega", vector_to_json(plan.omega)},
          {"alpha", vector_to_json(plan.alpha)},
          {"theta", vector_to_json(plan.theta)},
          {"folded", plan.folded},
          {"p", plan.p},
          {"T", num(plan.T)},
          {"window", num(plan.window)},
          {"eps_moll", num(plan.eps_moll)},
          {"L_cut", num(plan.L_cut)},
          {"target_err", num(plan.target_err)},
          {"achieved_err", num(plan.achieved_err)},
          {"modulus", num(plan.modulus)},
          {"history", hist}};
}

ReconstructionPlan plan_from_json(const json& j) {
  const std::string w = "plan";
  ReconstructionPlan p;
  p.N = int_at(j, "N", w);
  p.omega = vector_from_json(at(j, "omega", w), w + ".omega");
  p.alpha = vector_from_json(at(j, "alpha", w), w + ".alpha");
  p.theta = vector_from_json(at(j, "theta", w), w + ".theta");
  p.folded = bool_at(j, "folded", w);
  p.p = int_at(j, "p", w);
  p.T = num_at(j, "T", w);
  p.window = num_at(j, "window", w);
  p.eps_moll = num_at(j, "eps_moll", w);
  p.L_cut = num_at(j, "L_cut", w);
  p.target_err = num_at(j, "target_err", w);
  p.achieved_err = num_at(j, "achieved_err", w);
  p.modulus = num_at(j, "modulus", w);
  for (const auto& h : at(j, "history", w))
    p.history.push_back({int_at(h, "N", w + ".history"), num_at(h, "eps_moll", w + ".history"),
                         num_at(h, "L_cut", w + ".history"), num_at(h, "validated_err", w + ".history")});
  p.validate();
  return p;
}

json bank_to_json(const FrequencyBank& bank) {
  json ch = json::array();
  for (const auto& c : bank.channels)
    ch.push_back({{"omega", num(c.omega)}, {"s", num(c.s)}, {"achieved_err", num(c.achieved_err)},
                  {"sweep", pairs_to_json(c.sweep)}});
  return {{"activation", bank.act.name()}, {"p", bank.p}, {"achieved_err", num(bank.achieved_err)}, {"channels", ch}};
}

FrequencyBank bank_from_json(const json& j) {
  const std::string w = "bank";
  FrequencyBank b;
  b.act = act_at(j, w);
  b.p = int_at(j, "p", w);
  b.achieved_err = num_at(j, "achieved_err", w);
  for (const auto& c : at(j, "channels", w))
    b.channels.push_back({num_at(c, "omega", w + ".channels"), num_at(c, "s", w + ".channels"),
                          num_at(c, "achieved_err", w + ".channels"),
                          pairs_from_json(at(c, "sweep", w + ".channels"), w + ".channels.sweep")});
  b.validate();
  return b;
}

json readout_to_json(const ReadoutNet& net) {
  return {{"activation", net.act.name()},
          {"Sigma", matrix_to_json(net.Sigma)},
          {"Lambda", matrix_to_json(net.Lambda)},
          {"gamma", vector_to_json(net.gamma)}};
}

ReadoutNet readout_from_json(const json& j) {
  ReadoutNet n;
  n.act = act_at(j, "readout");
  n.Sigma = matrix_from_json(at(j, "Sigma", "readout"), "readout.Sigma");
  n.Lambda = matrix_from_json(at(j, "Lambda", "readout"), "readout.Lambda");
  n.gamma = vector_from_json(at(j, "gamma", "readout"), "readout.gamma");
  n.validate();
  return n;
}

json compiled_to_json(const CompiledOscillator& co) {
  json stages = json::array();
  for (const auto& s : co.stages)
    stages.push_back({{"name", s.name}, {"budget", num(s.budget)}, {"achieved", num(s.achieved)},
                      {"detail", s.detail}, {"met", s.met()}});
  json rs = json::array();
  for (const auto& [H, e] : co.readout_sweep) rs.push_back({H, num(e)});
  return {{"kind", "compiled_oscillator"},
          {"operator", co.operator_name},
          {"p", co.p},
          {"q", co.q},
          {"grid", grid_to_json(co.grid)},
          {"eps_total", num(co.eps_total)},
          {"validate_from", num(co.validate_from)},
          {"network", network_to_json(co.net, false)},
          {"plan", plan_to_json(co.plan)},
          {"bank", bank_to_json(co.bank)},
          {"readout", readout_to_json(co.readout)},
          {"fd_dt", num(co.fd_dt)},
          {"plan3", plan_to_json(co.plan3)},
          {"bank3", bank_to_json(co.bank3)},
          {"stages", stages},
          {"operator_lipschitz", num(co.operator_lipschitz)},
          {"readout_lipschitz", num(co.readout_lipschitz)},
          {"readout_sweep", rs},
          {"fd_sweep", pairs_to_json(co.fd_sweep)},
          {"e2e", num(co.e2e)},
          {"stage_sum", num(co.stage_sum())},
          {"budget_met", co.budget_met()},
          {"ledger_consistent", co.ledger_consistent()}};
}

CompiledOscillator compiled_from_json(const json& j) {
  const std::string w = "compiled";
  if (str_at(j, "kind", w) != "compiled_oscillator") throw ConfigError(w + ": expected kind 'compiled_oscillator'");
  CompiledOscillator co;
  co.operator_name = str_at(j, "operator", w);
  co.p = int_at(j, "p", w);
  co.q = int_at(j, "q", w);
  co.grid = grid_from_json(at(j, "grid", w));
  co.eps_total = num_at(j, "eps_total", w);
  co.validate_from = num_at(j, "validate_from", w);
  co.plan = plan_from_json(at(j, "plan", w));
  co.bank = bank_from_json(at(j, "bank", w));
  co.readout = readout_from_json(at(j, "readout", w));
  co.fd_dt = num_at(j, "fd_dt", w);
  co.plan3 = plan_from_json(at(j, "plan3", w));
  co.bank3 = bank_from_json(at(j, "bank3", w));
  for (const auto& s : at(j, "stages", w))
    co.stages.push_back({str_at(s, "name", w + ".stages"), num_at(s, "budget", w + ".stages"),
                         num_at(s, "achieved", w + ".stages"), str_at(s, "detail", w + ".stages")});
  co.operator_lipschitz = num_at(j, "operator_lipschitz", w);
  co.readout_lipschitz = num_at(j, "readout_lipschitz", w);
  for (const auto& e : at(j, "readout_sweep", w)) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(w + ".readout_sweep: expected [H, error] pairs");
    co.readout_sweep.emplace_back(e[0].get<int>(), get_num(e[1], w + ".readout_sweep"));
  }
  co.fd_sweep = pairs_from_json(at(j, "fd_sweep", w), w + ".fd_sweep");
  co.e2e = num_at(j, "e2e", w);

  // rebuild the couplings and check them against what was stored
  const MultiLayerOscillator stored = multilayer_parts(at(j, "network", w));
  co.net.p = stored.p;
  co.net.act = stored.act;
  co.net.layers = compiled_layers(co.bank, co.readout, co.bank3);
  co.net.A = stored.A;
  co.net.c = stored.c;
  if (stored.layers.size() != co.net.layers.size()) throw ConfigError(w + ".network: expected three layers");
  for (std::size_t i = 0; i < stored.layers.size(); ++i) {
    const auto& a = stored.layers[i];
    const auto& b = co.net.layers[i];
    const bool ok = same_bits(a.w, b.w) && same_bits(a.b, b.b) && a.force_outside == b.force_outside &&
                    (b.factored() ? same_bits(a.V_left, b.V_left) : same_bits(a.V, b.V));
    if (!ok)
      throw ConfigError(w + ".network.layers[" + std::to_string(i) + "]: does not match the stored readout and banks");
  }
  co.net.validate();
  return co;
}

json fk_to_json(const FKSystem& sys) {
  return {{"kind", "fk_system"},
          {"mu", vector_to_json(sys.mu)},
          {"k", vector_to_json(sys.k)},
          {"C", matrix_to_json(sys.C)},
          {"F", signal_to_json(sys.F)}};
}

FKSystem fk_from_json(const json& j) {
  if (str_at(j, "kind", "fk") != "fk_system") throw ConfigError("fk: expected kind 'fk_system'");
  FKSystem s;
  s.mu = vector_from_json(at(j, "mu", "fk"), "fk.mu");
  s.k = vector_from_json(at(j, "k", "fk"), "fk.k");
  s.C = matrix_from_json(at(j, "C", "fk"), "fk.C");
  s.F = signal_from_json(at(j, "F", "fk"));
  s.validate();
  return s;
}

void save_json(const std::string& path, const json& j, int indent) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(indent) << '\n';
  if (!f) throw ConfigError("error writing " + path);
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace nosc
