#pragma once

#include "nosc/compiler.hpp"
#include "nosc/oscillator.hpp"
#include "nosc/pnn_fk.hpp"
#include "nosc/reconstruction.hpp"
#include "nosc/sine_transform.hpp"

#include <json.hpp>

#include <string>

namespace nosc {

using json = nlohmann::json;

// Doubles are written in shortest round-trip form, so finite values reload
// bit-exactly; non-finite scalars are written as "nan", "inf", "-inf".
// Matrices are {"rows", "cols", "data"} (row-major) or, when mostly zero,
// {"rows", "cols", "sparse": [[i, j, v], ...]}. Malformed documents raise
// ConfigError naming the offending field.

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where = "matrix");
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j, const std::string& where = "vector");

json grid_to_json(const TimeGrid& g);
TimeGrid grid_from_json(const json& j);
json integrator_to_json(const IntegratorConfig& cfg);
IntegratorConfig integrator_from_json(const json& j);
json signal_to_json(const Signal& s);
Signal signal_from_json(const json& j);

json network_to_json(const GeneralOscillator& osc);
GeneralOscillator general_from_json(const json& j);
// With include_right_factors = false the right factors of factored layers are
// left out (the caller rebuilds them).
json network_to_json(const MultiLayerOscillator& osc, bool include_right_factors = true);
MultiLayerOscillator multilayer_from_json(const json& j);

json plan_to_json(const ReconstructionPlan& plan);
ReconstructionPlan plan_from_json(const json& j);
json bank_to_json(const FrequencyBank& bank);
FrequencyBank bank_from_json(const json& j);
json readout_to_json(const ReadoutNet& net);
ReadoutNet readout_from_json(const json& j);

// The network's derived couplings (layers 2 and 3) are rebuilt from the stored
// readout and banks on load and checked against the stored parts.
json compiled_to_json(const CompiledOscillator& co);
CompiledOscillator compiled_from_json(const json& j);

json fk_to_json(const FKSystem& sys);
FKSystem fk_from_json(const json& j);

void save_json(const std::string& path, const json& j, int indent = -1);
json load_json(const std::string& path);

}  // namespace nosc
