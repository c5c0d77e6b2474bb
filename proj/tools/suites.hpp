#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nosc::cli {

struct Assertion {
  std::string suite;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=" or ">="
  bool passed = false;
};

// Suite names: signals, harmonic, calibration, structure, reconstruction,
// compiler, fk, all. Unknown or empty names are configuration errors.
std::vector<std::string> suite_names();
std::vector<Assertion> run_suite(const std::string& name, std::uint64_t seed);

}  // namespace nosc::cli
