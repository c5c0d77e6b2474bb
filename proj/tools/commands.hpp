#pragma once

#include "run_config.hpp"

#include <string>

namespace nosc::cli {

// Each command returns the process exit status; configuration problems,
// instabilities and budget misses propagate as exceptions.
int cmd_simulate(RunContext& ctx);
int cmd_transform(RunContext& ctx);
int cmd_reconstruct(RunContext& ctx);
int cmd_compile(RunContext& ctx);
int cmd_approx_fn(RunContext& ctx);
int cmd_fk_sweep(RunContext& ctx);
int cmd_verify(RunContext& ctx, const std::string& suite);

}  // namespace nosc::cli
