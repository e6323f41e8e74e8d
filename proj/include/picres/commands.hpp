#pragma once

#include <string>

#include "picres/config.hpp"

namespace picres {

// Draws a synthetic triangle from the generative model of `m` with true factors `truth`.
ClaimsTriangle simulate_triangle(const ModelConfig& m, const DevelopmentFactors& truth, Rng& rng);
DevelopmentFactors truth_factors(const Config& cfg, int J);

// Exit codes: 0 success, 2 diagnostics threshold failure, 1 error (thrown as picres::Error).
int cmd_run(const std::string& config_path, const CliOverrides& o = {});
int cmd_simulate(const std::string& config_path, const CliOverrides& o = {});
int cmd_diagnose(const std::string& trace_dir, const CliOverrides& o = {});

}  // namespace picres
