#pragma once

#include <string>

namespace sill {

// CLI entry points. Each returns the process exit code: 0 on success, 2 for
// configuration/validation problems, 3 for numerical failures. Errors are
// reported on stderr.

int cmd_fit(const std::string& config_path);
int cmd_simulate(const std::string& model_path, const std::string& config_path, int jobs);
int cmd_sweep_alpha(const std::string& config_path, int jobs);
int cmd_error_bounds(const std::string& model_path, const std::string& config_path);
int cmd_demo(const std::string& which, const std::string& outdir, int jobs);

} // namespace sill
