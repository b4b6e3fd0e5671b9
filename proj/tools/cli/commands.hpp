#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "cli/config.hpp"
#include "qbound/bound_result.hpp"
#include "qbound/state_models.hpp"

namespace qbound::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

std::unique_ptr<StateFamily> build_family(const ModelConfig& model);

struct BoundRecord {
  BoundSpec spec;
  int m = 1;
  double theta = 0.0;
  BoundResult result;
  double qcrb = 0.0;
};

BoundRecord compute_bound(const StateFamily& family, const BoundSpec& spec, int m, double theta,
                          const OptimizerConfig& opt);

/// 17 significant digits, '.' separator, independent of the locale.
std::string format_double(double x);

int cmd_bound(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep_fig1(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_montecarlo(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qbound::cli
