#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpi/verification.hpp"

namespace fpi {

enum class Command { Convergence, Coupled, Stokes, Plate, InfSup };

std::string to_string(Command c);

struct RunConfig {
  Command command = Command::Convergence;
  std::vector<int> ns;  ///< empty until parsed; parse_args fills the per-command default
  double lambda = 1.0;
  double eps = 1e-10;
  int max_iter = 20;
  double omega = 1.0;
  StudyMode mode = StudyMode::Partitioned;
  std::string out = ".";
};

/// Default n-list of a command when --n is absent.
std::vector<int> default_ns(Command c);

struct ParseOutcome {
  std::optional<RunConfig> config;  ///< empty when parsing stopped (help or error)
  int exit_code = 0;
  std::string message;  ///< usage or error text
};

/// argv[0] is the program name.
ParseOutcome parse_args(int argc, const char* const* argv);

/// One-line record of every field, used as the leading comment of each artifact.
std::string describe(const RunConfig& config);

/// Runs the command, writes artifacts into config.out, prints one summary line per run.
/// Returns 0 on success, 2 on solver or I/O failure.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + execute; usage errors return 1.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fpi
