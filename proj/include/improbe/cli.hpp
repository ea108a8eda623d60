#pragma once

namespace improbe::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kNumeric = 5,
};

// Parses argv, runs one subcommand and returns the process exit code.
// Failures print exactly one line to stderr: "improbe: error[<kind>]: <message>".
int run_command(int argc, char** argv);

}  // namespace improbe::cli
