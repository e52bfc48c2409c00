#pragma once

#include <iosfwd>

namespace ldboot::cli {

enum ExitCode : int {
  kOk = 0,
  kSchemaError = 1,
  kNumericFailure = 2,
  kDegenerate = 3,
};

/// Entry point of the `ldboot` binary, callable in-process. `in` backs
/// `--config -`; primary output goes to `out` unless `--out` names a file.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace ldboot::cli
