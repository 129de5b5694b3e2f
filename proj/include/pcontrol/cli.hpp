#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcontrol {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1,         // validation, I/O and invariant failures
    kExitNonConvergence = 2,  // safety iteration or controller did not converge
};

// Entry point of the `pcontrol` tool. `args` excludes the program name.
// Results go to `out` (or to --out files), diagnostics to `err` as
// `level=... code=... msg="..."` lines.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcontrol
