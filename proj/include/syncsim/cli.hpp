#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace syncsim {

/// Command-line entry point. `args` excludes the program name. Writes
/// results to `out` and diagnostics to `err`.
///
/// Exit status: 0 on success (a Diverged verdict is a result, not an
/// error), 1 on flag/config validation errors, 2 on runtime errors such as
/// a missing equilibrium or an unbracketed root search.
int cli_dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace syncsim
