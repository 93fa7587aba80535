#pragma once

#include <string>
#include <vector>

namespace topo {

/// Run the command-line front-end. Exit codes: 0 success (or positive match
/// for `compare`), 1 negative match (`compare` only), 2 usage or runtime
/// failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

} // namespace topo
