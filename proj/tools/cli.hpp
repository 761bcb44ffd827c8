#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bridgelab::cli {

/// Exit codes: 0 all verdicts pass, 1 a verdict fails or a run aborts, 2 usage or config error.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bridgelab::cli
