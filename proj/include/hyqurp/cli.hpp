#pragma once

#include <ostream>

namespace hyqurp {

/// Exit codes: 0 success, 1 verification failure, 2 usage or config error.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hyqurp
