#pragma once

#include <iostream>

namespace tgclstm {

/// Entry point of the `tgclstm` tool. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage error (unknown flag, missing required input).
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace tgclstm
