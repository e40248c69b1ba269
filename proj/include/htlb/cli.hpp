#pragma once

#include <iosfwd>

namespace htlb {

/// Entry point of the `htlb_sim` tool. Returns 0 on success, 1 on an invalid
/// configuration or unknown flag, 2 on I/O failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace htlb
