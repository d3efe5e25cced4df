#pragma once

namespace tmfrac {

// Batch front-end entry point. Returns the process exit status:
// 0 success, 1 verification failures / unexpected errors, 2 validation or
// usage errors, 3 solver non-convergence.
int run_cli(int argc, const char* const* argv);

}  // namespace tmfrac
