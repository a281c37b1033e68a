#pragma once

namespace nqs::cli {

// Full command-line front end; returns the process exit code
// (0 success, 1 validation failure, 2 runtime failure).
int cli_main(int argc, char** argv);

}  // namespace nqs::cli
