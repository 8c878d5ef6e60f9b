#pragma once

namespace semoff {

// Entry point of the command-line front end; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace semoff
