#pragma once

namespace failbench {

// Subcommands: validate, sessionize, profile, run, report, synth.
// Exit codes: 0 success, 1 validation error, 2 runtime error.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace failbench
