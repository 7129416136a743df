#pragma once

namespace siqa {

/// Parses and dispatches the subcommands (features, cluster, synth, train,
/// eval, predict, plot, dump-patches). Exit codes: 0 success, 1 runtime
/// failure, 2 usage or validation error.
int run_cli(int argc, const char* const* argv);

}  // namespace siqa
