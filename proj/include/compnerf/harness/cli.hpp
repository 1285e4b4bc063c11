#pragma once

namespace compnerf::harness {

// Subcommands: gen-data, train-ae, train-gnn, render, predict, eval, plan.
// Every command prints a one-line JSON summary on success and returns a
// nonzero status on error.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace compnerf::harness
