#pragma once

namespace cwmap::cli {

// Batch front-end. Subcommands: gen, render, corrupt, infer, loss, eval,
// ablate, export-pgm. Returns 0 on success, 1 on usage errors, 2 on data
// errors; every run prints a reproducibility line on stderr.
int run(int argc, const char* const* argv);

}  // namespace cwmap::cli
