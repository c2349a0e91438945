#pragma once

namespace tdrl {

/// Command-line entry point; returns the process exit status.
/// Subcommands: train, verify-theory, compare, export.
int cli(int argc, const char* const* argv);

} // namespace tdrl
