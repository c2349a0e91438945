#pragma once

#include <filesystem>

namespace tdrl {

class Trainer;

/// Writes networks (portable text format), optimizer state, buffers, test
/// statistics, and rng streams. A restored trainer continues bit-identically.
void write_checkpoint(const Trainer& trainer, const std::filesystem::path& dir);

/// Restores a checkpoint into a trainer constructed from the same config.
void read_checkpoint(Trainer& trainer, const std::filesystem::path& dir);

} // namespace tdrl
