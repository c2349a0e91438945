#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace tdrl {

/// Deterministic random stream. A run owns one master seed; every consumer
/// (env, policy, pair sampling, init, ...) gets its own named stream so that
/// extra draws on one stream never shift another.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Derives an independent stream from a master seed and a stream name.
    static Rng stream(std::uint64_t master_seed, std::string_view name);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal via the polar method (one spare cached).
    double normal();

    /// Engine state round-trip for checkpointing.
    std::string serialize() const;
    static Rng deserialize(const std::string& text);

    bool operator==(const Rng& other) const;

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tdrl
