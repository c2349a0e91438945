#include "tdrl/rng.hpp"

#include "tdrl/error.hpp"

#include <cmath>
#include <sstream>

namespace tdrl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

} // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t master_seed, std::string_view name) {
    return Rng(splitmix64(splitmix64(master_seed) ^ fnv1a64(name)));
}

std::uint64_t Rng::next_u64() {
    return engine_();
}

double Rng::uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw Error("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << spare_;
    return out.str();
}

Rng Rng::deserialize(const std::string& text) {
    Rng rng(0);
    std::istringstream in(text);
    int has_spare = 0;
    in >> rng.engine_ >> has_spare >> rng.spare_;
    if (!in) throw Error("Rng::deserialize: malformed state text");
    rng.has_spare_ = has_spare != 0;
    return rng;
}

bool Rng::operator==(const Rng& other) const {
    return engine_ == other.engine_ && has_spare_ == other.has_spare_ &&
           (!has_spare_ || spare_ == other.spare_);
}

} // namespace tdrl
