#include "tdrl/replay.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

namespace tdrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(ReplayItem item) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
    if (items_.empty()) throw Error("ReplayBuffer: cannot sample from an empty buffer");
    std::vector<std::size_t> indices;
    indices.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        indices.push_back(static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(items_.size()) - 1)));
    }
    return indices;
}

} // namespace tdrl
