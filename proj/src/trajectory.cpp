#include "tdrl/trajectory.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

#include <string>

namespace tdrl {

Trajectory::Trajectory(std::uint64_t id, std::vector<Transition> transitions)
    : id_(id), transitions_(std::move(transitions)) {
    if (transitions_.empty()) throw Error("Trajectory: empty transition list");
    const std::size_t state_dim = transitions_.front().state.size();
    for (std::size_t t = 0; t < transitions_.size(); ++t) {
        const Transition& tr = transitions_[t];
        if (tr.state.size() != state_dim || tr.next_state.size() != state_dim) {
            throw Error("Trajectory: inconsistent state dimension at step " + std::to_string(t));
        }
        if (tr.done && t + 1 != transitions_.size()) {
            throw Error("Trajectory: done flag set before the final transition (step " +
                        std::to_string(t) + ")");
        }
        if (t + 1 < transitions_.size()) {
            const Transition& next = transitions_[t + 1];
            if (tr.next_state != next.state) {
                throw Error("Trajectory: broken state chain between steps " + std::to_string(t) +
                            " and " + std::to_string(t + 1));
            }
        }
    }
}

std::vector<std::vector<double>> Trajectory::state_sequence() const {
    std::vector<std::vector<double>> states;
    states.reserve(transitions_.size() + 1);
    states.push_back(transitions_.front().state);
    for (const Transition& tr : transitions_) states.push_back(tr.next_state);
    return states;
}

TrajectoryBuffer::TrajectoryBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error("TrajectoryBuffer: capacity must be positive");
}

std::optional<std::uint64_t> TrajectoryBuffer::push(Trajectory trajectory) {
    std::optional<std::uint64_t> evicted;
    if (items_.size() == capacity_) {
        evicted = items_.front().id();
        items_.pop_front();
    }
    items_.push_back(std::move(trajectory));
    return evicted;
}

std::vector<std::pair<const Trajectory*, const Trajectory*>>
sample_pairs(const TrajectoryBuffer& buffer, std::size_t count, Rng& rng) {
    if (buffer.size() < 2) throw Error("sample_pairs: buffer holds fewer than 2 trajectories");
    std::vector<std::pair<const Trajectory*, const Trajectory*>> pairs;
    pairs.reserve(count);
    const auto n = static_cast<std::int64_t>(buffer.size());
    for (std::size_t k = 0; k < count; ++k) {
        const auto first = rng.uniform_int(0, n - 1);
        auto second = rng.uniform_int(0, n - 2);
        if (second >= first) ++second;
        pairs.emplace_back(&buffer[static_cast<std::size_t>(first)],
                           &buffer[static_cast<std::size_t>(second)]);
    }
    return pairs;
}

} // namespace tdrl
