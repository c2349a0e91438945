#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tdrl {

class Rng;

/// One environment step: (state, action, next_state, done).
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    std::vector<double> next_state;
    bool done = false;
};

/// A whole episode. Construction validates the chain: consecutive transitions
/// must agree exactly on the shared state, and done may appear only on the
/// final transition.
class Trajectory {
public:
    Trajectory(std::uint64_t id, std::vector<Transition> transitions);

    std::uint64_t id() const { return id_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    std::size_t length() const { return transitions_.size(); }

    /// Full state sequence s_0 .. s_T (length() + 1 entries).
    std::vector<std::vector<double>> state_sequence() const;

private:
    std::uint64_t id_ = 0;
    std::vector<Transition> transitions_;
};

/// Bounded FIFO store of whole episodes. Evicted trajectory ids are reported
/// so that outcome caches keyed on them can drop stale entries.
class TrajectoryBuffer {
public:
    explicit TrajectoryBuffer(std::size_t capacity);

    /// Returns the evicted trajectory id, if the push displaced one.
    std::optional<std::uint64_t> push(Trajectory trajectory);

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const Trajectory& operator[](std::size_t index) const { return items_[index]; }

private:
    std::size_t capacity_;
    std::deque<Trajectory> items_;
};

/// Draws `count` trajectory pairs from the buffer: members of a pair are
/// distinct (drawn without replacement), pairs are drawn with replacement.
std::vector<std::pair<const Trajectory*, const Trajectory*>>
sample_pairs(const TrajectoryBuffer& buffer, std::size_t count, Rng& rng);

} // namespace tdrl
