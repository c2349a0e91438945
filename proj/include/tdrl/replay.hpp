#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace tdrl {

class Rng;

/// One stored interaction. The reward field is rewritten in place whenever
/// the reward ensemble is relabeled; everything else is immutable.
struct ReplayItem {
    std::vector<double> state;
    std::vector<double> action;
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;
};

/// Bounded FIFO of transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(ReplayItem item);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }

    const ReplayItem& operator[](std::size_t index) const { return items_[index]; }
    ReplayItem& operator[](std::size_t index) { return items_[index]; }

    /// Uniform minibatch of indices, with replacement.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<ReplayItem> items_;
};

} // namespace tdrl
