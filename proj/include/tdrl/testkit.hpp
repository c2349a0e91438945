#pragma once

#include "tdrl/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tdrl {

/// Binary trajectory predicate. Must be deterministic.
struct PassFailTest {
    std::string name;
    std::function<bool(const Trajectory&)> predicate;
};

/// Real-valued trajectory functional. Must be deterministic and finite.
struct IndicativeTest {
    std::string name;
    std::function<double(const Trajectory&)> functional;
};

/// Cached result of running a whole suite on one trajectory.
struct TestOutcome {
    std::uint64_t trajectory_id = 0;
    std::vector<std::uint8_t> passfail_bits;
    std::vector<double> indicative_values;
};

/// Running statistics over every trajectory a suite has evaluated:
/// pass/evaluation counts per pass-fail test and a bounded value history per
/// indicative test.
class TestStats {
public:
    TestStats() = default;
    TestStats(std::size_t passfail_count, std::size_t indicative_count,
              std::size_t history_capacity = 10000);
    /// Checkpoint restore: full internal state.
    TestStats(std::vector<std::uint64_t> evaluations, std::vector<std::uint64_t> passes,
              std::vector<std::vector<double>> histories, std::vector<std::size_t> cursors,
              std::size_t history_capacity);

    void record(const TestOutcome& outcome);

    std::size_t passfail_count() const { return evaluations_.size(); }
    std::size_t indicative_count() const { return histories_.size(); }

    std::uint64_t evaluations(std::size_t test_index) const;
    std::uint64_t passes(std::size_t test_index) const;

    /// Historical pass rate; 0.5 for a test that has never been evaluated.
    double pass_rate(std::size_t test_index) const;

    /// Value history of one indicative test (ring buffer, unspecified order).
    std::span<const double> history(std::size_t test_index) const;
    double history_mean(std::size_t test_index) const;
    std::size_t history_capacity() const { return history_capacity_; }
    std::size_t history_cursor(std::size_t test_index) const { return history_next_.at(test_index); }

private:
    friend class TestSuite;
    std::vector<std::uint64_t> evaluations_;
    std::vector<std::uint64_t> passes_;
    std::vector<std::vector<double>> histories_;
    std::vector<std::size_t> history_next_;
    std::size_t history_capacity_ = 10000;
};

/// Ordered pass-fail and indicative tests plus the outcome cache and running
/// stats. Evaluation is memoized per trajectory id; cached and fresh results
/// are identical and stats are recorded exactly once per trajectory.
/// Single-threaded use.
class TestSuite {
public:
    TestSuite(std::vector<PassFailTest> passfail, std::vector<IndicativeTest> indicative,
              std::size_t history_capacity = 10000);

    std::size_t passfail_count() const { return passfail_.size(); }
    std::size_t indicative_count() const { return indicative_.size(); }
    const std::string& passfail_name(std::size_t i) const { return passfail_[i].name; }
    const std::string& indicative_name(std::size_t i) const { return indicative_[i].name; }

    const TestOutcome& evaluate(const Trajectory& trajectory);
    const TestStats& stats() const { return stats_; }

    bool cached(std::uint64_t trajectory_id) const { return cache_.contains(trajectory_id); }
    /// Drops the cached outcome for an evicted trajectory. Stats are kept.
    void forget(std::uint64_t trajectory_id) { cache_.erase(trajectory_id); }
    std::size_t cache_size() const { return cache_.size(); }

    /// Checkpoint support: stats plus cached outcomes, restored verbatim.
    void restore(TestStats stats, std::vector<TestOutcome> outcomes);
    std::vector<TestOutcome> cached_outcomes() const;

private:
    std::vector<PassFailTest> passfail_;
    std::vector<IndicativeTest> indicative_;
    TestStats stats_;
    std::unordered_map<std::uint64_t, TestOutcome> cache_;
};

/// Number of pass-fail tests an outcome passed.
int pass_count(const TestOutcome& outcome);

/// Fisher-Pearson sample skewness m3 / m2^(3/2) with biased central moments.
/// Returns 0 for fewer than 3 values or (biased) variance below 1e-12.
double skewness(std::span<const double> values);

} // namespace tdrl
