#include "tdrl/testkit.hpp"

#include "tdrl/error.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

namespace tdrl {

TestStats::TestStats(std::size_t passfail_count, std::size_t indicative_count,
                     std::size_t history_capacity)
    : evaluations_(passfail_count, 0),
      passes_(passfail_count, 0),
      histories_(indicative_count),
      history_next_(indicative_count, 0),
      history_capacity_(history_capacity) {
    if (history_capacity == 0) throw Error("TestStats: history capacity must be positive");
}

TestStats::TestStats(std::vector<std::uint64_t> evaluations, std::vector<std::uint64_t> passes,
                     std::vector<std::vector<double>> histories, std::vector<std::size_t> cursors,
                     std::size_t history_capacity)
    : evaluations_(std::move(evaluations)),
      passes_(std::move(passes)),
      histories_(std::move(histories)),
      history_next_(std::move(cursors)),
      history_capacity_(history_capacity) {
    if (evaluations_.size() != passes_.size() || histories_.size() != history_next_.size()) {
        throw Error("TestStats: inconsistent restored state");
    }
    for (std::size_t i = 0; i < evaluations_.size(); ++i) {
        if (passes_[i] > evaluations_[i]) {
            throw Error("TestStats: restored pass count exceeds evaluation count");
        }
    }
}

void TestStats::record(const TestOutcome& outcome) {
    if (outcome.passfail_bits.size() != evaluations_.size() ||
        outcome.indicative_values.size() != histories_.size()) {
        throw Error("TestStats::record: outcome shape does not match the suite");
    }
    for (std::size_t i = 0; i < evaluations_.size(); ++i) {
        ++evaluations_[i];
        passes_[i] += outcome.passfail_bits[i] ? 1 : 0;
    }
    for (std::size_t j = 0; j < histories_.size(); ++j) {
        auto& hist = histories_[j];
        if (hist.size() < history_capacity_) {
            hist.push_back(outcome.indicative_values[j]);
        } else {
            hist[history_next_[j]] = outcome.indicative_values[j];
            history_next_[j] = (history_next_[j] + 1) % history_capacity_;
        }
    }
}

std::uint64_t TestStats::evaluations(std::size_t test_index) const {
    return evaluations_.at(test_index);
}

std::uint64_t TestStats::passes(std::size_t test_index) const {
    return passes_.at(test_index);
}

double TestStats::pass_rate(std::size_t test_index) const {
    const std::uint64_t evals = evaluations_.at(test_index);
    if (evals == 0) return 0.5;
    return static_cast<double>(passes_[test_index]) / static_cast<double>(evals);
}

std::span<const double> TestStats::history(std::size_t test_index) const {
    return histories_.at(test_index);
}

double TestStats::history_mean(std::size_t test_index) const {
    const auto& hist = histories_.at(test_index);
    if (hist.empty()) return 0.0;
    return std::accumulate(hist.begin(), hist.end(), 0.0) / static_cast<double>(hist.size());
}

TestSuite::TestSuite(std::vector<PassFailTest> passfail, std::vector<IndicativeTest> indicative,
                     std::size_t history_capacity)
    : passfail_(std::move(passfail)),
      indicative_(std::move(indicative)),
      stats_(passfail_.size(), indicative_.size(), history_capacity) {
    if (passfail_.empty()) throw Error("TestSuite: at least one pass-fail test required");
    if (indicative_.empty()) throw Error("TestSuite: at least one indicative test required");
    std::unordered_set<std::string> names;
    for (const auto& test : passfail_) {
        if (!names.insert(test.name).second) {
            throw Error("TestSuite: duplicate test name '" + test.name + "'");
        }
    }
    for (const auto& test : indicative_) {
        if (!names.insert(test.name).second) {
            throw Error("TestSuite: duplicate test name '" + test.name + "'");
        }
    }
}

const TestOutcome& TestSuite::evaluate(const Trajectory& trajectory) {
    if (auto found = cache_.find(trajectory.id()); found != cache_.end()) {
        return found->second;
    }
    TestOutcome outcome;
    outcome.trajectory_id = trajectory.id();
    outcome.passfail_bits.reserve(passfail_.size());
    for (const auto& test : passfail_) {
        outcome.passfail_bits.push_back(test.predicate(trajectory) ? 1 : 0);
    }
    outcome.indicative_values.reserve(indicative_.size());
    for (const auto& test : indicative_) {
        const double value = test.functional(trajectory);
        if (!std::isfinite(value)) {
            throw Error("TestSuite::evaluate: indicative test '" + test.name +
                        "' returned a non-finite value");
        }
        outcome.indicative_values.push_back(value);
    }
    stats_.record(outcome);
    return cache_.emplace(trajectory.id(), std::move(outcome)).first->second;
}

void TestSuite::restore(TestStats stats, std::vector<TestOutcome> outcomes) {
    if (stats.passfail_count() != passfail_.size() ||
        stats.indicative_count() != indicative_.size()) {
        throw Error("TestSuite::restore: stats shape does not match the suite");
    }
    stats_ = std::move(stats);
    cache_.clear();
    for (auto& outcome : outcomes) {
        const auto id = outcome.trajectory_id;
        cache_.emplace(id, std::move(outcome));
    }
}

std::vector<TestOutcome> TestSuite::cached_outcomes() const {
    std::vector<TestOutcome> outcomes;
    outcomes.reserve(cache_.size());
    for (const auto& [id, outcome] : cache_) outcomes.push_back(outcome);
    return outcomes;
}

int pass_count(const TestOutcome& outcome) {
    int count = 0;
    for (std::uint8_t bit : outcome.passfail_bits) count += bit ? 1 : 0;
    return count;
}

double skewness(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 3) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 < 1e-12) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

} // namespace tdrl
