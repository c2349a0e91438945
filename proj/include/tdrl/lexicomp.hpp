#pragma once

#include "tdrl/testkit.hpp"

#include <cstddef>
#include <vector>

namespace tdrl {

/// Supervision triple for return learning: two evaluated outcomes and the
/// label mu in {0, 0.5, 1} saying which trajectory is closer to the optimal
/// set (1: first, 0: second, 0.5: indistinguishable).
struct ComparisonTriple {
    TestOutcome first;
    TestOutcome second;
    double mu = 0.5;
};

/// Pass-fail comparison order: ascending historical pass rate (hardest
/// first), ties broken by suite index.
std::vector<std::size_t> order_passfail(const TestStats& stats);

/// Indicative comparison order: descending skewness of the value history
/// (least-optimized first), ties broken by suite index.
std::vector<std::size_t> order_indicative(const TestStats& stats);

/// Lexicographic comparison of two outcomes evaluated under the same suite:
///   1. both pass everything -> 0.5
///   2. higher pass count wins
///   3. first differing pass-fail bit in order_passfail decides
///   4. first strictly greater indicative value in order_indicative decides
///   5. otherwise 0.5
double compare(const TestOutcome& first, const TestOutcome& second, const TestStats& stats);

} // namespace tdrl
