#include "tdrl/lexicomp.hpp"

#include "tdrl/error.hpp"

#include <algorithm>
#include <numeric>

namespace tdrl {

std::vector<std::size_t> order_passfail(const TestStats& stats) {
    std::vector<std::size_t> order(stats.passfail_count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&stats](std::size_t a, std::size_t b) {
        return stats.pass_rate(a) < stats.pass_rate(b);
    });
    return order;
}

std::vector<std::size_t> order_indicative(const TestStats& stats) {
    std::vector<double> skews(stats.indicative_count());
    for (std::size_t j = 0; j < skews.size(); ++j) skews[j] = skewness(stats.history(j));
    std::vector<std::size_t> order(skews.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&skews](std::size_t a, std::size_t b) { return skews[a] > skews[b]; });
    return order;
}

double compare(const TestOutcome& first, const TestOutcome& second, const TestStats& stats) {
    const std::size_t m = stats.passfail_count();
    const std::size_t n = stats.indicative_count();
    if (first.passfail_bits.size() != m || second.passfail_bits.size() != m ||
        first.indicative_values.size() != n || second.indicative_values.size() != n) {
        throw Error("compare: outcome dimensions do not match the suite");
    }

    const int count1 = pass_count(first);
    const int count2 = pass_count(second);
    if (count1 == static_cast<int>(m) && count2 == static_cast<int>(m)) return 0.5;
    if (count1 > count2) return 1.0;
    if (count1 < count2) return 0.0;

    for (std::size_t i : order_passfail(stats)) {
        if (first.passfail_bits[i] > second.passfail_bits[i]) return 1.0;
        if (first.passfail_bits[i] < second.passfail_bits[i]) return 0.0;
    }

    for (std::size_t j : order_indicative(stats)) {
        if (first.indicative_values[j] > second.indicative_values[j]) return 1.0;
        if (first.indicative_values[j] < second.indicative_values[j]) return 0.0;
    }

    return 0.5;
}

} // namespace tdrl
