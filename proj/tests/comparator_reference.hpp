#pragma once

// Straight-line reference for the lexicographic comparison, kept independent
// of the library implementation: its own pass-rate/skewness bookkeeping and
// selection-based ordering, following the five documented steps literally.

#include "tdrl/testkit.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace reference {

struct SuiteHistory {
    std::vector<double> pass_rates;                 // per pass-fail test
    std::vector<std::vector<double>> ind_histories; // per indicative test
};

inline double ref_skewness(const std::vector<double>& values) {
    if (values.size() < 3) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        m2 += (v - mean) * (v - mean);
        m3 += (v - mean) * (v - mean) * (v - mean);
    }
    m2 /= static_cast<double>(values.size());
    m3 /= static_cast<double>(values.size());
    if (m2 < 1e-12) return 0.0;
    return m3 / (m2 * std::sqrt(m2));
}

inline double compare_reference(const tdrl::TestOutcome& o1, const tdrl::TestOutcome& o2,
                                const SuiteHistory& history) {
    const std::size_t m = o1.passfail_bits.size();
    const std::size_t n = o1.indicative_values.size();

    // step 1: both pass everything
    std::size_t c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
        c1 += o1.passfail_bits[i];
        c2 += o2.passfail_bits[i];
    }
    if (c1 == m && c2 == m) return 0.5;

    // step 2: pass counts
    if (c1 > c2) return 1.0;
    if (c1 < c2) return 0.0;

    // step 3: pass-fail tests, hardest (lowest pass rate) first; selection
    // order with index tie-break
    {
        std::vector<bool> used(m, false);
        for (std::size_t round = 0; round < m; ++round) {
            std::size_t pick = m;
            for (std::size_t i = 0; i < m; ++i) {
                if (used[i]) continue;
                if (pick == m || history.pass_rates[i] < history.pass_rates[pick]) pick = i;
            }
            used[pick] = true;
            if (o1.passfail_bits[pick] > o2.passfail_bits[pick]) return 1.0;
            if (o1.passfail_bits[pick] < o2.passfail_bits[pick]) return 0.0;
        }
    }

    // step 4: indicative tests, highest history skewness first
    {
        std::vector<double> skews(n);
        for (std::size_t j = 0; j < n; ++j) skews[j] = ref_skewness(history.ind_histories[j]);
        std::vector<bool> used(n, false);
        for (std::size_t round = 0; round < n; ++round) {
            std::size_t pick = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (used[j]) continue;
                if (pick == n || skews[j] > skews[pick]) pick = j;
            }
            used[pick] = true;
            if (o1.indicative_values[pick] > o2.indicative_values[pick]) return 1.0;
            if (o1.indicative_values[pick] < o2.indicative_values[pick]) return 0.0;
        }
    }

    // step 5: indistinguishable
    return 0.5;
}

} // namespace reference
