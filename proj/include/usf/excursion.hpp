#pragma once

#include <vector>

#include "usf/model.hpp"

namespace usf {

using Matrix = std::vector<std::vector<double>>;

// Generator of the chain reflected at its running maximum, restricted
// to the states {0, h, ..., m*h}: entry (s,s') is the rate of jumps of
// size (s-s')*h, minus total_rate on the diagonal, except that state 0
// only leaves at the downward rate (an up-jump at the maximum just
// moves the maximum along).
Matrix reflected_generator(const ChainSpec& spec, int m);

struct ExcursionStats {
    double expected_length = 0.0;  // +inf when the drift is <= 0
    double p_infinite = 0.0;       // fraction of excursions that never return
};

// Mean length of an excursion away from the running maximum and the
// probability it never ends.  Throws TrivialCaseError when the chain
// has no downward jumps (it then never leaves its maximum).
ExcursionStats excursion_stats(const ChainSpec& spec);

// p(l,k): probability that the embedded jump walk started at -l*h first
// hits 0 exactly on its k-th jump, for 1 <= l <= k <= K.
struct HittingTable {
    int K = 0;
    std::vector<std::vector<double>> cols;  // cols[k-1] holds l = 1..k

    double p(int l, int k) const {
        if (l < 1 || k < 1 || k > K || l > k) return 0.0;
        return cols[k - 1][l - 1];
    }
};
HittingTable hitting_table(const ChainSpec& spec, int K);

// P(N = k) for N the number of jumps an excursion makes after the
// downward jump that starts it, k = 1..K (entry k-1).  The law of that
// first jump is the downward measure normalised by its mass.
std::vector<double> n_pmf(const ChainSpec& spec, int K);

// Laplace exponent of the inverse local time at the running maximum:
//   theta + down_rate*(1 - sum_k P(N=k)*(total_rate/(total_rate+theta))^k).
// The series is summed until the exactly-known remaining mass
// 1 - p_infinite - sum P(N=k) drops below 1e-10, or k hits k_max;
// in the latter case truncated is set and tail_bound dominates the
// (one-sided, positive) truncation error of value.
struct IltResult {
    double value = 0.0;
    double tail_bound = 0.0;
    bool truncated = false;
    int k_used = 0;
};
IltResult ilt_exponent(const ChainSpec& spec, double theta, int k_max);

}  // namespace usf
