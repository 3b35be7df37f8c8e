#include "usf/excursion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace usf {

Matrix reflected_generator(const ChainSpec& spec, int m) {
    validate(spec);
    if (m < 0) throw std::invalid_argument("reflected_generator requires m >= 0");
    Matrix g(m + 1, std::vector<double>(m + 1, 0.0));
    for (int s = 0; s <= m; ++s) {
        for (int sp = 0; sp <= m; ++sp) {
            int d = s - sp;
            if (d == 1)
                g[s][sp] = spec.rate_up;
            else if (d < 0)
                g[s][sp] = spec.down_rate_at(-d);
        }
        g[s][s] = s == 0 ? -spec.down_rate() : -spec.total_rate();
    }
    return g;
}

ExcursionStats excursion_stats(const ChainSpec& spec) {
    validate(spec);
    double down = spec.down_rate();
    if (down == 0.0)
        throw TrivialCaseError("chain with no downward jumps never leaves its maximum");
    double drift = psi_prime(spec, 0.0);
    ExcursionStats out;
    double num = spec.rate_up * spec.h - drift;  // = sum_k k*h*rate(-k*h) > 0
    double den = std::max(drift, 0.0) * down;
    out.expected_length = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    out.p_infinite = spec.rate_up / down * std::expm1(phi(spec, 0.0) * spec.h);
    return out;
}

namespace {

// One column step of the first-hitting recursion for the embedded walk,
// everything normalised by the total rate: from p(.,k) to p(.,k+1).
//   p(l,k+1) = p_up*p(l-1,k) + sum_m q_m*p(m+l,k),   p(0,k) := 0
// The geometric tail of q enters through a backward running sum.
struct ColumnStepper {
    double p_up;
    std::vector<std::pair<int, double>> atoms;  // (m, q_m) for atom sizes
    double tail_c = 0.0;                        // c/total_rate
    double tail_a = 0.0;
    int tail_k0 = 0;
    bool has_tail = false;

    explicit ColumnStepper(const ChainSpec& spec) {
        double g = spec.total_rate();
        p_up = spec.rate_up / g;
        for (const auto& a : spec.down_atoms)
            if (a.rate > 0.0) atoms.push_back({a.k, a.rate / g});
        if (spec.geo_tail) {
            has_tail = true;
            tail_c = spec.geo_tail->c / g;
            tail_a = spec.geo_tail->a;
            tail_k0 = spec.geo_tail->k0;
        }
    }

    // col has p(l,k) at index l-1; fills next with p(l,k+1), size k+1
    void step(int k, const std::vector<double>& col, std::vector<double>& next) const {
        next.assign(k + 1, 0.0);
        double tail_sum = 0.0;  // sum_{j >= l+k0} tail_c*a^(j-l-k0)*p(j,k)
        for (int l = k; l >= 1; --l) {
            double v = l >= 2 ? p_up * col[l - 2] : 0.0;
            for (const auto& [m, qm] : atoms)
                if (m + l <= k) v += qm * col[m + l - 1];
            if (has_tail) {
                tail_sum = tail_a * tail_sum +
                           (l + tail_k0 <= k ? tail_c * col[l + tail_k0 - 1] : 0.0);
                v += tail_sum;
            }
            next[l - 1] = v;
        }
        next[k] = p_up * col[k - 1];  // l = k+1: k+1 straight up-jumps
    }
};

}  // namespace

HittingTable hitting_table(const ChainSpec& spec, int K) {
    validate(spec);
    if (K < 1) throw std::invalid_argument("hitting_table requires K >= 1");
    ColumnStepper stepper(spec);
    HittingTable t;
    t.K = K;
    t.cols.resize(K);
    t.cols[0] = {stepper.p_up};
    for (int k = 1; k < K; ++k) stepper.step(k, t.cols[k - 1], t.cols[k]);
    return t;
}

std::vector<double> n_pmf(const ChainSpec& spec, int K) {
    validate(spec);
    if (K < 1) throw std::invalid_argument("n_pmf requires K >= 1");
    double down = spec.down_rate();
    if (down == 0.0)
        throw TrivialCaseError("chain with no downward jumps has no excursions");
    ColumnStepper stepper(spec);
    std::vector<double> pmf(K, 0.0);
    std::vector<double> col = {stepper.p_up}, next;
    for (int k = 1; k <= K; ++k) {
        if (k > 1) {
            stepper.step(k - 1, col, next);
            col.swap(next);
        }
        double s = 0.0;
        for (int l = 1; l <= k; ++l) s += spec.down_rate_at(l) * col[l - 1];
        pmf[k - 1] = s / down;
    }
    return pmf;
}

IltResult ilt_exponent(const ChainSpec& spec, double theta, int k_max) {
    validate(spec);
    if (!(theta >= 0.0)) throw std::invalid_argument("ilt_exponent requires theta >= 0");
    if (k_max < 1) throw std::invalid_argument("ilt_exponent requires k_max >= 1");
    double down = spec.down_rate();
    if (down == 0.0)
        throw TrivialCaseError("chain with no downward jumps has trivial local time");

    double g = spec.total_rate();
    double x = g / (g + theta);
    double p_star = excursion_stats(spec).p_infinite;

    ColumnStepper stepper(spec);
    std::vector<double> col = {stepper.p_up}, next;
    double partial = 0.0, series = 0.0, xk = 1.0;
    IltResult out;
    int k = 1;
    for (;; ++k) {
        if (k > 1) {
            stepper.step(k - 1, col, next);
            col.swap(next);
        }
        double pk = 0.0;
        for (int l = 1; l <= k; ++l) pk += spec.down_rate_at(l) * col[l - 1];
        pk /= down;
        xk *= x;
        partial += pk;
        series += pk * xk;
        double mass_left = std::max(0.0, 1.0 - p_star - partial);
        if (mass_left < 1e-10) {
            out.tail_bound = down * mass_left * xk;
            break;
        }
        if (k == k_max) {
            out.truncated = true;
            out.tail_bound = down * mass_left * xk;
            break;
        }
    }
    out.k_used = k;
    out.value = theta + down * (1.0 - series);
    return out;
}

}  // namespace usf
