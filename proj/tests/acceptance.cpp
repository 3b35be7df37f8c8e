#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "models.hpp"
#include "usf/exit.hpp"
#include "usf/excursion.hpp"
#include "usf/ladder.hpp"
#include "usf/mc.hpp"
#include "usf/model.hpp"
#include "usf/scale.hpp"

// Acceptance gate: each criterion runs all of its checks and prints one
// [PASS]/[FAIL] summary line; individual failures go to stderr with
// file:line.  The process exits 1 if any criterion failed.

static int g_fails = 0;

#define REQUIRE(cond, msg)                                                      \
    do {                                                                        \
        if (!(cond)) {                                                          \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                  \
            ++g_fails;                                                          \
        }                                                                       \
    } while (0)

static double rel_err(double got, double want) {
    return std::fabs(got - want) / std::fabs(want);
}

namespace {

using namespace usf;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ChainSpec bernoulli_chain(double p) {
    ChainSpec s;
    s.h = 1.0;
    s.rate_up = p;
    s.down_atoms = {{1, 1.0 - p}};
    return s;
}

// Expands a geometric tail into explicit atoms up to index n; the
// discarded mass is c*a^(n-k0+1)/(1-a), negligible for the n used here.
ChainSpec truncate_tail(const ChainSpec& spec, int n) {
    ChainSpec s = spec;
    if (!s.geo_tail) return s;
    GeoTail t = *s.geo_tail;
    s.geo_tail.reset();
    for (int k = t.k0; k <= n; ++k) s.down_atoms.push_back({k, t.c * std::pow(t.a, k - t.k0)});
    return s;
}

std::vector<ChainSpec> all_models() { return {m05(), m07(), m03(), mg(), mixed()}; }

// 1. One-step up, one-step down, q = 0: W(k) has the classical gambler's
// ruin closed form ((1-p)/p)^(k+1) - 1)/(1 - 2p), and 2(k+1) at p = 1/2.
void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    for (double p : {0.3, 0.5, 0.7}) {
        auto t = scale_table(bernoulli_chain(p), 0.0, 60);
        for (int k = 0; k <= 60; ++k) {
            double want = p == 0.5 ? 2.0 * (k + 1)
                                   : (std::pow((1.0 - p) / p, k + 1) - 1.0) / (1.0 - 2.0 * p);
            REQUIRE(rel_err(t.w[k], want) <= 1e-10,
                    "closed form p=" << p << " k=" << k << " got " << t.w[k] << " want " << want);
        }
    }
    double el = seconds_since(t0);
    REQUIRE(el < 1.0, "closed-form block took " << el << " s");
}

// 2. The truncated transform of W matches 1/(psi(beta) - q) within the
// analytic tail bound for beta past phi(q).
void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& s : {m05(), m07(), m03()}) {
        for (double q : {0.0, 0.5, 1.0}) {
            double ph = phi(s, q);
            for (double off : {0.5, 1.0, 2.0}) {
                auto c = w_laplace_check(s, q, ph + off, 400);
                REQUIRE(std::fabs(c.lhs - c.rhs) <= c.tail_bound + 1e-9 * std::fabs(c.rhs),
                        "transform q=" << q << " beta=" << ph + off << " gap "
                                       << std::fabs(c.lhs - c.rhs) << " bound " << c.tail_bound);
            }
        }
    }
    double el = seconds_since(t0);
    REQUIRE(el < 1.0, "transform block took " << el << " s");
}

// 3. The tilted q = 0 recursion reproduces the direct one:
// w[k] = w_scaled[k]*e^(phi(q)*(k+1)*h).
void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& s : {m05(), m07(), m03()}) {
        for (double q : {0.25, 1.0}) {
            auto t = scale_table(s, q, 100);
            for (int k = 0; k <= 100; ++k) {
                double prod = t.w_scaled[k] * std::exp(t.phi_q * (k + 1) * t.h);
                REQUIRE(rel_err(t.w[k], prod) <= 1e-10,
                        "tilt q=" << q << " k=" << k << " direct " << t.w[k] << " tilted "
                                  << prod);
            }
        }
    }
    double el = seconds_since(t0);
    REQUIRE(el < 1.0, "tilt block took " << el << " s");
}

// 4. Ladder data determine the parent chain and vice versa; the
// reconstruction factor is e^(phi(0)*h).
void criterion_4() {
    std::vector<ChainSpec> specs = {m03(), m05(), m07(), truncate_tail(mg(), 60),
                                    truncate_tail(mixed(), 80)};
    for (const auto& s : specs) {
        auto d = extract_ladder(s);
        auto r = reconstruct_parent(d);
        REQUIRE(r.spec.h == s.h, "lattice step changed");
        REQUIRE(std::fabs(r.spec.rate_up - s.rate_up) <= 1e-12 * std::max(1.0, s.rate_up),
                "rate_up " << r.spec.rate_up << " want " << s.rate_up);
        int m = std::max(s.max_atom_index(), r.spec.max_atom_index());
        for (int k = 1; k <= m; ++k)
            REQUIRE(std::fabs(r.spec.down_rate_at(k) - s.down_rate_at(k)) <= 1e-12,
                    "down rate k=" << k << " got " << r.spec.down_rate_at(k) << " want "
                                   << s.down_rate_at(k));
        double x = std::exp(phi(s, 0.0) * s.h);
        REQUIRE(rel_err(r.x, x) <= 1e-12, "factor got " << r.x << " want " << x);

        auto d2 = extract_ladder(r.spec);
        REQUIRE(std::fabs(d2.gamma_asc - d.gamma_asc) <= 1e-12, "gamma_asc drifted");
        REQUIRE(std::fabs(d2.q_desc - d.q_desc) <= 1e-12, "q_desc drifted");
        REQUIRE(std::fabs(d2.x_factor - d.x_factor) <= 1e-12, "x_factor drifted");
        size_t n = std::max(d.phi_atoms.size(), d2.phi_atoms.size());
        for (size_t k = 1; k <= n; ++k)
            REQUIRE(std::fabs(d2.phi_at((int)k) - d.phi_at((int)k)) <= 1e-12,
                    "phi_" << k << " drifted");
    }
}

// 5. Both published recursions for W agree, and both closed forms for Z
// match the running-sum definition.
void criterion_5() {
    for (const auto& s : all_models()) {
        for (double q : {0.0, 0.3, 1.0}) {
            auto t = scale_table(s, q, 200);
            auto wa = w_table_alt(s, q, 200);
            auto zr = z_table_recursion(s, q, 200);
            auto za = z_table_alt(s, q, 200);
            for (int k = 0; k <= 200; ++k) {
                REQUIRE(rel_err(wa[k], t.w[k]) <= 1e-10,
                        "W forms q=" << q << " k=" << k << " " << wa[k] << " vs " << t.w[k]);
                REQUIRE(rel_err(zr[k], t.z[k]) <= 1e-10,
                        "Z recursion q=" << q << " k=" << k << " " << zr[k] << " vs " << t.z[k]);
                REQUIRE(rel_err(za[k], t.z[k]) <= 1e-10,
                        "Z alt q=" << q << " k=" << k << " " << za[k] << " vs " << t.z[k]);
            }
        }
    }
}

// 6. Exit laws cohere: the two-sided events partition at q = 0, the
// infimum law is a probability law whose upper tail is the downward
// passage transform, and one-sided up passage is multiplicative.
void criterion_6() {
    for (const auto& s : all_models()) {
        for (int xk : {0, 1, 3}) {
            for (int yk : {1, 2, 5}) {
                double x = xk * s.h, y = yk * s.h;
                double sum = two_sided_up(s, 0.0, x, y) + down_before_up(s, 0.0, x, y);
                REQUIRE(std::fabs(sum - 1.0) <= 1e-12,
                        "partition x=" << x << " y=" << y << " sum " << sum);
            }
        }
        for (double q : {0.25, 0.8}) {
            auto pmf = inf_pmf_table(s, q, 400);
            double total = 0.0;
            for (double v : pmf) total += v;
            REQUIRE(std::fabs(total - 1.0) <= 1e-8, "pmf q=" << q << " sums to " << total);
            // compare the upper tail with the Z - coef*W passage form on
            // the head of the law, where that form still carries more
            // than ten digits (its absolute error floor is ~W(k)*eps)
            auto t = scale_table(s, q, 50);
            double cdf = 0.0;
            for (int k = 0; k <= 50 && t.w[k] <= 1e4; ++k) {
                cdf += pmf[k];
                double want = down_passage_lt(s, q, k * s.h);
                REQUIRE(std::fabs((1.0 - cdf) - want) <= 1e-10,
                        "tail rate_up=" << s.rate_up << " q=" << q << " k=" << k << " "
                                        << 1.0 - cdf << " vs " << want);
            }
        }
        for (double beta : {0.0, 0.5}) {
            for (int ak : {1, 2, 3}) {
                for (int bk : {1, 4}) {
                    double a = ak * s.h, b = bk * s.h;
                    double joint = up_passage_lt(s, a + b, beta);
                    double split = up_passage_lt(s, a, beta) * up_passage_lt(s, b, beta);
                    REQUIRE(std::fabs(joint - split) <= 1e-12,
                            "multiplicativity beta=" << beta << " " << joint << " vs " << split);
                }
            }
        }
    }
}

// 7. Excursion side: closed-form mean length and escape probability, the
// first-hit law of the embedded walk summing to e^(-phi(0)h), and the
// inverse-local-time exponent at 0 equal to down_rate*p*.
void criterion_7() {
    auto stats_up = excursion_stats(m07());
    REQUIRE(rel_err(stats_up.expected_length, 2.5) <= 1e-12,
            "mean length " << stats_up.expected_length);
    REQUIRE(stats_up.p_infinite == 0.0, "escape prob " << stats_up.p_infinite);
    auto stats_down = excursion_stats(m03());
    REQUIRE(std::isinf(stats_down.expected_length),
            "mean length " << stats_down.expected_length << " want inf");
    REQUIRE(rel_err(stats_down.p_infinite, 4.0 / 7.0) <= 1e-12,
            "escape prob " << stats_down.p_infinite);

    for (const auto& s : {m03(), m05(), m07()}) {
        auto tab = hitting_table(s, 500);
        double sum = 0.0;
        for (int k = 1; k <= 500; ++k) sum += tab.p(1, k);
        double want = std::exp(-phi(s, 0.0) * s.h);
        REQUIRE(std::fabs(sum - want) <= 1e-6, "first-hit sum rate_up=" << s.rate_up << " got "
                                                   << sum << " want " << want << " gap "
                                                   << want - sum);
    }

    for (const auto& s : {m03(), mg(), m07(), m05()}) {
        double p_star = excursion_stats(s).p_infinite;
        double want = s.down_rate() * p_star;
        auto r = ilt_exponent(s, 0.0, 2000);
        REQUIRE(std::fabs(r.value - want) <= 1e-8,
                "ilt(0) rate_up=" << s.rate_up << " got " << r.value << " want " << want
                                  << (r.truncated ? " (series truncated, bound " : " (bound ")
                                  << r.tail_bound << ")");
    }
}

// 8. Monte Carlo oracle: the simulator reproduces the analytic exit,
// excursion and martingale values within 4 standard errors plus any
// reported truncation bias, from one fixed master seed.
void criterion_8() {
    auto t0 = std::chrono::steady_clock::now();
    SimConfig cfg;
    cfg.master_seed = 20240817;
    cfg.n_paths = 200000;

    struct TwoSided {
        ChainSpec s;
        double q, x, y;
    };
    // analytic values 2/3, 1/3, 0.7 checked against closed forms elsewhere
    for (const auto& c : {TwoSided{m05(), 0.0, 1.0, 1.0}, TwoSided{m05(), 0.5, 0.0, 1.0},
                          TwoSided{m07(), 0.0, 0.0, 1.0}}) {
        double want = two_sided_up(c.s, c.q, c.x, c.y);
        auto est = estimate_two_sided(c.s, c.q, c.x, c.y, cfg);
        REQUIRE(std::fabs(est.mean - want) <= 4.0 * est.std_error,
                "two-sided q=" << c.q << " x=" << c.x << " y=" << c.y << " mc " << est.mean
                               << " analytic " << want << " se " << est.std_error);
    }

    {
        double want = down_passage_lt(m05(), 0.5, 0.0);  // (3 - sqrt 5)/2
        auto r = estimate_ruin_lt(m05(), 0.5, 0.0, cfg);
        REQUIRE(std::fabs(r.est.mean - want) <= 4.0 * r.est.std_error + r.bias_bound,
                "discounted ruin mc " << r.est.mean << " analytic " << want << " se "
                                      << r.est.std_error << " bias " << r.bias_bound);
    }
    {
        SimConfig up = cfg;
        up.level_cap = 200;
        for (double x : {0.0, 1.0}) {
            double want = ruin_prob(m07(), x);  // 3/7 and 9/49
            auto r = estimate_ruin_lt(m07(), 0.0, x, up);
            REQUIRE(std::fabs(r.est.mean - want) <= 4.0 * r.est.std_error + r.bias_bound,
                    "ruin prob x=" << x << " mc " << r.est.mean << " analytic " << want << " se "
                                   << r.est.std_error << " bias " << r.bias_bound);
        }
    }

    {
        double want = sup_at_exp(m05(), 0.5);  // e^(-phi(1/2))
        auto r = estimate_sup_at_exp(m05(), 0.5, cfg);
        REQUIRE(std::fabs(r.failure.mean - want) <= 4.0 * r.failure.std_error,
                "sup failure mc " << r.failure.mean << " analytic " << want << " se "
                                  << r.failure.std_error);
    }

    {
        SimConfig ex = cfg;
        ex.level_cap = 60;
        auto r = estimate_excursion(m07(), ex);
        REQUIRE(std::fabs(r.mean_length.mean - 2.5) <= 4.0 * r.mean_length.std_error,
                "excursion length mc " << r.mean_length.mean << " se "
                                       << r.mean_length.std_error);
        REQUIRE(std::fabs(r.mean_jumps.mean - 2.5) <= 4.0 * r.mean_jumps.std_error,
                "excursion jumps mc " << r.mean_jumps.mean << " se " << r.mean_jumps.std_error);
        REQUIRE(r.frac_infinite.mean <= 4.0 * r.frac_infinite.std_error,
                "escape fraction mc " << r.frac_infinite.mean);
    }
    {
        SimConfig ex = cfg;
        ex.level_cap = 40;
        auto r = estimate_excursion(m03(), ex);
        REQUIRE(std::fabs(r.frac_infinite.mean - 4.0 / 7.0) <=
                    4.0 * r.frac_infinite.std_error + r.return_bias_bound,
                "escape fraction mc " << r.frac_infinite.mean << " analytic " << 4.0 / 7.0
                                      << " se " << r.frac_infinite.std_error << " bias "
                                      << r.return_bias_bound);
    }

    for (double t : {1.0, 5.0}) {
        for (const auto& s : {m05(), m07()}) {
            double w0 = scale_table(s, 0.5, 0).w[0];
            auto m = estimate_stopped_martingale(s, 0.5, t, cfg);
            REQUIRE(std::fabs(m.w_part.mean - w0) <= 4.0 * m.w_part.std_error,
                    "stopped W t=" << t << " rate_up=" << s.rate_up << " mc " << m.w_part.mean
                                   << " analytic " << w0 << " se " << m.w_part.std_error);
            REQUIRE(std::fabs(m.z_part.mean - 1.0) <= 4.0 * m.z_part.std_error,
                    "stopped Z t=" << t << " rate_up=" << s.rate_up << " mc " << m.z_part.mean
                                   << " se " << m.z_part.std_error);
        }
        auto e5 = estimate_exp_martingale(m05(), 1.0, t, cfg);
        REQUIRE(std::fabs(e5.mean - 1.0) <= 4.0 * e5.std_error,
                "exp martingale t=" << t << " mc " << e5.mean << " se " << e5.std_error);
        auto e3 = estimate_exp_martingale(m03(), 0.7, t, cfg);
        REQUIRE(std::fabs(e3.mean - 1.0) <= 4.0 * e3.std_error,
                "exp martingale t=" << t << " mc " << e3.mean << " se " << e3.std_error);
    }

    double el = seconds_since(t0);
    REQUIRE(el < 120.0, "simulation block took " << el << " s");
}

// 9. Oscillating chain growth: W(k) = 2(k+1) makes |w[k]/k - 2| equal to
// 2/k; the comparison sits on that boundary, so a few ulps of slack
// absorb the division rounding.
void criterion_9() {
    auto t = scale_table(m05(), 0.0, 1000);
    for (int k = 1; k <= 1000; ++k) {
        double gap = std::fabs(t.w[k] / k - 2.0);
        REQUIRE(gap <= 2.0 / k * (1.0 + 1e-12),
                "growth k=" << k << " gap " << gap << " bound " << 2.0 / k);
    }
}

struct Criterion {
    const char* name;
    void (*fn)();
};

}  // namespace

int main() {
    const Criterion table[] = {
        {"skip-free closed form", criterion_1},
        {"scale transform identity", criterion_2},
        {"tilted vs direct recursion", criterion_3},
        {"ladder round trip", criterion_4},
        {"recursion cross-forms", criterion_5},
        {"exit-law consistency", criterion_6},
        {"excursion analytics", criterion_7},
        {"Monte Carlo oracle", criterion_8},
        {"oscillating growth", criterion_9},
    };
    int failed = 0;
    for (int i = 0; i < 9; ++i) {
        int before = g_fails;
        table[i].fn();
        bool ok = g_fails == before;
        failed += !ok;
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": " << table[i].name
                  << "\n";
    }
    if (failed) {
        std::cerr << failed << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "[PASS] all acceptance criteria\n";
    return 0;
}
