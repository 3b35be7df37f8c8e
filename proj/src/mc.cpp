#include "usf/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "usf/errors.hpp"
#include "usf/exit.hpp"
#include "usf/scale.hpp"

namespace usf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl64(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

// Blocked sums combined over a fixed pairwise tree; the result does not
// depend on how paths were scheduled and loses less precision than a
// single running sum.
constexpr std::int64_t kBlock = 4096;

struct Partial {
    double s = 0.0;
    double s2 = 0.0;
};

struct Accumulator {
    std::vector<Partial> blocks;
    Partial cur;
    std::int64_t in_block = 0;
    std::int64_t n = 0;

    void add(double v) {
        cur.s += v;
        cur.s2 += v * v;
        ++n;
        if (++in_block == kBlock) {
            blocks.push_back(cur);
            cur = Partial{};
            in_block = 0;
        }
    }

    SimEstimate finish(std::int64_t n_total, std::int64_t n_trunc) {
        if (in_block > 0) {
            blocks.push_back(cur);
            cur = Partial{};
            in_block = 0;
        }
        while (blocks.size() > 1) {
            std::vector<Partial> next;
            next.reserve((blocks.size() + 1) / 2);
            for (std::size_t i = 0; i + 1 < blocks.size(); i += 2)
                next.push_back({blocks[i].s + blocks[i + 1].s, blocks[i].s2 + blocks[i + 1].s2});
            if (blocks.size() % 2 != 0) next.push_back(blocks.back());
            blocks.swap(next);
        }
        SimEstimate est;
        est.n_paths = n;
        est.truncated_fraction =
            n_total > 0 ? static_cast<double>(n_trunc) / static_cast<double>(n_total) : 0.0;
        if (n == 0) return est;
        double s = blocks.empty() ? 0.0 : blocks[0].s;
        double s2 = blocks.empty() ? 0.0 : blocks[0].s2;
        est.mean = s / static_cast<double>(n);
        if (n > 1) {
            double var = (s2 - static_cast<double>(n) * est.mean * est.mean) /
                         static_cast<double>(n - 1);
            est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
        }
        return est;
    }
};

void check_config(const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
}

int floor_units(double x, double h) {
    double xi = x / h;
    return static_cast<int>(std::floor(xi + 1e-9 * std::max(1.0, std::fabs(xi))));
}

}  // namespace

PathRng::PathRng(std::uint64_t master_seed, std::uint64_t path_index) {
    std::uint64_t st = master_seed ^ (0x9e3779b97f4a7c15ULL * (path_index + 1));
    for (auto& w : s_) w = splitmix64(st);
}

std::uint64_t PathRng::next_u64() {
    std::uint64_t result = rotl64(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl64(s_[3], 45);
    return result;
}

double PathRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double PathRng::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential requires rate > 0");
    return -std::log(uniform()) / rate;
}

JumpSampler::JumpSampler(const ChainSpec& spec) {
    validate(spec);
    std::vector<double> weights;
    units_.push_back(1);
    weights.push_back(spec.rate_up);
    for (const auto& atom : spec.down_atoms) {
        units_.push_back(-atom.k);
        weights.push_back(atom.rate);
    }
    if (spec.geo_tail) {
        tail_slot_ = static_cast<int>(units_.size());
        tail_k0_ = spec.geo_tail->k0;
        log_tail_a_ = std::log(spec.geo_tail->a);
        units_.push_back(0);
        weights.push_back(spec.geo_tail->c / (1.0 - spec.geo_tail->a));
    }
    total_rate_ = 0.0;
    for (double w : weights) total_rate_ += w;

    // Walker alias construction.
    std::size_t n = weights.size();
    prob_.assign(n, 1.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total_rate_;
    std::vector<int> small, large;
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
    while (!small.empty() && !large.empty()) {
        int s = small.back(), l = large.back();
        small.pop_back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (int i : large) prob_[i] = 1.0;
    for (int i : small) prob_[i] = 1.0;
}

int JumpSampler::sample_units(PathRng& rng) const {
    std::size_t n = prob_.size();
    double u = rng.uniform();
    auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
    if (idx >= n) idx = n - 1;
    double v = rng.uniform();
    int slot = (v <= prob_[idx]) ? static_cast<int>(idx) : alias_[idx];
    if (slot == tail_slot_) {
        // P(extra = j) = (1-a) a^j by inversion of the geometric cdf.
        int extra = static_cast<int>(std::log(rng.uniform()) / log_tail_a_);
        return -(tail_k0_ + extra);
    }
    return units_[slot];
}

JumpEvent JumpSampler::step(PathRng& rng) const {
    JumpEvent ev;
    ev.dt = rng.exponential(total_rate_);
    ev.units = sample_units(rng);
    return ev;
}

SimEstimate estimate_two_sided(const ChainSpec& spec, double q, double x, double y,
                               const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (q < 0.0) throw std::invalid_argument("q must be nonnegative");
    if (x < 0.0 || y <= 0.0) throw std::invalid_argument("need x >= 0 and y > 0");
    if (q == 0.0 && spec.down_rate() == 0.0)
        throw ConfigError("chain only moves up and q = 0; the passage law is identically 1");
    JumpSampler sampler(spec);
    int m = floor_units(x, spec.h);
    int target = floor_units(y, spec.h);
    if (target < 1) target = 1;
    Accumulator acc;
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        int pos = 0;
        double t = 0.0;
        double value = 0.0;
        for (;;) {
            JumpEvent ev = sampler.step(rng);
            t += ev.dt;
            pos += ev.units;
            if (pos >= target) {
                value = q == 0.0 ? 1.0 : std::exp(-q * t);
                break;
            }
            if (pos <= -(m + 1)) break;
        }
        acc.add(value);
    }
    return acc.finish(cfg.n_paths, 0);
}

RuinEstimate estimate_ruin_lt(const ChainSpec& spec, double q, double x, const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (q < 0.0) throw std::invalid_argument("q must be nonnegative");
    if (x < 0.0) throw std::invalid_argument("need x >= 0");
    JumpSampler sampler(spec);
    int m = floor_units(x, spec.h);
    RuinEstimate out;
    Accumulator acc;
    std::int64_t n_trunc = 0;

    if (q > 0.0) {
        double t_cap = cfg.time_cap ? *cfg.time_cap : std::log(1e6) / q;
        if (t_cap <= 0.0) throw ConfigError("time_cap must be positive");
        for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
            PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
            int pos = 0;
            double t = 0.0;
            double value = 0.0;
            for (;;) {
                JumpEvent ev = sampler.step(rng);
                t += ev.dt;
                if (t > t_cap) {
                    ++n_trunc;
                    break;
                }
                pos += ev.units;
                if (pos <= -(m + 1)) {
                    value = std::exp(-q * t);
                    break;
                }
            }
            acc.add(value);
        }
        out.est = acc.finish(cfg.n_paths, n_trunc);
        // A path alive at t_cap can still contribute at most e^(-q*t_cap).
        out.bias_bound = out.est.truncated_fraction * std::exp(-q * t_cap);
        return out;
    }

    if (psi_prime(spec, 0.0) <= 0.0)
        throw ConfigError("q = 0 with drift <= 0: ruin is certain, nothing to estimate");
    if (!cfg.level_cap) throw ConfigError("q = 0 ruin estimation needs level_cap");
    int cap = *cfg.level_cap;
    if (cap < 1) throw ConfigError("level_cap must be at least 1");
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        int pos = 0;
        double value = 0.0;
        for (;;) {
            JumpEvent ev = sampler.step(rng);
            pos += ev.units;
            if (pos <= -(m + 1)) {
                value = 1.0;
                break;
            }
            if (pos >= cap) {
                ++n_trunc;
                break;
            }
        }
        acc.add(value);
    }
    out.est = acc.finish(cfg.n_paths, n_trunc);
    // A path released at level_cap still ruins with the analytic
    // probability of a (cap + m) unit downstroke.
    out.bias_bound = out.est.truncated_fraction * ruin_prob(spec, (cap + m) * spec.h);
    return out;
}

SupEstimate estimate_sup_at_exp(const ChainSpec& spec, double p, const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
    JumpSampler sampler(spec);
    int n_buckets = cfg.level_cap ? *cfg.level_cap : 256;
    if (n_buckets < 1) throw ConfigError("level_cap must be at least 1");
    SupEstimate out;
    std::vector<double> counts(static_cast<std::size_t>(n_buckets) + 1, 0.0);
    Accumulator acc;
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        double horizon = rng.exponential(p);  // draw order pinned: horizon first
        int pos = 0;
        int mx = 0;
        double t = 0.0;
        for (;;) {
            JumpEvent ev = sampler.step(rng);
            t += ev.dt;
            if (t > horizon) break;
            pos += ev.units;
            if (pos > mx) mx = pos;
        }
        acc.add(mx >= 1 ? 1.0 : 0.0);
        counts[static_cast<std::size_t>(std::min(mx, n_buckets))] += 1.0;
    }
    out.failure = acc.finish(cfg.n_paths, 0);
    out.pmf.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k)
        out.pmf[k] = counts[k] / static_cast<double>(cfg.n_paths);
    return out;
}

ExcursionEstimate estimate_excursion(const ChainSpec& spec, const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (spec.down_rate() == 0.0)
        throw TrivialCaseError("chain has no downward jumps; excursions never occur");
    if (!cfg.level_cap) throw ConfigError("excursion estimation needs level_cap");
    int cap = *cfg.level_cap;
    if (cap < 1) throw ConfigError("level_cap must be at least 1");
    std::int64_t jump_guard = std::max<std::int64_t>(100000, 2000LL * cap);
    JumpSampler sampler(spec);
    ExcursionEstimate out;
    Accumulator len_acc, inf_acc, jumps_acc;
    std::int64_t n_trunc = 0;
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        // Initial displacement: a jump conditioned on going down.
        int u;
        do {
            u = sampler.sample_units(rng);
        } while (u > 0);
        int pos = u;
        double t = 0.0;
        std::int64_t n = 0;
        int outcome = 0;  // 0 returned, 1 infinite, 2 truncated
        for (;;) {
            if (pos >= 0) break;
            if (pos <= -cap) {
                outcome = 1;
                break;
            }
            if (n >= jump_guard) {
                outcome = 2;
                break;
            }
            JumpEvent ev = sampler.step(rng);
            t += ev.dt;
            pos += ev.units;
            ++n;
        }
        if (outcome == 0) {
            len_acc.add(t);
            jumps_acc.add(static_cast<double>(n));
            inf_acc.add(0.0);
        } else if (outcome == 1) {
            inf_acc.add(1.0);
        } else {
            ++n_trunc;
            inf_acc.add(0.0);
        }
    }
    out.mean_length = len_acc.finish(cfg.n_paths, n_trunc);
    out.mean_jumps = jumps_acc.finish(cfg.n_paths, n_trunc);
    out.frac_infinite = inf_acc.finish(cfg.n_paths, n_trunc);
    // Chance a depth-capped excursion would still have climbed back.
    out.return_bias_bound = std::exp(-phi(spec, 0.0) * cap * spec.h);
    return out;
}

MartingalePair estimate_stopped_martingale(const ChainSpec& spec, double q, double t,
                                           const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (q < 0.0) throw std::invalid_argument("q must be nonnegative");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    JumpSampler sampler(spec);
    double mu = spec.rate_up * t;
    int n0 = 64 + static_cast<int>(std::ceil(mu + 12.0 * std::sqrt(mu + 1.0)));
    ScaleTable tbl = scale_table(spec, q, n0);
    Accumulator w_acc, z_acc;
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        int pos = 0;
        double now = 0.0;
        double w_val = 0.0, z_val = 0.0;
        for (;;) {
            JumpEvent ev = sampler.step(rng);
            if (now + ev.dt >= t) {
                // Clock runs out before the next jump: stopped at t.
                while (pos >= static_cast<int>(tbl.w.size()))
                    tbl = scale_table(spec, q, 2 * static_cast<int>(tbl.w.size()));
                double disc = std::exp(-q * t);
                w_val = disc * tbl.w[static_cast<std::size_t>(pos)];
                z_val = disc * tbl.z[static_cast<std::size_t>(pos)];
                break;
            }
            now += ev.dt;
            pos += ev.units;
            if (pos < 0) {
                // Passage below zero: W vanishes there, Z is 1.
                w_val = 0.0;
                z_val = std::exp(-q * now);
                break;
            }
        }
        w_acc.add(w_val);
        z_acc.add(z_val);
    }
    MartingalePair out;
    out.w_part = w_acc.finish(cfg.n_paths, 0);
    out.z_part = z_acc.finish(cfg.n_paths, 0);
    return out;
}

SimEstimate estimate_exp_martingale(const ChainSpec& spec, double beta, double t,
                                    const SimConfig& cfg) {
    validate(spec);
    check_config(cfg);
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    double c = phi(spec, beta);
    JumpSampler sampler(spec);
    Accumulator acc;
    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        int pos = 0;
        double now = 0.0;
        for (;;) {
            JumpEvent ev = sampler.step(rng);
            if (now + ev.dt >= t) break;
            now += ev.dt;
            pos += ev.units;
        }
        acc.add(std::exp(c * pos * spec.h - beta * t));
    }
    return acc.finish(cfg.n_paths, 0);
}

}  // namespace usf
