#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "usf/model.hpp"

namespace usf {

struct SimConfig {
    std::uint64_t master_seed = 1;
    std::int64_t n_paths = 100000;
    std::optional<double> time_cap;  // discounted estimands stop here
    std::optional<int> level_cap;    // lattice units; undiscounted ones stop here
};

struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(n)
    std::int64_t n_paths = 0;
    double truncated_fraction = 0.0;
};

// Every path draws from its own stream seeded by (master_seed, path
// index), and partial sums are combined by a fixed pairwise tree, so
// estimates are bit-identical however the paths are scheduled.
class PathRng {
   public:
    PathRng(std::uint64_t master_seed, std::uint64_t path_index);
    std::uint64_t next_u64();
    double uniform();  // in (0,1]
    double exponential(double rate);

   private:
    std::uint64_t s_[4];
};

struct JumpEvent {
    double dt = 0.0;
    int units = 0;  // +1 or -k
};

// Draws jump sizes by a Walker alias table over the up-step, the
// downward atoms and one slot for the whole geometric tail; a tail hit
// is refined by closed-form geometric inversion.
class JumpSampler {
   public:
    explicit JumpSampler(const ChainSpec& spec);
    int sample_units(PathRng& rng) const;
    JumpEvent step(PathRng& rng) const;  // Exp(total_rate) wait + jump
    double total_rate() const { return total_rate_; }

   private:
    double total_rate_ = 0.0;
    double log_tail_a_ = 0.0;
    int tail_k0_ = 0;
    int tail_slot_ = -1;
    std::vector<double> prob_;
    std::vector<int> alias_;
    std::vector<int> units_;
};

// E[e^(-q*T_y); reaches y before going below -x].  Terminates without
// caps.  ConfigError when the chain has no downward jumps and q = 0
// (the answer is identically 1).
SimEstimate estimate_two_sided(const ChainSpec& spec, double q, double x, double y,
                               const SimConfig& cfg);

// E[e^(-q*T); T < inf] for first passage below -x.  For q > 0 paths are
// cut at time_cap (default ln(1e6)/q); for q = 0 the chain must drift
// to +inf and paths are resolved once they climb level_cap units above
// zero.  bias_bound is an analytic cap on the total truncation bias.
struct RuinEstimate {
    SimEstimate est;
    double bias_bound = 0.0;
};
RuinEstimate estimate_ruin_lt(const ChainSpec& spec, double q, double x, const SimConfig& cfg);

// Empirical law of sup(X)/h at an Exp(p) time; failure is the indicator
// mean P(sup >= h), estimating the geometric failure parameter.
struct SupEstimate {
    SimEstimate failure;
    std::vector<double> pmf;  // buckets 0..pmf.size()-2, last = overflow
};
SupEstimate estimate_sup_at_exp(const ChainSpec& spec, double p, const SimConfig& cfg);

// Samples excursions away from the running maximum.  An excursion is
// declared infinite when it falls level_cap units below the maximum;
// return_bias_bound = e^(-phi(0)*level_cap*h) caps the probability that
// such an excursion would still have returned.  Excursions running past
// the jump guard count into truncated_fraction only.
struct ExcursionEstimate {
    SimEstimate mean_length;  // over returned excursions
    SimEstimate frac_infinite;
    SimEstimate mean_jumps;  // over returned excursions
    double return_bias_bound = 0.0;
};
ExcursionEstimate estimate_excursion(const ChainSpec& spec, const SimConfig& cfg);

// E[e^(-q*(t ∧ T))*W_q(X_(t ∧ T))] and the Z analogue, T the first
// passage below 0; constant in t at W_q(0) resp. 1.
struct MartingalePair {
    SimEstimate w_part;
    SimEstimate z_part;
};
MartingalePair estimate_stopped_martingale(const ChainSpec& spec, double q, double t,
                                           const SimConfig& cfg);

// E[e^(phi(beta)*X_t - beta*t)] = 1.
SimEstimate estimate_exp_martingale(const ChainSpec& spec, double beta, double t,
                                    const SimConfig& cfg);

}  // namespace usf
