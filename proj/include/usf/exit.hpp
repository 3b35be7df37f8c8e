#pragma once

#include <string>
#include <vector>

#include "usf/scale.hpp"

namespace usf {

// First-passage and infimum laws.  Levels x, y are in length units;
// passage levels that must sit on the lattice are checked to 1e-9
// relative and rejected otherwise, free levels are floored to it.

// E[e^(-beta*T_x); T_x < inf] for the first passage above x >= 0:
// e^(-phi(beta)*h*ceil(x/h)).
double up_passage_lt(const ChainSpec& spec, double x, double beta);

// E[e^(-q*T_y); the chain reaches y before going below -x]
// = W_q(x)/W_q(x+y), evaluated through the tilted table so large
// arguments cannot overflow.  y > 0 must be a lattice point.
double two_sided_up(const ChainSpec& spec, double q, double x, double y);
double two_sided_up(const ScaleTable& table, double x, double y);

// E[e^(-q*T) ; T < inf] for T the first passage below -x, x >= 0:
// Z_q(x) - q*h/(e^(phi(q)*h)-1) * W_q(x); at q = 0 this is the ruin
// probability.
double down_passage_lt(const ChainSpec& spec, double q, double x);

// P(the chain ever goes below -x) = 1 - W(x)/W(inf); equals 1 unless
// the chain drifts to +inf.
double ruin_prob(const ChainSpec& spec, double x);

// E[e^(-q*T); the chain goes below -x before reaching y]
// = Z_q(x) - Z_q(x+y)*W_q(x)/W_q(x+y).
double down_before_up(const ChainSpec& spec, double q, double x, double y);

// Failure parameter of the geometric law of sup(X)/h at an independent
// Exp(p) time: e^(-phi(p)*h).
double sup_at_exp(const ChainSpec& spec, double p);

// E[e^(beta*inf(X)) at an Exp(p) time]; the removable singularity at
// psi(beta) = p is evaluated by its limit p*phi'(p)*h/(1-e^(-phi(p)*h)).
double inf_lt_at_exp(const ChainSpec& spec, double p, double beta);

// P(-inf(X) = k*h at an Exp(q) time), q > 0.  Computed by a forward
// renewal recurrence on the deflated pmf generating function, so the
// table stays accurate to relative machine precision for all k; the
// scale-function difference expression loses the tail to cancellation.
double inf_pmf_at_exp(const ChainSpec& spec, double q, int k);
std::vector<double> inf_pmf_table(const ChainSpec& spec, double q, int k_max);

// E[e^(beta*inf(X))] over all time, for a chain drifting to +inf:
// psi'(0+)*(e^(beta*h)-1)/(h*psi(beta)), beta > 0.
double overall_inf_lt(const ChainSpec& spec, double beta);

// Reporting record used by the command-line front end: which identity
// produced the number, plus the value itself.
struct ExitLaw {
    std::string kind;
    double value = 0.0;
};

}  // namespace usf
