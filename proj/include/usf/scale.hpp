#pragma once

#include <vector>

#include "usf/model.hpp"

namespace usf {

// Tables of the scale functions W_q and Z_q on the lattice, index k for
// the point x = k*h.  w grows like e^(phi(q)*k*h), so raw entries can
// leave the representable range; overflow_at marks the first such index
// (-1 when none) and the affected entries hold +inf.  w_scaled holds
// the tilted values w[k]*e^(-phi(q)*(k+1)*h), which stay bounded and
// are the preferred route for ratios at large arguments.
struct ScaleTable {
    double q = 0.0;
    double h = 1.0;
    int n_max = 0;
    double phi_q = 0.0;
    std::vector<double> w;         // W_q(k*h), k = 0..n_max
    std::vector<double> z;         // Z_q(k*h)
    std::vector<double> w_scaled;  // W_q(k*h)*e^(-phi_q*(k+1)*h)
    int overflow_at = -1;

    // piecewise-constant extensions; W vanishes and Z is 1 left of zero
    double w_at(double x) const;
    double z_at(double x) const;
};

// Fills all three tables.  w by the one-step linear recursion
//   rate_up*w[k+1] = (total_rate+q)*w[k] - sum_l rate(-l*h)*w[k-l],
//   w[0] = 1/(h*rate_up);
// z by its running-sum definition z[n] = 1 + q*h*(w[0]+...+w[n-1]);
// w_scaled by running the q = 0 recursion on the chain tilted by
// phi(q).  Geometric tails enter through an O(1) running convolution.
ScaleTable scale_table(const ChainSpec& spec, double q, int n_max);

// Alternative single-sum form of the same recursion,
//   w[n+1] = w[0] + sum_{k=1..n+1} w[n+1-k]*(q + mass(-inf,-k*h])/rate_up,
// kept as an independent cross-check route.
std::vector<double> w_table_alt(const ChainSpec& spec, double q, int n_max);

// Direct one-step recursion for z (independent of the w table).  At
// q = 0 the recursion would only amplify rounding noise around the
// constant solution, so the constant 1 is returned outright.
std::vector<double> z_table_recursion(const ChainSpec& spec, double q, int n_max);

// Single-sum form for z - 1, mirroring w_table_alt.
std::vector<double> z_table_alt(const ChainSpec& spec, double q, int n_max);

// Partial Laplace transform of the piecewise-constant extension of w
// against the closed form (e^(beta*h)-1)/(beta*h*(psi(beta)-q)).
// tail_bound dominates the discarded part of the sum: past the table w
// is bounded by e^(phi_q*(k+1)*h)/psi'(phi_q) when that derivative is
// positive, and otherwise (oscillating case) by the submultiplicative
// envelope M*rho^k read off the table itself.  Requires beta > phi(q).
struct LaplaceCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double tail_bound = 0.0;
};
LaplaceCheck w_laplace_check(const ChainSpec& spec, double q, double beta, int n_max);

}  // namespace usf
