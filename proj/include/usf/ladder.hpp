#pragma once

#include <optional>
#include <vector>

#include "usf/model.hpp"

namespace usf {

// Space-time Wiener-Hopf factors.  kappa_star is the exponent of the
// ascending ladder process (normalised so its constant is 1); kappa_hat
// the descending one, with constant e^(-phi(0)*h).
double kappa_star(const ChainSpec& spec, double alpha, double beta);
double kappa_hat(const ChainSpec& spec, double alpha, double beta);

// Joint transforms at an independent Exp(p) time of (last maximum time,
// running maximum) resp. (last minimum time, running minimum).
double sup_joint_lt(const ChainSpec& spec, double p, double alpha, double beta);
double inf_joint_lt(const ChainSpec& spec, double p, double alpha, double beta);

// Laplace exponent of the ascending ladder height process,
// total_rate*(1 - e^(-(beta+phi(0))*h)).
double ascending_exponent(const ChainSpec& spec, double beta);

// Laplace exponent of the descending ladder height process,
// psi(beta)/(e^(beta*h) - e^(phi(0)*h)), with the removable singularity
// at beta = phi(0) evaluated by its limit psi'(phi(0))/(h*e^(phi(0)*h)).
double descending_exponent(const ChainSpec& spec, double beta);

// The descending ladder height process of an upwards skip-free chain is
// a subordinator with killing rate q_desc and jump rates phi_k at size
// -k*h, plus the deterministic unit drift; together with the ascending
// killing rate gamma_asc and the factor x = e^(phi(0)*h) these data
// determine the parent chain uniquely.  phi_k is stored densely for
// k = 1..phi_atoms.size() with an optional geometric tail directly
// after (its k0 is pinned to phi_atoms.size()+1).
struct LadderData {
    double h = 1.0;
    double gamma_asc = 0.0;
    double q_desc = 0.0;
    std::vector<double> phi_atoms;
    std::optional<GeoTail> phi_tail;
    double x_factor = 1.0;

    double phi_at(int k) const;  // 0 past the stored range
    double phi_sum() const;
};

// Reads the ladder data off a chain.  The phi_k solve
// x*phi_k - phi_(k+1) = rate(-k*h) with x = e^(phi(0)*h); they are
// computed backward (and in closed form on a geometric tail), which is
// stable for x > 1, and checked against phi_1 = total_rate - x*rate_up.
LadderData extract_ladder(const ChainSpec& spec);

// Inverts extract_ladder: recovers x (root in [1,inf) of
// gamma = (1-1/x)*(phi_1 + x*sum_k phi_k), a quadratic) and the parent
// rates rate_up = q + sum_k phi_k, rate(-k*h) = x*phi_k - phi_(k+1).
// Throws NoRootError / NegativeMassError when the data are not the
// ladder structure of any chain.
struct ParentResult {
    ChainSpec spec;
    double x = 1.0;
};
ParentResult reconstruct_parent(const LadderData& data);

}  // namespace usf
