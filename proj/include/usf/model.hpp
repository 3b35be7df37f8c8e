#pragma once

#include <optional>
#include <vector>

#include "usf/errors.hpp"

namespace usf {

// One atom of the downward jump measure: rate of jumps of size -k*h.
struct DownAtom {
    int k = 1;
    double rate = 0.0;
};

// Geometric tail of the downward measure: rate c*a^(k-k0) for every
// jump size -k*h with k >= k0.  Atoms must all sit strictly below k0.
struct GeoTail {
    int k0 = 1;
    double c = 0.0;
    double a = 0.5;  // in (0,1)
};

// A continuous-time chain on the lattice h*Z that moves up only by
// single steps +h (rate_up > 0) and down by arbitrary multiples of h.
// Total jump rate is finite, so this is a compound Poisson process.
struct ChainSpec {
    double h = 1.0;
    double rate_up = 0.0;
    std::vector<DownAtom> down_atoms;
    std::optional<GeoTail> geo_tail;

    double total_rate() const;           // mass of the whole jump measure
    double down_rate() const;            // mass of (-inf, 0)
    double down_rate_at(int k) const;    // rate of jumps of size -k*h, k >= 1
    double down_tail_from(int k) const;  // mass of (-inf, -k*h]
    double mean_jump() const;            // E[jump]*rate = psi'(0+)
    int max_atom_index() const;          // 0 when there are no atoms
};

// Throws std::invalid_argument on malformed input (nonpositive h or
// rate_up, bad atom indices, tail parameters outside their ranges,
// atoms colliding with the tail region).
void validate(const ChainSpec& spec);

enum class Drift { ToPlusInfinity, Oscillates, ToMinusInfinity };

const char* to_string(Drift d);

struct DriftClass {
    Drift direction;
    double psi_prime_0;  // mean displacement per unit time
    double phi_0;        // largest root of psi
    double phi_prime_0;  // right derivative of the inverse at 0; +inf when oscillating
};

// Laplace exponent psi(beta) = integral of (e^(beta*x) - 1) against the
// jump measure.  Finite for all beta >= 0; strictly convex; psi(0) = 0.
double psi(const ChainSpec& spec, double beta);
double psi_prime(const ChainSpec& spec, double beta);

// Inverse of psi on [phi(0), inf).  phi(0) is the largest root of psi:
// exactly 0 unless the chain drifts to -inf.  Requires q >= 0.
double phi(const ChainSpec& spec, double q);

// Derivative of the inverse, 1/psi'(phi(q)); +inf at q = 0 for an
// oscillating chain.
double phi_prime(const ChainSpec& spec, double q);

DriftClass classify(const ChainSpec& spec);

// Exponential change of measure: the spec of the chain whose Laplace
// exponent is psi(. + c) - psi(c).  Rates pick up the factor e^(c*x).
ChainSpec tilt(const ChainSpec& spec, double c);

}  // namespace usf
