#include "usf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace usf {

double ChainSpec::total_rate() const {
    return rate_up + down_rate();
}

double ChainSpec::down_rate() const {
    double m = 0.0;
    for (const auto& a : down_atoms) m += a.rate;
    if (geo_tail) m += geo_tail->c / (1.0 - geo_tail->a);
    return m;
}

double ChainSpec::down_rate_at(int k) const {
    if (k < 1) return 0.0;
    double r = 0.0;
    for (const auto& a : down_atoms)
        if (a.k == k) r += a.rate;
    if (geo_tail && k >= geo_tail->k0)
        r += geo_tail->c * std::pow(geo_tail->a, k - geo_tail->k0);
    return r;
}

double ChainSpec::down_tail_from(int k) const {
    if (k < 1) return down_rate();
    double m = 0.0;
    for (const auto& a : down_atoms)
        if (a.k >= k) m += a.rate;
    if (geo_tail) {
        int j = std::max(k, geo_tail->k0);
        m += geo_tail->c * std::pow(geo_tail->a, j - geo_tail->k0) / (1.0 - geo_tail->a);
    }
    return m;
}

double ChainSpec::mean_jump() const {
    return psi_prime(*this, 0.0);
}

int ChainSpec::max_atom_index() const {
    int m = 0;
    for (const auto& a : down_atoms) m = std::max(m, a.k);
    return m;
}

void validate(const ChainSpec& spec) {
    if (!(spec.h > 0.0)) throw std::invalid_argument("lattice step h must be positive");
    if (!(spec.rate_up > 0.0)) throw std::invalid_argument("rate_up must be positive");
    if (!std::isfinite(spec.h) || !std::isfinite(spec.rate_up))
        throw std::invalid_argument("h and rate_up must be finite");
    std::vector<int> seen;
    for (const auto& a : spec.down_atoms) {
        if (a.k < 1) throw std::invalid_argument("down atom index must be >= 1");
        if (!(a.rate >= 0.0) || !std::isfinite(a.rate))
            throw std::invalid_argument("down atom rate must be finite and >= 0");
        seen.push_back(a.k);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw std::invalid_argument("duplicate down atom index");
    if (spec.geo_tail) {
        const auto& t = *spec.geo_tail;
        if (t.k0 < 1) throw std::invalid_argument("geo tail k0 must be >= 1");
        if (!(t.c > 0.0) || !std::isfinite(t.c))
            throw std::invalid_argument("geo tail coefficient must be positive");
        if (!(t.a > 0.0 && t.a < 1.0))
            throw std::invalid_argument("geo tail ratio must lie in (0,1)");
        for (const auto& a : spec.down_atoms)
            if (a.k >= t.k0)
                throw std::invalid_argument("down atom collides with geo tail region");
    }
}

double psi(const ChainSpec& spec, double beta) {
    double v = spec.rate_up * std::expm1(beta * spec.h);
    for (const auto& a : spec.down_atoms)
        v += a.rate * std::expm1(-beta * a.k * spec.h);
    if (spec.geo_tail) {
        const auto& t = *spec.geo_tail;
        // sum over the tail of c*a^(k-k0)*(e^(-beta*k*h) - 1), summed in a
        // form that is exactly zero at beta = 0
        double eb = std::exp(-beta * spec.h);
        double num = (1.0 - t.a) * std::expm1(-beta * t.k0 * spec.h) + t.a * std::expm1(-beta * spec.h);
        v += t.c * num / ((1.0 - t.a * eb) * (1.0 - t.a));
    }
    return v;
}

double psi_prime(const ChainSpec& spec, double beta) {
    double v = spec.rate_up * spec.h * std::exp(beta * spec.h);
    for (const auto& a : spec.down_atoms)
        v -= a.rate * (a.k * spec.h) * std::exp(-beta * a.k * spec.h);
    if (spec.geo_tail) {
        const auto& t = *spec.geo_tail;
        double eb = std::exp(-beta * spec.h);
        double d = 1.0 - t.a * eb;
        v -= t.c * spec.h * std::exp(-beta * t.k0 * spec.h) * (t.k0 * d + t.a * eb) / (d * d);
    }
    return v;
}

namespace {

// Largest root of psi.  Zero unless the drift is negative; in that case
// psi dips below zero on (0, r) and the root is bracketed and bisected.
double phi_zero(const ChainSpec& spec) {
    if (psi_prime(spec, 0.0) >= 0.0) return 0.0;
    double lo = 1e-12;
    double hi = 1.0;
    int guard = 0;
    while (psi(spec, hi) <= 0.0) {
        hi *= 2.0;
        if (++guard > 200) throw NoRootError("psi stays nonpositive; no positive root found");
    }
    while (hi - lo > 1e-14 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        if (psi(spec, mid) <= 0.0) lo = mid; else hi = mid;
    }
    double x = 0.5 * (lo + hi);
    // Newton polish; the root is simple here (psi'(phi_0) > 0)
    for (int i = 0; i < 4; ++i) {
        double d = psi_prime(spec, x);
        if (d <= 0.0) break;
        x -= psi(spec, x) / d;
    }
    return x;
}

}  // namespace

double phi(const ChainSpec& spec, double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("phi requires q >= 0");
    double lo = phi_zero(spec);
    if (q == 0.0) return lo;
    double hi = std::max(1.0, lo);
    int guard = 0;
    while (psi(spec, hi) <= q) {
        hi *= 2.0;
        if (++guard > 200) throw NoRootError("psi never exceeds q");
    }
    // safeguarded Newton on the increasing convex branch: keep the
    // bracket [a,b] with psi(a) <= q < psi(b), bisect when Newton leaves it
    double a = lo, b = hi, x = lo;
    double fx = psi(spec, x) - q;
    for (int it = 0; it < 200; ++it) {
        if (fx <= 0.0) a = x; else b = x;
        double d = psi_prime(spec, x);
        double nx = (d > 0.0) ? x - fx / d : 0.5 * (a + b);
        if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
        double fn = psi(spec, nx) - q;
        // run to the fixed point: near a simple root the iterates land on
        // one double and stay there, so no function-value tolerance is
        // needed (a loose one here costs ~1e-13 in phi, which downstream
        // users amplify by W(k))
        bool done = nx == x || (b - a) <= 4e-16 * std::max(1.0, b);
        x = nx;
        fx = fn;
        if (done) break;
    }
    return x;
}

double phi_prime(const ChainSpec& spec, double q) {
    double d = psi_prime(spec, phi(spec, q));
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / d;
}

DriftClass classify(const ChainSpec& spec) {
    double m = psi_prime(spec, 0.0);
    double p0 = phi(spec, 0.0);
    Drift dir = m > 0.0   ? Drift::ToPlusInfinity
                : m < 0.0 ? Drift::ToMinusInfinity
                          : Drift::Oscillates;
    double pp = dir == Drift::Oscillates ? std::numeric_limits<double>::infinity()
                                         : 1.0 / psi_prime(spec, p0);
    return {dir, m, p0, pp};
}

const char* to_string(Drift d) {
    switch (d) {
        case Drift::ToPlusInfinity: return "ToPlusInfinity";
        case Drift::Oscillates: return "Oscillates";
        case Drift::ToMinusInfinity: return "ToMinusInfinity";
    }
    return "?";
}

ChainSpec tilt(const ChainSpec& spec, double c) {
    ChainSpec out = spec;
    out.rate_up = spec.rate_up * std::exp(c * spec.h);
    for (auto& a : out.down_atoms) a.rate *= std::exp(-c * a.k * spec.h);
    if (out.geo_tail) {
        out.geo_tail->c = spec.geo_tail->c * std::exp(-c * spec.geo_tail->k0 * spec.h);
        out.geo_tail->a = spec.geo_tail->a * std::exp(-c * spec.h);
        if (!(out.geo_tail->a < 1.0))
            throw std::invalid_argument("tilt direction makes the tail mass infinite");
    }
    return out;
}

}  // namespace usf
