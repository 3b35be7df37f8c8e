#include "usf/ladder.hpp"

#include <cmath>
#include <stdexcept>

namespace usf {

double kappa_star(const ChainSpec& spec, double alpha, double beta) {
    validate(spec);
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("kappa_star requires alpha, beta >= 0");
    return -std::expm1(-(beta + phi(spec, alpha)) * spec.h);
}

double kappa_hat(const ChainSpec& spec, double alpha, double beta) {
    validate(spec);
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("kappa_hat requires alpha, beta >= 0");
    double khat = std::exp(-phi(spec, 0.0) * spec.h);
    if (std::abs(alpha - psi(spec, beta)) <= 1e-9 * std::max(1.0, alpha))
        return khat * psi_prime(spec, phi(spec, alpha)) / spec.h;
    return khat * (alpha - psi(spec, beta)) / (-std::expm1((beta - phi(spec, alpha)) * spec.h));
}

double sup_joint_lt(const ChainSpec& spec, double p, double alpha, double beta) {
    validate(spec);
    if (!(p > 0.0)) throw std::invalid_argument("sup_joint_lt requires p > 0");
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("sup_joint_lt requires alpha, beta >= 0");
    return kappa_star(spec, p, 0.0) / kappa_star(spec, p + alpha, beta);
}

double inf_joint_lt(const ChainSpec& spec, double p, double alpha, double beta) {
    validate(spec);
    if (!(p > 0.0)) throw std::invalid_argument("inf_joint_lt requires p > 0");
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("inf_joint_lt requires alpha, beta >= 0");
    double denom = -std::expm1(-phi(spec, p) * spec.h);
    double rate = p + alpha;
    if (std::abs(rate - psi(spec, beta)) <= 1e-9 * std::max(1.0, rate))
        return p * spec.h * phi_prime(spec, rate) / denom;
    return p / (rate - psi(spec, beta)) *
           (-std::expm1((beta - phi(spec, rate)) * spec.h)) / denom;
}

double ascending_exponent(const ChainSpec& spec, double beta) {
    validate(spec);
    if (!(beta >= 0.0)) throw std::invalid_argument("ascending_exponent requires beta >= 0");
    return spec.total_rate() * (-std::expm1(-(beta + phi(spec, 0.0)) * spec.h));
}

double descending_exponent(const ChainSpec& spec, double beta) {
    validate(spec);
    if (!(beta >= 0.0)) throw std::invalid_argument("descending_exponent requires beta >= 0");
    double p0 = phi(spec, 0.0);
    double x = std::exp(p0 * spec.h);
    double denom = std::exp(beta * spec.h) - x;
    if (std::abs(denom) <= 1e-9 * std::max(1.0, x))
        return psi_prime(spec, p0) / (spec.h * x);
    return psi(spec, beta) / denom;
}

double LadderData::phi_at(int k) const {
    if (k < 1) return 0.0;
    if (k <= static_cast<int>(phi_atoms.size())) return phi_atoms[k - 1];
    if (phi_tail && k >= phi_tail->k0)
        return phi_tail->c * std::pow(phi_tail->a, k - phi_tail->k0);
    return 0.0;
}

double LadderData::phi_sum() const {
    double s = 0.0;
    for (double v : phi_atoms) s += v;
    if (phi_tail) s += phi_tail->c / (1.0 - phi_tail->a);
    return s;
}

LadderData extract_ladder(const ChainSpec& spec) {
    validate(spec);
    LadderData out;
    out.h = spec.h;
    double p0 = phi(spec, 0.0);
    double x = std::exp(p0 * spec.h);
    out.x_factor = x;
    out.gamma_asc = spec.total_rate() * (-std::expm1(-p0 * spec.h));

    if (spec.geo_tail) {
        const auto& t = *spec.geo_tail;
        // on the tail the bounded solution of x*phi_k - phi_(k+1) = c*a^(k-k0)
        // is exactly phi_k = c/(x-a)*a^(k-k0)
        double c_phi = t.c / (x - t.a);
        out.phi_tail = GeoTail{t.k0, c_phi, t.a};
        out.phi_atoms.assign(t.k0 - 1, 0.0);
        double next = c_phi;
        for (int k = t.k0 - 1; k >= 1; --k) {
            out.phi_atoms[k - 1] = (next + spec.down_rate_at(k)) / x;
            next = out.phi_atoms[k - 1];
        }
    } else {
        int L = spec.max_atom_index();
        out.phi_atoms.assign(L, 0.0);
        double next = 0.0;
        for (int k = L; k >= 1; --k) {
            out.phi_atoms[k - 1] = (next + spec.down_rate_at(k)) / x;
            next = out.phi_atoms[k - 1];
        }
    }

    // phi_1 must agree with total_rate - x*rate_up; this is psi(phi(0)) = 0
    // in disguise and guards the root used for x
    double direct = spec.total_rate() - x * spec.rate_up;
    if (std::abs(out.phi_at(1) - direct) > 1e-9 * std::max(1.0, spec.total_rate()))
        throw NoRootError("ladder coefficients inconsistent with the root of psi");

    if (p0 > 0.0) {
        out.q_desc = 0.0;
    } else {
        double q = spec.rate_up - out.phi_sum();
        if (q < -1e-12 * std::max(1.0, spec.rate_up))
            throw NegativeMassError("descending killing rate came out negative");
        out.q_desc = std::max(q, 0.0);
    }
    return out;
}

ParentResult reconstruct_parent(const LadderData& data) {
    if (!(data.h > 0.0)) throw std::invalid_argument("ladder data requires h > 0");
    if (!(data.gamma_asc >= 0.0) || !(data.q_desc >= 0.0))
        throw std::invalid_argument("ladder rates must be >= 0");
    if (data.gamma_asc > 0.0 && data.q_desc > 0.0)
        throw std::invalid_argument("at most one of gamma_asc, q_desc can be positive");
    if (data.phi_tail) {
        if (!(data.phi_tail->a > 0.0 && data.phi_tail->a < 1.0) || !(data.phi_tail->c > 0.0))
            throw std::invalid_argument("phi tail parameters out of range");
        if (data.phi_tail->k0 != static_cast<int>(data.phi_atoms.size()) + 1)
            throw std::invalid_argument("phi tail must start right after the stored atoms");
    }
    for (double v : data.phi_atoms)
        if (v < 0.0) throw std::invalid_argument("phi coefficients must be >= 0");

    double s = data.phi_sum();
    double phi1 = data.phi_at(1);

    double x;
    if (data.gamma_asc == 0.0) {
        x = 1.0;
    } else if (s <= 0.0) {
        throw NoRootError("positive ascending killing needs downward ladder mass");
    } else {
        // s*x^2 + (phi1 - s - gamma)*x - phi1 = 0 has exactly one root
        // above 1 when gamma > 0
        double b = phi1 - s - data.gamma_asc;
        double disc = b * b + 4.0 * s * phi1;
        double rt = std::sqrt(disc);
        x = b <= 0.0 ? (-b + rt) / (2.0 * s) : 2.0 * phi1 / (b + rt);
        if (!(x > 1.0 - 1e-12))
            throw NoRootError("no ladder factor in (1, inf)");
        x = std::max(x, 1.0);
    }

    ChainSpec spec;
    spec.h = data.h;
    spec.rate_up = data.q_desc + s;
    if (!(spec.rate_up > 0.0))
        throw std::invalid_argument("ladder data carries no upward rate");

    int m = static_cast<int>(data.phi_atoms.size());
    for (int k = 1; k <= m; ++k) {
        double nxt = data.phi_at(k + 1);
        double rate = x * data.phi_atoms[k - 1] - nxt;
        double scale = std::max(1.0, x * data.phi_atoms[k - 1]);
        if (rate < -1e-12 * scale)
            throw NegativeMassError("reconstructed jump rate came out negative");
        if (rate > 0.0) spec.down_atoms.push_back({k, rate});
    }
    if (data.phi_tail) {
        double c = data.phi_tail->c * (x - data.phi_tail->a);
        if (c < -1e-12)
            throw NegativeMassError("reconstructed tail coefficient came out negative");
        if (c > 0.0) spec.geo_tail = GeoTail{data.phi_tail->k0, c, data.phi_tail->a};
    }
    validate(spec);
    return {spec, x};
}

}  // namespace usf
