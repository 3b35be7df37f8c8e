#include "usf/scale.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace usf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int floor_index(double x, double h) {
    double r = x / h;
    double n = std::nearbyint(r);
    if (std::abs(r - n) <= 1e-9 * std::max(1.0, std::abs(r))) return static_cast<int>(n);
    return static_cast<int>(std::floor(r));
}

// Runs the primary recursion for the given spec and discount.  Stops
// writing once values stop being representable and reports that index.
void run_w_recursion(const ChainSpec& spec, double q, int n_max,
                     std::vector<double>& w, int& overflow_at) {
    const double gq = spec.total_rate() + q;
    w.assign(n_max + 1, 0.0);
    w[0] = 1.0 / (spec.h * spec.rate_up);
    overflow_at = -1;
    double tail_conv = 0.0;  // sum over tail indices l of a^(l-k0)*w[k-l]
    for (int k = 0; k < n_max; ++k) {
        double conv = 0.0;
        for (const auto& at : spec.down_atoms)
            if (at.k <= k) conv += at.rate * w[k - at.k];
        if (spec.geo_tail && k >= spec.geo_tail->k0) {
            tail_conv = spec.geo_tail->a * tail_conv + w[k - spec.geo_tail->k0];
            conv += spec.geo_tail->c * tail_conv;
        }
        double next = (gq * w[k] - conv) / spec.rate_up;
        if (!std::isfinite(next)) {
            overflow_at = k + 1;
            for (int j = k + 1; j <= n_max; ++j) w[j] = kInf;
            return;
        }
        w[k + 1] = next;
    }
}

}  // namespace

double ScaleTable::w_at(double x) const {
    if (x < 0.0) return 0.0;
    int k = floor_index(x, h);
    if (k > n_max) throw std::out_of_range("scale table shorter than requested point");
    return w[k];
}

double ScaleTable::z_at(double x) const {
    if (x < 0.0) return 1.0;
    int k = floor_index(x, h);
    if (k > n_max) throw std::out_of_range("scale table shorter than requested point");
    return z[k];
}

ScaleTable scale_table(const ChainSpec& spec, double q, int n_max) {
    validate(spec);
    if (!(q >= 0.0)) throw std::invalid_argument("scale_table requires q >= 0");
    if (n_max < 0) throw std::invalid_argument("scale_table requires n_max >= 0");

    ScaleTable t;
    t.q = q;
    t.h = spec.h;
    t.n_max = n_max;
    t.phi_q = phi(spec, q);

    run_w_recursion(spec, q, n_max, t.w, t.overflow_at);

    t.z.assign(n_max + 1, 1.0);
    if (q > 0.0) {
        double acc = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            acc += t.w[n - 1];
            t.z[n] = 1.0 + q * spec.h * acc;
        }
    }

    if (t.phi_q == 0.0) {
        t.w_scaled = t.w;
    } else {
        int dummy = -1;
        run_w_recursion(tilt(spec, t.phi_q), 0.0, n_max, t.w_scaled, dummy);
    }
    return t;
}

std::vector<double> w_table_alt(const ChainSpec& spec, double q, int n_max) {
    validate(spec);
    const double up = spec.rate_up;
    // first index past which mass(-inf,-k*h] is purely geometric
    const int k_geo = spec.geo_tail ? std::max(spec.max_atom_index() + 1, spec.geo_tail->k0)
                                    : n_max + 2;
    const double a = spec.geo_tail ? spec.geo_tail->a : 0.0;
    const double tail_at_kgeo = spec.geo_tail ? spec.down_tail_from(k_geo) : 0.0;
    std::vector<double> w(n_max + 1, 0.0);
    w[0] = 1.0 / (spec.h * up);
    double prefix = w[0];  // sum of w[0..n]
    double geo_acc = 0.0;  // sum over k >= k_geo of a^(k-k_geo)*w[n+1-k]
    for (int n = 0; n < n_max; ++n) {
        double s = q * prefix / up;
        for (int k = 1; k <= std::min(k_geo - 1, n + 1); ++k)
            s += spec.down_tail_from(k) * w[n + 1 - k] / up;
        if (spec.geo_tail && n + 1 >= k_geo) {
            geo_acc = a * geo_acc + w[n + 1 - k_geo];
            s += tail_at_kgeo * geo_acc / up;
        }
        w[n + 1] = w[0] + s;
        prefix += w[n + 1];
    }
    return w;
}

std::vector<double> z_table_recursion(const ChainSpec& spec, double q, int n_max) {
    validate(spec);
    // At q = 0 the solution is the constant 1 and the recursion sits on
    // an unstable manifold: rounding in the tail terms gets amplified
    // like the w table grows.  Nothing to recompute in that case.
    if (q == 0.0) return std::vector<double>(n_max + 1, 1.0);
    const double gq = spec.total_rate() + q;
    std::vector<double> z(n_max + 1, 1.0);
    double tail_conv = 0.0;  // sum over tail indices l of a^(l-k0)*z[k-l], l <= k-1
    for (int k = 0; k < n_max; ++k) {
        double conv = 0.0;
        for (const auto& at : spec.down_atoms)
            if (at.k <= k - 1) conv += at.rate * z[k - at.k];
        if (spec.geo_tail && k - 1 >= spec.geo_tail->k0) {
            tail_conv = spec.geo_tail->a * tail_conv + z[k - spec.geo_tail->k0];
            conv += spec.geo_tail->c * tail_conv;
        }
        double remaining = spec.down_tail_from(std::max(k, 1));
        z[k + 1] = (gq * z[k] - conv - remaining) / spec.rate_up;
    }
    return z;
}

std::vector<double> z_table_alt(const ChainSpec& spec, double q, int n_max) {
    validate(spec);
    const double up = spec.rate_up;
    const int k_geo = spec.geo_tail ? std::max(spec.max_atom_index() + 1, spec.geo_tail->k0)
                                    : n_max + 2;
    const double a = spec.geo_tail ? spec.geo_tail->a : 0.0;
    const double tail_at_kgeo = spec.geo_tail ? spec.down_tail_from(k_geo) : 0.0;
    std::vector<double> zt(n_max + 1, 0.0);  // z - 1
    double geo_acc = 0.0;  // sum over k >= k_geo of a^(k-k_geo)*zt[n+1-k]
    double prefix = 0.0;   // sum of zt[1..n]
    for (int n = 0; n < n_max; ++n) {
        double s = (n + 1) * q / up + q * prefix / up;
        for (int k = 1; k <= std::min(k_geo - 1, n); ++k)
            s += spec.down_tail_from(k) * zt[n + 1 - k] / up;
        if (spec.geo_tail && n >= k_geo) {
            geo_acc = a * geo_acc + zt[n + 1 - k_geo];
            s += tail_at_kgeo * geo_acc / up;
        }
        zt[n + 1] = s;
        prefix += zt[n + 1];
    }
    std::vector<double> z(n_max + 1);
    for (int n = 0; n <= n_max; ++n) z[n] = 1.0 + zt[n];
    return z;
}

LaplaceCheck w_laplace_check(const ChainSpec& spec, double q, double beta, int n_max) {
    ScaleTable t = scale_table(spec, q, n_max);
    if (!(beta > t.phi_q))
        throw std::invalid_argument("w_laplace_check requires beta > phi(q)");

    LaplaceCheck out;
    out.rhs = std::expm1(beta * spec.h) / (beta * spec.h * (psi(spec, beta) - q));

    const double step = -std::expm1(-beta * spec.h);  // 1 - e^(-beta*h)
    // Sum through the scaled table: w[k]*e^(-beta*k*h) equals
    // w_scaled[k]*e^(phi_q*h)*e^(-(beta-phi_q)*k*h), every factor of
    // which stays representable however far the raw table overflowed.
    double s = 0.0;
    for (int k = n_max; k >= 0; --k)
        s += t.w_scaled[k] * std::exp(-(beta - t.phi_q) * k * spec.h);
    out.lhs = s * std::exp(t.phi_q * spec.h) * step / beta;

    const double dpsi = psi_prime(spec, t.phi_q);
    if (dpsi > 0.0) {
        // w[k] <= e^(phi_q*(k+1)*h)/psi'(phi_q): the tilted table is a
        // nondecreasing q = 0 scale function capped by its limit
        double r = std::exp(-(beta - t.phi_q) * spec.h);
        out.tail_bound = (1.0 / dpsi) * (step / beta) * std::exp(t.phi_q * spec.h) *
                         std::exp(-(beta - t.phi_q) * (n_max + 1) * spec.h) / (1.0 - r);
    } else {
        // oscillating case: w/w[0] is submultiplicative, so
        // w[k] <= w[0]*M*rho^k with rho and M taken from the table
        double log_rho = std::log(t.w[n_max] / t.w[0]) / n_max;
        double m = 0.0;
        for (int r = 0; r < n_max; ++r)
            m = std::max(m, std::log(t.w[r] / t.w[0]) - r * log_rho);
        double x = std::exp(log_rho - beta * spec.h);
        if (x >= 1.0) {
            out.tail_bound = kInf;
        } else {
            out.tail_bound = t.w[0] * std::exp(m) * (step / beta) *
                             std::pow(x, n_max + 1) / (1.0 - x);
        }
    }
    return out;
}

}  // namespace usf
