#include "usf/exit.hpp"

#include <climits>
#include <cmath>
#include <stdexcept>

namespace usf {

namespace {

int snap_index(double r) {
    double n = std::nearbyint(r);
    if (std::abs(r - n) <= 1e-9 * std::max(1.0, std::abs(r))) return static_cast<int>(n);
    return INT_MIN;
}

int floor_index(double x, double h) {
    double r = x / h;
    int s = snap_index(r);
    return s != INT_MIN ? s : static_cast<int>(std::floor(r));
}

int ceil_index(double x, double h) {
    double r = x / h;
    int s = snap_index(r);
    return s != INT_MIN ? s : static_cast<int>(std::ceil(r));
}

int exact_index(double y, double h, const char* what) {
    int s = snap_index(y / h);
    if (s == INT_MIN)
        throw std::invalid_argument(std::string(what) + " must be a lattice point");
    return s;
}

}  // namespace

double up_passage_lt(const ChainSpec& spec, double x, double beta) {
    validate(spec);
    if (!(x >= 0.0)) throw std::invalid_argument("up_passage_lt requires x >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("up_passage_lt requires beta >= 0");
    return std::exp(-phi(spec, beta) * spec.h * ceil_index(x, spec.h));
}

double two_sided_up(const ScaleTable& table, double x, double y) {
    if (!(x >= 0.0)) throw std::invalid_argument("two_sided_up requires x >= 0");
    if (!(y > 0.0)) throw std::invalid_argument("two_sided_up requires y > 0");
    exact_index(y, table.h, "upper level y");
    int i = floor_index(x, table.h);
    int j = floor_index(x + y, table.h);
    if (j > table.n_max) throw std::out_of_range("scale table shorter than x+y");
    return table.w_scaled[i] / table.w_scaled[j] *
           std::exp(-table.phi_q * (j - i) * table.h);
}

double two_sided_up(const ChainSpec& spec, double q, double x, double y) {
    validate(spec);
    if (!(y > 0.0)) throw std::invalid_argument("two_sided_up requires y > 0");
    int j = floor_index(x + y, spec.h);
    return two_sided_up(scale_table(spec, q, j), x, y);
}

double down_passage_lt(const ChainSpec& spec, double q, double x) {
    validate(spec);
    if (!(x >= 0.0)) throw std::invalid_argument("down_passage_lt requires x >= 0");
    if (!(q >= 0.0)) throw std::invalid_argument("down_passage_lt requires q >= 0");
    if (q == 0.0) return ruin_prob(spec, x);
    ScaleTable t = scale_table(spec, q, floor_index(x, spec.h));
    double coef = q * spec.h / std::expm1(t.phi_q * spec.h);
    return t.z_at(x) - coef * t.w_at(x);
}

double ruin_prob(const ChainSpec& spec, double x) {
    validate(spec);
    if (!(x >= 0.0)) throw std::invalid_argument("ruin_prob requires x >= 0");
    double drift = psi_prime(spec, 0.0);
    if (drift <= 0.0) return 1.0;
    ScaleTable t = scale_table(spec, 0.0, floor_index(x, spec.h));
    // w_at(x)*drift -> 1 from below as x grows; rounding can poke a hair
    // past it, so pin the probability at 0
    return std::max(0.0, 1.0 - t.w_at(x) * drift);
}

double down_before_up(const ChainSpec& spec, double q, double x, double y) {
    validate(spec);
    if (!(x >= 0.0)) throw std::invalid_argument("down_before_up requires x >= 0");
    if (!(y > 0.0)) throw std::invalid_argument("down_before_up requires y > 0");
    exact_index(y, spec.h, "upper level y");
    int j = floor_index(x + y, spec.h);
    ScaleTable t = scale_table(spec, q, j);
    return t.z_at(x) - t.z_at(x + y) * two_sided_up(t, x, y);
}

double sup_at_exp(const ChainSpec& spec, double p) {
    validate(spec);
    if (!(p > 0.0)) throw std::invalid_argument("sup_at_exp requires p > 0");
    return std::exp(-phi(spec, p) * spec.h);
}

double inf_lt_at_exp(const ChainSpec& spec, double p, double beta) {
    validate(spec);
    if (!(p > 0.0)) throw std::invalid_argument("inf_lt_at_exp requires p > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("inf_lt_at_exp requires beta >= 0");
    double pp = phi(spec, p);
    double denom = -std::expm1(-pp * spec.h);  // 1 - e^(-phi(p)*h)
    if (std::abs(p - psi(spec, beta)) <= 1e-9 * std::max(1.0, p))
        return p * phi_prime(spec, p) * spec.h / denom;
    return p / (p - psi(spec, beta)) * (-std::expm1((beta - pp) * spec.h)) / denom;
}

double inf_pmf_at_exp(const ChainSpec& spec, double q, int k) {
    if (k < 0) throw std::invalid_argument("inf_pmf_at_exp requires k >= 0");
    return inf_pmf_table(spec, q, k)[k];
}

std::vector<double> inf_pmf_table(const ChainSpec& spec, double q, int k_max) {
    validate(spec);
    if (!(q > 0.0)) throw std::invalid_argument("inf_pmf_table requires q > 0");
    if (k_max < 0) throw std::invalid_argument("inf_pmf_table requires k_max >= 0");

    // The textbook expression, the increment form of
    //   coef*(W_q(kh) - W_q((k-1)h)) - q*h*W_q((k-1)h),
    // subtracts numbers growing like e^(phi(q)kh) to produce a result
    // decaying geometrically, so doubles lose the entire tail.  The
    // generating function of the pmf is rational,
    //   sum_k p_k u^k = q*(u - v)*(1 - a*u) / ((1 - v)*B(u)),
    //   B(u) = (1 - a*u)*((q + gamma)*u - rate_up - sum_l rate_l*u^(l+1))
    //          - c*u^(k0+1),
    // with v = e^(-phi(q)h) the single root of B inside the unit disk
    // (Rouche: the remaining mass keeps |B| away from zero on |u| = 1).
    // Dividing out (u - v) leaves a polynomial with all roots outside,
    // whose coefficient recurrence is forward stable and sign-safe.
    const double v = std::exp(-phi(spec, q) * spec.h);
    const double gamma = spec.total_rate();

    int m = spec.max_atom_index();
    int deg = std::max(m + 1, spec.geo_tail ? spec.geo_tail->k0 + 1 : 0);
    if (spec.geo_tail) deg = std::max(deg, m + 2);
    std::vector<double> b(deg + 1, 0.0);  // B coefficients by power of u
    b[0] -= spec.rate_up;
    b[1] += q + gamma;
    for (const auto& at : spec.down_atoms) b[at.k + 1] -= at.rate;
    if (spec.geo_tail) {
        // multiply the atom part by (1 - a*u), then subtract c*u^(k0+1)
        const double a = spec.geo_tail->a;
        for (int j = deg; j >= 1; --j) b[j] -= a * b[j - 1];
        b[spec.geo_tail->k0 + 1] -= spec.geo_tail->c;
    }

    // synthetic division: B(u) = (u - v)*C(u)
    std::vector<double> c(deg, 0.0);
    double carry = b[deg];
    for (int j = deg - 1; j >= 0; --j) {
        c[j] = carry;
        carry = b[j] + v * carry;
    }

    // numerator q*(1 - a*u)/(1 - v): a constant term plus, with a
    // geometric tail, a first-order term
    const double n0 = q / (1.0 - v);
    const double n1 = spec.geo_tail ? -spec.geo_tail->a * n0 : 0.0;

    std::vector<double> pmf(k_max + 1, 0.0);
    pmf[0] = n0 / c[0];
    for (int k = 1; k <= k_max; ++k) {
        double s = k == 1 ? n1 : 0.0;
        for (int j = 1; j < deg && j <= k; ++j) s -= c[j] * pmf[k - j];
        pmf[k] = std::max(s / c[0], 0.0);
    }
    return pmf;
}

double overall_inf_lt(const ChainSpec& spec, double beta) {
    validate(spec);
    if (!(beta > 0.0)) throw std::invalid_argument("overall_inf_lt requires beta > 0");
    double drift = psi_prime(spec, 0.0);
    if (!(drift > 0.0))
        throw TrivialCaseError("overall infimum is degenerate unless the chain drifts to +inf");
    return drift * std::expm1(beta * spec.h) / (spec.h * psi(spec, beta));
}

}  // namespace usf
