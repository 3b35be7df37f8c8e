#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "models.hpp"
#include "usf/model.hpp"

using namespace usf;

namespace {
bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }
}  // namespace

TEST_CASE("psi closed forms on the unit-step chains") {
    // m05: psi(b) = cosh(b) - 1, m07/m03 analogous asymmetric forms.
    for (double b : {0.0, 0.1, 0.5, 1.0, 2.5, 7.0}) {
        CHECK(close(psi(m05(), b), std::cosh(b) - 1.0, 1e-14 * std::cosh(b)));
        CHECK(close(psi(m07(), b), 0.7 * std::expm1(b) + 0.3 * std::expm1(-b), 1e-13 * std::exp(b)));
        CHECK(close(psi(m03(), b), 0.3 * std::expm1(b) + 0.7 * std::expm1(-b), 1e-13 * std::exp(b)));
    }
}

TEST_CASE("psi of the geometric-tail chain") {
    // Down part sums to c * (e^(-b)/(1 - a e^(-b)) - 1/(1 - a)).
    ChainSpec s = mg();
    for (double b : {0.25, 1.0, 3.0}) {
        double e = std::exp(-b);
        double down = 0.25 * (e / (1.0 - 0.5 * e) - 2.0);
        CHECK(close(psi(s, b), 0.5 * std::expm1(b) + down, 1e-13 * std::exp(b)));
    }
    CHECK(psi(s, 0.0) == 0.0);
    CHECK(close(psi(s, std::log(1.5)), 0.0, 1e-15));
}

TEST_CASE("psi vanishes exactly at zero") {
    for (const auto& s : {m05(), m07(), m03(), mg(), mixed()}) CHECK(psi(s, 0.0) == 0.0);
}

TEST_CASE("psi_prime matches difference quotients") {
    ChainSpec s = mixed();
    for (double b : {0.0, 0.3, 1.0, 2.0}) {
        double d = 1e-6;
        double fd = (psi(s, b + d) - psi(s, b - d)) / (2.0 * d);
        CHECK(close(psi_prime(s, b), fd, 1e-6 * std::max(1.0, std::fabs(fd))));
    }
    CHECK(close(psi_prime(m05(), 1.2), std::sinh(1.2), 1e-14 * std::cosh(1.2)));
}

TEST_CASE("phi inverts psi") {
    // m05: phi(q) = arccosh(1 + q).
    for (double q : {0.0, 0.1, 0.5, 2.0, 10.0}) {
        double expected = std::acosh(1.0 + q);
        CHECK(close(phi(m05(), q), expected, 1e-12 * std::max(1.0, expected)));
    }
    for (const auto& s : {m05(), m07(), m03(), mg(), mixed()}) {
        for (double q : {0.0, 1e-8, 0.03, 0.5, 4.0, 50.0}) {
            double c = phi(s, q);
            CHECK(close(psi(s, c), q, 1e-10 * std::max(1.0, q)));
        }
        // phi is the RIGHT inverse on [phi(0), inf) only.
        double c0 = phi(s, 0.0);
        for (double b : {c0, c0 + 0.5, c0 + 2.0}) {
            CHECK(close(phi(s, psi(s, b)), b, 1e-9 * std::max(1.0, b)));
        }
    }
}

TEST_CASE("largest root of psi") {
    CHECK(phi(m05(), 0.0) == 0.0);
    CHECK(phi(m07(), 0.0) == 0.0);
    CHECK(close(phi(m03(), 0.0), std::log(7.0 / 3.0), 1e-13));
    CHECK(close(phi(mg(), 0.0), std::log(1.5), 1e-13));
}

TEST_CASE("classification by drift") {
    DriftClass c;

    c = classify(m07());
    CHECK(c.direction == Drift::ToPlusInfinity);
    CHECK(close(c.psi_prime_0, 0.4, 1e-15));
    CHECK(c.phi_0 == 0.0);
    CHECK(close(c.phi_prime_0, 2.5, 1e-12));

    c = classify(m05());
    CHECK(c.direction == Drift::Oscillates);
    CHECK(close(c.psi_prime_0, 0.0, 1e-15));
    CHECK(c.phi_0 == 0.0);
    CHECK(std::isinf(c.phi_prime_0));

    c = classify(m03());
    CHECK(c.direction == Drift::ToMinusInfinity);
    CHECK(close(c.psi_prime_0, -0.4, 1e-15));
    CHECK(close(c.phi_0, std::log(7.0 / 3.0), 1e-13));
    // psi'(log(7/3)) = 0.3*(7/3) - 0.7*(3/7) = 0.4.
    CHECK(close(c.phi_prime_0, 2.5, 1e-11));

    c = classify(mg());
    CHECK(c.direction == Drift::ToMinusInfinity);
    CHECK(close(c.psi_prime_0, -0.5, 1e-14));
    CHECK(close(c.phi_0, std::log(1.5), 1e-13));
}

TEST_CASE("mean jump rate") {
    CHECK(close(m07().mean_jump(), 0.4, 1e-15));
    CHECK(close(mg().mean_jump(), -0.5, 1e-14));
    CHECK(close(mixed().mean_jump(), psi_prime(mixed(), 0.0), 1e-14));
}

TEST_CASE("tilt shifts the exponent") {
    ChainSpec s = mixed();
    for (double c : {0.2, 1.0, phi(s, 0.7)}) {
        ChainSpec st = tilt(s, c);
        for (double b : {0.0, 0.4, 1.3}) {
            double want = psi(s, b + c) - psi(s, c);
            CHECK(close(psi(st, b), want, 1e-11 * std::max(1.0, std::fabs(want))));
        }
    }
    // Tilting an oscillating chain by phi(q) > 0 makes it drift upward.
    ChainSpec t5 = tilt(m05(), phi(m05(), 0.5));
    CHECK(classify(t5).direction == Drift::ToPlusInfinity);
    // Tilting a downward chain by phi(0) conditions it to drift upward,
    // with rate psi'(phi(0)) = 0.4.
    ChainSpec t3 = tilt(m03(), phi(m03(), 0.0));
    CHECK(close(psi_prime(t3, 0.0), 0.4, 1e-12));
    CHECK(classify(t3).direction == Drift::ToPlusInfinity);
}

TEST_CASE("validation rejects malformed specs") {
    ChainSpec s;
    s.h = 1.0;
    s.rate_up = 0.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);  // no upward rate

    s = m05();
    s.h = -1.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    s = m05();
    s.down_atoms.push_back({1, 0.1});
    CHECK_THROWS_AS(validate(s), std::invalid_argument);  // duplicate size

    s = m05();
    s.down_atoms[0].k = 0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    s = m05();
    s.down_atoms[0].rate = -0.5;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    s = mg();
    s.geo_tail->a = 1.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    s = mg();
    s.geo_tail->c = 0.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    s = mg();
    s.down_atoms = {{2, 0.1}};  // collides with tail support {1, 2, ...}
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    CHECK_THROWS_AS(phi(m05(), -0.1), std::invalid_argument);
}

TEST_CASE("tail mass helpers") {
    ChainSpec s = mg();
    CHECK(close(s.down_rate(), 0.5, 1e-15));
    CHECK(close(s.down_rate_at(3), 0.25 * 0.25, 1e-16));
    // sum_{j >= k} c a^(j-k0) = c a^(k-k0) / (1-a)
    CHECK(close(s.down_tail_from(4), 0.25 * 0.125 * 2.0, 1e-16));
    ChainSpec x = mixed();
    CHECK(close(x.down_tail_from(1), x.down_rate(), 1e-15));
    CHECK(close(x.down_rate_at(2), 0.0, 0.0));
    CHECK(close(x.down_tail_from(5), 0.15 * 0.6 / (1.0 - 0.6), 1e-14));
}
