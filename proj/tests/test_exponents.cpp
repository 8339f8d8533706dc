#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "plap/errors.hpp"
#include "plap/exponents.hpp"
#include "plap/sampling.hpp"

using namespace plap;
using Catch::Approx;

TEST_CASE("exponents at the coincident geometry n=3 k=1 p=3") {
    const ExponentSet e = compute_exponents({3, 1, 3.0});
    CHECK(e.beta == Approx(0.5).epsilon(1e-15));
    CHECK(e.chi == Approx(0.5).epsilon(1e-15));
    CHECK(e.chi_breve == Approx(0.5).epsilon(1e-15));
    CHECK(e.coincident);
    CHECK_FALSE(e.boundary);
}

TEST_CASE("half-plane exponents at p=3 follow the k=n-1 branches") {
    // (n+p-3)/(2p-3) = 2/3 and (n-1)/(p-1) = 1/2
    const ExponentSet e = compute_exponents({2, 1, 3.0});
    CHECK(e.beta == Approx(1.0));
    CHECK(e.chi == Approx(2.0 / 3.0));
    CHECK(e.chi_breve == Approx(0.5));
    CHECK_FALSE(e.coincident);
}

TEST_CASE("harmonic half-plane is the admitted boundary case") {
    const ExponentSet e = compute_exponents({2, 1, 2.0});
    CHECK(e.beta == 1.0);
    CHECK(e.boundary);
    CHECK(e.chi == Approx(1.0));
}

TEST_CASE("regime violations name the inequality") {
    CHECK_THROWS_WITH(compute_exponents({4, 1, 2.5}), Catch::Matchers::ContainsSubstring("p > n-k"));
    CHECK_THROWS_AS(compute_exponents({2, 1, 1.5}), RegimeError);
    CHECK_THROWS_AS(compute_exponents({3, 3, 4.0}), RegimeError);
    CHECK_THROWS_AS(compute_exponents({1, 1, 4.0}), RegimeError);
}

TEST_CASE("coefficients at a sample point") {
    const CoefficientTriple c = coefficients({3, 1, 3.0}, 1.0, 0.5);
    CHECK(c.A == Approx(1.5));
    CHECK(c.B == Approx(1.5));
    CHECK(c.C == Approx(0.0).margin(1e-15));
    const CoefficientTriple z = coefficients({3, 1, 3.0}, 0.5, 0.5);
    CHECK(z.A == Approx(0.0).margin(1e-15));
    CHECK(z.B == Approx(0.0).margin(1e-15));
}

TEST_CASE("root cancellation holds exactly in rational arithmetic") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        Geometry g = random_geometry(rng);
        // rational p with denominator 64 inside the admissible range
        const Rational p = Rational(static_cast<long long>(std::ceil(g.p * 64)), 64);
        g.p = static_cast<double>(p);
        const Rational beta = beta_of<Rational>(g.n, g.k, p);
        const auto r = stated_roots_t<Rational>(g.n, g.k, p);
        CHECK(coefficients_exact(g.n, g.k, p, r.a_first, beta).A == 0);
        CHECK(coefficients_exact(g.n, g.k, p, r.a_second, beta).A == 0);
        CHECK(coefficients_exact(g.n, g.k, p, r.b_first, beta).B == 0);
        CHECK(coefficients_exact(g.n, g.k, p, r.b_second, beta).B == 0);
        CHECK(coefficients_exact(g.n, g.k, p, Rational(7, 3), beta).C == 0);
    }
}

TEST_CASE("chi stays below k and above chi_breve") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 500; ++i) {
        const Geometry g = random_geometry(rng);
        const ExponentSet e = compute_exponents(g);
        CHECK(e.chi < g.k);
        CHECK(e.chi_breve <= e.chi);
        CHECK(e.beta > 0);
    }
}

TEST_CASE("p=n gives common roots plus and minus beta") {
    for (int n = 3; n <= 7; ++n) {
        for (int k = 1; k <= n - 2; ++k) {
            const Geometry g{n, k, static_cast<double>(n)};
            const double beta = beta_of<double>(n, k, g.p);
            const auto a = roots_A(g);
            const auto b = roots_B(g);
            CHECK(std::abs(a[0] + beta) <= 1e-12);
            CHECK(std::abs(a[1] - beta) <= 1e-12);
            CHECK(std::abs(b[0] + beta) <= 1e-12);
            CHECK(std::abs(b[1] - beta) <= 1e-12);
        }
    }
}

TEST_CASE("half-plane Martin exponent") {
    CHECK(martin_exponent_halfplane(2.0) == Approx(1.0).epsilon(1e-15));
    CHECK(martin_exponent_halfplane(3.0) == Approx(std::sqrt(3.0) / 3).epsilon(1e-14));
    CHECK(martin_exponent_halfplane(1e8) == Approx(1.0 / 3).epsilon(1e-6));
    CHECK_THROWS_AS(martin_exponent_halfplane(1.0), DomainError);
    for (int i = 0; i < 50; ++i) {
        const double p = 2.0 + 98.0 * (i + 1) / 50.0;
        const ExponentSet e = compute_exponents({2, 1, p});
        const double s = martin_exponent_halfplane(p);
        CHECK(e.chi_breve <= s);
        CHECK(s <= e.chi);
    }
}

TEST_CASE("compute_exponents is bitwise deterministic") {
    const ExponentSet a = compute_exponents({5, 2, 3.7});
    const ExponentSet b = compute_exponents({5, 2, 3.7});
    CHECK(std::memcmp(&a.chi, &b.chi, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.chi_breve, &b.chi_breve, sizeof(double)) == 0);
}

TEST_CASE("capacity energy follows the log law in the degenerate regime") {
    const Geometry g{3, 1, 2.0};
    const double e3 = capacity_energy(g, 1e-3), e6 = capacity_energy(g, 1e-6);
    CHECK(std::abs(e6 / e3 - 0.5) <= 1e-12);
    // 2 (ball B^1) * 2 pi (circle) / log(1000)
    CHECK(e3 == Approx(4 * std::numbers::pi / std::log(1000.0)).epsilon(1e-12));
    CHECK(capacity_energy(g, 0.0999) > capacity_energy(g, 0.01));
    CHECK_THROWS_AS(capacity_energy(g, 0.2), DomainError);
    CHECK_THROWS_AS(capacity_energy(g, 0.0), DomainError);
    // p > n-k: energy grows as r -> 0
    const Geometry h{3, 1, 3.0};
    CHECK(capacity_energy(h, 1e-6) > capacity_energy(h, 1e-3));
}
