#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "plap/aharmonic.hpp"
#include "plap/errors.hpp"
#include "plap/sampling.hpp"

using namespace plap;
using Catch::Approx;

TEST_CASE("q calculus at axis-aligned vectors") {
    const TiltedNorm tn{{0.0, 0.3}, 3.0};
    const std::array<double, 2> e2{0.0, 1.0};
    const QCalculus q = q_calculus(tn, e2);
    CHECK(q.q == Approx(1.3));
    CHECK(q.D2q[0] == Approx(1.0));
    CHECK(q.D2q[1] == 0.0);
    CHECK(q.D2q[3] == 0.0);
    const TiltedNorm zero{{0.0, 0.0}, 3.0};
    const std::array<double, 2> e1{1.0, 0.0};
    const QCalculus q1 = q_calculus(zero, e1);
    CHECK(q1.Dq[0] == 1.0);
    CHECK(q1.Dq[1] == 0.0);
    const std::array<double, 2> origin{0.0, 0.0};
    CHECK_THROWS_AS(q_calculus(zero, origin), DomainError);
}

TEST_CASE("q is one-homogeneous and its Hessian annihilates eta") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 50; ++i) {
        TiltedNorm tn{{0.2 * nd(rng), 0.2 * nd(rng), 0.2 * nd(rng)}, 3.0};
        std::array<double, 3> eta{nd(rng), nd(rng), nd(rng)};
        std::array<double, 3> eta2{2.5 * eta[0], 2.5 * eta[1], 2.5 * eta[2]};
        const QCalculus a = q_calculus(tn, eta), b = q_calculus(tn, eta2);
        CHECK(b.q == Approx(2.5 * a.q).epsilon(1e-14));
        for (int r = 0; r < 3; ++r) {
            double row = 0;
            for (int c = 0; c < 3; ++c) row += a.D2q[r * 3 + c] * eta[c];
            CHECK(std::abs(row) <= 1e-14);
        }
    }
}

TEST_CASE("zero tilt reduces to the p-Laplacian") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ud(0.1, 1.4), dd(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Geometry g = random_geometry(rng, 5);
        const AHarmonicProfile prof{g, dd(rng), compute_exponents(g).chi + dd(rng)};
        const double th = ud(rng);
        const ETerms e = divergence_tilted(0, 0, prof, std::cos(th), std::sin(th),
                                           Orientation::worst_plus());
        CHECK(e.E1 == 0.0);
        CHECK(e.E2 == 0.0);
        CHECK(e.E3 == 0.0);
        CHECK(e.E4 == 0.0);
        CHECK(e.total == divergence_st(to_radial(prof), std::cos(th), std::sin(th)));
    }
}

TEST_CASE("tilted decomposition agrees with the half-space w-functions") {
    // a = (0,...,0,b), delta = 0: each E-term equals s(lambda+1) times its w-function.
    struct Case {
        int n;
        double p, lambda, b;
    };
    for (const Case& c : {Case{2, 3.0, 0.8, 0.3}, Case{3, 4.0, 2.0, -0.2}, Case{4, 3.5, 2.5, 0.4},
                          Case{2, 2.0, 1.0, -0.6}}) {
        const AHarmonicProfile prof{{c.n, c.n - 1, c.p}, 0.0, c.lambda};
        for (double w : {0.05, 0.3, 0.64, 0.95}) {
            const double s = std::sqrt(w), t = std::sqrt(1 - w), scale = s * (c.lambda + 1);
            const ETerms e = divergence_tilted(0, std::abs(c.b), prof, s, t,
                                               {0, c.b > 0 ? 1.0 : -1.0});
            const WFunctions f = halfspace_w_functions(c.p, c.n, c.lambda, c.b, w);
            CHECK(e.main == Approx(scale * f.G).epsilon(1e-12).margin(1e-13));
            CHECK(e.E1 == Approx(scale * f.F1).epsilon(1e-12).margin(1e-13));
            CHECK(e.E2 == Approx(scale * f.F2).epsilon(1e-12).margin(1e-13));
            CHECK(e.E3 == Approx(scale * f.F3).epsilon(1e-12).margin(1e-13));
            CHECK(e.E4 == Approx(scale * f.F4).epsilon(1e-12).margin(1e-13));
        }
    }
}

TEST_CASE("finite-difference oracle matches the tilted decomposition") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.25, 1.3), dd(0.0, 0.5);
    for (int i = 0; i < 50; ++i) {
        const Geometry g = random_geometry(rng, 5);
        const AHarmonicProfile prof{g, dd(rng), compute_exponents(g).chi + dd(rng)};
        TiltedNorm tn{std::vector<double>(g.n), g.p};
        for (double& v : tn.a) v = 0.15 * nd(rng);
        std::vector<double> x(g.n);
        for (double& v : x) v = nd(rng);
        double s2 = 0;
        for (int j = g.k; j < g.n; ++j) s2 += x[j] * x[j];
        if (s2 < 0.05) continue;
        const ETerms e = divergence_tilted_at(tn, prof, x);
        const double fd = fd_tilted_oracle(tn, prof, x, 1e-4);
        const double scale = std::abs(e.main) + std::abs(e.E1) + std::abs(e.E2) +
                             std::abs(e.E3) + std::abs(e.E4);
        CHECK(std::abs(fd - e.total) <= 1e-3 * scale);
    }
}

TEST_CASE("tilted oracle with zero tilt equals the plain oracle") {
    const AHarmonicProfile prof{{3, 1, 3.0}, 0.2, 0.7};
    const TiltedNorm tn{{0, 0, 0}, 3.0};
    const std::array<double, 3> x{0.8, 0.1, 0.6};
    CHECK(std::abs(fd_tilted_oracle(tn, prof, x, 1e-4) -
                   fd_divergence_oracle(to_radial(prof), x, 1e-4)) <= 1e-12);
}

TEST_CASE("tilted oracle sign at a half-plane point") {
    const AHarmonicProfile prof{{2, 1, 2.0}, 0.0, 1.0};
    const TiltedNorm tn{{0.0, -0.5}, 2.0};
    const std::array<double, 2> x{0.6, 0.8};
    // w = s^2 = 0.64; b[2w - 3 + (4w - 3)b] = 0.75
    const WFunctions f = halfspace_w_functions(2.0, 2, 1.0, -0.5, 0.64);
    CHECK(f.F1 + f.F2 + f.F3 == Approx(0.75).epsilon(1e-13));
    CHECK(fd_tilted_oracle(tn, prof, x, 1e-4) > 0);
}

TEST_CASE("obstruction without the bump exponent") {
    // delta = 0, k <= n-2: near the plane the sign depends on the direction of a''.
    const AHarmonicProfile prof{{3, 1, 3.0}, 0.0, 1.0};
    for (double s : {1e-3, 1e-4, 1e-5}) {
        const double t = std::sqrt(1 - s * s);
        CHECK(divergence_tilted(0, 0.1, prof, s, t, {0, 1}).total < 0);
        CHECK(divergence_tilted(0, 0.1, prof, s, t, {0, 0}).total > 0);
    }
}

TEST_CASE("half-space w-functions at sample points") {
    const WFunctions f0 = halfspace_w_functions(4.0, 3, 2.0, 0.1, 0.0);
    const WFunctions f1 = halfspace_w_functions(4.0, 3, 2.0, 0.1, 1.0);
    CHECK(f0.G == Approx(6.0));
    CHECK(f1.G == Approx(4.0));
    CHECK(f0.F1 == Approx(-0.3));
    CHECK(f0.F4 == 0.0);
    CHECK_THROWS_AS(halfspace_w_functions(4.0, 3, 2.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(halfspace_w_functions(4.0, 3, 2.0, 0.1, 1.5), DomainError);
    for (double b : {-0.7, 0.4})
        for (double w : {0.0, 0.3, 1.0}) {
            const WFunctions h = halfspace_w_functions(2.0, 2, 1.0, b, w);
            CHECK(h.G == Approx(0.0).margin(1e-15));
            CHECK(h.F4 == 0.0);
            CHECK(h.F1 + h.F2 + h.F3 == Approx(b * (2 * w - 3 + (4 * w - 3) * b)).epsilon(1e-13));
        }
}

TEST_CASE("harmonic half-plane sign table is exact") {
    const std::vector<double> ws = w_grid(10000, 2);
    for (int i = 1; i <= 9; ++i) {
        const double b = 0.1 * i;
        for (double w : ws) {
            CHECK(-b * (2 * w - 3 + (4 * w - 3) * -b) > 0);
            CHECK(b * (2 * w - 3 + (4 * w - 3) * b) < 0);
            const WFunctions pos = halfspace_w_functions(2.0, 2, 1.0, -b, w);
            const WFunctions neg = halfspace_w_functions(2.0, 2, 1.0, b, w);
            CHECK(pos.F1 + pos.F2 + pos.F3 > 0);
            CHECK(neg.F1 + neg.F2 + neg.F3 < 0);
        }
    }
}

TEST_CASE("G reduces at lambda = n-1 and decreases in w") {
    for (int n = 3; n <= 20; ++n)
        for (double p : {3.0, 4.0, 6.0}) {
            const std::vector<double> ws = w_grid(2000, n);
            double prev = std::numeric_limits<double>::infinity();
            for (double w : ws) {
                const double g = halfspace_w_functions(p, n, n - 1.0, 0.1, w).G;
                CHECK(g == Approx(g_reduced(p, n, w)).epsilon(1e-12));
                CHECK(g_reduced_derivative(p, n, w) < 0);
                CHECK(g < prev);
                prev = g;
            }
        }
}

TEST_CASE("reduced derivative of F2+F3 matches finite differences") {
    for (int n : {3, 7, 25})
        for (double b : {0.05, 0.2}) {
            for (double w : {0.1, 0.5, 0.9}) {
                const double h = 1e-6;
                auto f23 = [&](double x) {
                    const WFunctions f = halfspace_w_functions(4.0, n, n - 1.0, b, x);
                    return (f.F2 + f.F3) / 3.0;
                };
                const double fd = (f23(w + h) - f23(w - h)) / (2 * h);
                CHECK(f23_derivative_reduced(n, b, w) == Approx(fd).epsilon(1e-6));
            }
        }
}

TEST_CASE("F2+F3 decreases from n0(b) on") {
    for (double b : {0.05, 0.1, 0.2}) {
        const int n0 = f23_negative_from(b, 200, 2000);
        CHECK(n0 >= 3);
        for (int n = n0; n <= 200; n += 7)
            for (double w : w_grid(500, n)) CHECK(f23_derivative_reduced(n, b, w) < 0);
    }
}

TEST_CASE("dimension scan finds a finite dimension") {
    const DimensionScanResult r = dimension_scan(0.1, 4.0, 1000);
    CHECK(r.n_prime >= 3);
    CHECK(r.n_prime <= 1000);
    CHECK(r.min_sum > 0);
    CHECK(r.min_sum_perturbed > 0);
    for (double w : w_grid(1000, r.n_prime))
        CHECK(halfspace_w_functions(4.0, r.n_prime, r.n_prime - 1.0, 0.1, w).F4 == 0.0);
    CHECK_THROWS_AS(dimension_scan(0.9, 4.0, 1000), PreconditionError);
    CHECK_THROWS_AS(dimension_scan(-0.1, 4.0, 1000), PreconditionError);
}

TEST_CASE("certified thresholds") {
    const Geometry g{3, 1, 3.0};
    const double delta = threshold_delta(g);
    CHECK(delta == Approx(0.75).epsilon(1e-14));
    const AHarmonicProfile prof{g, delta, compute_exponents(g).chi};
    const Thresholds th = subsolution_threshold(prof);
    // lambda_t = beta_t = 7/8: min term beta_t^3 delta beta = 0.2512, denominator (49/32)(100)(11/4)^2
    const double oracle = 0.25 * 2 * (343.0 / 512 * 0.75 * 0.5) / ((49.0 / 32) * 100 * (11.0 / 4) * (11.0 / 4));
    CHECK(th.general == Approx(oracle).epsilon(1e-13));
    CHECK(th.general == Approx(1.08e-4).epsilon(0.01));
    REQUIRE(th.line_case.has_value());
    CHECK_FALSE(th.half_plane.has_value());

    const AHarmonicProfile p4{{3, 1, 4.0}, 0.5, compute_exponents({3, 1, 4.0}).chi};
    CHECK(*subsolution_threshold(p4).line_case == Approx(2.0 / 300000).epsilon(1e-15));
    const AHarmonicProfile h2{{2, 1, 2.0}, 0.5, 1.0};
    CHECK(*subsolution_threshold(h2).half_plane == 0.0);
    CHECK_THROWS_AS(subsolution_threshold({g, 0.0, 0.5}), DomainError);
}

TEST_CASE("half the certified threshold passes the sphere check") {
    const Geometry g{3, 1, 3.0};
    const AHarmonicProfile prof{g, threshold_delta(g), compute_exponents(g).chi};
    const double a = 0.5 * subsolution_threshold(prof).general;
    const SphereCheck c = sphere_subsolution_check(prof, a, 10000);
    CHECK(c.passed);
    CHECK(measured_sharp_threshold(prof, 2000) >= a);
}

TEST_CASE("necessary condition for the half-plane Martin profile") {
    CHECK(necessary_condition_halfplane(0.0, 0.4));
    CHECK_FALSE(necessary_condition_halfplane(0.2, 0.0));
}
