#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plap/counterexample.hpp"
#include "plap/errors.hpp"
#include "plap/gapseries.hpp"

using namespace plap;
using Catch::Approx;

namespace {

std::vector<long long> as_ll(const LacunaryPlan& p) {
    std::vector<long long> v;
    for (const auto& t : p.T) v.push_back(static_cast<long long>(t));
    return v;
}

}  // namespace

TEST_CASE("lacunary plans") {
    CHECK(as_ll(gen_lacunary(1)) == std::vector<long long>{1});
    CHECK(as_ll(gen_lacunary(2)) == std::vector<long long>{1, 6});
    CHECK(as_ll(gen_lacunary(3)) == std::vector<long long>{1, 6, 216});
    CHECK(as_ll(gen_lacunary(4)) == std::vector<long long>{1, 6, 216, 135000});
    for (int J = 1; J <= 9; ++J) {
        const LacunaryPlan p = gen_lacunary(J);
        CHECK(plan_admissible(p));
        CHECK(ratio_bound_holds(p));
    }
    CHECK_THROWS_AS(gen_lacunary(0), PreconditionError);
    CHECK_THROWS_AS(gen_lacunary(14), OverflowError);
    LacunaryPlan bad;
    bad.T = {1, 5};
    CHECK_FALSE(plan_admissible(bad));
}

TEST_CASE("wave sampling is exact on the lattice") {
    const BoundaryWave w = cosine_wave(64);
    CHECK(w.b_bar == Approx(0.125).margin(1e-15));
    // psi(T x_i) at T = 3 against direct evaluation
    for (int i = 0; i < 64; ++i) {
        const double x = -0.5 + i / 64.0;
        CHECK(w.psi_scaled(3, i) == Approx(std::cos(2 * std::numbers::pi * 3 * x) / 16).margin(1e-15));
    }
    // The cosine default exceeds the sup + Lip <= 1/2 normalization (3/16 + 2pi/16).
    CHECK(w.sup_norm() == Approx(3.0 / 16).epsilon(1e-12));
    CHECK(w.lipschitz() == Approx(2 * std::numbers::pi / 16).epsilon(5e-3));
    const BoundaryWave t = triangle_wave(64);
    CHECK(t.b_bar == Approx(0.125).margin(1e-15));
    CHECK(t.sup_norm() + t.lipschitz() <= 0.5);
}

TEST_CASE("quasi-orthogonality on the test waves") {
    const LacunaryPlan plan = gen_lacunary(3);
    const int N = 1 << 16;
    const BoundaryWave c = cosine_wave(N), t = triangle_wave(N);
    for (int j = 2; j <= 3; ++j)
        for (int m = 1; m < j; ++m) {
            const OrthogonalityResult rc = quasi_orthogonality(c, plan, m, j);
            CHECK(std::abs(rc.integral) <= 1e-15);
            const OrthogonalityResult rt = quasi_orthogonality(t, plan, m, j);
            CHECK(std::abs(rt.integral) <= rt.bound + 1e-6);
        }
    CHECK(quasi_orthogonality(t, plan, 1, 2).bound == Approx(1.0 / 6));
    const OrthogonalityResult d = quasi_orthogonality(c, plan, 2, 2);
    CHECK(d.diagonal);
    CHECK(d.bound == 0.0);
    CHECK(d.integral == Approx(1.0 / 512).epsilon(1e-12));
    CHECK_THROWS_AS(quasi_orthogonality(cosine_wave(1024), plan, 1, 3), ResolutionError);
}

TEST_CASE("coefficient sequences") {
    const CoefficientSequence d = divergent_coefficients(4000);
    const auto sums = d.partial_sums();
    double hi_tail = -1, lo_tail = 2;
    for (std::size_t m = 0; m < sums.size(); ++m) {
        CHECK(sums[m] <= 1.0 + 1.0 / (m + 1) + 1e-12);
        CHECK(sums[m] >= -1.0 / (m + 1) - 1e-12);
        if (m >= 100) {
            hi_tail = std::max(hi_tail, sums[m]);
            lo_tail = std::min(lo_tail, sums[m]);
        }
    }
    CHECK(hi_tail >= 0.99);
    CHECK(lo_tail <= 0.01);
    CHECK(d.chi_hat() < std::numbers::pi / std::sqrt(6.0));
    const CoefficientSequence v = vanishing_coefficients(4);
    CHECK(v.a[3] == -1.0 / 16);
}

TEST_CASE("maximal statistics") {
    const int N = 1 << 12;
    const BoundaryWave w = cosine_wave(N);
    const LacunaryPlan plan = gen_lacunary(3);
    CoefficientSequence zero;
    zero.a = {0, 0, 0};
    CHECK(maximal_stats(w, plan, zero).weak_constant == 0.0);

    CoefficientSequence one;
    one.a = {0.7};
    const MaximalStats s = maximal_stats(w, plan, one);
    // direct: s* = 0.7 |cos|/16, so lambda^2 |{s* > lambda}| / 0.49 = max_c c^2/256 * |{|cos| > c}|
    double oracle = 0;
    for (int k = 1; k <= 4000; ++k) {
        const double c = k / 4000.0;
        oracle = std::max(oracle, c * c / 256 * (2 * std::acos(c) / std::numbers::pi));
    }
    CHECK(s.weak_constant == Approx(oracle).epsilon(5e-3));
    CHECK(s.weak_constant <= 0.25);

    CoefficientSequence harm;
    for (int j = 1; j <= 10; ++j) harm.a.push_back(1.0 / j);
    const MaximalStats h = maximal_stats(cosine_wave(1 << 16), gen_lacunary(10), harm);
    CHECK(h.weak_constant <= 50);
    CHECK(h.l2_ratio <= 3.0);
}

TEST_CASE("damping sequences keep their ratio bounds") {
    const int N = 1 << 14;
    // An oversized wave so that the stopping families are not empty.
    const BoundaryWave big = sample_wave([](double x) { return 1.5 + 1.5 * std::cos(2 * std::numbers::pi * x); }, N);
    for (auto variant : {DampingVariant::BoundedDivergent, DampingVariant::PositiveVanishing}) {
        const CoefficientSequence c = variant == DampingVariant::PositiveVanishing ? vanishing_coefficients(5)
                                                                                 : divergent_coefficients(5);
        const DampingResult d = build_damping(big, gen_lacunary(5), c, variant);
        for (double v : d.L[0]) CHECK(v == 1.0);
        for (std::size_t j = 1; j < d.L.size(); ++j)
            for (int i = 0; i < N; ++i) {
                const double r = d.L[j][i] / d.L[j - 1][i];
                CHECK(r >= 0.5);
                CHECK(r <= 1.0);
            }
        for (const auto& rec : d.levels) CHECK(rec.lipschitz_over_T <= 40);
    }
    const DampingResult v = build_damping(big, gen_lacunary(4), vanishing_coefficients(4),
                                          DampingVariant::PositiveVanishing);
    int flagged = 0;
    for (const auto& rec : v.levels) flagged += rec.family_k + rec.family_f + rec.family_h;
    CHECK(flagged > 0);
}

TEST_CASE("positive variant stays positive") {
    const BoundaryWave w = cosine_wave(1 << 16);
    const DampingResult d = build_damping(w, gen_lacunary(6), vanishing_coefficients(6),
                                          DampingVariant::PositiveVanishing);
    CHECK(d.positivity_violations == 0);
    for (double s : d.sigma[0]) {
        CHECK(s >= 7.0 / 8);
        CHECK(s <= 9.0 / 8);
    }
    CHECK_THROWS_AS(build_damping(w, gen_lacunary(3), divergent_coefficients(3), DampingVariant::PositiveVanishing),
                    PreconditionError);
}

TEST_CASE("damping is deterministic") {
    const BoundaryWave big = sample_wave([](double x) { return 1.5 + 1.5 * std::cos(2 * std::numbers::pi * x); }, 4096);
    const auto a = build_damping(big, gen_lacunary(4), vanishing_coefficients(4), DampingVariant::PositiveVanishing);
    const auto b = build_damping(big, gen_lacunary(4), vanishing_coefficients(4), DampingVariant::PositiveVanishing);
    CHECK(a.L == b.L);
    CHECK(a.sigma == b.sigma);
}

TEST_CASE("divergence statistics") {
    const BoundaryWave w = cosine_wave(1 << 12);
    const auto one = build_damping(w, gen_lacunary(1), divergent_coefficients(1), DampingVariant::BoundedDivergent);
    const DivergenceReport r1 = divergence_statistics(one, w.b_bar / 4);
    CHECK(r1.rows[0].median_oscillation == 0.0);
    CHECK(r1.rows[0].fraction_above == 0.0);

    double prev = 1e9;
    for (int J = 2; J <= 6; ++J) {
        const auto v = build_damping(w, gen_lacunary(J), vanishing_coefficients(J), DampingVariant::PositiveVanishing);
        const double med = divergence_statistics(v, 0).final_quantiles[2];
        CHECK(med < prev);
        prev = med;
    }
}

TEST_CASE("counterexample preconditions") {
    CounterexampleOptions o;
    o.levels = 5;
    CHECK_THROWS_AS(assemble_counterexample(o), PreconditionError);
    o.levels = 3;
    o.p = 2;
    CHECK_THROWS_AS(assemble_counterexample(o), RegimeError);
    o.p = 3;
    o.nx = 864;
    CHECK_THROWS_AS(assemble_counterexample(o), ResolutionError);
}
