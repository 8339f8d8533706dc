#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "plap/errors.hpp"
#include "plap/measure.hpp"
#include "plap/solver.hpp"

using namespace plap;
using Catch::Approx;

namespace {

const double kPi = std::numbers::pi;

SlabGrid small_grid(double p, int nx = 48, int nz = 48) {
    return SlabGrid::layered(Geometry{2, 1, p}, 1.0, nx, 4.0, nz, 1.0 / 64);
}

double bump(double x) { return plateau_bump(x, 0.25); }

double max_abs_diff(const ScalarField& a, const ScalarField& b, double scale_b = 1) {
    double m = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - scale_b * b.values[i]));
    return m;
}

}  // namespace

TEST_CASE("grid construction and validation") {
    const SlabGrid g = SlabGrid::graded(Geometry{2, 1, 3}, 1.0, 64, 4.0, 32, 1e-3);
    CHECK(g.z.front() == 0.0);
    CHECK(g.z.back() == 4.0);
    CHECK(g.h() == Approx(1e-3).epsilon(0.05));
    CHECK_NOTHROW(validate(g));
    CHECK_THROWS_AS(validate(SlabGrid::uniform(Geometry{2, 1, 3}, 1.0, 16, 2.0, 8)), DomainError);
    CHECK_THROWS_AS(validate(SlabGrid::uniform(Geometry{4, 2, 3}, 1.0, 16, 4.0, 8)), RegimeError);
    const SlabGrid l = SlabGrid::layered(Geometry{2, 1, 3}, 1.0, 64, 4.0, 32, 1e-3);
    for (int i = 0; i < l.nx(); ++i) CHECK(l.hx(i) == Approx(1.0 / 64));
}

TEST_CASE("zero datum gives the zero field") {
    const ScalarField f = solve(small_grid(3), [](double) { return 0.0; }, TiltedNorm{});
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("constant datum gives the constant field") {
    for (TopClosure top : {TopClosure::Free, TopClosure::DatumMean}) {
        SolverOptions opt;
        opt.top = top;
        const ScalarField f = solve(small_grid(3), [](double) { return 1.0; }, TiltedNorm{}, opt);
        for (double v : f.values) CHECK(v == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("harmonic extension of a single Fourier mode") {
    const SlabGrid g = SlabGrid::layered(Geometry{2, 1, 2}, 1.0, 128, 4.0, 160, 1.0 / 256);
    SolverOptions opt;
    opt.top = TopClosure::DatumMean;
    const ScalarField f = solve(g, [](double x) { return std::cos(2 * kPi * x); }, TiltedNorm{}, opt);
    for (double x : {0.0, 0.125, 0.3}) {
        const double exact = std::exp(-2 * kPi * 0.5) * std::cos(2 * kPi * x);
        if (std::abs(exact) > 1e-3) CHECK(f.sample(x, 0.5) == Approx(exact).epsilon(0.02));
    }
    const auto rows = oscillation_profile(f);
    for (const auto& r : rows)
        if (r.height > 0.05 && r.height < 1.5) {
            const double exact = 2 * std::exp(-2 * kPi * r.height);
            CHECK(r.max - r.min == Approx(exact).epsilon(0.02));
        }
}

TEST_CASE("energy decreases within every continuation stage") {
    SolveReport rep;
    solve(small_grid(3), bump, TiltedNorm{}, {}, &rep);
    REQUIRE(rep.energy_history.size() >= 2);
    for (std::size_t i = 1; i < rep.energy_history.size(); ++i)
        if (rep.stage_of_iter[i] == rep.stage_of_iter[i - 1])
            CHECK(rep.energy_history[i] <= rep.energy_history[i - 1] * (1 + 1e-14));
    CHECK(rep.residual <= 1e-9);
    CHECK(rep.eps_final <= 1e-8 * rep.lipschitz_scale * (1 + 1e-12));
}

TEST_CASE("solutions respect the datum bounds") {
    for (double p : {2.0, 3.0, 4.5}) {
        const ScalarField f = solve(small_grid(p), bump, TiltedNorm{});
        for (double v : f.values) {
            CHECK(v >= -1e-9);
            CHECK(v <= 1 + 1e-9);
        }
    }
}

TEST_CASE("comparison principle for ordered data") {
    const SlabGrid g = small_grid(3);
    const Datum lo = bump;
    const Datum hi = [](double x) { return bump(x) + 0.1 * (1 + std::cos(2 * kPi * x)); };
    const ScalarField a = solve(g, lo, TiltedNorm{}), b = solve(g, hi, TiltedNorm{});
    CHECK(comparison_defect(a, b) <= 10 * 1e-9);
}

TEST_CASE("solutions scale with the datum") {
    const SlabGrid g = small_grid(3);
    const ScalarField u = solve(g, bump, TiltedNorm{});
    for (double c : {0.25, 3.0}) {
        const ScalarField v = solve(g, [c](double x) { return c * bump(x); }, TiltedNorm{});
        CHECK(max_abs_diff(v, u, c) <= 1e-6 * c);
    }
}

TEST_CASE("tilted norm solve stays within the datum bounds") {
    const SlabGrid g = small_grid(3);
    const ScalarField f = solve(g, bump, TiltedNorm{{0.2, 0.3}, 3.0});
    for (double v : f.values) {
        CHECK(v >= -1e-9);
        CHECK(v <= 1 + 1e-9);
    }
}

TEST_CASE("sampling is periodic in the lateral variable") {
    const ScalarField f = solve(small_grid(3), bump, TiltedNorm{});
    for (double x : {-0.37, 0.0, 0.21})
        for (double z : {0.1, 0.7}) {
            CHECK(f.sample(x + 1, z) == Approx(f.sample(x, z)).margin(1e-15));
            CHECK(f.sample(x - 2, z) == Approx(f.sample(x, z)).margin(1e-15));
        }
}

TEST_CASE("oscillation is monotone in height") {
    for (double p : {2.0, 3.0}) {
        const ScalarField f = solve(small_grid(p), bump, TiltedNorm{});
        const auto rows = oscillation_profile(f);
        CHECK(oscillation_monotonicity_defect(rows) <= 10 * 1e-9);
    }
    std::vector<OscillationRow> flat{{0, 1, 1, 1}, {1, 1, 1, 1}};
    CHECK(oscillation_monotonicity_defect(flat) == 0.0);
}

TEST_CASE("Harnack ratio is stable under refinement") {
    const Datum d = [](double x) { return 1 + bump(x); };
    const double r1 = harnack_ratio(solve(small_grid(3, 48, 48), d, TiltedNorm{}), 0.0, 0.5, 0.125);
    const double r2 = harnack_ratio(solve(small_grid(3, 96, 96), d, TiltedNorm{}), 0.0, 0.5, 0.125);
    CHECK(r1 >= 1.0);
    CHECK(r2 == Approx(r1).epsilon(0.05));
}

TEST_CASE("Psi construction diagnostics") {
    const SlabGrid g = SlabGrid::layered(Geometry{2, 1, 3}, 1.0, 256, 4.0, 64, 1.0 / 256);
    const PsiResult r = build_psi(g, 1.0 / 16, TiltedNorm{});
    CHECK(std::abs(r.b_bar) >= 1e-3);
    CHECK(oscillation_monotonicity_defect(r.oscillation) <= 10 * 1e-9);
    CHECK(r.ratio > 0);
    CHECK(r.ratio < 1);
    CHECK_THROWS_AS(build_psi(g, 0.2, TiltedNorm{}), DomainError);
    CHECK_THROWS_AS(build_psi(g, 1.0 / 64, TiltedNorm{}), ResolutionError);
}

TEST_CASE("harmonic measure preconditions and cap") {
    const SlabGrid g = SlabGrid::uniform(Geometry{2, 1, 3}, 8.0, 64, 32.0, 32);
    CHECK_THROWS_AS(harmonic_measure(g, 0.2), ResolutionError);
    CHECK_THROWS_AS(harmonic_measure(g, 3.0), DomainError);
    const HarmonicMeasure cap = harmonic_measure(g, 4.0);
    CHECK(cap.bilinear == Approx(1.0).margin(1e-9));
    const HarmonicMeasure m = harmonic_measure(g, 1.0);
    CHECK(m.bilinear > 0);
    CHECK(m.bilinear < 1);
}

TEST_CASE("homogeneity fit") {
    std::vector<std::pair<double, double>> ray, flat;
    for (int i = 0; i < 7; ++i) {
        const double y = 0.25 * std::pow(2.0, 0.5 * i);
        ray.emplace_back(y, y / (y * y));  // x2/|x|^2 on the ray x1 = 0
        flat.emplace_back(y, 3.0);
    }
    CHECK(fit_homogeneity(ray).sigma == Approx(1.0).epsilon(1e-12));
    CHECK(fit_homogeneity(ray).rms_residual <= 1e-12);
    CHECK(fit_homogeneity(flat).sigma == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(fit_homogeneity({{1, 1}, {1.2, 1}, {1.5, 1}, {1.6, 1}, {1.9, 1}}), DegenerateFitError);
    CHECK_THROWS_AS(fit_homogeneity({{1, 1}, {2, 1}, {4, 1}, {8, 1}}), PreconditionError);
}

TEST_CASE("convexity diagnostic on the Poisson kernel and on noise") {
    const SlabGrid g = SlabGrid::uniform(Geometry{2, 1, 2}, 4.0, 128, 16.0, 512);
    ScalarField pk{g, std::vector<double>(static_cast<std::size_t>(g.nx()) * (g.nz() + 1))};
    ScalarField noise = pk;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0, 1);
    for (int j = 0; j <= g.nz(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double x = g.x[i], z = g.z[j];
            pk.at(i, j) = (j == 0) ? 0.0 : z / (x * x + z * z);
            noise.at(i, j) = ud(rng);
        }
    const auto a = convexity_diagnostic(pk, {0.5, 1.0, 2.0}, 1.5, 1.5);
    for (const auto& r : a) {
        CHECK(r.set_size > 0);
        CHECK(r.violations == 0);
    }
    const auto b = convexity_diagnostic(noise, {0.5}, 1.5, 1.5);
    CHECK(b[0].violations > 0);
}

TEST_CASE("grid dump header and layout") {
    const SlabGrid g = small_grid(3, 8, 8);
    const ScalarField f = solve(g, bump, TiltedNorm{});
    std::ostringstream os;
    write_grid_dump(os, f, 1e-8, 1e-9);
    std::istringstream is(os.str());
    std::string key;
    is >> key;
    CHECK(key == "n");
    CHECK(os.str().find(" nx 8 ") != std::string::npos);
    CHECK(os.str().find(" nz 8 ") != std::string::npos);
}
