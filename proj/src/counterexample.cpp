#include "plap/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include "plap/errors.hpp"

namespace plap {

namespace {

// max over lateral nodes at level j of |a - b|.
double level_gap(const ScalarField& a, const ScalarField& b, int j) {
    double m = 0;
    for (int i = 0; i < a.grid.nx(); ++i) m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    return m;
}

double level_gap_to_datum(const ScalarField& a, const std::vector<double>& datum, int j) {
    double m = 0;
    for (int i = 0; i < a.grid.nx(); ++i) m = std::max(m, std::abs(a.at(i, j) - datum[i]));
    return m;
}

template <class Gap>
SandwichCheck band_check(const SlabGrid& g, int level, double lo, double hi, double bound, Gap gap) {
    SandwichCheck c;
    c.level = level;
    c.z_lo = lo;
    c.z_hi = hi;
    c.bound = bound;
    for (int j = 1; j <= g.nz(); ++j) {
        if (!(g.z[j] > lo && g.z[j] < hi)) continue;
        c.worst = std::max(c.worst, gap(j));
        c.points += g.nx();
    }
    return c;
}

}  // namespace

CounterexampleReport assemble_counterexample(const CounterexampleOptions& opt) {
    if (opt.levels < 1) throw PreconditionError("levels >= 1 required");
    if (opt.levels > 4) throw PreconditionError("levels <= 4 required");
    if (!(opt.p > 2)) throw RegimeError("counterexample needs p > 2");
    if (opt.nx % 2) throw PreconditionError("nx must be even");

    CounterexampleReport r;
    r.plan = gen_lacunary(opt.levels);
    const BigInt finest = r.plan.T.back();
    if (finest * opt.min_nodes_per_period > BigInt(opt.nx))
        throw ResolutionError("level overflow: T_levels * " + std::to_string(opt.min_nodes_per_period) +
                              " exceeds the lateral resolution");
    r.alpha = 1 - 2 / opt.p;
    r.coeffs = opt.variant == DampingVariant::PositiveVanishing ? vanishing_coefficients(opt.levels)
                                                                 : divergent_coefficients(opt.levels);

    const Geometry geo{2, 1, opt.p};
    const SlabGrid psi_grid = SlabGrid::layered(geo, 1.0, opt.psi_nx, 4.0, opt.psi_nz, 1.0 / opt.psi_nx);
    const PsiResult psi = build_psi(psi_grid, opt.psi_t, TiltedNorm{}, 1.0 / 128, opt.solver);
    r.solves.push_back(psi.report);
    const PeriodicTrace tr = trace_at(psi.field, opt.wave_height, psi.xi_far);
    r.wave_scale = std::min(1.0, 0.5 / (tr.sup() + tr.lipschitz()));
    const double scale = r.wave_scale;
    r.wave = sample_wave([&](double x) { return scale * tr(x); }, opt.nx, "pde-trace");
    r.b_bar = r.wave.b_bar;

    const DampingResult damp = build_damping(r.wave, r.plan, r.coeffs, opt.variant);
    for (int J = 1; J <= opt.levels; ++J) {
        DampingResult head = damp;
        head.sigma.resize(J);
        r.median_tail_oscillation.push_back(divergence_statistics(head, std::abs(r.b_bar) / 4).rows[0].median_oscillation);
    }

    const SlabGrid grid = SlabGrid::layered(geo, 1.0, opt.nx, 4.0, opt.nz, opt.hz_min);
    std::vector<ScalarField> ext;
    for (int j = 1; j <= opt.levels; ++j) {
        const std::vector<double>& sig = damp.sigma[j - 1];
        const int N = opt.nx;
        Datum datum = [&sig, N](double x) {
            const long k = std::lround((x + 0.5) * N);
            return sig[static_cast<std::size_t>(((k % N) + N) % N)];
        };
        SolveReport rep;
        ext.push_back(solve(grid, datum, TiltedNorm{}, opt.solver, &rep));
        r.solves.push_back(rep);
        double dsup = 0, esup = 0;
        for (double v : sig) dsup = std::max(dsup, std::abs(v));
        for (double v : ext.back().values) esup = std::max(esup, std::abs(v));
        r.datum_sup.push_back(dsup);
        r.extension_sup.push_back(esup);
        r.max_principle_excess = std::max(r.max_principle_excess, esup - dsup);
    }

    const int L = opt.levels;
    const ScalarField& full = ext.back();
    // h_l: lowest level above which consecutive extensions agree to 2^-(l+1).
    r.heights.assign(L, 0.0);
    for (int l = 1; l < L; ++l) {
        const double tol = std::ldexp(1.0, -(l + 1));
        double h = 0;
        for (int j = grid.nz(); j >= 1; --j)
            if (level_gap(ext[l], ext[l - 1], j) >= tol) {
                h = grid.z[j];
                break;
            }
        r.heights[l - 1] = h;
    }
    for (int l = 1; l < L; ++l) {
        const double h = r.heights[l - 1];
        const double a_next = std::abs(r.coeffs.a[l]);
        const auto& sig_l = damp.sigma[l - 1];
        r.step.push_back(band_check(grid, l, h, grid.H + 1, std::ldexp(1.0, -(l + 1)),
                                    [&](int j) { return level_gap(ext[l], ext[l - 1], j); }));
        r.lower.push_back(band_check(grid, l, 0, h, std::ldexp(1.0, -(l + 1)) + a_next,
                                     [&](int j) { return level_gap_to_datum(ext[l], sig_l, j); }));
        r.limit.push_back(band_check(grid, l, h, grid.H + 1, std::ldexp(1.0, -l),
                                     [&](int j) { return level_gap(full, ext[l - 1], j); }));
        r.band.push_back(band_check(grid, l, r.heights[l], h,
                                    std::ldexp(1.0, -(l + 1)) + std::ldexp(1.0, -l) + a_next,
                                    [&](int j) { return level_gap_to_datum(full, sig_l, j); }));

        const double g0 = level_gap(ext[l], ext[l - 1], 1);
        double hd = 0;
        for (int j = 1; j <= grid.nz(); ++j)
            if (level_gap(ext[l], ext[l - 1], j) >= 0.5 * g0) hd = grid.z[j];
        r.decay_height.push_back(hd);
        r.empirical_A.push_back(hd * std::pow(static_cast<double>(r.plan.T[l]), r.alpha));
    }
    r.min_margin = 1e300;
    for (const auto* fam : {&r.step, &r.lower, &r.limit, &r.band})
        for (const auto& c : *fam) r.min_margin = std::min(r.min_margin, c.margin());
    if (r.min_margin == 1e300) r.min_margin = 0;
    return r;
}

}  // namespace plap
