#include "plap/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "plap/errors.hpp"

namespace plap {

namespace {

double smooth_step(double s) {  // 0 for s <= 0, 1 for s >= 1
    if (s <= 0) return 0;
    if (s >= 1) return 1;
    const double a = std::exp(-1 / s), b = std::exp(-1 / (1 - s));
    return a / (a + b);
}

double lateral_weight(const SlabGrid& g, int i) {
    const int nx = g.nx();
    return 0.5 * (g.hx(i) + g.hx((i + nx - 1) % nx));
}

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

}  // namespace

double plateau_bump(double x, double w) { return 1 - smooth_step((std::abs(x) - 0.5 * w) / (0.5 * w)); }

double mollified_indicator(double x, double r, double h) {
    return std::clamp((r - std::abs(x)) / h + 0.5, 0.0, 1.0);
}

HarmonicMeasure harmonic_measure(const SlabGrid& grid, double r, const SolverOptions& opt) {
    validate(grid);
    if (!(r > 0)) throw DomainError("r > 0 required");
    const double h = grid.h();
    if (r < 4 * h) throw ResolutionError("harmonic_measure requires r >= 4h");
    if (!(grid.H > 1)) throw DomainError("evaluation point lies above the slab");
    const bool capped = r >= 0.5 * grid.tau;
    if (!capped && !(r < 0.25 * grid.tau)) throw DomainError("0 < r < tau/4 violated");
    Datum datum = capped ? Datum([](double) { return 1.0; })
                         : Datum([r, h](double x) { return mollified_indicator(x, r, h); });
    HarmonicMeasure out;
    const ScalarField f = solve(grid, datum, TiltedNorm{}, opt, &out.report);
    out.nearest = f.nearest(0, 1);
    out.bilinear = f.sample(0, 1);
    return out;
}

HomogeneityFit fit_homogeneity(const std::vector<std::pair<double, double>>& samples) {
    if (samples.empty()) throw DegenerateFitError("no samples");
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0;
    for (const auto& [r, v] : samples) {
        if (!(r > 0) || !(v > 0)) throw DomainError("radii and values must be positive");
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    if (rmax < 2 * rmin) throw DegenerateFitError("radii span less than a factor 2");
    if (samples.size() < 5 || rmax < 8 * rmin)
        throw PreconditionError("fit needs >= 5 radii spanning a factor >= 8");
    const double m = static_cast<double>(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [r, v] : samples) {
        const double lx = std::log(r), ly = -std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    HomogeneityFit fit;
    fit.sigma = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - fit.sigma * sx) / m;
    fit.log_c = -icpt;
    double ss = 0;
    for (const auto& [r, v] : samples) {
        const double e = -std::log(v) - (icpt + fit.sigma * std::log(r));
        ss += e * e;
    }
    fit.rms_residual = std::sqrt(ss / m);
    return fit;
}

MartinFit martin_fit(double p, const MartinFitOptions& mo, const SolverOptions& opt) {
    const Geometry g{2, 1, p};
    const SlabGrid grid = SlabGrid::graded(g, mo.tau, mo.nx, 4 * mo.tau, mo.nz, mo.h_min);
    if (mo.bump_width < 8 * grid.h()) throw ResolutionError("bump width must span >= 8 cells");
    const double w = mo.bump_width;
    MartinFit out{{}, {}, solve(grid, [w](double x) {
                                    const double r = std::abs(x) / w;
                                    return r < 1 ? (1 - r * r) * (1 - r * r) : 0.0;
                                }, TiltedNorm{}, opt, nullptr), {}};
    for (int i = 0; i < mo.points; ++i) {
        const double y = mo.y_lo * std::pow(mo.y_hi / mo.y_lo, static_cast<double>(i) / (mo.points - 1));
        out.samples.emplace_back(y, out.field.sample(0, y));
    }
    out.fit = fit_homogeneity(out.samples);
    return out;
}

std::vector<OscillationRow> oscillation_profile(const ScalarField& field) {
    std::vector<OscillationRow> rows;
    const SlabGrid& g = field.grid;
    for (int j = 0; j <= g.nz(); ++j) {
        OscillationRow r{g.z[j], -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), field.level_mean(j)};
        for (int i = 0; i < g.nx(); ++i) {
            r.max = std::max(r.max, field.at(i, j));
            r.min = std::min(r.min, field.at(i, j));
        }
        rows.push_back(r);
    }
    return rows;
}

double oscillation_monotonicity_defect(const std::vector<OscillationRow>& rows) {
    double d = 0;
    for (std::size_t j = 1; j < rows.size(); ++j) {
        d = std::max(d, rows[j].max - rows[j - 1].max);
        d = std::max(d, rows[j - 1].min - rows[j].min);
    }
    return d;
}

DecayFit fit_decay(const std::vector<OscillationRow>& rows, double z_lo, double z_hi) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.height >= z_lo && r.height <= z_hi && r.max - r.min > 0)
            pts.emplace_back(std::log(r.height), std::log(r.max - r.min));
    if (pts.size() < 3) throw DegenerateFitError("too few heights with positive oscillation");
    const double m = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    // geometric decay per doubling from the chord between the end heights
    const double dlog = (pts.back().second - pts.front().second) / (pts.back().first - pts.front().first);
    return DecayFit{std::pow(2.0, dlog), -slope};
}

void write_profile_csv(std::ostream& os, const std::vector<OscillationRow>& rows) {
    os.precision(17);
    os << "height,max,min,mean\n";
    for (const auto& r : rows) os << r.height << ',' << r.max << ',' << r.min << ',' << r.mean << '\n';
}

double period_mean_at(const ScalarField& field, double z) {
    const SlabGrid& g = field.grid;
    long double s = 0;
    for (int i = 0; i < g.nx(); ++i) s += field.sample(g.x[i], z) * lateral_weight(g, i);
    return static_cast<double>(s / g.tau);
}

PsiResult build_psi(const SlabGrid& grid, double t, const TiltedNorm& tn, double s,
                    const SolverOptions& opt) {
    validate(grid);
    if (!(t > 0 && t <= 0.125 * grid.tau)) throw DomainError("0 < t <= tau/8 violated");
    double hmax = 0;
    for (int i = 0; i < grid.nx(); ++i)
        if (std::abs(grid.x[i]) <= t) hmax = std::max(hmax, grid.hx(i));
    if (hmax > t / 8) throw ResolutionError("grid must resolve the bump: h <= t/8");
    PsiResult out;
    out.field = solve(grid, [t](double x) { return plateau_bump(x, t); }, tn, opt, &out.report);
    out.t = t;
    out.s = s;
    out.xi = datum_mean(grid, [t](double x) { return plateau_bump(x, t); });
    out.mean_low = period_mean_at(out.field, s);
    out.mean_unit = period_mean_at(out.field, 1.0);
    // Far from the bottom the level mean is affine in z (the field is nearly
    // laterally constant there); its intercept is the value an unbounded
    // slab would decay to.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (int j = 0; j <= grid.nz(); ++j) {
        if (grid.z[j] < grid.tau) continue;
        const double zj = grid.z[j], yj = out.field.level_mean(j);
        sx += zj;
        sy += yj;
        sxx += zj * zj;
        sxy += zj * yj;
        m += 1;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.xi_far = (sy - slope * sx) / m;
    out.b_bar = out.xi - out.xi_far;
    out.ratio = out.mean_low / out.mean_unit;
    out.oscillation = oscillation_profile(out.field);
    return out;
}

double PeriodicTrace::operator()(double s) const {
    const double y = s - period * std::floor((s - x.front()) / period);  // into [x0, x0 + period)
    auto it = std::upper_bound(x.begin(), x.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const std::size_t ip = (i + 1) % x.size();
    const double x1 = (ip == 0) ? x.front() + period : x[ip];
    const double w = (y - x[i]) / (x1 - x[i]);
    return (1 - w) * v[i] + w * v[ip];
}

double PeriodicTrace::lipschitz() const {
    double l = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t ip = (i + 1) % x.size();
        const double dx = (ip == 0) ? x.front() + period - x[i] : x[ip] - x[i];
        l = std::max(l, std::abs(v[ip] - v[i]) / dx);
    }
    return l;
}

double PeriodicTrace::sup() const {
    double m = 0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

PeriodicTrace trace_at(const ScalarField& field, double z, double shift) {
    PeriodicTrace tr;
    tr.period = field.grid.tau;
    tr.x = field.grid.x;
    tr.v.resize(tr.x.size());
    for (std::size_t i = 0; i < tr.x.size(); ++i) tr.v[i] = field.sample(tr.x[i], z) - shift;
    return tr;
}

std::vector<ConvexityRow> convexity_diagnostic(const ScalarField& field,
                                               const std::vector<double>& thresholds,
                                               double x_max, double z_max) {
    const SlabGrid& g = field.grid;
    std::vector<ConvexityRow> out;
    const double tol = 1e-9 * std::max(x_max, z_max);
    for (double c : thresholds) {
        ConvexityRow row{c, 0, 0};
        std::vector<std::pair<double, double>> pts;
        for (int j = 1; j <= g.nz() && g.z[j] <= z_max; ++j)
            for (int i = 0; i < g.nx(); ++i)
                if (std::abs(g.x[i]) <= x_max && field.at(i, j) >= c) pts.emplace_back(g.x[i], g.z[j]);
        row.set_size = static_cast<int>(pts.size());
        if (pts.size() >= 3) {
            std::sort(pts.begin(), pts.end());
            std::vector<std::pair<double, double>> hull(2 * pts.size());
            std::size_t k = 0;
            for (const auto& q : pts) {
                while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0) --k;
                hull[k++] = q;
            }
            for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
                while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
                hull[k++] = pts[i];
            }
            hull.resize(k - 1);
            for (int j = 1; j <= g.nz() && g.z[j] <= z_max; ++j) {
                const double zz = g.z[j];
                double xl = std::numeric_limits<double>::infinity(), xr = -xl;
                for (std::size_t e = 0; e < hull.size(); ++e) {
                    const auto& a = hull[e];
                    const auto& b = hull[(e + 1) % hull.size()];
                    if ((a.second - zz) * (b.second - zz) > 0) continue;
                    if (a.second == b.second) {
                        xl = std::min({xl, a.first, b.first});
                        xr = std::max({xr, a.first, b.first});
                    } else {
                        const double xi = a.first + (zz - a.second) * (b.first - a.first) / (b.second - a.second);
                        xl = std::min(xl, xi);
                        xr = std::max(xr, xi);
                    }
                }
                if (!(xl <= xr)) continue;
                for (int i = 0; i < g.nx(); ++i)
                    if (g.x[i] > xl + tol && g.x[i] < xr - tol && field.at(i, j) < c) ++row.violations;
            }
        }
        out.push_back(row);
    }
    return out;
}

double harnack_ratio(const ScalarField& field, double x0, double z0, double radius) {
    const SlabGrid& g = field.grid;
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= g.nz(); ++j) {
        const double dz = g.z[j] - z0;
        if (std::abs(dz) > radius) continue;
        for (int i = 0; i < g.nx(); ++i) {
            double dx = std::remainder(g.x[i] - x0, g.tau);
            if (dx * dx + dz * dz > radius * radius) continue;
            mx = std::max(mx, field.at(i, j));
            mn = std::min(mn, field.at(i, j));
        }
    }
    if (!(mn > 0)) throw DomainError("harnack_ratio requires a positive field on the ball");
    return mx / mn;
}

double comparison_defect(const ScalarField& a, const ScalarField& b) {
    if (a.values.size() != b.values.size()) throw DomainError("fields live on different grids");
    double d = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < a.values.size(); ++m) d = std::max(d, a.values[m] - b.values[m]);
    return d;
}

}  // namespace plap
