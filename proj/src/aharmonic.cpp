#include "plap/aharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "plap/errors.hpp"

namespace plap {

namespace {

double profile_value(const RadialProfile& prof, std::span<const double> x) {
    const int k = prof.geometry.k;
    double t2 = 0, s2 = 0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) (i < k ? t2 : s2) += x[i] * x[i];
    return std::pow(s2, 0.5 * prof.beta_t) *
           std::pow(s2 + t2, -0.5 * (prof.lambda_t + prof.beta_t));
}

std::vector<double> fd_gradient(const RadialProfile& prof, std::vector<double> y, double h) {
    std::vector<double> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        y[i] = yi + 2 * h;
        const double f0 = profile_value(prof, y);
        y[i] = yi + h;
        const double f1 = profile_value(prof, y);
        y[i] = yi - h;
        const double f2 = profile_value(prof, y);
        y[i] = yi - 2 * h;
        const double f3 = profile_value(prof, y);
        y[i] = yi;
        g[i] = (-f0 + 8 * f1 - 8 * f2 + f3) / (12 * h);
    }
    return g;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

// E-terms at (s,t) with ip = <x',a'>/t and in = <x'',a''>/s.
ETerms eterms(const AHarmonicProfile& prof, double s, double t, double a_plane, double a_normal,
              double ip, double in) {
    const RadialProfile rp = to_radial(prof);
    const Geometry& g = prof.geometry;
    const double p = g.p;
    const DerivativesST d = derivatives_st(rp, s, t);
    const double r2 = s * s + t * t;
    const double ut_over_t = -(rp.lambda_t + rp.beta_t) * d.u / r2;
    const double us_over_s = d.u_s / s;
    const double grad = std::sqrt(d.u_t * d.u_t + d.u_s * d.u_s);
    if (grad == 0) throw DegenerateGradientError("vanishing gradient");
    const double hess =
        (d.u_t * d.u_t * d.u_tt + 2 * d.u_t * d.u_s * d.u_ts + d.u_s * d.u_s * d.u_ss) /
        (grad * grad);
    const double lap = (g.k - 1) * ut_over_t + d.u_tt + (g.n - g.k - 1) * us_over_s + d.u_ss;
    const double tilt = (ip * d.u_t + in * d.u_s) / grad;  // <a, grad u>/|grad u|

    ETerms e;
    e.main = divergence_st(rp, s, t);
    e.E1 = -tilt * hess;
    e.E2 = 2 * (p - 1) *
           ((d.u_s * d.u_ts + d.u_tt * d.u_t) / grad * ip +
            (d.u_t * d.u_ts + d.u_ss * d.u_s) / grad * in);
    e.E3 = (p - 1) * (ut_over_t * a_plane * a_plane + (d.u_tt - ut_over_t) * ip * ip +
                      2 * ip * in * d.u_ts + us_over_s * a_normal * a_normal +
                      (d.u_ss - us_over_s) * in * in);
    e.E4 = tilt * lap;
    e.total = e.main + e.E1 + e.E2 + e.E3 + e.E4;
    return e;
}

}  // namespace

void validate(const TiltedNorm& tn, int n) {
    if (static_cast<int>(tn.a.size()) != n) throw DomainError("tilt vector a must have n entries");
    double a2 = 0;
    for (double v : tn.a) a2 += v * v;
    if (!(a2 < 1)) throw DomainError("|a| < 1 violated");
    if (!(tn.p > 1)) throw DomainError("p > 1 violated");
}

double norm_plane(const TiltedNorm& tn, int k) {
    double r = 0;
    for (int i = 0; i < k; ++i) r += tn.a[i] * tn.a[i];
    return std::sqrt(r);
}

double norm_normal(const TiltedNorm& tn, int k) {
    double r = 0;
    for (std::size_t i = k; i < tn.a.size(); ++i) r += tn.a[i] * tn.a[i];
    return std::sqrt(r);
}

QCalculus q_calculus(const TiltedNorm& tn, std::span<const double> eta) {
    const std::size_t n = eta.size();
    if (tn.a.size() != n) throw DomainError("eta and a must have the same dimension");
    const double len = std::sqrt(dot(eta, eta));
    if (len == 0) throw DomainError("q_calculus requires eta != 0");
    QCalculus out;
    out.q = len + dot(tn.a, eta);
    out.Dq.resize(n);
    out.D2q.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.Dq[i] = eta[i] / len + tn.a[i];
        for (std::size_t j = 0; j < n; ++j)
            out.D2q[i * n + j] = ((i == j ? 1.0 : 0.0) - eta[i] * eta[j] / (len * len)) / len;
    }
    return out;
}

void validate(const AHarmonicProfile& prof) {
    const ExponentSet e = compute_exponents(prof.geometry);
    if (!(prof.delta >= 0)) throw DomainError("delta >= 0 violated");
    if (!(prof.lambda >= e.chi - 1e-12)) throw DomainError("lambda >= chi(p,n,k) violated");
}

RadialProfile to_radial(const AHarmonicProfile& prof) {
    const double beta = beta_of<double>(prof.geometry.n, prof.geometry.k, prof.geometry.p);
    return RadialProfile{prof.geometry, (1 + prof.delta) * beta, (1 + prof.delta) * prof.lambda};
}

ETerms divergence_tilted(double a_plane, double a_normal, const AHarmonicProfile& prof, double s,
                         double t, Orientation orient) {
    if (!(s > 0)) throw DomainError("divergence_tilted requires s > 0");
    if (std::abs(s * s + t * t - 1) > 1e-9) throw DomainError("divergence_tilted requires s^2 + t^2 = 1");
    if (a_plane < 0 || a_normal < 0) throw DomainError("|a'| and |a''| must be nonnegative");
    if (!(a_plane * a_plane + a_normal * a_normal < 1)) throw DomainError("|a| < 1 violated");
    if (std::abs(orient.cos_plane) > 1 || std::abs(orient.cos_normal) > 1)
        throw DomainError("direction cosines must lie in [-1, 1]");
    return eterms(prof, s, t, a_plane, a_normal, a_plane * orient.cos_plane,
                  a_normal * orient.cos_normal);
}

ETerms divergence_tilted_at(const TiltedNorm& tn, const AHarmonicProfile& prof,
                            std::span<const double> x) {
    const Geometry& g = prof.geometry;
    validate(tn, g.n);
    if (static_cast<int>(x.size()) != g.n) throw DomainError("point dimension must equal n");
    double t2 = 0, s2 = 0, xa_plane = 0, xa_normal = 0;
    for (int i = 0; i < g.n; ++i) {
        if (i < g.k) {
            t2 += x[i] * x[i];
            xa_plane += x[i] * tn.a[i];
        } else {
            s2 += x[i] * x[i];
            xa_normal += x[i] * tn.a[i];
        }
    }
    const double s = std::sqrt(s2), t = std::sqrt(t2);
    const double ip = (t > 0) ? xa_plane / t : 0.0;
    return eterms(prof, s, t, norm_plane(tn, g.k), norm_normal(tn, g.k), ip, xa_normal / s);
}

double fd_tilted_oracle(const TiltedNorm& tn, const AHarmonicProfile& prof,
                        std::span<const double> x, double h) {
    const Geometry& g = prof.geometry;
    validate(tn, g.n);
    if (static_cast<int>(x.size()) != g.n) throw DomainError("point dimension must equal n");
    if (!(h > 0)) throw DomainError("h > 0 required");
    double s2 = 0;
    for (int i = g.k; i < g.n; ++i) s2 += x[i] * x[i];
    if (10 * h >= std::sqrt(s2)) throw StepTooLargeError("10h >= dist(x, R^k)");

    const RadialProfile rp = to_radial(prof);
    const double p = tn.p;
    auto flux = [&](const std::vector<double>& grad, int i) {
        const double len = std::sqrt(dot(grad, grad));
        const double q = len + dot(tn.a, grad);
        return std::pow(q, p - 1) * (grad[i] / len + tn.a[i]);
    };
    std::vector<double> y(x.begin(), x.end());
    const auto g0 = fd_gradient(rp, y, h);
    const double len0 = std::sqrt(dot(g0, g0));
    if (len0 == 0) throw DegenerateGradientError("vanishing gradient at x");
    const double q0 = len0 + dot(tn.a, g0);

    double div = 0;
    for (int i = 0; i < g.n; ++i) {
        const double xi = y[i];
        y[i] = xi + h;
        const double fp = flux(fd_gradient(rp, y, h), i);
        y[i] = xi - h;
        const double fm = flux(fd_gradient(rp, y, h), i);
        y[i] = xi;
        div += (fp - fm) / (2 * h);
    }
    return std::pow(q0, 2 - p) * div;
}

double threshold_delta(const Geometry& g) {
    const ExponentSet e = compute_exponents(g);
    return (1 - (g.p - 2) / (4 * (g.p - 1))) / e.chi - 1;
}

Thresholds subsolution_threshold(const AHarmonicProfile& prof) {
    validate(prof);
    if (!(prof.delta > 0)) throw DomainError("subsolution_threshold requires delta > 0");
    const Geometry& g = prof.geometry;
    const ExponentSet e = compute_exponents(g);
    const RadialProfile rp = to_radial(prof);
    const double lt = rp.lambda_t, bt = rp.beta_t, d = prof.delta, p = g.p;
    const double m = std::min(lt * lt * (lt + bt) * d * e.chi, bt * bt * bt * d * e.beta);
    const double den =
        (lt * lt + bt * bt) * ((30 * (p - 1) + 10 * (g.n + g.k)) * (lt + bt + 1) * (lt + bt + 1));
    Thresholds th;
    th.general = std::min(0.25 * (p - 1) * m / den, 1.0);
    if (g.k == 1 && g.n >= 3 && p > g.n - 1)
        th.line_case = (p - 2) * std::min(std::pow(p + 1 - g.n, 4), 1.0) / (100000 * (p - 1));
    if (g.n == 2 && p >= 2) th.half_plane = (p - 2) / (100000 * (p - 1));
    return th;
}

SphereCheck sphere_subsolution_check(const AHarmonicProfile& prof, double a_norm, int points) {
    validate(prof);
    const double half_pi = 0.5 * std::numbers::pi;
    const double splits[3] = {0.0, 0.25 * std::numbers::pi, half_pi};
    const Orientation orients[4] = {Orientation::worst_plus(), Orientation::worst_minus(),
                                    {1, -1}, {-1, 1}};
    SphereCheck out;
    out.min_total = std::numeric_limits<double>::infinity();
    for (double phi : splits) {
        const double ap = a_norm * std::cos(phi), an = a_norm * std::sin(phi);
        for (const Orientation& o : orients) {
            for (int i = 0; i < points; ++i) {
                const double th = half_pi * (i + 0.5) / points;  // s = cos th > 0
                const double s = std::cos(th), t = std::sin(th);
                const ETerms e = divergence_tilted(ap, an, prof, s, t, o);
                if (e.total < out.min_total) {
                    out.min_total = e.total;
                    out.argmin_s = s;
                }
            }
        }
    }
    out.passed = out.min_total >= 0;
    return out;
}

double measured_sharp_threshold(const AHarmonicProfile& prof, int points) {
    if (!sphere_subsolution_check(prof, 0.0, points).passed) return 0.0;
    double lo = 0, hi = 0.999;
    if (sphere_subsolution_check(prof, hi, points).passed) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sphere_subsolution_check(prof, mid, points).passed) lo = mid;
        else hi = mid;
    }
    return lo;
}

WFunctions halfspace_w_functions(double p, int n, double lambda, double b, double w) {
    if (!(w >= 0 && w <= 1)) throw DomainError("w must lie in [0, 1]");
    if (!(std::abs(b) < 1)) throw DomainError("|b| < 1 violated");
    if (!(p >= 2)) throw DomainError("p >= 2 violated");
    if (!(lambda > 0)) throw DomainError("lambda > 0 violated");
    const double l = lambda;
    const double D = (l * l - 1) * w + 1;
    const double sq = std::sqrt(D);
    WFunctions f;
    f.G = (((p - 1) * l - (n - 1)) * l * l * w + ((2 * p - 3) * l - (p + n - 3)) * (1 - w)) / D;
    f.F1 = b * ((l + 1) * w - 1) * ((l * l * l - 2 * l + 1) * w + 2 * l - 1) / (D * sq);
    f.F2 = 2 * (p - 1) * b * (l - 2 - w * (l + 2) * (l - 1)) / sq;
    f.F3 = (p - 1) * b * b * (-3 + w * (3 + l));
    f.F4 = b * (1 - (l + 1) * w) * (l + 1 - n) / sq;
    return f;
}

double g_reduced(double p, int n, double w) {
    const double nn = n;
    return (p - 2) * (((nn - 1) * (nn - 1) * (nn - 1) - 2 * nn + 3) * w + (2 * nn - 3)) /
           (nn * (nn - 2) * w + 1);
}

double g_reduced_derivative(double p, int n, double w) {
    const double nn = n;
    const double den = nn * (nn - 2) * w + 1;
    return (p - 2) * (-nn * nn * nn + 4 * nn * nn - 5 * nn + 2) / (den * den);
}

double f23_derivative_reduced(int n, double b, double w) {
    const double nn = n;
    const double den = nn * (nn - 2) * w + 1;
    const double df2 = (-b * (nn + 1) * nn * (nn - 2) * (nn - 2) * w -
                        b * (nn - 2) * (nn * nn - nn + 2)) /
                       (den * std::sqrt(den));
    return df2 + (nn + 2) * b * b;
}

std::vector<double> w_grid(int points, int n) {
    std::vector<double> w;
    w.reserve(points + 32);
    for (int i = 0; i < points; ++i) w.push_back(static_cast<double>(i) / (points - 1));
    for (int j = 3; j <= 12; ++j) {
        w.push_back(std::pow(10.0, -j));
        w.push_back(1 - std::pow(10.0, -j));
    }
    if (n > 0) w.push_back(1.0 / n);
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
}

int f23_negative_from(double b, int n_max, int grid) {
    if (!(b > 0 && b < 1)) throw PreconditionError("0 < b < 1 violated");
    auto negative = [&](int n) {
        for (double w : w_grid(grid, n))
            if (!(f23_derivative_reduced(n, b, w) < 0)) return false;
        return true;
    };
    int from = -1;
    for (int n = n_max; n >= 3; --n) {
        if (!negative(n)) break;
        from = n;
    }
    if (from < 0) throw NotFoundError("d(F2+F3)/dw < 0 fails at n_max", n_max);
    return from;
}

DimensionScanResult dimension_scan(double b, double p, int n_max, int grid) {
    if (!(b > 0 && b < 1)) throw PreconditionError("0 < b < 1 violated");
    if (!((p - 2) / (p - 1) > 2 * b - b * b))
        throw PreconditionError("(p-2)/(p-1) > 2b - b^2 violated");
    for (int n = 3; n <= n_max; ++n) {
        const std::vector<double> ws = w_grid(grid, n);
        double m0 = std::numeric_limits<double>::infinity();
        for (double w : ws) {
            const WFunctions f = halfspace_w_functions(p, n, n - 1.0, b, w);
            m0 = std::min(m0, f.G + f.F1 + f.F2 + f.F3);
        }
        if (!(m0 > 0)) continue;
        double m1 = std::numeric_limits<double>::infinity();
        for (double w : ws)
            m1 = std::min(m1, halfspace_w_functions(p, n, (n - 1.0) * (1 - 1e-3), b, w).sum());
        if (m1 > 0) return DimensionScanResult{n, m0, m1};
    }
    throw NotFoundError("no n <= n_max with a positive sum on the w-grid", n_max);
}

bool necessary_condition_halfplane(double a1, double a2) {
    // grad q(0,1) = (a1, 1 + a2); grad l(x,0) = (sign x, 0) for l = |x|.
    (void)a2;
    for (double x : {-1.0, 1.0})
        if (a1 * (x > 0 ? 1.0 : -1.0) > 0) return false;
    return true;
}

}  // namespace plap
