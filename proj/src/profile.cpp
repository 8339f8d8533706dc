#include "plap/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

namespace {

double profile_value(const RadialProfile& prof, std::span<const double> x) {
    const int k = prof.geometry.k;
    double t2 = 0, s2 = 0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) (i < k ? t2 : s2) += x[i] * x[i];
    const double r2 = s2 + t2;
    return std::pow(s2, 0.5 * prof.beta_t) * std::pow(r2, -0.5 * (prof.lambda_t + prof.beta_t));
}

// Fourth-order central gradient.
std::vector<double> fd_gradient(const RadialProfile& prof, std::vector<double> y, double h) {
    std::vector<double> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        double f[4];
        const double off[4] = {2 * h, h, -h, -2 * h};
        for (int m = 0; m < 4; ++m) {
            y[i] = yi + off[m];
            f[m] = profile_value(prof, y);
        }
        y[i] = yi;
        g[i] = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h);
    }
    return g;
}

double norm(const std::vector<double>& v) {
    double a = 0;
    for (double x : v) a += x * x;
    return std::sqrt(a);
}

}  // namespace

RadialProfile canonical_profile(const Geometry& g, double lambda_t) {
    return RadialProfile{g, beta_of<double>(g.n, g.k, g.p), lambda_t};
}

void validate(const RadialProfile& prof) {
    validate(prof.geometry);
    if (!(prof.beta_t > 0)) throw DomainError("beta_t > 0 violated");
    if (!std::isfinite(prof.lambda_t)) throw DomainError("lambda_t must be finite");
}

DerivativesST derivatives_st(const RadialProfile& prof, double s, double t) {
    if (!(s > 0)) throw DomainError("profile requires s > 0 (not differentiable on the plane)");
    if (!(t >= 0)) throw DomainError("profile requires t >= 0");
    const double lam = prof.lambda_t, bet = prof.beta_t;
    const double r2 = s * s + t * t, r4 = r2 * r2;
    const double s2 = s * s, t2 = t * t;
    DerivativesST d;
    d.u = std::pow(s, bet) * std::pow(r2, -0.5 * (lam + bet));
    d.u_t = -(lam + bet) * (t / r2) * d.u;
    d.u_s = (-lam * s2 + bet * t2) / (s * r2) * d.u;
    d.u_tt = d.u / r4 * (lam + bet) * ((lam + bet + 1) * t2 - s2);
    d.u_ts = d.u * t / (s * r4) * (lam + bet) * ((2 + lam) * s2 - bet * t2);
    d.u_ss = d.u / (s2 * r4) *
             ((lam * lam + lam) * s2 * s2 - (lam + 3 * bet + 2 * lam * bet) * s2 * t2 +
              (bet * bet - bet) * t2 * t2);
    return d;
}

GradientST gradient_st(const RadialProfile& prof, double s, double t) {
    if (!(s > 0)) throw DomainError("gradient_st requires s > 0 (not differentiable on the plane)");
    if (!(t >= 0)) throw DomainError("gradient_st requires t >= 0");
    const double lam = prof.lambda_t, bet = prof.beta_t;
    const double r2 = s * s + t * t;
    GradientST g;
    g.u = std::pow(s, bet) * std::pow(r2, -0.5 * (lam + bet));
    g.u_t = -(lam + bet) * (t / r2) * g.u;
    g.u_s = (-lam * s * s + bet * t * t) / (s * r2) * g.u;
    g.grad_norm = g.u / (s * std::sqrt(r2)) * std::sqrt(lam * lam * s * s + bet * bet * t * t);
    return g;
}

double divergence_st(const RadialProfile& prof, double s, double t) {
    if (!(s > 0)) throw DomainError("divergence_st requires s > 0");
    const double lam = prof.lambda_t, bet = prof.beta_t;
    const double s2 = s * s, t2 = t * t, r2 = s2 + t2;
    const double den = lam * lam * s2 + bet * bet * t2;
    if (den == 0) throw DegenerateGradientError("lambda_t^2 s^2 + beta_t^2 t^2 = 0");
    const auto c = coefficients(prof.geometry, lam, bet);
    const double u = std::pow(s, bet) * std::pow(r2, -0.5 * (lam + bet));
    const double q = c.A * lam * lam * s2 * s2 + c.B * bet * s2 * t2 + c.C * bet * bet * bet * t2 * t2;
    return u * q / (s2 * r2 * den);
}

double divergence_from_derivatives(const Geometry& g, const DerivativesST& d, double s, double t) {
    const double grad2 = d.u_t * d.u_t + d.u_s * d.u_s;
    if (grad2 == 0) throw DegenerateGradientError("vanishing gradient");
    const double hess =
        d.u_t * d.u_t * d.u_tt + 2 * d.u_t * d.u_s * d.u_ts + d.u_s * d.u_s * d.u_ss;
    double lap = d.u_tt + d.u_ss + (g.n - g.k - 1) * d.u_s / s;
    if (g.k > 1) lap += (g.k - 1) * d.u_t / t;
    return (g.p - 2) * hess / grad2 + lap;
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::Subsolution: return "Subsolution";
        case Kind::Supersolution: return "Supersolution";
        case Kind::Solution: return "Solution";
        case Kind::Indefinite: return "Indefinite";
    }
    return "Indefinite";
}

Classification classify(const RadialProfile& prof) {
    validate(prof);
    const double lam = prof.lambda_t, bet = prof.beta_t;
    const auto c = coefficients(prof.geometry, lam, bet);
    Classification out;
    out.quad_s4 = c.A * lam * lam;
    out.quad_s2t2 = c.B * bet;
    out.quad_t4 = c.C * bet * bet * bet;

    // Coefficients within rounding of zero are treated as zero.
    const double scale = 1 + std::abs(out.quad_s4) + std::abs(out.quad_s2t2) + std::abs(out.quad_t4);
    const double tol = 1e-12 * scale;
    auto snap = [tol](double v) { return std::abs(v) <= tol ? 0.0 : v; };
    const double a = snap(out.quad_s4), b = snap(out.quad_s2t2), cc = snap(out.quad_t4);

    // Q(X,Y) = a X^2 + b X Y + c Y^2 with X = s^2 > 0, Y = t^2 >= 0.
    auto nonneg = [](double a_, double b_, double c_) {
        return a_ >= 0 && c_ >= 0 && (b_ >= 0 || b_ * b_ <= 4 * a_ * c_);
    };
    const bool ge = nonneg(a, b, cc);
    const bool le = nonneg(-a, -b, -cc);
    if (ge && le) out.kind = Kind::Solution;
    else if (ge) out.kind = Kind::Subsolution;
    else if (le) out.kind = Kind::Supersolution;
    else out.kind = Kind::Indefinite;

    const ExponentSet e = compute_exponents(prof.geometry);
    if (std::abs(bet - e.beta) <= 1e-12 &&
        (std::abs(lam - e.chi) <= 1e-12 || std::abs(lam - e.chi_breve) <= 1e-12))
        out.at_threshold = true;

    if (out.kind == Kind::Indefinite) {
        auto Q = [&](double th) {
            const double X = std::cos(th) * std::cos(th), Y = std::sin(th) * std::sin(th);
            return a * X * X + b * X * Y + cc * Y * Y;
        };
        constexpr int kScan = 1024;
        const double half_pi = 0.5 * std::numbers::pi;
        double lo = 0, hi = 0;
        bool found = false;
        double prev_th = half_pi / (kScan + 1);
        double prev = Q(prev_th);
        for (int i = 2; i <= kScan && !found; ++i) {
            const double th = half_pi * i / (kScan + 1);
            const double v = Q(th);
            if ((prev < 0) != (v < 0)) {
                lo = prev_th;
                hi = th;
                found = true;
            }
            prev = v;
            prev_th = th;
        }
        double th;
        if (found) {
            const bool lo_neg = Q(lo) < 0;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((Q(mid) < 0) == lo_neg) lo = mid;
                else hi = mid;
            }
            th = 0.5 * (lo + hi);
        } else {
            // Sign change narrower than the scan: smallest positive root of
            // a + b z + c z^2 in z = tan^2(theta).
            double z;
            if (cc == 0) {
                z = -a / b;
            } else {
                const double sq = std::sqrt(std::max(b * b - 4 * a * cc, 0.0));
                const double z1 = (-b - sq) / (2 * cc), z2 = (-b + sq) / (2 * cc);
                z = (z1 > 0 && (z1 < z2 || z2 <= 0)) ? z1 : z2;
            }
            th = std::atan(std::sqrt(std::max(z, 0.0)));
        }
        out.witness = Witness{std::cos(th), std::sin(th)};
    }
    return out;
}

double fd_divergence_oracle(const RadialProfile& prof, std::span<const double> x, double h) {
    const Geometry& g = prof.geometry;
    if (static_cast<int>(x.size()) != g.n) throw DomainError("point dimension must equal n");
    if (!(h > 0)) throw DomainError("h > 0 required");
    double s2 = 0;
    for (int i = g.k; i < g.n; ++i) s2 += x[i] * x[i];
    if (10 * h >= std::sqrt(s2)) throw StepTooLargeError("10h >= dist(x, R^k)");

    std::vector<double> y(x.begin(), x.end());
    const auto g0 = fd_gradient(prof, y, h);
    const double n0 = norm(g0);
    if (n0 == 0) throw DegenerateGradientError("vanishing gradient at x");

    double div = 0;
    for (int i = 0; i < g.n; ++i) {
        const double xi = y[i];
        y[i] = xi + h;
        const auto gp = fd_gradient(prof, y, h);
        y[i] = xi - h;
        const auto gm = fd_gradient(prof, y, h);
        y[i] = xi;
        const double fp = std::pow(norm(gp), g.p - 2) * gp[i];
        const double fm = std::pow(norm(gm), g.p - 2) * gm[i];
        div += (fp - fm) / (2 * h);
    }
    return std::pow(n0, 2 - g.p) * div;
}

}  // namespace plap
