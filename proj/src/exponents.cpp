#include "plap/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "plap/errors.hpp"

namespace plap {

namespace {

std::array<double, 2> solve_quadratic(double a, double b, double c) {
    const double disc = b * b - 4 * a * c;
    if (disc < 0) throw DomainError("quadratic has complex roots");
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    double r1 = q / a;
    double r2 = (q != 0) ? c / q : -r1;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

double unit_sphere_area(int d) {  // area of S^{d-1} in R^d
    return 2 * std::pow(std::numbers::pi, 0.5 * d) / boost::math::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / boost::math::tgamma(0.5 * d + 1);
}

}  // namespace

std::string to_string(const Geometry& g) {
    std::ostringstream os;
    os << "(n=" << g.n << ", k=" << g.k << ", p=" << g.p << ")";
    return os.str();
}

void validate(const Geometry& g) {
    if (g.n < 2) throw RegimeError("n >= 2 violated for " + to_string(g));
    if (g.k < 1 || g.k > g.n - 1) throw RegimeError("1 <= k <= n-1 violated for " + to_string(g));
    if (!std::isfinite(g.p)) throw RegimeError("p must be finite for " + to_string(g));
    if (g.k <= g.n - 2) {
        if (g.n < 3) throw RegimeError("n >= 3 when k <= n-2 violated for " + to_string(g));
        if (!(g.p > g.n - g.k)) throw RegimeError("p > n-k violated for " + to_string(g));
    } else if (!(g.p >= 2)) {
        throw RegimeError("p > 2 (k = n-1) violated for " + to_string(g));
    }
}

bool is_boundary_case(const Geometry& g) { return g.k == g.n - 1 && g.p == 2.0; }

ExponentSet compute_exponents(const Geometry& g) {
    validate(g);
    const double p = g.p, n = g.n, k = g.k;
    ExponentSet e;
    e.beta = (p + k - n) / (p - 1);
    e.branch_a = (p + k - n) * (k + p - 2) / ((p - 1) * (2 * p - n + k - 2));
    e.branch_b = k / (p - 1);
    e.chi = std::max(e.branch_a, e.branch_b);
    e.chi_breve = std::min(e.branch_a, e.branch_b);
    e.coincident = std::abs(e.branch_a - e.branch_b) <= 1e-12 * std::max(1.0, e.chi);
    e.boundary = is_boundary_case(g);
    if (e.boundary ? !(e.chi <= k) : !(e.chi < k))
        throw RegimeError("chi < k failed for " + to_string(g));
    return e;
}

CoefficientTriple coefficients(const Geometry& g, double lambda_t, double beta_t) {
    return coefficients_t<double>(g.n, g.k, g.p, lambda_t, beta_t);
}

CoefficientTripleT<Rational> coefficients_exact(int n, int k, const Rational& p,
                                                const Rational& lambda_t,
                                                const Rational& beta_t) {
    return coefficients_t<Rational>(n, k, p, lambda_t, beta_t);
}

std::array<double, 2> roots_A(const Geometry& g) {
    validate(g);
    const double beta = beta_of<double>(g.n, g.k, g.p);
    return solve_quadratic(g.p - 1, g.p - g.n, -beta * g.k);
}

std::array<double, 2> roots_B(const Geometry& g) {
    validate(g);
    const double b = beta_of<double>(g.n, g.k, g.p);
    return solve_quadratic(2 * b * (g.p - 1) + g.n - g.k - 2, b * (g.p - g.n),
                           -b * b * (g.p - 2 + g.k));
}

double martin_exponent_halfplane(double p) {
    if (!(p > 1)) throw DomainError("martin_exponent_halfplane requires p > 1");
    return -(p - 3 - 2 * std::sqrt(p * p - 3 * p + 3)) / (3 * (p - 1));
}

double capacity_energy(const Geometry& g, double r) {
    if (!(r > 0 && r < 0.1)) throw DomainError("capacity_energy requires 0 < r < 1/10");
    if (g.k < 1 || g.k > g.n - 1) throw RegimeError("1 <= k <= n-1 violated for " + to_string(g));
    if (!(g.p > 1)) throw RegimeError("p > 1 violated for " + to_string(g));
    const double L = std::log(1 / r);
    const double e = g.n - g.k - g.p;
    // integral of rho^(e-1) over (r, 1)
    const double radial = (std::abs(e) < 1e-14) ? L : -std::expm1(e * std::log(r)) / e;
    return unit_ball_volume(g.k) * unit_sphere_area(g.n - g.k) * radial * std::pow(L, -g.p);
}

}  // namespace plap
