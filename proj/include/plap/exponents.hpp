#pragma once

#include <array>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace plap {

using Rational = boost::multiprecision::cpp_rational;

// The plane R^k sits inside R^n; p is the exponent of the p-Laplacian.
struct Geometry {
    int n = 3;
    int k = 1;
    double p = 3.0;
};

// Throws RegimeError naming the violated inequality. The half-space case
// k = n-1 admits the closed boundary value p = 2 (the harmonic case).
void validate(const Geometry& g);

// True for k = n-1, p = 2, where chi reaches k and the strict bracket degenerates.
bool is_boundary_case(const Geometry& g);

struct ExponentSet {
    double beta = 0;
    double chi = 0;
    double chi_breve = 0;
    double branch_a = 0;
    double branch_b = 0;
    bool coincident = false;  // chi == chi_breve: no strict sub/super interval
    bool boundary = false;    // see is_boundary_case
};

ExponentSet compute_exponents(const Geometry& g);

template <class T>
struct CoefficientTripleT {
    T A{};
    T B{};
    T C{};
};
using CoefficientTriple = CoefficientTripleT<double>;

template <class T>
T beta_of(int n, int k, const T& p) {
    return (p + T(k) - T(n)) / (p - T(1));
}

// Quadratics of the profile calculus with (lambda, beta) replaced by the
// free pair (lambda_t, beta_t). C vanishes exactly when beta_t = beta.
template <class T>
CoefficientTripleT<T> coefficients_t(int n, int k, const T& p, const T& lt, const T& bt) {
    const T N(n), K(k), one(1), two(2);
    CoefficientTripleT<T> c;
    c.A = (p - one) * lt * lt + (p - N) * lt - bt * K;
    c.B = (two * bt * (p - one) + N - K - two) * lt * lt + bt * (p - N) * lt -
          bt * bt * (p - two + K);
    c.C = (p - one) * bt - (p - N + K);
    return c;
}

CoefficientTriple coefficients(const Geometry& g, double lambda_t, double beta_t);

CoefficientTripleT<Rational> coefficients_exact(int n, int k, const Rational& p,
                                                const Rational& lambda_t,
                                                const Rational& beta_t);

// Stated roots of A and B in lambda (beta_t = beta).
template <class T>
struct StatedRootsT {
    T a_first{};   // -beta
    T a_second{};  // k/(p-1)
    T b_first{};   // -beta
    T b_second{};  // beta(p-2+k)/(2p-n+k-2)
};

template <class T>
StatedRootsT<T> stated_roots_t(int n, int k, const T& p) {
    const T b = beta_of<T>(n, k, p);
    StatedRootsT<T> r;
    r.a_first = -b;
    r.a_second = T(k) / (p - T(1));
    r.b_first = -b;
    r.b_second = b * (p - T(2) + T(k)) / (T(2) * p - T(n) + T(k) - T(2));
    return r;
}

// Numerical roots (ascending) of the lambda-quadratics A and B at beta_t = beta.
std::array<double, 2> roots_A(const Geometry& g);
std::array<double, 2> roots_B(const Geometry& g);

// Positive homogeneity exponent of the p-harmonic Martin function of the
// upper half-plane with pole at the origin.
double martin_exponent_halfplane(double p);

// p-energy of phi(x) = max(1 + log|x''|/log(1/r), 0) over the cylinder
// B^k(0,1) x B^{n-k}(0,1). Natural logarithms; no regime check on p.
double capacity_energy(const Geometry& g, double r);

std::string to_string(const Geometry& g);

}  // namespace plap
