#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "plap/exponents.hpp"
#include "plap/profile.hpp"

namespace plap {

// f(eta) = p^-1 (|eta| + <a, eta>)^p. The first k entries of a form a', the rest a''.
struct TiltedNorm {
    std::vector<double> a;
    double p = 3.0;
};

void validate(const TiltedNorm& tn, int n);
double norm_plane(const TiltedNorm& tn, int k);   // |a'|
double norm_normal(const TiltedNorm& tn, int k);  // |a''|

struct QCalculus {
    double q = 0;
    std::vector<double> Dq;
    std::vector<double> D2q;  // row-major n x n
};

QCalculus q_calculus(const TiltedNorm& tn, std::span<const double> eta);

// u = s^beta_t r^-(lambda_t + beta_t) with beta_t = (1+delta) beta, lambda_t = (1+delta) lambda.
struct AHarmonicProfile {
    Geometry geometry;
    double delta = 0;
    double lambda = 0;
};

void validate(const AHarmonicProfile& prof);
RadialProfile to_radial(const AHarmonicProfile& prof);

// Direction cosines <x'/t, a'/|a'|> and <x''/s, a''/|a''|>.
struct Orientation {
    double cos_plane = 0;
    double cos_normal = 0;

    static Orientation worst_plus() { return {1, 1}; }
    static Orientation worst_minus() { return {-1, -1}; }
    static Orientation orthogonal() { return {0, 0}; }
};

struct ETerms {
    double main = 0;
    double E1 = 0;
    double E2 = 0;
    double E3 = 0;
    double E4 = 0;
    double total = 0;
};

// q^(2-p)(grad u) div(Df(grad u)) split into the p-Laplacian part and the
// four tilt corrections, on the unit sphere s^2 + t^2 = 1.
ETerms divergence_tilted(double a_plane, double a_normal, const AHarmonicProfile& prof, double s,
                         double t, Orientation orient);

// Same decomposition at an arbitrary point x = (x', x'') with an explicit vector a.
ETerms divergence_tilted_at(const TiltedNorm& tn, const AHarmonicProfile& prof,
                            std::span<const double> x);

// Full-coordinate central differences of div(Df(grad u)), normalized by q^(2-p).
double fd_tilted_oracle(const TiltedNorm& tn, const AHarmonicProfile& prof,
                        std::span<const double> x, double h);

struct Thresholds {
    double general = 0;                 // certified |a| bound for the (n,k,p,delta,lambda) profile
    std::optional<double> line_case;    // k = 1, n >= 3, p > n-1
    std::optional<double> half_plane;   // n = 2, p >= 2
};

Thresholds subsolution_threshold(const AHarmonicProfile& prof);

// delta solving (1+delta) chi = 1 - (p-2)/(4(p-1)).
double threshold_delta(const Geometry& g);

struct SphereCheck {
    double min_total = 0;
    double argmin_s = 0;
    bool passed = false;
};

// Evaluates the total at `points` sphere points (s = cos theta, t = sin theta,
// theta in (0, pi/2)) for every split of |a| between a' and a'' in `splits`
// and both worst-case orientations.
SphereCheck sphere_subsolution_check(const AHarmonicProfile& prof, double a_norm, int points);

// Largest |a| (by bisection) for which sphere_subsolution_check passes.
double measured_sharp_threshold(const AHarmonicProfile& prof, int points);

struct WFunctions {
    double G = 0;
    double F1 = 0;
    double F2 = 0;
    double F3 = 0;
    double F4 = 0;
    double sum() const { return G + F1 + F2 + F3 + F4; }
};

WFunctions halfspace_w_functions(double p, int n, double lambda, double b, double w);

// G at lambda = n-1 in reduced closed form.
double g_reduced(double p, int n, double w);
double g_reduced_derivative(double p, int n, double w);

// (p-1)^-1 d(F2+F3)/dw at lambda = n-1.
double f23_derivative_reduced(int n, double b, double w);

// Smallest n >= 3 such that d(F2+F3)/dw < 0 on the w-grid for every n' in [n, n_max].
int f23_negative_from(double b, int n_max, int grid = 10000);

std::vector<double> w_grid(int points, int n);

struct DimensionScanResult {
    int n_prime = 0;
    double min_sum = 0;          // min over w of G+F1+F2+F3 at lambda = n'-1
    double min_sum_perturbed = 0;  // same at lambda = (n'-1)(1 - 1e-3), F4 included
};

DimensionScanResult dimension_scan(double b, double p, int n_max, int grid = 10000);

// Necessary condition for a Martin-type subsolution x2 / l^(1+lambda) with
// l = |x| and a = (a1, a2): <grad q(0,1), grad l(x,0)> <= 0 on [-1,1].
// Diagnostic only.
bool necessary_condition_halfplane(double a1, double a2);

}  // namespace plap
