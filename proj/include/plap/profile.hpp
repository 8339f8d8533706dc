#pragma once

#include <optional>
#include <span>
#include <string>

#include "plap/exponents.hpp"

namespace plap {

// u = s^beta_t * r^-(lambda_t + beta_t) with s = |x''|, t = |x'|, r^2 = s^2 + t^2.
struct RadialProfile {
    Geometry geometry;
    double beta_t = 0;
    double lambda_t = 0;
};

// Profile with beta_t equal to the geometry's beta.
RadialProfile canonical_profile(const Geometry& g, double lambda_t);

void validate(const RadialProfile& prof);

struct GradientST {
    double u = 0;
    double u_t = 0;
    double u_s = 0;
    double grad_norm = 0;
};

struct DerivativesST {
    double u = 0;
    double u_t = 0;
    double u_s = 0;
    double u_tt = 0;
    double u_ts = 0;
    double u_ss = 0;
};

GradientST gradient_st(const RadialProfile& prof, double s, double t);

// Closed-form first and second (s,t)-derivatives of the profile.
DerivativesST derivatives_st(const RadialProfile& prof, double s, double t);

// |grad u|^(2-p) div(|grad u|^(p-2) grad u) at (s,t).
double divergence_st(const RadialProfile& prof, double s, double t);

// Same quantity assembled from the second derivatives instead of the
// quartic form; kept for cross-checks.
double divergence_from_derivatives(const Geometry& g, const DerivativesST& d, double s, double t);

enum class Kind { Subsolution, Supersolution, Solution, Indefinite };

std::string to_string(Kind kind);

struct Witness {
    double s = 0;
    double t = 0;
};

struct Classification {
    Kind kind = Kind::Indefinite;
    std::optional<Witness> witness;
    bool at_threshold = false;  // lambda_t within 1e-12 of chi or chi_breve with beta_t = beta
    double quad_s4 = 0;         // A lambda_t^2
    double quad_s2t2 = 0;       // B beta_t
    double quad_t4 = 0;         // C beta_t^3
};

Classification classify(const RadialProfile& prof);

// Central-difference p-Laplacian in full coordinates x = (x', x''), the first
// k entries being x'. Normalized by |grad u|^(2-p).
double fd_divergence_oracle(const RadialProfile& prof, std::span<const double> x, double h);

}  // namespace plap
