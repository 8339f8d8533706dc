#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "plap/solver.hpp"

namespace plap {

// Smooth cutoff: 1 on |x| <= w/2, 0 on |x| >= w, C-infinity in between.
double plateau_bump(double x, double w);

// Indicator of [-r, r] convolved with a box of width h.
double mollified_indicator(double x, double r, double h);

struct HarmonicMeasure {
    double nearest = 0;
    double bilinear = 0;
    SolveReport report;
};

// Value at the point at unit distance above the origin of the solution with
// datum the mollified indicator of [-r, r]. Capped to datum 1 when r >= tau/2.
HarmonicMeasure harmonic_measure(const SlabGrid& grid, double r, const SolverOptions& opt = {});

struct HomogeneityFit {
    double sigma = 0;
    double log_c = 0;
    double rms_residual = 0;
};

// Least-squares slope of -log(value) against log(radius).
HomogeneityFit fit_homogeneity(const std::vector<std::pair<double, double>>& samples);

struct MartinFit {
    HomogeneityFit fit;
    std::vector<std::pair<double, double>> samples;
    ScalarField field;
    SolveReport report;
};

struct MartinFitOptions {
    int nx = 1024;
    int nz = 256;
    double bump_width = 1.0 / 64;
    double tau = 1024;
    double h_min = 1.0 / 1024;
    double y_lo = 0.25;
    double y_hi = 2.0;
    int points = 9;
};

// Solution with a narrow bump datum at the origin of the half-plane slab,
// fitted on the ray above the origin.
MartinFit martin_fit(double p, const MartinFitOptions& mo = {}, const SolverOptions& opt = {});

struct OscillationRow {
    double height = 0;
    double max = 0;
    double min = 0;
    double mean = 0;
};

std::vector<OscillationRow> oscillation_profile(const ScalarField& field);

// Largest violation of max nonincreasing / min nondecreasing in height.
double oscillation_monotonicity_defect(const std::vector<OscillationRow>& rows);

struct DecayFit {
    double theta = 0;  // osc(2z)/osc(z), geometric mean over the fitted heights
    double delta = 0;  // osc ~ (tau/z)^delta
};

DecayFit fit_decay(const std::vector<OscillationRow>& rows, double z_lo, double z_hi);

void write_profile_csv(std::ostream& os, const std::vector<OscillationRow>& rows);

struct PsiResult {
    ScalarField field;  // the periodic solution with the bump datum
    SolveReport report;
    double t = 0;
    double xi = 0;      // datum period mean, used as the top closure value
    double xi_far = 0;  // intercept at z = 0 of the affine far-field level mean
    double b_bar = 0;   // xi - xi_far: mean of the normalized boundary trace
    double mean_low = 0;
    double mean_unit = 0;
    double ratio = 0;   // mean at height s over mean at height 1
    double s = 0;
    std::vector<OscillationRow> oscillation;
};

// Periodic extension with datum plateau_bump(x, t) on a unit period slab.
PsiResult build_psi(const SlabGrid& grid, double t, const TiltedNorm& tn, double s = 1.0 / 128,
                    const SolverOptions& opt = {});

// Mean over the period of the bilinear samples at height z.
double period_mean_at(const ScalarField& field, double z);

// Trace x -> field(x, z) - shift, sampled at the grid's lateral nodes and
// extended periodically by linear interpolation.
struct PeriodicTrace {
    double period = 1;
    std::vector<double> x;
    std::vector<double> v;
    double operator()(double s) const;
    double lipschitz() const;
    double sup() const;
};

PeriodicTrace trace_at(const ScalarField& field, double z, double shift);

struct ConvexityRow {
    double threshold = 0;
    int set_size = 0;
    int violations = 0;
};

// Superlevel sets {u >= c} restricted to the window |x| <= x_max, 0 < z <= z_max.
// A violation is a window node inside the convex hull of the set but not in it.
std::vector<ConvexityRow> convexity_diagnostic(const ScalarField& field,
                                               const std::vector<double>& thresholds,
                                               double x_max, double z_max);

// max/min of the field over nodes within `radius` of (x0, z0).
double harnack_ratio(const ScalarField& field, double x0, double z0, double radius);

// max over nodes of (a - b).
double comparison_defect(const ScalarField& a, const ScalarField& b);

}  // namespace plap
