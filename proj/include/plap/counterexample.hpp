#pragma once

#include <vector>

#include "plap/gapseries.hpp"
#include "plap/measure.hpp"
#include "plap/solver.hpp"

namespace plap {

struct CounterexampleOptions {
    double p = 3;
    int levels = 3;
    DampingVariant variant = DampingVariant::BoundedDivergent;
    // Slab for the extensions: unit period, H = 4, uniform lateral spacing.
    int nx = 1728;
    int nz = 96;
    double hz_min = 1.0 / 1728;
    int min_nodes_per_period = 8;  // finest boundary wave must be sampled this densely
    // Wave: trace of the periodic solution with a bump datum of half-width psi_t,
    // taken at wave_height and shifted by its far-field value.
    double psi_t = 1.0 / 16;
    int psi_nx = 512;
    int psi_nz = 128;
    double wave_height = 0.25;
    SolverOptions solver;
};

struct SandwichCheck {
    int level = 0;       // l
    double z_lo = 0;     // height band of the check (open interval)
    double z_hi = 0;
    double bound = 0;
    double worst = 0;    // largest observed left-hand side; 0 if the band holds no grid level
    int points = 0;
    double margin() const { return bound - worst; }
};

struct CounterexampleReport {
    LacunaryPlan plan;
    CoefficientSequence coeffs;
    BoundaryWave wave;
    double wave_scale = 0;  // factor applied to the PDE trace to meet sup + Lip <= 1/2
    double b_bar = 0;
    double alpha = 0;       // 1 - 2/p
    std::vector<double> heights;        // h_1..h_levels, h_levels = 0
    std::vector<SandwichCheck> step;    // |ext_{l+1} - ext_l| < 2^-(l+1) above h_l
    std::vector<SandwichCheck> lower;   // |ext_{l+1} - sigma_l| < 2^-(l+1) + |a_{l+1}| below h_l
    std::vector<SandwichCheck> limit;   // |ext - ext_l| < 2^-l above h_l
    std::vector<SandwichCheck> band;    // |ext - sigma_l| < 2^-(l+1) + 2^-l + |a_{l+1}| in (h_{l+1}, h_l)
    double min_margin = 0;
    std::vector<double> datum_sup;      // ||sigma'_j||_inf
    std::vector<double> extension_sup;  // ||ext_j||_inf over the slab
    double max_principle_excess = 0;    // max_j (extension_sup - datum_sup)
    // Height where the level-(l+1) perturbation falls to half its boundary size,
    // and that height times T_{l+1}^alpha.
    std::vector<double> decay_height;
    std::vector<double> empirical_A;
    // Median tail oscillation of the boundary series from m = 1, for J = 1..levels.
    std::vector<double> median_tail_oscillation;
    std::vector<SolveReport> solves;
};

CounterexampleReport assemble_counterexample(const CounterexampleOptions& opt = {});

}  // namespace plap
