#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace plap {

using BigInt = boost::multiprecision::checked_int128_t;

// Lacunary scales T_1 = 1, T_{j+1} the least multiple of T_j with
// T_{j+1} >= 4 T_j ln^3(2 + T_j).
struct LacunaryPlan {
    std::vector<BigInt> T;
    int levels() const { return static_cast<int>(T.size()); }
};

LacunaryPlan gen_lacunary(int J);

// Exact integer checks of the admissibility rule and of
// T_m (j-1)^3 4^(j-m) <= T_j for every m < j.
bool plan_admissible(const LacunaryPlan& plan);
bool ratio_bound_holds(const LacunaryPlan& plan);

// One-periodic wave on [-1/2, 1/2) sampled at x_i = -1/2 + i/N. psi = Psi0 - b_bar.
struct BoundaryWave {
    std::vector<double> psi0;
    double b_bar = 0;
    std::string name;

    int resolution() const { return static_cast<int>(psi0.size()); }
    double psi(int i) const { return psi0[i] - b_bar; }
    // psi(T x_i), exact on the sample lattice.
    double psi_scaled(const BigInt& T, int i) const;
    double psi0_scaled(const BigInt& T, int i) const;
    double sup_norm() const;
    double lipschitz() const;  // discrete, on the sample lattice
};

BoundaryWave sample_wave(const std::function<double(double)>& Psi0, int N, std::string name = "");
BoundaryWave cosine_wave(int N);    // 1/8 + cos(2 pi x)/16
BoundaryWave triangle_wave(int N);  // 1/8 + tri(x)/16, tri(x) = 1 - 4|x| on [-1/2, 1/2)

struct OrthogonalityResult {
    double integral = 0;
    double bound = 0;  // sqrt(k) T_m / T_j; 0 on the diagonal
    bool diagonal = false;
};

// Quadrature of the product psi(T_m x) psi(T_j x) over the unit period. On the
// diagonal returns ||psi||_2^2 and no bound. Needs N >= 16 T_j.
OrthogonalityResult quasi_orthogonality(const BoundaryWave& wave, const LacunaryPlan& plan, int m, int j);

struct CoefficientSequence {
    std::vector<double> a;
    double chi_hat() const;
    std::vector<double> partial_sums() const;
};

// Signs of +-1/j switched with hysteresis on [0, 1], so the partial sums stay in
// [-1/2, 1] and keep sweeping the interval.
CoefficientSequence divergent_coefficients(int J);
CoefficientSequence vanishing_coefficients(int J);  // a_j = -1/(4j)

struct MaximalStats {
    double weak_constant = 0;  // sup_lambda lambda^2 |{s* > lambda}| / chi_hat^2
    double l2_ratio = 0;       // sup_l int s_l^2 / chi_hat^2
    double s_star_sup = 0;
    int reduced_levels = 0;    // levels with N < 16 T_j
};

MaximalStats maximal_stats(const BoundaryWave& wave, const LacunaryPlan& plan, const CoefficientSequence& c);

enum class DampingVariant { BoundedDivergent, PositiveVanishing };

struct LevelRecord {
    int level = 0;
    int family_k = 0;  // stopping cubes flagged at this level, all i
    int family_f = 0;
    int family_h = 0;
    double sigma_sup = 0;
    double sigma_min = 0;
    double ratio_min = 1;  // min of L_{j+1}/L_j over nodes
    double ratio_max = 1;
    double lipschitz_over_T = 0;  // discrete Lip(L_{j+1}) / T_j
};

struct DampingResult {
    DampingVariant variant = DampingVariant::BoundedDivergent;
    std::vector<std::vector<double>> L;      // L_1 .. L_J at the nodes
    std::vector<std::vector<double>> sigma;  // sigma_1 .. sigma_J (tilde version in the positive variant)
    std::vector<LevelRecord> levels;
    double sup_sigma = 0;
    int positivity_violations = 0;  // nodes and levels with sigma <= 0 (positive variant)
    int reduced_levels = 0;
};

DampingResult build_damping(const BoundaryWave& wave, const LacunaryPlan& plan, const CoefficientSequence& c,
                            DampingVariant variant);

struct DivergenceRow {
    int m = 0;
    double fraction_above = 0;  // nodes with tail oscillation over levels >= m above the threshold
    double median_oscillation = 0;
};

struct DivergenceReport {
    double threshold = 0;
    std::vector<DivergenceRow> rows;
    std::vector<double> final_quantiles;  // sigma_J at 0.1, 0.25, 0.5, 0.75, 0.9
};

DivergenceReport divergence_statistics(const DampingResult& d, double threshold);

double quantile(std::vector<double> v, double q);

}  // namespace plap
