#include "plap/gapseries.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "plap/errors.hpp"

namespace plap {

namespace {

using boost::multiprecision::cpp_int;

long double to_ld(const BigInt& v) { return static_cast<long double>(v); }

std::int64_t mod_n(const BigInt& T, int N) { return static_cast<std::int64_t>(T % N); }

// CDF of the unit-mass bump c (1 - 4u^2)^4 on [-1/2, 1/2].
double bump_cdf(double u) {
    if (u <= -0.5) return 0;
    if (u >= 0.5) return 1;
    auto prim = [](double v) {
        const double v2 = v * v;
        return v * (1 + v2 * (-16.0 / 3 + v2 * (96.0 / 5 + v2 * (-256.0 / 7 + v2 * 256.0 / 9))));
    };
    static const double mass = 2 * prim(0.5);
    return 0.5 + prim(u) / mass;
}

struct CubeAgg {
    double s_abs_max = 0;    // max |s_j|
    double st_max = -1e300;  // max s~_j
    double st_min = 1e300;   // min s~_j
    double sig_min = 1e300;  // min sigma~_j
    double L_max = 0;
};

void merge_into(CubeAgg& a, double s, double st, double sig, double L) {
    a.s_abs_max = std::max(a.s_abs_max, std::abs(s));
    a.st_max = std::max(a.st_max, st);
    a.st_min = std::min(a.st_min, st);
    a.sig_min = std::min(a.sig_min, sig);
    a.L_max = std::max(a.L_max, L);
}

// Cubes of level j chosen for one threshold index i at any earlier level.
struct FamilyMemory {
    std::map<int, std::set<BigInt>> chosen;  // level -> cube ids

    bool covered(const LacunaryPlan& plan, int j, const BigInt& c) const {
        for (const auto& [l, cubes] : chosen) {
            if (l >= j) continue;
            const BigInt anc = c / (plan.T[j - 1] / plan.T[l - 1]);
            if (cubes.count(anc)) return true;
        }
        return false;
    }
};

}  // namespace

LacunaryPlan gen_lacunary(int J) {
    if (J < 1) throw PreconditionError("J >= 1 required");
    LacunaryPlan plan;
    plan.T.push_back(1);
    try {
        for (int j = 1; j < J; ++j) {
            const BigInt& T = plan.T.back();
            const long double l = std::log(2.0L + to_ld(T));
            const auto factor = static_cast<std::int64_t>(std::ceil(4 * l * l * l));
            plan.T.push_back(T * factor);
        }
    } catch (const std::overflow_error&) {
        throw OverflowError("T_J exceeds the 128-bit integer range; use J <= " + std::to_string(plan.levels()));
    }
    return plan;
}

bool plan_admissible(const LacunaryPlan& plan) {
    if (plan.T.empty() || plan.T[0] != 1) return false;
    for (int j = 1; j < plan.levels(); ++j) {
        const BigInt& prev = plan.T[j - 1];
        if (plan.T[j] % prev != 0) return false;
        const long double l = std::log(2.0L + to_ld(prev));
        if (to_ld(plan.T[j] / prev) < 4 * l * l * l) return false;
    }
    return true;
}

bool ratio_bound_holds(const LacunaryPlan& plan) {
    for (int j = 2; j <= plan.levels(); ++j)
        for (int m = 1; m < j; ++m) {
            cpp_int lhs = cpp_int(plan.T[m - 1]) * cpp_int(j - 1) * (j - 1) * (j - 1);
            lhs <<= 2 * (j - m);
            if (lhs > cpp_int(plan.T[j - 1])) return false;
        }
    return true;
}

double BoundaryWave::psi0_scaled(const BigInt& T, int i) const {
    const int N = resolution();
    const std::int64_t t = mod_n(T, N);
    const std::int64_t l = ((t * (i - N / 2) + N / 2) % N + N) % N;
    return psi0[static_cast<std::size_t>(l)];
}

double BoundaryWave::psi_scaled(const BigInt& T, int i) const { return psi0_scaled(T, i) - b_bar; }

double BoundaryWave::sup_norm() const {
    double m = 0;
    for (double v : psi0) m = std::max(m, std::abs(v));
    return m;
}

double BoundaryWave::lipschitz() const {
    const int N = resolution();
    double m = 0;
    for (int i = 0; i < N; ++i) m = std::max(m, std::abs(psi0[(i + 1) % N] - psi0[i]) * N);
    return m;
}

BoundaryWave sample_wave(const std::function<double(double)>& Psi0, int N, std::string name) {
    if (N < 2 || N % 2) throw PreconditionError("wave resolution must be even and >= 2");
    BoundaryWave w;
    w.name = std::move(name);
    w.psi0.resize(N);
    long double sum = 0;
    for (int i = 0; i < N; ++i) {
        w.psi0[i] = Psi0(-0.5 + static_cast<double>(i) / N);
        sum += w.psi0[i];
    }
    w.b_bar = static_cast<double>(sum / N);
    return w;
}

BoundaryWave cosine_wave(int N) {
    return sample_wave([](double x) { return 0.125 + std::cos(2 * std::numbers::pi * x) / 16; }, N, "cosine");
}

BoundaryWave triangle_wave(int N) {
    return sample_wave([](double x) { return 0.125 + (1 - 4 * std::abs(x)) / 16; }, N, "triangle");
}

OrthogonalityResult quasi_orthogonality(const BoundaryWave& wave, const LacunaryPlan& plan, int m, int j) {
    if (m < 1 || j > plan.levels() || m > j) throw PreconditionError("1 <= m <= j <= J required");
    const int N = wave.resolution();
    if (plan.T[j - 1] > BigInt(N / 16)) throw ResolutionError("quadrature needs N >= 16 T_j");
    long double acc = 0;
    for (int i = 0; i < N; ++i) acc += wave.psi_scaled(plan.T[m - 1], i) * wave.psi_scaled(plan.T[j - 1], i);
    OrthogonalityResult r;
    r.integral = static_cast<double>(acc / N);
    r.diagonal = m == j;
    if (!r.diagonal) r.bound = static_cast<double>(to_ld(plan.T[m - 1]) / to_ld(plan.T[j - 1]));
    return r;
}

double CoefficientSequence::chi_hat() const {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

std::vector<double> CoefficientSequence::partial_sums() const {
    std::vector<double> d;
    double s = 0;
    for (double v : a) d.push_back(s += v);
    return d;
}

CoefficientSequence divergent_coefficients(int J) {
    CoefficientSequence c;
    double d = 0;
    int dir = 1;
    for (int j = 1; j <= J; ++j) {
        if (dir > 0 && d >= 1) dir = -1;
        if (dir < 0 && d <= 0) dir = 1;
        c.a.push_back(dir / static_cast<double>(j));
        d += c.a.back();
    }
    return c;
}

CoefficientSequence vanishing_coefficients(int J) {
    CoefficientSequence c;
    for (int j = 1; j <= J; ++j) c.a.push_back(-0.25 / j);
    return c;
}

MaximalStats maximal_stats(const BoundaryWave& wave, const LacunaryPlan& plan, const CoefficientSequence& c) {
    const int N = wave.resolution();
    const int J = std::min<int>(plan.levels(), static_cast<int>(c.a.size()));
    MaximalStats out;
    std::vector<double> s(N, 0.0), s_star(N, 0.0);
    const double chi2 = c.chi_hat() * c.chi_hat();
    for (int j = 1; j <= J; ++j) {
        if (plan.T[j - 1] > BigInt(N / 16)) ++out.reduced_levels;
        long double l2 = 0;
        for (int i = 0; i < N; ++i) {
            s[i] += c.a[j - 1] * wave.psi_scaled(plan.T[j - 1], i);
            s_star[i] = std::max(s_star[i], std::abs(s[i]));
            l2 += s[i] * s[i];
        }
        if (chi2 > 0) out.l2_ratio = std::max(out.l2_ratio, static_cast<double>(l2 / N) / chi2);
    }
    std::sort(s_star.begin(), s_star.end(), std::greater<>());
    out.s_star_sup = s_star.front();
    if (chi2 > 0)
        for (int r = 0; r < N; ++r)
            out.weak_constant = std::max(out.weak_constant, s_star[r] * s_star[r] * (r + 1) / N / chi2);
    return out;
}

DampingResult build_damping(const BoundaryWave& wave, const LacunaryPlan& plan, const CoefficientSequence& c,
                            DampingVariant variant) {
    const int N = wave.resolution();
    const int J = std::min<int>(plan.levels(), static_cast<int>(c.a.size()));
    if (J < 1) throw PreconditionError("need at least one level");
    const bool positive = variant == DampingVariant::PositiveVanishing;
    if (positive)
        for (int j = 1; j <= J; ++j)
            if (c.a[j - 1] != -0.25 / j) throw PreconditionError("positive variant needs a_j = -1/(4j)");
    const double chi = c.chi_hat();

    DampingResult out;
    out.variant = variant;
    std::vector<double> L(N, 1.0), s(N, 0.0), st(N, 0.0), sig(N, positive ? 1.0 : 0.0);
    std::map<int, FamilyMemory> memK, memF;  // keyed by threshold index i

    for (int j = 1; j <= J; ++j) {
        const BigInt& T = plan.T[j - 1];
        if (T > BigInt(N / 16)) ++out.reduced_levels;
        const double a = c.a[j - 1];
        LevelRecord rec;
        rec.level = j;
        rec.sigma_min = 1e300;
        for (int i = 0; i < N; ++i) {
            const double p = wave.psi_scaled(T, i);
            s[i] += a * p;
            st[i] += a * (p + wave.b_bar);
            sig[i] += a * L[i] * (p + wave.b_bar);
            rec.sigma_sup = std::max(rec.sigma_sup, std::abs(sig[i]));
            rec.sigma_min = std::min(rec.sigma_min, sig[i]);
            if (positive && !(sig[i] > 0)) ++out.positivity_violations;
        }
        out.L.push_back(L);
        out.sigma.push_back(sig);
        out.sup_sigma = std::max(out.sup_sigma, rec.sigma_sup);
        if (j == J) {
            out.levels.push_back(rec);
            break;
        }

        // Closed-cube aggregates. A node on a cube boundary also belongs to the left neighbour.
        std::map<BigInt, CubeAgg> cubes;
        std::vector<BigInt> cube_of(N);
        for (int i = 0; i < N; ++i) {
            const BigInt q = T * i;
            const BigInt cube = q / N;
            cube_of[i] = cube;
            merge_into(cubes[cube], s[i], st[i], sig[i], L[i]);
            if (q % N == 0) merge_into(cubes[cube == 0 ? T - 1 : cube - 1], s[i], st[i], sig[i], L[i]);
        }

        std::set<BigInt> flagged;
        double glob_s = 0, glob_st = -1e300;
        for (const auto& [id, ag] : cubes) {
            glob_s = std::max(glob_s, ag.s_abs_max);
            glob_st = std::max(glob_st, ag.st_max);
        }
        // Scan order: cubes ascending; K, then F, then H.
        for (const auto& [id, ag] : cubes) {
            bool in_k = false, in_f = false, in_h = false;
            if (!positive) {
                for (int ii = 1; chi > 0 && 8 * ii * chi < glob_s; ++ii)
                    if (ag.s_abs_max > 8 * ii * chi && !memK[ii].covered(plan, j, id)) {
                        memK[ii].chosen[j].insert(id);
                        in_k = true;
                    }
            } else {
                for (int ii = 1; ii < glob_st; ++ii)
                    if (ag.st_max > ii && !memK[ii].covered(plan, j, id)) {
                        memK[ii].chosen[j].insert(id);
                        in_k = true;
                    }
                for (int ii = 1; ii <= 62 && ag.sig_min < std::ldexp(1.0, -ii); ++ii)
                    if (!memF[ii].covered(plan, j, id)) {
                        memF[ii].chosen[j].insert(id);
                        in_f = true;
                    }
                for (int ii = 1; ii <= 62; ++ii)
                    if (ag.st_min < -std::ldexp(1.0, ii) / (ii + 1) && ag.L_max > std::ldexp(1.0, -ii)) in_h = true;
            }
            if (in_k)
                ++rec.family_k;
            else if (in_f)
                ++rec.family_f;
            else if (in_h)
                ++rec.family_h;
            if (in_k || in_f || in_h) flagged.insert(id);
        }

        // zeta_j = theta_eps * chi_F2 with eps = 1/(16 T_j); in cube units the
        // mollifier has width 1/16 and F2 is the complement of the 1/8-dilation.
        std::vector<double> Lnext(N);
        for (int i = 0; i < N; ++i) {
            double covered_mass = 0;
            if (!flagged.empty()) {
                const BigInt q = T * i;
                const BigInt& cube = cube_of[i];
                const double off = static_cast<double>(q - cube * N) / N;  // node position inside its cube
                std::vector<std::pair<double, double>> iv;
                for (int d = -1; d <= 1; ++d) {
                    BigInt id = cube + d;
                    if (id < 0) id += T;
                    if (id >= T) id -= T;
                    if (flagged.count(id)) iv.emplace_back(d - off - 0.125, d + 1 - off + 0.125);
                }
                std::sort(iv.begin(), iv.end());
                double lo = -1e300, hi = -1e300;
                auto flush = [&] {
                    if (hi > lo) covered_mass += bump_cdf(hi * 16) - bump_cdf(lo * 16);
                };
                for (const auto& [x0, x1] : iv) {
                    if (x0 > hi) {
                        flush();
                        lo = x0;
                        hi = x1;
                    } else {
                        hi = std::max(hi, x1);
                    }
                }
                flush();
            }
            const double zeta = std::clamp(1 - covered_mass, 0.0, 1.0);
            Lnext[i] = 0.5 * (zeta + 1) * L[i];
        }
        rec.ratio_min = 1;
        rec.ratio_max = 0;
        for (int i = 0; i < N; ++i) {
            const double r = Lnext[i] / L[i];
            rec.ratio_min = std::min(rec.ratio_min, r);
            rec.ratio_max = std::max(rec.ratio_max, r);
            const double lip = std::abs(Lnext[(i + 1) % N] - Lnext[i]) * N;
            rec.lipschitz_over_T = std::max(rec.lipschitz_over_T, static_cast<double>(lip / to_ld(T)));
        }
        out.levels.push_back(rec);
        L = std::move(Lnext);
    }
    return out;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0;
    const auto k = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

DivergenceReport divergence_statistics(const DampingResult& d, double threshold) {
    DivergenceReport r;
    r.threshold = threshold;
    const int J = static_cast<int>(d.sigma.size());
    if (J == 0) return r;
    const int N = static_cast<int>(d.sigma[0].size());
    std::vector<double> hi(N, -1e300), lo(N, 1e300);
    std::vector<DivergenceRow> rows(J);
    for (int m = J; m >= 1; --m) {  // tails accumulate from the top level down
        std::vector<double> osc(N);
        int above = 0;
        for (int i = 0; i < N; ++i) {
            hi[i] = std::max(hi[i], d.sigma[m - 1][i]);
            lo[i] = std::min(lo[i], d.sigma[m - 1][i]);
            osc[i] = hi[i] - lo[i];
            if (osc[i] > threshold) ++above;
        }
        rows[m - 1] = {m, static_cast<double>(above) / N, quantile(osc, 0.5)};
    }
    r.rows = rows;
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) r.final_quantiles.push_back(quantile(d.sigma.back(), q));
    return r;
}

}  // namespace plap
