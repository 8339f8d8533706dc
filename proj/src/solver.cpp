#include "plap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "plap/errors.hpp"

namespace plap {

namespace {

// Solves a / sinh(a) = r for a >= 0 (r in (0, 1]).
double sinh_stretch(double r) {
    if (r >= 1) return 0;
    double lo = 0, hi = 1;
    while (hi / std::sinh(hi) > r) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid / std::sinh(mid) > r) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct Tilt {
    double ax = 0, az = 0;
};

Tilt reduced_tilt(const SlabGrid& grid, const TiltedNorm& tn) {
    const Geometry& g = grid.geometry;
    if (tn.a.empty()) return {};
    validate(tn, g.n);
    if (tn.p != g.p) throw DomainError("tilted norm exponent must equal the geometry exponent");
    Tilt t{tn.a[0], 0};
    if (g.n - g.k == 1) {
        t.az = tn.a[1];
    } else {
        for (int i = g.k; i < g.n; ++i)
            if (tn.a[i] != 0) throw DomainError("radial reduction requires a'' = 0 when n-k >= 2");
    }
    return t;
}

struct Local {
    double f, fx, fz, hxx, hxz, hzz;
};

// f_eps(eta) = (sqrt(|eta|^2 + eps^2) + <a, eta>)^p / p with gradient and Hessian.
inline Local density(double gx, double gz, double p, double eps, const Tilt& a, bool quadratic) {
    Local L;
    if (quadratic) {
        L.f = 0.5 * (gx * gx + gz * gz);
        L.fx = gx;
        L.fz = gz;
        L.hxx = 1;
        L.hxz = 0;
        L.hzz = 1;
        return L;
    }
    const double r = std::sqrt(gx * gx + gz * gz + eps * eps);
    const double vx = gx / r + a.ax, vz = gz / r + a.az;
    const double q = r + a.ax * gx + a.az * gz;
    const double qp2 = std::pow(q, p - 2);
    const double qp1 = qp2 * q;
    L.f = qp1 * q / p;
    L.fx = qp1 * vx;
    L.fz = qp1 * vz;
    const double c1 = (p - 1) * qp2, c2 = qp1 / r, r2 = r * r;
    L.hxx = c1 * vx * vx + c2 * (1 - gx * gx / r2);
    L.hxz = c1 * vx * vz - c2 * gx * gz / r2;
    L.hzz = c1 * vz * vz + c2 * (1 - gz * gz / r2);
    return L;
}

class Assembler {
public:
    using SpMat = Eigen::SparseMatrix<double>;

    Assembler(const SlabGrid& grid, const Tilt& tilt, bool free_top)
        : grid_(grid), tilt_(tilt), free_top_(free_top) {
        nx_ = grid.nx();
        nz_ = grid.nz();
        nfree_ = nx_ * (free_top ? nz_ : nz_ - 1);
        build_pattern();
    }

    int nfree() const { return nfree_; }
    int free_id(int node) const {
        const int j = node / nx_;
        return (j == 0 || (j == nz_ && !free_top_)) ? -1 : node - nx_;
    }

    double energy(const std::vector<double>& u, double eps, bool quadratic) const {
        long double e = 0;
        for_each_tri([&](int, const int* nd, const double* cx, const double* cz, double m) {
            double gx = 0, gz = 0;
            for (int a = 0; a < 3; ++a) {
                gx += cx[a] * u[nd[a]];
                gz += cz[a] * u[nd[a]];
            }
            e += m * density(gx, gz, grid_.geometry.p, eps, tilt_, quadratic).f;
        });
        return static_cast<double>(e);
    }

    // Gradient on free nodes, absolute flux scale, and (optionally) Hessian values.
    void gradient(const std::vector<double>& u, double eps, bool quadratic, Eigen::VectorXd& g,
                  Eigen::VectorXd& scale, SpMat* hess) const {
        g.setZero(nfree_);
        scale.setZero(nfree_);
        if (hess) std::fill(hess->valuePtr(), hess->valuePtr() + hess->nonZeros(), 0.0);
        for_each_tri([&](int t, const int* nd, const double* cx, const double* cz, double m) {
            double gx = 0, gz = 0;
            for (int a = 0; a < 3; ++a) {
                gx += cx[a] * u[nd[a]];
                gz += cz[a] * u[nd[a]];
            }
            const Local L = density(gx, gz, grid_.geometry.p, eps, tilt_, quadratic);
            for (int a = 0; a < 3; ++a) {
                const int fa = free_id(nd[a]);
                if (fa < 0) continue;
                const double c = m * (L.fx * cx[a] + L.fz * cz[a]);
                g[fa] += c;
                scale[fa] += std::abs(c);
            }
            if (!hess) return;
            double* val = hess->valuePtr();
            const int* pos = &pos_[static_cast<std::size_t>(t) * 6];
            int s = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b <= a; ++b, ++s) {
                    if (pos[s] < 0) continue;
                    val[pos[s]] += m * (cx[a] * (L.hxx * cx[b] + L.hxz * cz[b]) +
                                        cz[a] * (L.hxz * cx[b] + L.hzz * cz[b]));
                }
        });
    }

    SpMat pattern() const { return pattern_; }

private:
    template <class F>
    void for_each_tri(F&& fn) const {
        int nd[3];
        double cx[3], cz[3];
        for (int j = 0; j < nz_; ++j) {
            const double hz = grid_.hz(j);
            for (int i = 0; i < nx_; ++i) {
                const double hx = grid_.hx(i);
                const int ip = (i + 1) % nx_;
                const int n00 = j * nx_ + i, n10 = j * nx_ + ip;
                const int n01 = (j + 1) * nx_ + i, n11 = (j + 1) * nx_ + ip;
                const int corner[4][3] = {{n00, n10, n01}, {n10, n00, n11}, {n01, n11, n00}, {n11, n01, n10}};
                const double sx[4] = {1, -1, 1, -1}, sz[4] = {1, 1, -1, -1};
                const double zc[4] = {grid_.z[j] + hz / 3, grid_.z[j] + hz / 3,
                                       grid_.z[j + 1] - hz / 3, grid_.z[j + 1] - hz / 3};
                for (int c = 0; c < 4; ++c) {
                    nd[0] = corner[c][0];
                    nd[1] = corner[c][1];
                    nd[2] = corner[c][2];
                    cx[0] = -sx[c] / hx;
                    cz[0] = -sz[c] / hz;
                    cx[1] = sx[c] / hx;
                    cz[1] = 0;
                    cx[2] = 0;
                    cz[2] = sz[c] / hz;
                    const double m = 0.25 * hx * hz * grid_.weight(zc[c]);
                    fn((j * nx_ + i) * 4 + c, nd, cx, cz, m);
                }
            }
        }
    }

    void build_pattern() {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nx_) * nz_ * 4 * 6);
        for_each_tri([&](int, const int* nd, const double*, const double*, double) {
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b <= a; ++b) {
                    int r = free_id(nd[a]), c = free_id(nd[b]);
                    if (r < 0 || c < 0) continue;
                    if (r < c) std::swap(r, c);
                    trip.emplace_back(r, c, 0.0);
                }
        });
        pattern_.resize(nfree_, nfree_);
        pattern_.setFromTriplets(trip.begin(), trip.end());
        pattern_.makeCompressed();
        pos_.assign(static_cast<std::size_t>(nx_) * nz_ * 4 * 6, -1);
        const int* outer = pattern_.outerIndexPtr();
        const int* inner = pattern_.innerIndexPtr();
        for_each_tri([&](int t, const int* nd, const double*, const double*, double) {
            int s = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b <= a; ++b, ++s) {
                    int r = free_id(nd[a]), c = free_id(nd[b]);
                    if (r < 0 || c < 0) continue;
                    if (r < c) std::swap(r, c);
                    const int* lo = inner + outer[c];
                    const int* hi = inner + outer[c + 1];
                    pos_[static_cast<std::size_t>(t) * 6 + s] =
                        static_cast<int>(std::lower_bound(lo, hi, r) - inner);
                }
        });
    }

    const SlabGrid& grid_;
    Tilt tilt_;
    bool free_top_ = false;
    int nx_ = 0, nz_ = 0, nfree_ = 0;
    SpMat pattern_;
    std::vector<int> pos_;
};

double relative_residual(const Eigen::VectorXd& g, const Eigen::VectorXd& scale) {
    if (g.size() == 0) return 0;
    const double s = scale.lpNorm<Eigen::Infinity>();
    const double r = g.lpNorm<Eigen::Infinity>();
    return s > 0 ? r / s : r;
}

}  // namespace

double SlabGrid::hx(int i) const {
    const int n = nx();
    return (i + 1 < n) ? x[i + 1] - x[i] : x[0] + tau - x[n - 1];
}

double SlabGrid::h() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nx(); ++i) m = std::min(m, hx(i));
    for (int j = 0; j < nz(); ++j) m = std::min(m, hz(j));
    return m;
}

double SlabGrid::weight(double zc) const {
    const int e = geometry.n - geometry.k - 1;
    return e == 0 ? 1.0 : std::pow(zc, e);
}

SlabGrid SlabGrid::uniform(const Geometry& g, double tau, int nx, double H, int nz) {
    SlabGrid s;
    s.geometry = g;
    s.tau = tau;
    s.H = H;
    s.x.resize(nx);
    s.z.resize(nz + 1);
    for (int i = 0; i < nx; ++i) s.x[i] = -0.5 * tau + tau * i / nx;
    for (int j = 0; j <= nz; ++j) s.z[j] = H * j / nz;
    s.z[nz] = H;
    return s;
}

SlabGrid SlabGrid::graded(const Geometry& g, double tau, int nx, double H, int nz, double h_min) {
    if (!(h_min > 0)) throw DomainError("graded grid requires h_min > 0");
    SlabGrid s = uniform(g, tau, nx, H, nz);
    const double a = sinh_stretch(h_min * nx / tau);
    if (a > 0) {
        for (int i = 0; i < nx; ++i) {
            const double xi = -0.5 + static_cast<double>(i) / nx;
            s.x[i] = 0.5 * tau * std::sinh(2 * a * xi) / std::sinh(a);
        }
    }
    const double b = sinh_stretch(h_min * nz / H);
    if (b > 0) {
        for (int j = 0; j <= nz; ++j)
            s.z[j] = H * std::sinh(b * static_cast<double>(j) / nz) / std::sinh(b);
        s.z[nz] = H;
    }
    return s;
}

SlabGrid SlabGrid::layered(const Geometry& g, double tau, int nx, double H, int nz, double hz_min) {
    SlabGrid s = graded(g, tau, nx, H, nz, hz_min);
    s.x = uniform(g, tau, nx, H, nz).x;
    return s;
}

void validate(const SlabGrid& grid) {
    validate(grid.geometry);
    if (grid.geometry.k != 1) throw RegimeError("reduced slab solver supports k = 1 only");
    if (!(grid.tau > 0)) throw DomainError("tau > 0 violated");
    if (!(grid.H / grid.tau >= 4)) throw DomainError("H/tau >= 4 violated");
    if (grid.nx() < 4 || grid.nz() < 2) throw DomainError("grid needs nx >= 4 and nz >= 2");
    for (int i = 0; i + 1 < grid.nx(); ++i)
        if (!(grid.x[i + 1] > grid.x[i])) throw DomainError("lateral nodes must increase");
    if (!(grid.x.front() >= -0.5 * grid.tau && grid.x.back() < 0.5 * grid.tau))
        throw DomainError("lateral nodes must lie in [-tau/2, tau/2)");
    if (grid.z.front() != 0 || grid.z.back() != grid.H) throw DomainError("levels must span [0, H]");
    for (int j = 0; j < grid.nz(); ++j)
        if (!(grid.z[j + 1] > grid.z[j])) throw DomainError("levels must increase");
}

NodeTag ScalarField::tag(int j) const {
    if (j == 0) return NodeTag::BottomDirichlet;
    if (j == grid.nz() && !top_free) return NodeTag::TopDirichlet;
    return NodeTag::Interior;
}

namespace {

// Lateral cell containing x (periodic) and its local coordinate in [0, 1).
std::pair<int, double> locate_x(const SlabGrid& g, double x) {
    double y = x - g.tau * std::floor((x + 0.5 * g.tau) / g.tau);  // into [-tau/2, tau/2)
    if (y < g.x.front()) y += g.tau;
    auto it = std::upper_bound(g.x.begin(), g.x.end(), y);
    const int i = static_cast<int>(it - g.x.begin()) - 1;
    return {i, (y - g.x[i]) / g.hx(i)};
}

std::pair<int, double> locate_z(const SlabGrid& g, double z) {
    if (z <= 0) return {0, 0.0};
    if (z >= g.H) return {g.nz() - 1, 1.0};
    auto it = std::upper_bound(g.z.begin(), g.z.end(), z);
    const int j = static_cast<int>(it - g.z.begin()) - 1;
    return {j, (z - g.z[j]) / g.hz(j)};
}

}  // namespace

double ScalarField::sample(double x, double z) const {
    const auto [i, sx] = locate_x(grid, x);
    const auto [j, sz] = locate_z(grid, z);
    const int ip = (i + 1) % grid.nx();
    return (1 - sx) * (1 - sz) * at(i, j) + sx * (1 - sz) * at(ip, j) + (1 - sx) * sz * at(i, j + 1) +
           sx * sz * at(ip, j + 1);
}

double ScalarField::nearest(double x, double z) const {
    const auto [i, sx] = locate_x(grid, x);
    const auto [j, sz] = locate_z(grid, z);
    return at(sx < 0.5 ? i : (i + 1) % grid.nx(), sz < 0.5 ? j : j + 1);
}

double ScalarField::level_mean(int j) const {
    const int nx = grid.nx();
    long double s = 0;
    for (int i = 0; i < nx; ++i) s += at(i, j) * 0.5 * (grid.hx(i) + grid.hx((i + nx - 1) % nx));
    return static_cast<double>(s / grid.tau);
}

double datum_mean(const SlabGrid& grid, const Datum& datum) {
    const int nx = grid.nx();
    long double s = 0;
    for (int i = 0; i < nx; ++i)
        s += datum(grid.x[i]) * 0.5 * (grid.hx(i) + grid.hx((i + nx - 1) % nx));
    return static_cast<double>(s / grid.tau);
}

double discrete_energy(const ScalarField& field, const TiltedNorm& tn, double eps) {
    const Assembler as(field.grid, reduced_tilt(field.grid, tn), false);
    return as.energy(field.values, eps, false);
}

ScalarField solve(const SlabGrid& grid, const Datum& datum, const TiltedNorm& tn,
                  const SolverOptions& opt, SolveReport* report) {
    validate(grid);
    const Tilt tilt = reduced_tilt(grid, tn);
    if (!(opt.eps0 > 0 && opt.eps_final > 0 && opt.eps_factor > 0 && opt.eps_factor < 1))
        throw DomainError("eps schedule must be positive with factor in (0, 1)");
    const int nx = grid.nx(), nz = grid.nz();

    ScalarField field{grid, std::vector<double>(static_cast<std::size_t>(nx) * (nz + 1), 0.0)};
    double lip = 0;
    for (int i = 0; i < nx; ++i) {
        field.at(i, 0) = datum(grid.x[i]);
        if (!std::isfinite(field.at(i, 0))) throw DomainError("datum must be finite");
    }
    for (int i = 0; i < nx; ++i)
        lip = std::max(lip, std::abs(field.at((i + 1) % nx, 0) - field.at(i, 0)) / grid.hx(i));
    if (lip == 0) lip = 1;
    const bool free_top = opt.top == TopClosure::Free;
    const double top = opt.top == TopClosure::Value ? opt.top_value : datum_mean(grid, datum);
    for (int i = 0; i < nx; ++i) field.at(i, nz) = top;  // initial guess only when the top is free
    field.top_free = free_top;

    SolveReport rep;
    rep.lipschitz_scale = lip;
    rep.top_value = top;

    Assembler as(grid, tilt, free_top);
    const int N = as.nfree();
    using SpMat = Assembler::SpMat;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt, lap;
    SpMat H = as.pattern(), K = as.pattern();
    ldlt.analyzePattern(H);
    lap.analyzePattern(K);
    Eigen::VectorXd g(N), scale(N), d(N);

    auto apply = [&](const std::vector<double>& base, const Eigen::VectorXd& dir, double alpha) {
        std::vector<double> out = base;
        for (int m = 0; m < N; ++m) out[static_cast<std::size_t>(m) + nx] += alpha * dir[m];
        return out;
    };

    // Harmonic initial guess; its stiffness doubles as the descent preconditioner.
    as.gradient(field.values, 0, true, g, scale, &K);
    lap.factorize(K);
    if (lap.info() != Eigen::Success) throw NonConvergenceError("stiffness factorization failed", {});
    d = -lap.solve(g);
    field.values = apply(field.values, d, 1.0);

    const bool quadratic = grid.geometry.p == 2 && tilt.ax == 0 && tilt.az == 0;
    const double eps_end = opt.eps_final * lip;
    double eps = std::max(opt.eps0 * lip, eps_end);
    int stage = 0, total = 0;
    for (;;) {
        const bool last = eps <= eps_end * (1 + 1e-12);
        const double target = last ? opt.tol : std::max(opt.stage_tol, opt.tol);
        double E = as.energy(field.values, eps, quadratic);
        for (int it = 0;; ++it) {
            as.gradient(field.values, eps, quadratic, g, scale, &H);
            const double res = relative_residual(g, scale);
            rep.residual_history.push_back(res);
            rep.energy_history.push_back(E);
            rep.stage_of_iter.push_back(stage);
            rep.residual = res;
            if (res <= target) break;
            if (it >= opt.max_iter || ++total > opt.max_total)
                throw NonConvergenceError("Newton iteration limit reached at eps = " + std::to_string(eps),
                                          rep.residual_history);

            ldlt.factorize(H);
            bool newton = ldlt.info() == Eigen::Success;
            if (newton) {
                d = -ldlt.solve(g);
                newton = d.allFinite() && g.dot(d) < 0;
            }
            bool accepted = false;
            for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
                const bool use_newton = newton && attempt == 0;
                if (!use_newton) d = -lap.solve(g);
                const double slope = g.dot(d);
                double alpha = 1;
                for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
                    std::vector<double> trial = apply(field.values, d, alpha);
                    const double Et = as.energy(trial, eps, quadratic);
                    if (Et <= E + 1e-4 * alpha * slope) {
                        field.values = std::move(trial);
                        E = Et;
                        accepted = true;
                        break;
                    }
                    // Energy differences below rounding: accept a full Newton step
                    // that reduces the residual.
                    if (use_newton && ls == 0 && std::abs(Et - E) <= 1e-13 * std::abs(E)) {
                        Eigen::VectorXd g2(N), s2(N);
                        as.gradient(trial, eps, quadratic, g2, s2, nullptr);
                        if (relative_residual(g2, s2) < 0.5 * res) {
                            field.values = std::move(trial);
                            E = Et;
                            accepted = true;
                            break;
                        }
                    }
                }
                if (accepted) (use_newton ? rep.newton_steps : rep.gd_steps)++;
            }
            if (!accepted) {
                if (res <= 10 * target) break;
                throw NonConvergenceError("line search stalled at eps = " + std::to_string(eps),
                                          rep.residual_history);
            }
        }
        if (last) break;
        eps = std::max(eps * opt.eps_factor, eps_end);
        ++stage;
    }
    rep.eps_final = eps;
    if (report) *report = std::move(rep);
    return field;
}

void write_grid_dump(std::ostream& os, const ScalarField& field, double eps, double tol) {
    const SlabGrid& g = field.grid;
    os.precision(17);
    os << "n " << g.geometry.n << " k " << g.geometry.k << " p " << g.geometry.p << " tau " << g.tau
       << " nx " << g.nx() << " H " << g.H << " nz " << g.nz() << " eps " << eps << " tol " << tol
       << "\n";
    os << "x";
    for (double v : g.x) os << ' ' << v;
    os << "\nz";
    for (double v : g.z) os << ' ' << v;
    os << "\n";
    for (int j = 0; j <= g.nz(); ++j) {
        for (int i = 0; i < g.nx(); ++i) os << (i ? " " : "") << field.at(i, j);
        os << "\n\n";
    }
}

}  // namespace plap
