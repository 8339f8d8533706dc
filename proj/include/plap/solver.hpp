#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "plap/aharmonic.hpp"
#include "plap/exponents.hpp"

namespace plap {

// Reduced slab for k = 1: a periodic lateral coordinate x in [-tau/2, tau/2)
// and z = |x''| in [0, H]. For n-k >= 2 the data are taken radial in x'' and
// the energy carries the weight z^(n-k-1). Node spacing may be graded.
struct SlabGrid {
    Geometry geometry;
    double tau = 1;
    double H = 4;
    std::vector<double> x;  // nx lateral nodes, increasing
    std::vector<double> z;  // nz+1 levels, z[0] = 0, z[nz] = H

    int nx() const { return static_cast<int>(x.size()); }
    int nz() const { return static_cast<int>(z.size()) - 1; }
    double hx(int i) const;  // x[i+1] - x[i] with periodic wrap
    double hz(int j) const { return z[j + 1] - z[j]; }
    double h() const;        // smallest spacing in either direction
    double weight(double zc) const;

    static SlabGrid uniform(const Geometry& g, double tau, int nx, double H, int nz);
    // sinh-graded spacing, finest (about h_min) at x = 0 and z = 0.
    static SlabGrid graded(const Geometry& g, double tau, int nx, double H, int nz, double h_min);
    // Uniform lateral spacing, sinh-graded levels finest at z = 0.
    static SlabGrid layered(const Geometry& g, double tau, int nx, double H, int nz, double hz_min);
};

void validate(const SlabGrid& grid);

enum class NodeTag { BottomDirichlet, TopDirichlet, Interior };

struct ScalarField {
    SlabGrid grid;
    std::vector<double> values;  // level-major: values[j * nx + i]
    bool top_free = false;

    double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
    NodeTag tag(int j) const;
    double sample(double x, double z) const;   // bilinear, periodic in x
    double nearest(double x, double z) const;  // value at the nearest node
    double level_mean(int j) const;            // trapezoidal period mean
};

using Datum = std::function<double(double)>;

// Closure at z = H: natural (free) boundary, Dirichlet at the datum period
// mean, or Dirichlet at a given value.
enum class TopClosure { Free, DatumMean, Value };

struct SolverOptions {
    double eps0 = 1e-2;        // initial eps relative to the datum Lipschitz scale
    double eps_final = 1e-8;   // final eps relative to the same scale
    double eps_factor = 0.5;   // continuation factor
    double tol = 1e-9;         // final relative residual
    double stage_tol = 1e-6;   // residual for intermediate eps stages
    int max_iter = 100;        // Newton iterations per stage
    int max_total = 4000;
    TopClosure top = TopClosure::Free;
    double top_value = 0;      // used with TopClosure::Value
};

struct SolveReport {
    std::vector<double> residual_history;
    std::vector<double> energy_history;
    std::vector<int> stage_of_iter;
    double eps_final = 0;
    double lipschitz_scale = 0;
    double residual = 0;
    double top_value = 0;      // Dirichlet value, or the initial guess for a free top
    int newton_steps = 0;
    int gd_steps = 0;
};

// Minimizes sum_T |T| w_T f_eps(grad u) with bottom Dirichlet = datum,
// the chosen top closure and periodic lateral wrap.
ScalarField solve(const SlabGrid& grid, const Datum& datum, const TiltedNorm& tn,
                  const SolverOptions& opt = {}, SolveReport* report = nullptr);

// Regularized discrete energy of a field at a given eps.
double discrete_energy(const ScalarField& field, const TiltedNorm& tn, double eps);

double datum_mean(const SlabGrid& grid, const Datum& datum);

// Header line with the run parameters followed by one block of nx values per level.
void write_grid_dump(std::ostream& os, const ScalarField& field, double eps, double tol);

}  // namespace plap
