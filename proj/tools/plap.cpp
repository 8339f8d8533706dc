#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "plap/aharmonic.hpp"
#include "plap/counterexample.hpp"
#include "plap/errors.hpp"
#include "plap/exponents.hpp"
#include "plap/gapseries.hpp"
#include "plap/measure.hpp"
#include "plap/profile.hpp"
#include "plap/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace plap;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Context {
    fs::path out = ".";
    std::string command;
    json params = json::object();
};

json check(const std::string& name, double measured, const std::string& target, const std::string& tolerance,
           bool pass) {
    return {{"name", name}, {"measured", measured}, {"target", target}, {"tolerance", tolerance}, {"pass", pass}};
}

void write_json(const Context& ctx, const std::string& stem, const json& j) {
    fs::create_directories(ctx.out);
    std::ofstream(ctx.out / (stem + ".json")) << j.dump(2) << "\n";
}

std::ofstream open_csv(const Context& ctx, const std::string& stem) {
    fs::create_directories(ctx.out);
    std::ofstream os(ctx.out / (stem + ".csv"));
    os.precision(17);
    return os;
}

void write_manifest(const Context& ctx) {
    json m{{"command", ctx.command}, {"params", ctx.params}, {"version", kVersion}};
    write_json(ctx, ctx.command + ".manifest", m);
}

// Echo every option of the selected subcommand, given or defaulted.
json collect_params(const CLI::App* sub) {
    json p = json::object();
    for (const CLI::Option* o : sub->get_options()) {
        if (o->get_lnames().empty()) continue;
        const std::string name = o->get_lnames().front();
        if (name == "help") continue;
        if (o->count() > 0) {
            const auto& res = o->results();
            if (o->get_expected_max() > 1)
                p[name] = res;
            else
                p[name] = res.empty() ? std::string("true") : res.front();
        } else if (!o->get_default_str().empty()) {
            p[name] = o->get_default_str();
        }
    }
    return p;
}

std::vector<std::string> expand_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.empty()) throw ValidationError("config: field 'command' is required (empty config)");
    if (!j.contains("command") || !j["command"].is_string())
        throw ValidationError("config: field 'command' is required and must be a string");
    std::vector<std::string> args{j["command"].get<std::string>()};
    for (const auto& [key, val] : j.items()) {
        if (key == "command") continue;
        args.push_back("--" + key);
        if (val.is_boolean()) {
            if (!val.get<bool>()) args.pop_back();
        } else if (val.is_array()) {
            for (const auto& v : val) args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else if (val.is_string()) {
            args.push_back(val.get<std::string>());
        } else if (val.is_number()) {
            args.push_back(val.dump());
        } else {
            throw ValidationError("config: field '" + key + "' must be a scalar or an array");
        }
    }
    return args;
}

Datum make_datum(const std::string& kind, double width, double h) {
    if (kind == "bump") return [width](double x) { return plateau_bump(x, width); };
    if (kind == "cosine") return [](double x) { return std::cos(2 * std::numbers::pi * x); };
    return [width, h](double x) { return mollified_indicator(x, width, h); };
}

SlabGrid make_grid(const std::string& kind, const Geometry& g, double tau, int nx, double H, int nz, double h_min) {
    if (kind == "uniform") return SlabGrid::uniform(g, tau, nx, H, nz);
    if (kind == "graded") return SlabGrid::graded(g, tau, nx, H, nz, h_min);
    return SlabGrid::layered(g, tau, nx, H, nz, h_min);
}

TopClosure parse_top(const std::string& s) {
    if (s == "free") return TopClosure::Free;
    if (s == "mean") return TopClosure::DatumMean;
    return TopClosure::Value;
}

json report_json(const SolveReport& r) {
    return {{"residual", r.residual},         {"eps_final", r.eps_final}, {"lipschitz_scale", r.lipschitz_scale},
            {"newton_steps", r.newton_steps}, {"gd_steps", r.gd_steps},   {"top_value", r.top_value},
            {"residual_history", r.residual_history}};
}

DampingVariant parse_variant(const std::string& s) {
    return s == "vanishing" ? DampingVariant::PositiveVanishing : DampingVariant::BoundedDivergent;
}

// ---- report ----

int run_report(const fs::path& dir) {
    std::vector<std::pair<std::string, json>> rows;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            if (e.path().extension() != ".json" || name.ends_with(".manifest.json") || name == "report.json") continue;
            std::ifstream is(e.path());
            json j;
            try {
                is >> j;
            } catch (const json::exception&) {
                continue;
            }
            if (j.contains("checks"))
                for (const auto& c : j["checks"]) rows.emplace_back(name, c);
        }
    if (rows.empty())
        throw MissingArtifactError("no run artifacts with checks in '" + dir.string() + "'",
                                   {"exponents.json", "classify.json", "aharm_sign_table.json", "measure_sweep.json",
                                    "psi.json", "gapseries.json", "counterexample.json"});
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    int failed = 0;
    json out = json::array();
    for (const auto& [file, c] : rows) {
        const bool pass = c.value("pass", false);
        failed += !pass;
        fmt::print("{} | {} | measured {} | target {} | tolerance {} | {}\n", pass ? "PASS" : "FAIL",
                   c.value("name", "?"), c.contains("measured") ? c["measured"].dump() : "-", c.value("target", "-"),
                   c.value("tolerance", "-"), file);
        json row = c;
        row["artifact"] = file;
        out.push_back(row);
    }
    std::ofstream(dir / "report.json") << json{{"rows", out}, {"failed", failed}}.dump(2) << "\n";
    fmt::print("{} of {} checks passed\n", rows.size() - failed, rows.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // --config file.json replaces the command line
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--config") {
                std::vector<std::string> rest(args.begin(), args.begin() + i);
                const auto expanded = expand_config(args[i + 1]);
                rest.insert(rest.end(), expanded.begin(), expanded.end());
                rest.insert(rest.end(), args.begin() + i + 2, args.end());
                args = rest;
                break;
            }
        if (!args.empty() && args.back() == "--config") throw ValidationError("config: missing file name");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"p-Laplacian boundary behaviour toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();  // subcommands pass --out up to the main app
    Context ctx;
    std::string out_dir = ".";
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    Geometry geo{3, 1, 3.0};
    auto add_geometry = [&](CLI::App* s) {
        s->add_option("--n", geo.n, "ambient dimension")->capture_default_str();
        s->add_option("--k", geo.k, "dimension of the boundary plane")->capture_default_str();
        s->add_option("--p", geo.p, "exponent of the p-Laplacian")->capture_default_str();
    };

    // exponents
    auto* s_exp = app.add_subcommand("exponents", "thresholds chi, chi_breve and beta");
    add_geometry(s_exp);
    std::vector<double> coeff_at;
    double capacity_r = 0;
    bool martin = false;
    s_exp->add_option("--coefficients", coeff_at, "lambda_t beta_t: evaluate A, B, C")->expected(2);
    s_exp->add_flag("--martin", martin, "half-plane Martin exponent at p");
    s_exp->add_option("--capacity-r", capacity_r, "capacity energy at radius r");

    // classify
    auto* s_cls = app.add_subcommand("classify", "sign of the p-Laplacian of the homogeneous profile");
    add_geometry(s_cls);
    double lambda = 1, beta_t = std::nan(""), at_s = std::nan(""), at_t = std::nan(""), fd_h = 1e-4;
    s_cls->add_option("--lambda", lambda, "lambda_t")->required();
    s_cls->add_option("--beta", beta_t, "beta_t (default: beta of the geometry)");
    s_cls->add_option("--s", at_s, "evaluate at |x''| = s");
    s_cls->add_option("--t", at_t, "evaluate at |x'| = t");
    s_cls->add_option("--fd-step", fd_h, "finite-difference step")->capture_default_str();

    // aharm-scan
    auto* s_ah = app.add_subcommand("aharm-scan", "tilted-norm scans");
    add_geometry(s_ah);
    std::string mode = "sign-table";
    double delta = std::nan(""), b = 0.1, a_plane = 0, a_normal = 0.1;
    int points = 10000, n_max = 1000;
    std::string orient = "plus";
    std::vector<double> a_vec, eta_vec;
    s_ah->add_option("--mode", mode)
        ->check(CLI::IsMember({"sign-table", "dimension-scan", "thresholds", "wfun", "qcalc", "tilted"}))
        ->capture_default_str();
    s_ah->add_option("--delta", delta, "bump exponent (default: the threshold delta)");
    s_ah->add_option("--lambda", lambda, "lambda (default: chi)");
    s_ah->add_option("--b", b, "normal tilt for the half-space w-functions")->capture_default_str();
    s_ah->add_option("--points", points, "grid points")->capture_default_str();
    s_ah->add_option("--n-max", n_max, "largest dimension scanned")->capture_default_str();
    s_ah->add_option("--a-plane", a_plane, "|a'|")->capture_default_str();
    s_ah->add_option("--a-normal", a_normal, "|a''|")->capture_default_str();
    s_ah->add_option("--orientation", orient)->check(CLI::IsMember({"plus", "minus", "orthogonal"}))->capture_default_str();
    s_ah->add_option("--a", a_vec, "tilt vector for qcalc");
    s_ah->add_option("--eta", eta_vec, "gradient vector for qcalc");
    bool lambda_given = false;

    // solve
    auto* s_sol = app.add_subcommand("solve", "periodic slab solve with a grid dump");
    add_geometry(s_sol);
    double tau = 1, H = 4, h_min = 1.0 / 256, width = 0.25, top_value = 0;
    int nx = 128, nz = 64;
    std::string grid_kind = "layered", datum_kind = "bump", top = "free";
    std::vector<double> tilt;
    auto add_grid = [&](CLI::App* s) {
        s->add_option("--tau", tau, "lateral period")->capture_default_str();
        s->add_option("--H", H, "slab height")->capture_default_str();
        s->add_option("--nx", nx)->capture_default_str();
        s->add_option("--nz", nz)->capture_default_str();
        s->add_option("--h-min", h_min, "finest spacing")->capture_default_str();
    };
    add_grid(s_sol);
    s_sol->add_option("--grid", grid_kind)->check(CLI::IsMember({"uniform", "graded", "layered"}))->capture_default_str();
    s_sol->add_option("--datum", datum_kind)->check(CLI::IsMember({"bump", "cosine", "indicator"}))->capture_default_str();
    s_sol->add_option("--width", width, "bump width or indicator radius")->capture_default_str();
    s_sol->add_option("--top", top)->check(CLI::IsMember({"free", "mean", "value"}))->capture_default_str();
    s_sol->add_option("--top-value", top_value)->capture_default_str();
    s_sol->add_option("--tilt", tilt, "tilt vector a of length n");

    // measure-sweep
    auto* s_ms = app.add_subcommand("measure-sweep", "harmonic measure or Martin exponent sweeps");
    std::string kind = "harmonic";
    double r_min = 1.0 / 64, r_max = 1.0 / 8;
    int radii = 7;
    std::vector<double> thresholds;
    s_ms->add_option("--kind", kind)->check(CLI::IsMember({"harmonic", "martin"}))->capture_default_str();
    add_geometry(s_ms);
    add_grid(s_ms);
    s_ms->add_option("--r-min", r_min)->capture_default_str();
    s_ms->add_option("--r-max", r_max)->capture_default_str();
    s_ms->add_option("--radii", radii)->capture_default_str();
    s_ms->add_option("--convexity", thresholds, "superlevel thresholds relative to the value at (0, 1/4)");

    // psi
    auto* s_psi = app.add_subcommand("psi", "periodic extension of a bump datum");
    double t_psi = 1.0 / 16;
    add_geometry(s_psi);
    add_grid(s_psi);
    s_psi->add_option("--t", t_psi, "bump half-width")->capture_default_str();

    // gapseries
    auto* s_gap = app.add_subcommand("gapseries", "lacunary plans and damping sequences");
    int levels = 6, log2N = 16;
    std::string variant = "vanishing", wave = "cosine";
    s_gap->add_option("--levels", levels)->capture_default_str();
    s_gap->add_option("--log2-resolution", log2N)->capture_default_str();
    s_gap->add_option("--variant", variant)->check(CLI::IsMember({"divergent", "vanishing"}))->capture_default_str();
    s_gap->add_option("--wave", wave)->check(CLI::IsMember({"cosine", "triangle"}))->capture_default_str();

    // counterexample
    auto* s_ce = app.add_subcommand("counterexample", "assemble the boundary counterexample");
    CounterexampleOptions ce;
    std::string ce_variant = "divergent";
    s_ce->add_option("--p", ce.p)->capture_default_str();
    s_ce->add_option("--levels", ce.levels)->capture_default_str();
    s_ce->add_option("--variant", ce_variant)->check(CLI::IsMember({"divergent", "vanishing"}))->capture_default_str();
    s_ce->add_option("--nx", ce.nx)->capture_default_str();
    s_ce->add_option("--nz", ce.nz)->capture_default_str();

    // report
    auto* s_rep = app.add_subcommand("report", "aggregate checks from run artifacts");
    std::string rep_dir = ".";
    s_rep->add_option("--dir", rep_dir, "directory holding run artifacts")->capture_default_str();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    ctx.command = sub->get_name();
    ctx.out = out_dir;
    ctx.params = collect_params(sub);
    ctx.params["out"] = out_dir;
    if (const CLI::Option* o = sub->get_option_no_throw("--lambda")) lambda_given = o->count() > 0;

    try {
        if (sub == s_rep) return run_report(rep_dir);

        if (sub == s_exp) {
            const ExponentSet e = compute_exponents(geo);
            json j{{"beta", e.beta}, {"chi", e.chi}, {"chi_breve", e.chi_breve}, {"coincident", e.coincident}};
            if (e.boundary) j["boundary"] = true;
            if (coeff_at.size() == 2) {
                const CoefficientTriple c = coefficients(geo, coeff_at[0], coeff_at[1]);
                j["coefficients"] = {{"A", c.A}, {"B", c.B}, {"C", c.C}};
            }
            if (martin) {
                const double s = martin_exponent_halfplane(geo.p);
                j["martin_exponent"] = s;
            }
            if (capacity_r > 0) j["capacity_energy"] = capacity_energy(geo, capacity_r);
            std::cout << j.dump() << "\n";
            json art = j;
            art["checks"] = json::array({check("chi_breve <= chi < k", e.chi, "< " + std::to_string(geo.k), "strict",
                                               e.chi_breve <= e.chi && e.chi < geo.k)});
            write_json(ctx, "exponents", art);
        } else if (sub == s_cls) {
            RadialProfile prof = canonical_profile(geo, lambda);
            if (!std::isnan(beta_t)) prof.beta_t = beta_t;
            const Classification c = classify(prof);
            std::cout << to_string(c.kind) << "\n";
            json j{{"kind", to_string(c.kind)},
                   {"at_threshold", c.at_threshold},
                   {"quad_s4", c.quad_s4},
                   {"quad_s2t2", c.quad_s2t2},
                   {"quad_t4", c.quad_t4}};
            if (c.witness) j["witness"] = {{"s", c.witness->s}, {"t", c.witness->t}};
            if (!std::isnan(at_s) && !std::isnan(at_t)) {
                std::vector<double> x(geo.n, 0.0);
                x[0] = at_t;
                x[geo.k] = at_s;
                const double exact = divergence_st(prof, at_s, at_t);
                const double fd = fd_divergence_oracle(prof, x, fd_h);
                const GradientST g = gradient_st(prof, at_s, at_t);
                j["point"] = {{"s", at_s}, {"t", at_t}, {"u", g.u}, {"u_s", g.u_s}, {"u_t", g.u_t},
                              {"divergence", exact}, {"fd_oracle", fd}, {"h", fd_h}};
                std::cout << fmt::format("divergence {:.12g} fd {:.12g}\n", exact, fd);
            }
            write_json(ctx, "classify", j);
        } else if (sub == s_ah) {
            if (mode == "sign-table") {
                const auto ws = w_grid(points, 2);
                int wrong = 0;
                auto os = open_csv(ctx, "aharm_sign_table");
                os << "b,min_sum,max_sum\n";
                for (int i = -9; i <= 9; ++i) {
                    if (i == 0) continue;
                    const double bb = 0.1 * i;
                    double lo = 1e300, hi = -1e300;
                    for (double w : ws) {
                        const WFunctions f = halfspace_w_functions(2.0, 2, 1.0, bb, w);
                        const double s = f.F1 + f.F2 + f.F3;
                        lo = std::min(lo, s);
                        hi = std::max(hi, s);
                        wrong += bb < 0 ? !(s > 0) : !(s < 0);
                    }
                    os << bb << "," << lo << "," << hi << "\n";
                }
                std::cout << fmt::format("sign errors {}\n", wrong);
                write_json(ctx, "aharm_sign_table",
                           {{"points", points},
                            {"sign_errors", wrong},
                            {"checks", json::array({check("harmonic half-plane tilt sign table", wrong, "0",
                                                          "exact", wrong == 0)})}});
            } else if (mode == "dimension-scan") {
                const DimensionScanResult r = dimension_scan(b, geo.p, n_max, points);
                std::cout << fmt::format("n' {} min {:.6g} perturbed {:.6g}\n", r.n_prime, r.min_sum,
                                         r.min_sum_perturbed);
                write_json(ctx, "aharm_dimension_scan",
                           {{"b", b},
                            {"p", geo.p},
                            {"n_prime", r.n_prime},
                            {"min_sum", r.min_sum},
                            {"min_sum_perturbed", r.min_sum_perturbed},
                            {"checks", json::array({check("large-dimension tilt scan", r.min_sum, "> 0", "strict",
                                                          r.min_sum > 0 && r.n_prime <= n_max)})}});
            } else if (mode == "thresholds") {
                const double d = std::isnan(delta) ? threshold_delta(geo) : delta;
                const AHarmonicProfile prof{geo, d, lambda_given ? lambda : compute_exponents(geo).chi};
                const Thresholds th = subsolution_threshold(prof);
                const SphereCheck sc = sphere_subsolution_check(prof, 0.5 * th.general, points);
                const double sharp = measured_sharp_threshold(prof, std::min(points, 2000));
                json j{{"delta", d},
                       {"lambda", prof.lambda},
                       {"general", th.general},
                       {"measured_sharp", sharp},
                       {"half_threshold_min_total", sc.min_total}};
                if (th.line_case) j["line_case"] = *th.line_case;
                if (th.half_plane) j["half_plane"] = *th.half_plane;
                j["checks"] = json::array(
                    {check("half certified threshold passes the sphere check", sc.min_total, ">= 0", "exact", sc.passed),
                     check("certified threshold below measured", th.general, fmt::format("<= {:.6g}", sharp), "exact",
                           th.general <= sharp)});
                std::cout << j.dump(2) << "\n";
                write_json(ctx, "aharm_thresholds", j);
            } else if (mode == "wfun") {
                const double lam = lambda_given ? lambda : geo.n - 1.0;
                auto os = open_csv(ctx, "aharm_wfun");
                os << "w,G,F1,F2,F3,F4,sum\n";
                for (double w : w_grid(points, geo.n)) {
                    const WFunctions f = halfspace_w_functions(geo.p, geo.n, lam, b, w);
                    os << w << "," << f.G << "," << f.F1 << "," << f.F2 << "," << f.F3 << "," << f.F4 << ","
                       << f.sum() << "\n";
                }
            } else if (mode == "qcalc") {
                if (a_vec.size() != eta_vec.size() || a_vec.empty())
                    throw ValidationError("--a and --eta must be nonempty and of equal length");
                const QCalculus q = q_calculus(TiltedNorm{a_vec, geo.p}, eta_vec);
                json j{{"q", q.q}, {"Dq", q.Dq}, {"D2q", q.D2q}};
                std::cout << j.dump() << "\n";
                write_json(ctx, "aharm_qcalc", j);
            } else {
                const double d = std::isnan(delta) ? 0.0 : delta;
                const AHarmonicProfile prof{geo, d, lambda_given ? lambda : compute_exponents(geo).chi};
                const Orientation o = orient == "plus"    ? Orientation::worst_plus()
                                      : orient == "minus" ? Orientation::worst_minus()
                                                          : Orientation::orthogonal();
                auto os = open_csv(ctx, "aharm_tilted");
                os << "theta,s,t,main,E1,E2,E3,E4,total\n";
                for (int i = 1; i < points; ++i) {
                    const double th = 0.5 * std::numbers::pi * i / points;
                    const ETerms e = divergence_tilted(a_plane, a_normal, prof, std::cos(th), std::sin(th), o);
                    os << th << "," << std::cos(th) << "," << std::sin(th) << "," << e.main << "," << e.E1 << ","
                       << e.E2 << "," << e.E3 << "," << e.E4 << "," << e.total << "\n";
                }
            }
        } else if (sub == s_sol) {
            const SlabGrid grid = make_grid(grid_kind, geo, tau, nx, H, nz, h_min);
            SolverOptions opt;
            opt.top = parse_top(top);
            opt.top_value = top_value;
            TiltedNorm tn{tilt, geo.p};
            if (!tilt.empty() && static_cast<int>(tilt.size()) != geo.n)
                throw ValidationError("--tilt must have n entries");
            SolveReport rep;
            const ScalarField f = solve(grid, make_datum(datum_kind, width, grid.h()), tn, opt, &rep);
            fs::create_directories(ctx.out);
            std::ofstream dump(ctx.out / "solve.grid");
            write_grid_dump(dump, f, rep.eps_final, opt.tol);
            auto os = open_csv(ctx, "solve_oscillation");
            write_profile_csv(os, oscillation_profile(f));
            const double defect = oscillation_monotonicity_defect(oscillation_profile(f));
            json j = report_json(rep);
            j["oscillation_defect"] = defect;
            j["checks"] = json::array({check("oscillation nonincreasing in height", defect, "0", "10 tol",
                                             defect <= 10 * opt.tol)});
            write_json(ctx, "solve", j);
            std::cout << fmt::format("residual {:.3g} newton {} eps {:.3g}\n", rep.residual, rep.newton_steps,
                                     rep.eps_final);
        } else if (sub == s_ms) {
            json j;
            if (kind == "harmonic") {
                const SlabGrid grid = SlabGrid::graded(geo, tau, nx, H, nz, h_min);
                auto os = open_csv(ctx, "measure_sweep");
                os << "r,nearest,bilinear,residual,newton_steps\n";
                std::vector<std::pair<double, double>> samples;
                for (int e = 0; e < radii; ++e) {
                    const double r = r_min * std::pow(r_max / r_min, radii > 1 ? double(e) / (radii - 1) : 0.0);
                    const HarmonicMeasure m = harmonic_measure(grid, r);
                    os << r << "," << m.nearest << "," << m.bilinear << "," << m.report.residual << ","
                       << m.report.newton_steps << "\n";
                    samples.emplace_back(r, 1.0 / m.bilinear);
                }
                const HomogeneityFit fit = fit_homogeneity(samples);
                const ExponentSet ex = compute_exponents(geo);
                const double lo = std::min(ex.chi, ex.chi_breve) - 0.1, hi = std::max(ex.chi, ex.chi_breve) + 0.1;
                j = {{"kind", kind},
                     {"slope", fit.sigma},
                     {"rms_residual", fit.rms_residual},
                     {"chi", ex.chi},
                     {"chi_breve", ex.chi_breve},
                     {"checks", json::array({check("harmonic measure slope", fit.sigma,
                                                   ex.coincident ? fmt::format("{:.4g}", ex.chi)
                                                                 : fmt::format("[{:.4g}, {:.4g}]", ex.chi_breve, ex.chi),
                                                   "+-0.1", fit.sigma >= lo && fit.sigma <= hi)})}};
            } else {
                MartinFitOptions mo;
                mo.nx = nx;
                mo.nz = nz;
                mo.tau = tau;
                mo.h_min = h_min;
                const MartinFit mf = martin_fit(geo.p, mo);
                auto os = open_csv(ctx, "measure_sweep");
                os << "y,value\n";
                for (const auto& [y, v] : mf.samples) os << y << "," << v << "\n";
                const double target = martin_exponent_halfplane(geo.p);
                const ExponentSet ex = compute_exponents({2, 1, geo.p});
                const double rel = std::abs(mf.fit.sigma - target) / target;
                j = {{"kind", kind},
                     {"sigma", mf.fit.sigma},
                     {"closed_form", target},
                     {"rms_residual", mf.fit.rms_residual},
                     {"chi", ex.chi},
                     {"chi_breve", ex.chi_breve},
                     {"solve", report_json(mf.report)}};
                json checks = json::array({check("Martin exponent vs closed form", mf.fit.sigma,
                                                 fmt::format("{:.4g}", target), "5%", rel <= 0.05)});
                if (!thresholds.empty()) {
                    const double ref = mf.field.sample(0, 0.25);
                    std::vector<double> levels_abs;
                    for (double c : thresholds) levels_abs.push_back(c * ref);
                    json rows = json::array();
                    for (const auto& r : convexity_diagnostic(mf.field, levels_abs, 1.5, 1.5)) {
                        rows.push_back({{"threshold", r.threshold}, {"set_size", r.set_size}, {"violations", r.violations}});
                    }
                    j["convexity"] = rows;
                    j["convexity_note"] = "diagnostic only";
                }
                j["checks"] = checks;
            }
            std::cout << j.dump(2) << "\n";
            write_json(ctx, "measure_sweep", j);
        } else if (sub == s_psi) {
            const SlabGrid grid = SlabGrid::layered(geo, tau, nx, H, nz, h_min);
            const PsiResult r = build_psi(grid, t_psi, TiltedNorm{});
            auto os = open_csv(ctx, "psi_profile");
            write_profile_csv(os, r.oscillation);
            const double defect = oscillation_monotonicity_defect(r.oscillation);
            const DecayFit dfit = fit_decay(r.oscillation, 0.25 * tau, 2 * tau);
            json j{{"t", r.t},
                   {"xi", r.xi},
                   {"xi_far", r.xi_far},
                   {"b_bar", r.b_bar},
                   {"mean_low", r.mean_low},
                   {"mean_unit", r.mean_unit},
                   {"ratio", r.ratio},
                   {"oscillation_defect", defect},
                   {"decay_theta", dfit.theta},
                   {"decay_delta", dfit.delta},
                   {"solve", report_json(r.report)},
                   {"checks", json::array({check("|b_bar| bounded below", std::abs(r.b_bar), ">= 1e-3", "-",
                                                 std::abs(r.b_bar) >= 1e-3),
                                           check("oscillation nonincreasing in height", defect, "0", "10 tol",
                                                 defect <= 1e-8)})}};
            std::cout << j.dump(2) << "\n";
            write_json(ctx, "psi", j);
        } else if (sub == s_gap) {
            const int N = 1 << log2N;
            const LacunaryPlan plan = gen_lacunary(levels);
            const BoundaryWave w = wave == "cosine" ? cosine_wave(N) : triangle_wave(N);
            const DampingVariant v = parse_variant(variant);
            const CoefficientSequence c =
                v == DampingVariant::PositiveVanishing ? vanishing_coefficients(levels) : divergent_coefficients(levels);
            const DampingResult d = build_damping(w, plan, c, v);
            auto os = open_csv(ctx, "gapseries_levels");
            os << "level,T,family_k,family_f,family_h,sigma_sup,sigma_min,ratio_min,ratio_max,lipschitz_over_T\n";
            for (const auto& rec : d.levels)
                os << rec.level << "," << plan.T[rec.level - 1].str() << "," << rec.family_k << "," << rec.family_f
                   << "," << rec.family_h << "," << rec.sigma_sup << "," << rec.sigma_min << "," << rec.ratio_min << ","
                   << rec.ratio_max << "," << rec.lipschitz_over_T << "\n";
            std::vector<std::string> T;
            for (const auto& t : plan.T) T.push_back(t.str());
            json orth = json::array();
            bool orth_ok = true;
            for (int j = 2; j <= levels; ++j)
                for (int m = 1; m < j; ++m) {
                    try {
                        const OrthogonalityResult o = quasi_orthogonality(w, plan, m, j);
                        orth.push_back({{"m", m}, {"j", j}, {"integral", o.integral}, {"bound", o.bound}});
                        orth_ok = orth_ok && std::abs(o.integral) <= o.bound + 1e-12;
                    } catch (const ResolutionError&) {
                    }
                }
            const MaximalStats ms = maximal_stats(w, plan, c);
            const DivergenceReport dr = divergence_statistics(d, std::abs(w.b_bar) / 4);
            json rows = json::array();
            for (const auto& r : dr.rows)
                rows.push_back({{"m", r.m}, {"fraction_above", r.fraction_above}, {"median_oscillation", r.median_oscillation}});
            const bool ratio_ok = ratio_bound_holds(plan);
            json j{{"plan", T},
                   {"wave", w.name},
                   {"b_bar", w.b_bar},
                   {"sup_sigma", d.sup_sigma},
                   {"positivity_violations", d.positivity_violations},
                   {"reduced_levels", d.reduced_levels},
                   {"orthogonality", orth},
                   {"maximal", {{"weak_constant", ms.weak_constant}, {"l2_ratio", ms.l2_ratio}, {"s_star_sup", ms.s_star_sup}}},
                   {"divergence", rows},
                   {"final_quantiles", dr.final_quantiles}};
            json checks = json::array({check("plan ratio bound", ratio_ok, "true", "exact", ratio_ok),
                                       check("quasi-orthogonality bound", orth_ok, "true", "exact", orth_ok)});
            if (v == DampingVariant::PositiveVanishing)
                checks.push_back(check("damped series positivity", d.positivity_violations, "0", "exact",
                                       d.positivity_violations == 0));
            j["checks"] = checks;
            std::cout << fmt::format("sup sigma {:.6g}, positivity violations {}\n", d.sup_sigma, d.positivity_violations);
            write_json(ctx, "gapseries", j);
        } else if (sub == s_ce) {
            ce.variant = parse_variant(ce_variant);
            ce.hz_min = 1.0 / ce.nx;
            const CounterexampleReport r = assemble_counterexample(ce);
            auto band = [](const std::vector<SandwichCheck>& v) {
                json a = json::array();
                for (const auto& c : v)
                    a.push_back({{"level", c.level}, {"z_lo", c.z_lo}, {"z_hi", c.z_hi}, {"bound", c.bound},
                                 {"worst", c.worst}, {"points", c.points}});
                return a;
            };
            bool trend = true;
            for (std::size_t i = 1; i < r.median_tail_oscillation.size(); ++i)
                trend = trend && r.median_tail_oscillation[i] >= r.median_tail_oscillation[i - 1];
            json j{{"wave_scale", r.wave_scale},
                   {"b_bar", r.b_bar},
                   {"alpha", r.alpha},
                   {"heights", r.heights},
                   {"step", band(r.step)},
                   {"lower", band(r.lower)},
                   {"limit", band(r.limit)},
                   {"band", band(r.band)},
                   {"min_margin", r.min_margin},
                   {"datum_sup", r.datum_sup},
                   {"extension_sup", r.extension_sup},
                   {"max_principle_excess", r.max_principle_excess},
                   {"decay_height", r.decay_height},
                   {"empirical_A", r.empirical_A},
                   {"median_tail_oscillation", r.median_tail_oscillation}};
            j["checks"] = json::array(
                {check("sandwich margins", r.min_margin, ">= 0", "exact", r.min_margin >= 0),
                 check("maximum principle", r.max_principle_excess, "<= 0", "1e-9", r.max_principle_excess <= 1e-9),
                 check("median tail oscillation nondecreasing", trend, "true", "exact", trend)});
            std::cout << j.dump(2) << "\n";
            write_json(ctx, "counterexample", j);
        }
        write_manifest(ctx);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << ctx.command << ": " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifactError& e) {
        std::cerr << "error: " << e.what() << "; expected one of:";
        for (const auto& m : e.missing()) std::cerr << " " << m;
        std::cerr << "\n";
        return 2;
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << ctx.command << ": " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << ctx.command << ": " << e.what() << "\n";
        return 3;
    }
}
