#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "atomstress/csv.hpp"
#include "atomstress/distance_geometry.hpp"
#include "atomstress/dynamics.hpp"
#include "atomstress/elasticity.hpp"
#include "atomstress/error.hpp"
#include "atomstress/estimators.hpp"
#include "atomstress/experiments.hpp"
#include "atomstress/run_config.hpp"

namespace fs = std::filesystem;
using namespace atomstress;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    int threads = 0;
    long long seed = -1;
};

RunConfig load(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::from_file(c.config);
    if (c.seed >= 0) cfg.set("md", "seed", std::to_string(c.seed));
    return cfg;
}

int thread_count(const Common& c) {
    if (c.threads > 0) return c.threads;
    if (const char* env = std::getenv("ATOMSTRESS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

fs::path prepare_out(const Common& c, const RunConfig& cfg) {
    fs::create_directories(c.out);
    cfg.write(fs::path(c.out) / "config.resolved.ini");
    return c.out;
}

double number_or(const RunConfig& cfg, const std::string& s, const std::string& k, double fallback) {
    return cfg.get(s, k) == "auto" ? fallback : cfg.number(s, k);
}

ParticleState generate(const RunConfig& cfg, const PotentialModel& model) {
    const double a = number_or(cfg, "gen", "a", 0.0);
    const double lat = a > 0.0 ? a : relaxed_lattice_constant(model);
    ParticleState s = build_fcc_lattice(static_cast<int>(cfg.integer("gen", "nx")), static_cast<int>(cfg.integer("gen", "ny")),
                                        static_cast<int>(cfg.integer("gen", "nz")), lat);
    const auto pbc = cfg.numbers("gen", "periodic");
    if (pbc.size() != 3) throw ParseError("[gen] periodic needs three 0/1 flags");
    for (int k = 0; k < 3; ++k) s.cell.periodic[k] = pbc[k] != 0.0;
    const double hole = cfg.number("gen", "hole_radius");
    if (hole > 0.0) {
        const auto& L = s.cell.lengths;
        s = carve_plate_with_hole(s, {0.5 * L[0], 0.5 * L[1], 0.5 * L[2]}, hole);
    }
    const double T = cfg.number("gen", "temperature");
    if (T > 0.0) s = initialize_velocities(s, T, static_cast<std::uint64_t>(cfg.integer("md", "seed")));
    return s;
}

ParticleState first_frame(const std::string& path) {
    Trajectory t = read_extxyz(path);
    if (t.snapshots.empty()) throw ParseError(path + ": no frames");
    return t.snapshots.front().state;
}

FieldGrid grid_from(const RunConfig& cfg, const ParticleState& s) {
    std::array<int, 3> n{};
    const char* axes[3] = {"x", "y", "z"};
    const char* counts[3] = {"nx", "ny", "nz"};
    Vec3 lo, hi;
    for (int k = 0; k < 3; ++k) {
        n[k] = static_cast<int>(cfg.integer("grid", counts[k]));
        if (n[k] < 1) throw ParseError("[grid] counts must be >= 1");
        double l = 0.0, h = s.cell.lengths[k];
        if (!s.cell.periodic[k] && s.size()) {
            l = h = s.positions[0][k];
            for (const auto& x : s.positions) {
                l = std::min(l, x[k]);
                h = std::max(h, x[k]);
            }
        }
        lo[k] = number_or(cfg, "grid", std::string(axes[k]) + "lo", l);
        hi[k] = number_or(cfg, "grid", std::string(axes[k]) + "hi", h);
    }
    // cell-centred points
    Vec3 step, origin;
    for (int k = 0; k < 3; ++k) {
        step[k] = (hi[k] - lo[k]) / n[k];
        origin[k] = lo[k] + 0.5 * step[k];
    }
    return FieldGrid::make_regular(origin, step, n);
}

std::vector<Snapshot> window_of(const Trajectory& t, double t0, double t1) {
    std::vector<Snapshot> w;
    for (const auto& s : t.snapshots)
        if (s.time >= t0 && s.time <= t1) w.push_back(s);
    if (w.empty()) throw InvalidArgument("no snapshots in the requested time window");
    return w;
}

int cmd_gen(const Common& c) {
    const RunConfig cfg = load(c);
    const auto out = prepare_out(c, cfg);
    Trajectory t;
    t.snapshots.push_back({0.0, generate(cfg, cfg.potential())});
    write_extxyz(out / "config.xyz", t);
    std::cout << t.snapshots[0].state.size() << " atoms\n";
    return 0;
}

int cmd_md(const Common& c) {
    const RunConfig cfg = load(c);
    const auto out = prepare_out(c, cfg);
    const PotentialModel model = cfg.potential();
    const std::string& in = cfg.get("md", "input");
    ParticleState s = in.empty() ? generate(cfg, model) : first_frame(in);
    IntegratorConfig ic = cfg.integrator();
    ic.threads = thread_count(c);
    if (cfg.flag("md", "thermalize")) s = initialize_velocities(s, cfg.number("md", "temperature"), ic.seed);
    const NveResult r = run_nve(s, model, ic);
    write_extxyz(out / "trajectory.xyz", r.trajectory);
    CsvWriter w(out / "energy.csv", {"time", "kinetic", "potential", "total"});
    for (const auto& e : r.energies) w.row({e.time, e.kinetic, e.potential, e.total});
    return 0;
}

int cmd_minimize(const Common& c) {
    const RunConfig cfg = load(c);
    const auto out = prepare_out(c, cfg);
    const PotentialModel model = cfg.potential();
    const std::string& in = cfg.get("minimize", "input");
    const ParticleState s = in.empty() ? generate(cfg, model) : first_frame(in);
    MinimizerConfig mc = cfg.minimizer();
    mc.threads = thread_count(c);
    const MinimizeResult r = minimize(s, model, mc);
    Trajectory t;
    t.snapshots.push_back({0.0, r.state});
    write_extxyz(out / "minimized.xyz", t);
    CsvWriter w(out / "energy.csv", {"iteration", "energy"});
    for (std::size_t i = 0; i < r.energies.size(); ++i) w.row({static_cast<double>(i), r.energies[i]});
    std::cout << "energy " << r.energy << " max force " << r.max_force << "\n";
    if (!r.converged) {
        std::cerr << "minimizer did not converge in " << r.iterations << " moves\n";
        return 2;
    }
    return 0;
}

int cmd_stress(const Common& c) {
    const RunConfig cfg = load(c);
    const auto out = prepare_out(c, cfg);
    const PotentialModel model = cfg.potential();
    const std::string& in = cfg.get("stress", "input");
    if (in.empty()) throw ParseError("[stress] input is required");
    const Trajectory traj = read_extxyz(in);
    const auto win = window_of(traj, cfg.number("stress", "t_begin"), cfg.number("stress", "t_end"));
    const FieldGrid grid = grid_from(cfg, win.front().state);
    const int threads = thread_count(c);
    const std::string& est = cfg.get("stress", "estimator");
    StressField f;
    if (est == "hardy") {
        f = hardy_stress(win, cfg.weighting(), grid, model, threads);
    } else if (est == "virial") {
        const double R = number_or(cfg, "stress", "radius", cfg.number("weighting", "r_w"));
        std::vector<std::vector<BondForceTerm>> terms;
        for (const auto& snap : win) terms.push_back(multibody_eval(snap.state, model).bonds);
        f = virial_stress_field(win, terms, grid, R, VelocityReference::DomainCenterOfMass, threads);
    } else if (est == "virial_cell") {
        f.estimator = "virial_cell";
        f.grid = FieldGrid::from_points({Vec3{}});
        f.values.push_back(virial_stress_cell(win, model).stress);
    } else if (est == "da") {
        f.estimator = "da";
        f.grid = grid;
        f.values.assign(grid.size(), PointStress{});
        for (const auto& snap : win) {
            const auto one = da_stress(snap.state, cfg.weighting(), grid, model, threads);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                f.values[g].kinetic += one.values[g].kinetic * (1.0 / win.size());
                f.values[g].potential += one.values[g].potential * (1.0 / win.size());
                f.values[g].total += one.values[g].total * (1.0 / win.size());
            }
        }
    } else {
        throw ParseError("[stress] estimator must be hardy, virial, virial_cell or da, got '" + est + "'");
    }
    f.t_begin = win.front().time;
    f.t_end = win.back().time;
    write_stress_csv(out / ("stress_" + est + ".csv"), f);
    return 0;
}

int cmd_traction(const Common& c) {
    const RunConfig cfg = load(c);
    const auto out = prepare_out(c, cfg);
    const PotentialModel model = cfg.potential();
    const std::string& in = cfg.get("traction", "input");
    if (in.empty()) throw ParseError("[traction] input is required");
    const Trajectory traj = read_extxyz(in);
    const auto win = window_of(traj, cfg.number("traction", "t_begin"), cfg.number("traction", "t_end"));
    const auto& cell = win.front().state.cell;
    const auto nv = cfg.numbers("traction", "normal");
    if (nv.size() != 3) throw ParseError("[traction] normal needs three components");
    Vec3 center{0.5 * cell.lengths[0], 0.5 * cell.lengths[1], 0.5 * cell.lengths[2]};
    if (cfg.get("traction", "center") != "auto") {
        const auto cv = cfg.numbers("traction", "center");
        if (cv.size() != 3) throw ParseError("[traction] center needs three components");
        center = {cv[0], cv[1], cv[2]};
    }
    const double L = std::min({cell.lengths[0], cell.lengths[1], cell.lengths[2]});
    const double wa = number_or(cfg, "traction", "width_a", L);
    const double wb = number_or(cfg, "traction", "width_b", wa);
    TsaiOptions opt;
    opt.slab_half_thickness = cfg.number("traction", "slab_half_thickness");
    const TractionSample t = tsai_traction(win, PlanarProbe::rectangle(center, {nv[0], nv[1], nv[2]}, wa, wb), model, opt);
    write_traction_csv(out / "traction.csv", std::span(&t, 1));
    if (t.large_step_warning)
        std::cerr << "warning: a particle moved more than the crossing limit between snapshots; reduce dt or stride\n";
    if (t.velocity_source != VelocitySource::Crossings)
        std::cerr << "note: no crossings in the window; continuum velocity from the slab mean\n";
    return 0;
}

int cmd_ref_kirsch(const Common& c, double c11, double c12, double c44, double sigma, double radius, int n,
                   double extent) {
    fs::create_directories(c.out);
    const CubicConstants cc{c11, c12, c44};
    const KirschSolution sol(cc, sigma, radius);
    if (n < 2) throw InvalidArgument("--grid must be >= 2");
    const double half = extent > 0.0 ? extent : 4.0 * radius;
    CsvWriter w(fs::path(c.out) / "kirsch.csv", {"x", "y", "u1", "u2", "s11", "s22", "s12", "inside_hole"});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = -half + 2.0 * half * i / (n - 1), y = -half + 2.0 * half * j / (n - 1);
            const auto p = sol.at(x, y);
            w.row({x, y, p.displacement[0], p.displacement[1], p.s11, p.s22, p.s12, p.inside_hole ? 1.0 : 0.0});
        }
    std::cout << "stress concentration " << sol.concentration() << "\n";
    return 0;
}

// n x n table of distances, comma or whitespace separated
int cmd_distgeo_check(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path);
    std::vector<double> vals;
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        double v;
        int cols = 0;
        while (ls >> v) {
            vals.push_back(v * v);
            ++cols;
        }
        if (!ls.eof()) throw ParseError(path + ": row " + std::to_string(rows + 1) + " is not numeric");
        if (cols) ++rows;
    }
    const SquaredDistanceSet d = SquaredDistanceSet::from_table(rows, vals);
    const auto v = embeddability_check(d);
    if (v.embeddable) {
        std::cout << "embeddable\n";
        return 0;
    }
    std::cout << "not embeddable: condition " << v.condition << " fails on points";
    for (int i : v.indices) std::cout << ' ' << i;
    std::cout << " (chi = " << v.value << ")\n";
    return 2;
}

void add_common(CLI::App* app, Common& c, bool config = true) {
    if (config) app->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory");
    app->add_option("--threads", c.threads, "worker threads (default: ATOMSTRESS_THREADS or 1)")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "RNG seed, overrides [md] seed")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuum stress fields from particle data"};
    app.require_subcommand(1);
    Common c;

    auto* gen = app.add_subcommand("gen", "build an fcc configuration");
    auto* md = app.add_subcommand("md", "constant-energy molecular dynamics");
    auto* mini = app.add_subcommand("minimize", "FIRE relaxation");
    auto* stress = app.add_subcommand("stress", "stress field on a grid");
    auto* traction = app.add_subcommand("traction", "Tsai traction on a plane");
    auto* exp = app.add_subcommand("experiment", "run one of the four reference experiments");
    for (auto* s : {gen, md, mini, stress, traction, exp}) add_common(s, c);
    int exp_id = 0;
    exp->add_option("--id", exp_id, "experiment number (default: [experiment] id)")->check(CLI::Range(1, 4));

    auto* ref = app.add_subcommand("ref", "continuum reference solutions");
    ref->require_subcommand(1);
    auto* kirsch = ref->add_subcommand("kirsch", "cubic plate with a circular hole");
    add_common(kirsch, c, false);
    double c11 = 0, c12 = 0, c44 = 0, sigma = 1, radius = 1, extent = 0;
    int n = 50;
    kirsch->add_option("--c11", c11)->required();
    kirsch->add_option("--c12", c12)->required();
    kirsch->add_option("--c44", c44)->required();
    kirsch->add_option("--sigma", sigma);
    kirsch->add_option("--radius", radius)->required();
    kirsch->add_option("--grid", n, "points per side");
    kirsch->add_option("--extent", extent, "half width of the square grid (default 4 radii)");

    auto* dg = app.add_subcommand("distgeo", "distance geometry");
    dg->require_subcommand(1);
    auto* check = dg->add_subcommand("check", "embeddability of an n x n distance table");
    std::string table;
    check->add_option("table", table, "CSV distance table")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(c);
        if (md->parsed()) return cmd_md(c);
        if (mini->parsed()) return cmd_minimize(c);
        if (stress->parsed()) return cmd_stress(c);
        if (traction->parsed()) return cmd_traction(c);
        if (exp->parsed()) {
            const RunConfig cfg = load(c);
            const auto out = prepare_out(c, cfg);
            const int id = exp_id ? exp_id : static_cast<int>(cfg.integer("experiment", "id"));
            return run_experiment(id, cfg, out, thread_count(c));
        }
        if (kirsch->parsed()) return cmd_ref_kirsch(c, c11, c12, c44, sigma, radius, n, extent);
        if (check->parsed()) return cmd_distgeo_check(table);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
