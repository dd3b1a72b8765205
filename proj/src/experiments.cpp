#include "atomstress/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "atomstress/csv.hpp"
#include "atomstress/dynamics.hpp"
#include "atomstress/error.hpp"
#include "atomstress/run_config.hpp"

namespace atomstress {

namespace {

double mean_of(const std::vector<double>& v, std::size_t from) {
    if (from >= v.size()) return 0.0;
    double s = 0.0;
    for (std::size_t i = from; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(v.size() - from);
}

void shift_all(ParticleState& s, const Vec3& d) {
    for (auto& x : s.positions) x += d;
}

}  // namespace

// ---------------------------------------------------------------- experiment 1

Exp1Result run_experiment1(const PotentialModel& model, const Exp1Params& p) {
    if (p.cells < 2) throw InvalidArgument("experiment 1 needs at least 2 cells per side");
    if (p.steps < 2 || p.stride < 1) throw InvalidArgument("experiment 1 needs steps >= 2 and stride >= 1");
    const double a = relaxed_lattice_constant(model);
    ParticleState s = build_fcc_lattice(p.cells, p.cells, p.cells, a);
    s.cell.periodic = {false, false, false};

    MinimizerConfig mc;
    mc.ftol = 1e-6;
    mc.threads = p.threads;
    s = minimize(s, model, mc).state;
    // half of the initial kinetic energy flows into the potential energy
    s = initialize_velocities(s, 2.0 * p.temperature, p.seed);

    Exp1Result r;
    r.atoms = s.size();
    r.volume = static_cast<double>(s.size()) * a * a * a / 4.0;
    IntegratorConfig ic;
    ic.dt = p.dt;
    ic.steps = p.steps;
    ic.stride = p.stride;
    ic.seed = p.seed;
    ic.threads = p.threads;
    run_nve(s, model, ic, [&](const Snapshot& snap, const ForceReport& rep, const EnergySample&) {
        r.samples.push_back(virial_pressure(snap, rep, r.volume, center_of_mass_velocity(snap.state)));
        r.temperatures.push_back(kinetic_temperature(snap.state));
    });
    const std::size_t half = r.samples.size() / 2;
    std::vector<double> k, u, t;
    for (const auto& x : r.samples) {
        k.push_back(x.kinetic);
        u.push_back(x.potential);
        t.push_back(x.total);
    }
    r.kinetic = mean_of(k, half);
    r.potential = mean_of(u, half);
    r.total = mean_of(t, half);
    r.temperature = mean_of(r.temperatures, half);
    r.equipartition = static_cast<double>(r.atoms) * r.temperature / r.volume;
    return r;
}

double kinetic_pressure_mpa(double kT_eV, double volume_per_atom) {
    if (!(volume_per_atom > 0.0)) throw InvalidArgument("volume per atom must be positive");
    constexpr double eV_per_A3_in_MPa = 160217.66208;
    return kT_eV / volume_per_atom * eV_per_A3_in_MPa;
}

// ---------------------------------------------------------------- experiment 2

Exp2Result run_experiment2(const PotentialModel& model, const Exp2Params& p) {
    if (p.cells < 3) throw InvalidArgument("experiment 2 needs at least 3 cells per side");
    if (p.samples < 2 || !(p.s_max > 0.0)) throw InvalidArgument("experiment 2 needs >= 2 plane offsets");
    const double a = relaxed_lattice_constant(model);
    ParticleState s = build_fcc_lattice(p.cells, p.cells, p.cells, a);
    s = initialize_velocities(s, 2.0 * p.temperature, p.seed);

    IntegratorConfig ic;
    ic.dt = p.dt;
    ic.steps = p.equilibration;
    ic.stride = std::max<long>(1, p.equilibration);
    ic.seed = p.seed;
    ic.threads = p.threads;
    if (p.equilibration > 0) s = run_nve(s, model, ic, nullptr);

    // every atomic plane normal to e1, shifted by s half-spacings, spanning the whole section
    const double L = s.cell.lengths[0];
    const int planes = 2 * p.cells;
    std::vector<PlanarProbe> probes;
    Exp2Result r;
    for (int i = 0; i < p.samples; ++i) {
        const double sp = -p.s_max + 2.0 * p.s_max * i / (p.samples - 1);
        r.s.push_back(sp);
        for (int k = 0; k < planes; ++k) {
            const double x = (k + sp) * 0.5 * a;
            probes.push_back(PlanarProbe::rectangle({x, 0.5 * L, 0.5 * L}, {1.0, 0.0, 0.0}, L, L));
        }
    }
    TsaiAccumulator acc(s.cell, probes);
    std::vector<double> temps;
    ic.steps = p.steps;
    ic.stride = p.stride;
    run_nve(s, model, ic, [&](const Snapshot& snap, const ForceReport& rep, const EnergySample&) {
        acc.add(snap, rep.bonds);
        temps.push_back(kinetic_temperature(snap.state));
    });
    const auto res = acc.result();
    for (int i = 0; i < p.samples; ++i) {
        double k = 0.0, u = 0.0, t = 0.0;
        for (int j = 0; j < planes; ++j) {
            const auto& x = res[static_cast<std::size_t>(i) * planes + j];
            k += x.kinetic.x;
            u += x.potential.x;
            t += x.total.x;
        }
        r.kinetic.push_back(k / planes);
        r.potential.push_back(u / planes);
        r.total.push_back(t / planes);
    }
    r.temperature = mean_of(temps, 0);
    return r;
}

// ---------------------------------------------------------------- experiment 3

Exp3Result run_experiment3(const PotentialModel& model, const Exp3Params& p) {
    if (p.cells < 2) throw InvalidArgument("experiment 3 needs at least 2 cells per side");
    Exp3Result r;
    r.a = relaxed_lattice_constant(model);
    const CubicConstants c = cubic_constants_fd(model, r.a);
    r.lengths = uniaxial_cell_strain(p.sigma, engineering_moduli(c), p.cells, r.a);

    ParticleState s = build_fcc_lattice(p.cells, p.cells, p.cells, r.a);
    // no atomic plane through the box centre
    shift_all(s, Vec3{0.25, 0.25, 0.25} * r.a);
    const double l0 = p.cells * r.a;
    for (auto& x : s.positions)
        for (int k = 0; k < 3; ++k) x[k] *= r.lengths[k] / l0;
    s.cell.lengths = r.lengths;

    const ForceReport rep = multibody_eval(s, model);
    const std::vector<Snapshot> window{Snapshot{0.0, s}};
    const std::vector<std::vector<BondForceTerm>> terms{rep.bonds};
    const Vec3 center{0.5 * r.lengths[0], 0.5 * r.lengths[1], 0.5 * r.lengths[2]};
    const FieldGrid grid = FieldGrid::from_points({center});

    for (double sz : p.sizes) {
        if (!(sz > 0.0)) throw InvalidArgument("experiment 3 sizes must be positive");
        Exp3Row row;
        row.s = sz;
        row.w = sz * l0;
        const double R = 0.5 * row.w;
        const auto wf = WeightingFunction::constant(R, p.epsilon * R);
        row.hardy = hardy_stress_terms(window, terms, wf, grid, p.threads).values[0].total(0, 0);
        row.virial = virial_stress_terms(window, terms, Sphere{center, R}).stress.total(0, 0);
        TsaiAccumulator acc(s.cell, {PlanarProbe::rectangle(center, {1.0, 0.0, 0.0}, std::min(row.w, r.lengths[1]),
                                                            std::min(row.w, r.lengths[2]))});
        acc.add(window[0], rep.bonds);
        row.tsai = acc.result()[0].total.x;
        row.da = da_stress(s, WeightingFunction::constant(R), grid, model, p.threads).values[0].total(0, 0);
        r.rows.push_back(row);
    }
    if (p.tsai_step > 0.0 && !p.sizes.empty()) {
        const double lo = *std::min_element(p.sizes.begin(), p.sizes.end());
        const double hi = *std::max_element(p.sizes.begin(), p.sizes.end());
        std::vector<PlanarProbe> probes;
        std::vector<double> ss;
        for (long i = 0; lo + i * p.tsai_step <= hi + 1e-9; ++i) {
            const double w = (lo + i * p.tsai_step) * l0;
            ss.push_back(lo + i * p.tsai_step);
            probes.push_back(PlanarProbe::rectangle(center, {1.0, 0.0, 0.0}, std::min(w, r.lengths[1]),
                                                    std::min(w, r.lengths[2])));
        }
        TsaiAccumulator acc(s.cell, probes);
        acc.add(window[0], rep.bonds);
        const auto res = acc.result();
        for (std::size_t i = 0; i < ss.size(); ++i) r.tsai_fine.emplace_back(ss[i], res[i].total.x);
    }
    return r;
}

// ---------------------------------------------------------------- experiment 4

Exp4Result run_experiment4(const PotentialModel& model, const Exp4Params& p) {
    if (p.cells < 4 || p.thickness < 1) throw InvalidArgument("experiment 4 plate is too small");
    if (!(p.hole_radius_cells > 0.0) || 2.0 * p.hole_radius_cells >= p.cells)
        throw GeometryError("hole must fit inside the plate");
    if (!(p.domain_fraction > 0.0) || p.grid < 2 || p.da_grid < 2) throw InvalidArgument("bad experiment 4 grid");
    Exp4Result r;
    r.a = relaxed_lattice_constant(model);
    r.constants = cubic_constants_fd(model, r.a);
    const double a = r.a;
    const double h = p.cells * a;
    const double R = p.hole_radius_cells * a;
    const KirschSolution ref(r.constants, p.sigma, R);
    r.concentration = ref.concentration();
    r.sigma = p.sigma;

    ParticleState s = build_fcc_lattice(p.cells, p.cells, p.thickness, a);
    // centred on the origin with no atomic plane through x1 = 0 or x2 = 0
    shift_all(s, Vec3{-0.5 * h + 0.25 * a, -0.5 * h + 0.25 * a, 0.25 * a});
    s.cell.periodic = {false, false, true};
    s = carve_plate_with_hole(s, {0.0, 0.0, 0.0}, R);
    for (auto& x : s.positions) {
        const auto u = ref.at(x.x, x.y).displacement;
        x.x += u[0];
        x.y += u[1];
    }
    const ForceReport rep = multibody_eval(s, model);
    const std::vector<Snapshot> window{Snapshot{0.0, s}};
    const std::vector<std::vector<BondForceTerm>> terms{rep.bonds};

    const double rw = 0.5 * p.domain_fraction * h;
    r.averaging_radius = rw;
    const double zmid = 0.5 * s.cell.lengths[2];
    const double edge = 0.5 * h - (rw + model.cutoff());
    auto usable = [&](double x, double y) {
        return std::hypot(x, y) >= R + 2.0 * rw && std::abs(x) <= edge && std::abs(y) <= edge;
    };

    const double dx = h / (p.grid - 1);
    const FieldGrid grid = FieldGrid::make_regular({-0.5 * h, -0.5 * h, zmid}, {dx, dx, 1.0}, {p.grid, p.grid, 1});
    for (const auto& x : grid.points) r.reference.push_back(ref.at(x.x, x.y));

    const auto wf = WeightingFunction::constant(rw, 0.1 * rw);
    r.hardy = hardy_stress_terms(window, terms, wf, grid, p.threads);

    r.virial = virial_stress_field(window, terms, grid, rw, VelocityReference::DomainCenterOfMass, p.threads);

    const double wz = std::min(2.0 * rw, s.cell.lengths[2]);
    std::vector<PlanarProbe> probes;
    // Probe planes sit midway between atomic planes of the undeformed lattice and window edges
    // sit between rows of bond crossing points (an a/8 grid), then follow the displacement field.
    // Without this the crossing count jumps with the grid point and sigma12, sigma21 pick up
    // unrelated lattice noise.
    auto snap = [](double v, double period, double offset) {
        return offset + period * std::round((v - offset) / period);
    };
    auto placed = [&](const Vec3& x, int normal) {
        Vec3 X = x;
        const auto u0 = ref.at(x.x, x.y);
        if (!u0.inside_hole) {
            X.x -= u0.displacement[0];
            X.y -= u0.displacement[1];
        }
        for (int c = 0; c < 3; ++c) {
            const double origin = c == 2 ? 0.0 : -0.5 * h;
            X[c] = c == normal ? origin + snap(X[c] - origin, 0.5 * a, 0.0)
                               : origin + snap(X[c] - origin, 0.125 * a, 0.0625 * a);
        }
        const auto u = ref.at(X.x, X.y);
        if (!u.inside_hole) {
            X.x += u.displacement[0];
            X.y += u.displacement[1];
        }
        return X;
    };
    for (const auto& x : grid.points) {
        probes.push_back(PlanarProbe::rectangle(placed(x, 0), {1.0, 0.0, 0.0}, 2.0 * rw, wz));
        probes.push_back(PlanarProbe::rectangle(placed(x, 1), {0.0, 1.0, 0.0}, 2.0 * rw, wz));
        probes.push_back(PlanarProbe::square(placed(x, 2), {0.0, 0.0, 1.0}, 2.0 * rw));
    }
    TsaiAccumulator acc(s.cell, probes);
    acc.add(window[0], rep.bonds);
    const auto tr = acc.result();
    r.tsai.estimator = "tsai";
    r.tsai.grid = grid;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        PointStress ps;
        ps.total = assemble_tensor_from_tractions(tr[3 * g], tr[3 * g + 1], tr[3 * g + 2]);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) {
                ps.potential(i, j) = tr[3 * g + j].potential[i];
                ps.kinetic(i, j) = tr[3 * g + j].kinetic[i];
            }
        r.tsai.values.push_back(ps);
    }

    const double dd = h / (p.da_grid - 1);
    const FieldGrid dgrid =
        FieldGrid::make_regular({-0.5 * h, -0.5 * h, zmid}, {dd, dd, 1.0}, {p.da_grid, p.da_grid, 1});
    for (const auto& x : dgrid.points) r.da_reference.push_back(ref.at(x.x, x.y));
    r.da = da_stress(s, WeightingFunction::constant(rw), dgrid, model, p.threads);

    // Hardy along x1 = 0
    std::vector<Vec3> line;
    for (double y = -0.5 * h; y <= 0.5 * h + 1e-9; y += 0.25 * a) line.push_back({0.0, y, zmid});
    const auto hl = hardy_stress_terms(window, terms, wf, FieldGrid::from_points(line), p.threads);
    for (std::size_t i = 0; i < line.size(); ++i) {
        Exp4LinePoint lp;
        lp.y = line[i].y;
        lp.hardy = hl.values[i].total(0, 0);
        lp.reference = ref.at(0.0, lp.y).s11;
        lp.compared = usable(0.0, lp.y);
        if (lp.compared)
            r.line_max_rel_error = std::max(r.line_max_rel_error, std::abs(lp.hardy - lp.reference) / std::abs(lp.reference));
        r.line.push_back(lp);
    }

    for (const auto& v : r.hardy.values) r.hardy_peak = std::max(r.hardy_peak, std::abs(v.total(0, 0)));
    for (const auto& v : r.da.values) r.da_peak = std::max(r.da_peak, std::abs(v.total(0, 0)));

    double diff = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Vec3& x = grid.points[g];
        if (!usable(x.x, x.y)) continue;
        const Mat3& t = r.tsai.values[g].total;
        diff += std::abs(t(0, 1) - t(1, 0));
        r.peak_shear = std::max(r.peak_shear, std::abs(r.reference[g].s12));
        ++r.tsai_points;
    }
    r.tsai_shear_diff = r.tsai_points ? diff / static_cast<double>(r.tsai_points) : 0.0;
    return r;
}

// ---------------------------------------------------------------- output

void write_experiment1(const std::filesystem::path& dir, const Exp1Result& r) {
    CsvWriter w(dir / "pressure.csv", {"time", "temperature", "kinetic", "potential", "total"});
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& x = r.samples[i];
        w.row({x.time, r.temperatures[i], x.kinetic, x.potential, x.total});
    }
    CsvWriter m(dir / "summary.csv", {"atoms", "volume", "temperature", "kinetic", "potential", "total", "equipartition"});
    m.row({static_cast<double>(r.atoms), r.volume, r.temperature, r.kinetic, r.potential, r.total, r.equipartition});
}

void write_experiment2(const std::filesystem::path& dir, const Exp2Result& r) {
    CsvWriter w(dir / "plane_sweep.csv", {"s", "kinetic_11", "potential_11", "total_11"});
    for (std::size_t i = 0; i < r.s.size(); ++i) w.row({r.s[i], r.kinetic[i], r.potential[i], r.total[i]});
}

void write_experiment3(const std::filesystem::path& dir, const Exp3Result& r) {
    CsvWriter w(dir / "size_ladder.csv", {"s", "w", "hardy_11", "virial_11", "tsai_11", "da_11"});
    for (const auto& x : r.rows) w.row({x.s, x.w, x.hardy, x.virial, x.tsai, x.da});
    CsvWriter f(dir / "tsai_fine.csv", {"s", "tsai_11"});
    for (const auto& [sv, t] : r.tsai_fine) f.row({sv, t});
}

namespace {

void write_map(const std::filesystem::path& path, const StressField& f, const std::vector<KirschPoint>& ref,
               double sigma) {
    CsvWriter w(path, {"x", "y", "s11", "s12", "s21", "ref_s11", "ref_s12", "err_s11", "err_s12", "err_s21"});
    for (std::size_t g = 0; g < f.grid.size(); ++g) {
        const Mat3& t = f.values[g].total;
        const auto& q = ref[g];
        w.row({f.grid.points[g].x, f.grid.points[g].y, t(0, 0), t(0, 1), t(1, 0), q.s11, q.s12, (t(0, 0) - q.s11) / sigma,
               (t(0, 1) - q.s12) / sigma, (t(1, 0) - q.s12) / sigma});
    }
}

}  // namespace

void write_experiment4(const std::filesystem::path& dir, const Exp4Result& r) {
    // error columns are (estimate - reference) / remote stress
    const double sigma = r.sigma;
    write_map(dir / "hardy.csv", r.hardy, r.reference, sigma);
    write_map(dir / "virial.csv", r.virial, r.reference, sigma);
    write_map(dir / "tsai.csv", r.tsai, r.reference, sigma);
    write_map(dir / "da.csv", r.da, r.da_reference, sigma);
    CsvWriter ref(dir / "reference.csv", {"x", "y", "u1", "u2", "s11", "s22", "s12", "inside_hole"});
    for (std::size_t g = 0; g < r.hardy.grid.size(); ++g) {
        const auto& q = r.reference[g];
        ref.row({r.hardy.grid.points[g].x, r.hardy.grid.points[g].y, q.displacement[0], q.displacement[1], q.s11, q.s22,
                 q.s12, q.inside_hole ? 1.0 : 0.0});
    }
    CsvWriter line(dir / "hardy_line.csv", {"y", "hardy_11", "reference_11", "compared"});
    for (const auto& x : r.line) line.row({x.y, x.hardy, x.reference, x.compared ? 1.0 : 0.0});
    CsvWriter m(dir / "summary.csv", {"a", "c11", "c12", "c44", "concentration", "averaging_radius", "line_max_rel_error",
                                      "hardy_peak_11", "da_peak_11", "tsai_shear_diff", "peak_shear"});
    m.row({r.a, r.constants.c11, r.constants.c12, r.constants.c44, r.concentration, r.averaging_radius,
           r.line_max_rel_error, r.hardy_peak, r.da_peak, r.tsai_shear_diff, r.peak_shear});
}

// ---------------------------------------------------------------- config driver

namespace {

long auto_integer(const RunConfig& c, const std::string& key, long fallback) {
    return c.get("experiment", key) == "auto" ? fallback : c.integer("experiment", key);
}

double auto_number(const RunConfig& c, const std::string& key, double fallback) {
    return c.get("experiment", key) == "auto" ? fallback : c.number("experiment", key);
}

}  // namespace

int run_experiment(int id, const RunConfig& cfg, const std::filesystem::path& outdir, int threads) {
    const PotentialModel model = cfg.potential();
    std::filesystem::create_directories(outdir);
    const double dt = cfg.number("md", "dt");
    const auto seed = static_cast<std::uint64_t>(cfg.integer("md", "seed"));
    switch (id) {
        case 1: {
            Exp1Params p;
            p.cells = static_cast<int>(auto_integer(cfg, "cells", p.cells));
            p.temperature = auto_number(cfg, "temperature", p.temperature);
            p.steps = auto_integer(cfg, "steps", p.steps);
            p.stride = auto_integer(cfg, "stride", p.stride);
            p.dt = dt;
            p.seed = seed;
            p.threads = threads;
            const auto r = run_experiment1(model, p);
            write_experiment1(outdir, r);
            std::cout << "mean pressure: kinetic " << r.kinetic << " potential " << r.potential << " total " << r.total
                      << "\n";
            return 0;
        }
        case 2: {
            Exp2Params p;
            p.cells = static_cast<int>(auto_integer(cfg, "cells", p.cells));
            p.temperature = auto_number(cfg, "temperature", p.temperature);
            p.steps = auto_integer(cfg, "steps", p.steps);
            p.equilibration = auto_integer(cfg, "equilibration", p.equilibration);
            p.stride = auto_integer(cfg, "stride", p.stride);
            p.dt = dt;
            p.seed = seed;
            p.threads = threads;
            const auto r = run_experiment2(model, p);
            write_experiment2(outdir, r);
            std::cout << "mean temperature " << r.temperature << "\n";
            return 0;
        }
        case 3: {
            Exp3Params p;
            p.cells = static_cast<int>(auto_integer(cfg, "cells", p.cells));
            p.sigma = auto_number(cfg, "sigma", p.sigma);
            p.threads = threads;
            write_experiment3(outdir, run_experiment3(model, p));
            return 0;
        }
        case 4: {
            Exp4Params p;
            if (cfg.flag("experiment", "full_scale")) {
                p.cells = 100;
                p.thickness = 10;
                p.hole_radius_cells = 25.0;
            } else {
                p.thickness = static_cast<int>(cfg.integer("experiment", "thickness_cells"));
                p.hole_radius_cells = cfg.number("experiment", "hole_radius_cells");
            }
            p.cells = static_cast<int>(auto_integer(cfg, "cells", p.cells));
            p.sigma = auto_number(cfg, "sigma", p.sigma);
            p.domain_fraction = cfg.number("experiment", "domain_fraction");
            p.grid = static_cast<int>(cfg.integer("experiment", "grid"));
            p.da_grid = static_cast<int>(cfg.integer("experiment", "da_grid"));
            p.threads = threads;
            const auto r = run_experiment4(model, p);
            write_experiment4(outdir, r);
            std::cout << "stress concentration " << r.concentration << "\n";
            return 0;
        }
        default: throw InvalidArgument("experiment id must be 1, 2, 3 or 4");
    }
}

}  // namespace atomstress
