#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "atomstress/dynamics.hpp"
#include "atomstress/error.hpp"
#include "atomstress/estimators.hpp"

using namespace atomstress;

namespace {

constexpr double kA = 1.5565178510;

ParticleState strained_lattice(int n, double e11, double e22, double T, std::uint64_t seed, double jitter = 0.0) {
    auto s = build_fcc_lattice(n, n, n, kA);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (auto& x : s.positions) {
        x += Vec3{0.25, 0.25, 0.25} * kA;
        x.x *= 1.0 + e11;
        x.y *= 1.0 + e22;
        x.z *= 1.0 + e22;
        if (jitter > 0.0) x += Vec3{u(rng), u(rng), u(rng)};
    }
    s.cell.lengths[0] *= 1.0 + e11;
    s.cell.lengths[1] *= 1.0 + e22;
    s.cell.lengths[2] *= 1.0 + e22;
    if (T > 0.0) s = initialize_velocities(s, T, seed);
    return s;
}

double max_abs(const Mat3& m) {
    double r = 0.0;
    for (double v : m.m) r = std::max(r, std::abs(v));
    return r;
}

}  // namespace

TEST_CASE("Hardy kinetic term equals the direct sum over atoms and images") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 6.0), v(-1.0, 1.0), m(0.5, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        ParticleState s;
        s.cell.lengths = {6.0, 6.0, 6.0};
        for (int i = 0; i < 18; ++i) {
            s.positions.push_back({u(rng), u(rng), u(rng)});
            s.velocities.push_back({v(rng), v(rng), v(rng)});
            s.masses.push_back(m(rng));
            s.species.push_back("X");
        }
        const auto wf = WeightingFunction::quartic_spline(2.5);
        const Vec3 x{u(rng), u(rng), u(rng)};
        HardyAccumulator acc(wf, FieldGrid::from_points({x}));
        acc.add(Snapshot{0.0, s}, {});
        const Mat3 got = acc.result().values[0].kinetic;

        double rho = 0.0;
        Vec3 p;
        std::vector<std::pair<int, double>> hit;
        for (std::size_t a = 0; a < s.size(); ++a)
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j)
                    for (int k = -1; k <= 1; ++k) {
                        const double w = wf(norm(s.positions[a] + Vec3{6.0 * i, 6.0 * j, 6.0 * k} - x));
                        if (w == 0.0) continue;
                        hit.emplace_back(static_cast<int>(a), w);
                        rho += s.masses[a] * w;
                        p += s.velocities[a] * (s.masses[a] * w);
                    }
        const Vec3 vbar = p / rho;
        Mat3 ref;
        for (const auto& [a, w] : hit) {
            const Vec3 d = s.velocities[a] - vbar;
            ref -= outer(d, d) * (s.masses[a] * w);
        }
        CHECK(max_abs(got - ref) <= 1e-12 * max_abs(ref));
    }
}

TEST_CASE("Hardy potential term equals the direct bond sum") {
    auto s = build_fcc_lattice(3, 3, 3, kA);
    s.cell.periodic = {false, false, false};
    s.cell.lengths = {30.0, 30.0, 30.0};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (auto& x : s.positions) x += Vec3{u(rng), u(rng), u(rng)};
    const auto model = PotentialModel::lennard_jones();
    const auto rep = multibody_eval(s, model);
    const auto wf = WeightingFunction::constant(1.8, 0.4);
    const Vec3 x{2.1, 2.4, 2.2};
    const auto f = hardy_stress(std::vector<Snapshot>{{0.0, s}}, wf, FieldGrid::from_points({x}), model);
    Mat3 ref;
    for (const auto& t : rep.bonds)
        ref += outer(t.force, t.rel) * (0.5 * bond_function(wf, x, s.positions[t.alpha], s.positions[t.beta]));
    CHECK(max_abs(f.values[0].potential - ref) <= 1e-12 * max_abs(ref));
    CHECK(max_abs(f.values[0].total - f.values[0].total.transpose()) <= 1e-12 * max_abs(ref));
}

TEST_CASE("Hardy, virial and the exact cell stress agree on a homogeneous state") {
    const auto s = strained_lattice(5, 0.01, -0.004, 0.01, 4);
    const auto model = PotentialModel::lennard_jones();
    const std::vector<Snapshot> win{{0.0, s}};
    const auto cell = virial_stress_cell(win, model).stress.total;
    const Vec3 c{0.5 * s.cell.lengths[0], 0.5 * s.cell.lengths[1], 0.5 * s.cell.lengths[2]};
    const auto h = hardy_stress(win, WeightingFunction::constant(0.5 * s.cell.lengths[1], 0.6), FieldGrid::from_points({c}),
                                model)
                       .values[0]
                       .total;
    CHECK(max_abs(h - cell) < 0.01 * max_abs(cell));
    CHECK(max_abs(h - h.transpose()) <= 1e-12 * max_abs(h));
    CHECK(max_abs(cell - cell.transpose()) <= 1e-12 * max_abs(cell));
    // tension along e1
    CHECK(cell(0, 0) > 0.0);
}

TEST_CASE("threaded Hardy field is bitwise identical") {
    const auto s = strained_lattice(4, 0.0, 0.0, 0.05, 9, 0.05);
    const auto model = PotentialModel::lennard_jones();
    const auto grid = FieldGrid::make_regular({0.5, 0.5, 0.5}, {1.4, 1.4, 1.4}, {4, 4, 2});
    const std::vector<Snapshot> win{{0.0, s}};
    const auto a = hardy_stress(win, WeightingFunction::constant(1.5, 0.2), grid, model, 1);
    const auto b = hardy_stress(win, WeightingFunction::constant(1.5, 0.2), grid, model, 3);
    for (std::size_t g = 0; g < grid.size(); ++g) CHECK(a.values[g].total == b.values[g].total);
}

TEST_CASE("virial domain conventions") {
    auto s = build_fcc_lattice(2, 2, 2, kA);
    s.cell.periodic = {false, false, false};
    s.cell.lengths = {40.0, 40.0, 40.0};
    s = initialize_velocities(s, 0.1, 3);
    const auto model = PotentialModel::lennard_jones();
    const std::vector<Snapshot> win{{0.0, s}};
    CHECK(virial_stress(win, Sphere{{30.0, 30.0, 30.0}, 1.0}, model).empty_domain);

    // a sphere holding the whole cluster: every bond, sphere volume, absolute velocities
    const double R = 10.0;
    const auto v = virial_stress(win, Sphere{{kA, kA, kA}, R}, model, VelocityReference::Absolute);
    const auto rep = multibody_eval(s, model);
    Mat3 ref;
    for (const auto& t : rep.bonds) ref += outer(t.force, t.rel) * 0.5;
    for (std::size_t a = 0; a < s.size(); ++a) ref -= outer(s.velocities[a], s.velocities[a]) * s.masses[a];
    ref *= 1.0 / (4.0 / 3.0 * std::numbers::pi * R * R * R);
    CHECK(max_abs(v.stress.total - ref) <= 1e-12 * max_abs(ref));
    CHECK_THROWS_AS(virial_stress(win, Sphere{{0, 0, 0}, 0.0}, model), InvalidArgument);
}

TEST_CASE("virial field matches single-sphere evaluations") {
    const auto s = strained_lattice(4, 0.0, 0.0, 0.05, 5, 0.05);
    const auto model = PotentialModel::lennard_jones();
    const std::vector<Snapshot> win{{0.0, s}};
    const std::vector<std::vector<BondForceTerm>> terms{multibody_eval(s, model).bonds};
    const auto grid = FieldGrid::make_regular({1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, {2, 2, 2});
    const auto f = virial_stress_field(win, terms, grid, 2.2, VelocityReference::DomainCenterOfMass, 2);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto one = virial_stress_terms(win, terms, Sphere{grid.points[g], 2.2});
        CHECK(f.values[g].total == one.stress.total);
    }
}

TEST_CASE("virial pressure is minus a third of the trace of the cell stress") {
    const auto s = strained_lattice(4, 0.003, 0.003, 0.05, 6, 0.03);
    const auto model = PotentialModel::lennard_jones();
    const auto rep = multibody_eval(s, model);
    const Snapshot snap{0.0, s};
    const auto p = virial_pressure(snap, rep, s.cell.volume());
    const auto cell = virial_stress_cell(std::vector<Snapshot>{snap}, model, VelocityReference::Absolute).stress;
    CHECK(p.total == doctest::Approx(-cell.total.trace() / 3.0).epsilon(1e-12));
    CHECK(p.kinetic == doctest::Approx(-cell.kinetic.trace() / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(virial_pressure(snap, rep, 0.0), InvalidArgument);
}

TEST_CASE("DA bond integral matches a Monte Carlo oracle") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Vec3 a{0.4, -0.3, 0.2}, b{-0.6, 0.5, 0.1};
    for (const auto& wf : {WeightingFunction::constant(1.0), WeightingFunction::quartic_spline(1.2)}) {
        const double S = wf.support();
        const Vec3 z0 = a - b;
        const double h = 2.0 * S;
        const int n = 2000000;
        Vec3 sum;
        for (int i = 0; i < n; ++i) {
            const double s = u01(rng);
            const Vec3 z = z0 + Vec3{2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0} * h;
            sum += z * (wf(norm(a - z * s)) * wf(norm(b + z * (1.0 - s))));
        }
        const Vec3 mc = sum * (8.0 * h * h * h / n);
        const Vec3 got = da_bond_integral(wf, a, b);
        CHECK(norm(got - mc) < 0.01 * norm(mc));
    }
}

TEST_CASE("DA stress reproduces a homogeneous stress") {
    const auto s = strained_lattice(5, 0.01, -0.004, 0.0, 1);
    const auto model = PotentialModel::lennard_jones();
    const auto cell = virial_stress_cell(std::vector<Snapshot>{{0.0, s}}, model).stress.total;
    const Vec3 c{0.5 * s.cell.lengths[0], 0.5 * s.cell.lengths[1], 0.5 * s.cell.lengths[2]};
    const auto d = da_stress(s, WeightingFunction::constant(3.0), FieldGrid::from_points({c}), model);
    CHECK(d.values[0].total(0, 0) == doctest::Approx(cell(0, 0)).epsilon(0.03));
}

TEST_CASE("Tsai traction on a full plane of a strained crystal equals the cell stress") {
    const auto s = strained_lattice(4, 0.01, -0.004, 0.0, 1);
    const auto model = PotentialModel::lennard_jones();
    const auto cell = virial_stress_cell(std::vector<Snapshot>{{0.0, s}}, model).stress.total;
    const auto& L = s.cell.lengths;
    // atomic planes sit at a/4 + k a/2, so x = a (strained) is midway between two of them
    const double x = kA * 1.01;
    const auto t = tsai_traction(std::vector<Snapshot>{{0.0, s}},
                                 PlanarProbe::rectangle({x, 0.5 * L[1], 0.5 * L[2]}, {1, 0, 0}, L[1], L[2]), model);
    CHECK(t.total.x == doctest::Approx(cell(0, 0)).epsilon(1e-9));
    CHECK(std::abs(t.total.y) < 1e-9 * std::abs(cell(0, 0)));
    CHECK(t.bond_crossings > 0);
}

TEST_CASE("Tsai kinetic part from particles crossing the plane") {
    ParticleState s;
    s.cell.lengths = {20.0, 20.0, 20.0};
    s.cell.periodic = {false, false, false};
    s.positions = {{9.9, 5.0, 10.0}, {10.1, 15.0, 10.0}};
    s.velocities = {{1.0, 0.0, 0.0}, {-1.0, 0.5, 0.0}};
    s.masses = {1.0, 1.0};
    s.species = {"X", "X"};
    Snapshot s0{0.0, s}, s1{0.2, s};
    for (int a = 0; a < 2; ++a) s1.state.positions[a] += s.velocities[a] * 0.2;
    const auto probe = PlanarProbe::rectangle({10.0, 10.0, 10.0}, {1, 0, 0}, 20.0, 20.0);
    TsaiAccumulator acc(s.cell, {probe});
    acc.add(s0, {});
    acc.add(s1, {});
    const auto r = acc.result()[0];
    CHECK(r.crossings == 2);
    CHECK(r.velocity_source == VelocitySource::Crossings);
    CHECK(r.continuum_velocity.x == doctest::Approx(0.0));
    CHECK(r.continuum_velocity.y == doctest::Approx(0.25));
    // -(1/(A tau)) sum m (v - vbar) sign((v - vbar).n)
    CHECK(r.kinetic.x == doctest::Approx(-2.0 / (400.0 * 0.2)));
    CHECK(r.kinetic.y == doctest::Approx(-(-0.25 - 0.25) / (400.0 * 0.2)));
    CHECK_FALSE(r.large_step_warning);
}

TEST_CASE("Tsai without crossings falls back to the slab velocity") {
    ParticleState s;
    s.cell.lengths = {20.0, 20.0, 20.0};
    s.positions = {{10.5, 5.0, 10.0}};
    s.velocities = {{0.0, 0.3, 0.0}};
    s.masses = {1.0};
    s.species = {"X"};
    TsaiAccumulator acc(s.cell, {PlanarProbe::square({10.0, 10.0, 10.0}, {1, 0, 0}, 20.0)});
    acc.add(Snapshot{0.0, s}, {});
    acc.add(Snapshot{0.1, s}, {});
    const auto r = acc.result()[0];
    CHECK(r.velocity_source == VelocitySource::SlabFallback);
    CHECK(r.continuum_velocity.y == doctest::Approx(0.3));
}

TEST_CASE("tensor assembly wants normals e1, e2, e3 in order") {
    TractionSample a, b, c;
    a.probe = PlanarProbe::square({}, {1, 0, 0}, 1.0);
    b.probe = PlanarProbe::square({}, {0, 1, 0}, 1.0);
    c.probe = PlanarProbe::square({}, {0, 0, 1}, 1.0);
    a.total = {1, 2, 3};
    b.total = {4, 5, 6};
    c.total = {7, 8, 9};
    const Mat3 m = assemble_tensor_from_tractions(a, b, c);
    CHECK(m(1, 0) == 2.0);
    CHECK(m(0, 1) == 4.0);
    CHECK(m(2, 2) == 9.0);
    CHECK_THROWS_AS(assemble_tensor_from_tractions(b, a, c), InvalidArgument);
}

TEST_CASE("sigma star is nonzero outside a body where Hardy vanishes") {
    auto s = build_fcc_lattice(3, 3, 3, kA);
    s.cell.periodic = {false, false, false};
    s.cell.lengths = {40.0, 40.0, 40.0};
    const auto model = PotentialModel::lennard_jones();
    const auto wf = WeightingFunction::constant(1.5);
    const auto grid = FieldGrid::from_points({Vec3{20.0, 2.0, 2.0}});
    const auto star = stress_star_counterexample(s, wf, grid, model);
    const auto h = hardy_stress(std::vector<Snapshot>{{0.0, s}}, wf, grid, model);
    CHECK(max_abs(h.values[0].total) == 0.0);
    CHECK(max_abs(star.values[0].total) > 1e-6);
}

TEST_CASE("continuum density of a lattice") {
    const auto s = strained_lattice(5, 0.0, 0.0, 0.0, 1);
    const auto f = continuum_fields(s, WeightingFunction::constant(3.0, 0.5), FieldGrid::from_points({Vec3{3.3, 3.1, 3.7}}));
    CHECK(f[0].density == doctest::Approx(4.0 / (kA * kA * kA)).epsilon(0.02));
    CHECK(f[0].velocity_defined);
}

TEST_CASE("one-dimensional Hardy window") {
    // uniform chain, one bond per neighbour pair, tension f
    std::vector<double> x;
    std::vector<ChainBond> bonds;
    for (int i = 0; i < 20; ++i) x.push_back(i);
    for (int i = 0; i + 1 < 20; ++i) bonds.push_back({i, i + 1, 0.7});
    // -f (x_i - x_j) = 0.7 per unit length, averaged over any interior window
    CHECK(hardy_stress_chain_1d(x, bonds, 9.3, 4.0) == doctest::Approx(0.7));
    CHECK_THROWS_AS(hardy_stress_chain_1d(x, bonds, 9.3, 0.0), InvalidArgument);
}
