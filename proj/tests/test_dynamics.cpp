#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "atomstress/dynamics.hpp"
#include "atomstress/error.hpp"

using namespace atomstress;

TEST_CASE("counter rng is reproducible and advances its counter") {
    CounterRng a(42), b(42), c(43);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        seen.insert(x);
        CHECK(x != c());
    }
    CHECK(seen.size() == 1000);
    CHECK(a.counter() == 1000);
    // resuming from a counter gives the same stream
    CounterRng r(42, 500), s(42);
    for (int i = 0; i < 500; ++i) s();
    CHECK(r() == s());
}

TEST_CASE("initial velocities hit the temperature with zero momentum") {
    const auto s = initialize_velocities(build_fcc_lattice(4, 4, 4, 1.5565), 0.05, 3);
    CHECK(kinetic_temperature(s) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(norm(center_of_mass_velocity(s)) < 1e-14);
    const auto t = initialize_velocities(build_fcc_lattice(4, 4, 4, 1.5565), 0.05, 3);
    CHECK(t.velocities == s.velocities);
    CHECK_THROWS_AS(initialize_velocities(s, -1.0, 1), InvalidArgument);
}

TEST_CASE("velocity Verlet conserves energy") {
    auto s = build_fcc_lattice(4, 4, 4, 1.5565);
    s = initialize_velocities(s, 0.2, 11);
    IntegratorConfig cfg;
    cfg.dt = 0.002;
    cfg.steps = 1000;
    cfg.stride = 50;
    const auto r = run_nve(s, PotentialModel::lennard_jones(), cfg);
    CHECK(r.trajectory.snapshots.size() == 21);
    CHECK(r.trajectory.snapshots.back().time == doctest::Approx(2.0));
    double lo = r.energies.front().total, hi = lo;
    for (const auto& e : r.energies) {
        lo = std::min(lo, e.total);
        hi = std::max(hi, e.total);
        CHECK(e.total == doctest::Approx(e.kinetic + e.potential));
    }
    CHECK((hi - lo) < 1e-4 * s.size());
    // the thermal motion is real
    CHECK(r.energies.back().kinetic != doctest::Approx(r.energies.front().kinetic));
}

TEST_CASE("integrator and minimizer reject bad settings") {
    IntegratorConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.stride = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    MinimizerConfig m;
    m.dt_max = 0.001;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
}

TEST_CASE("FIRE relaxes a perturbed crystal monotonically") {
    auto s = build_fcc_lattice(4, 4, 4, 1.5565);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    for (auto& x : s.positions) x += Vec3{u(rng), u(rng), u(rng)};
    MinimizerConfig cfg;
    cfg.ftol = 1e-7;
    const auto r = minimize(s, PotentialModel::lennard_jones(), cfg);
    CHECK(r.converged);
    CHECK(r.max_force < 1e-7);
    for (std::size_t i = 1; i < r.energies.size(); ++i) CHECK(r.energies[i] <= r.energies[i - 1] + 1e-12 * std::abs(r.energies[i - 1]));
    CHECK(r.energy < r.energies.front());
}

TEST_CASE("fixed atoms stay put during minimization") {
    auto s = build_fcc_lattice(4, 4, 4, 1.5565);
    s.positions[0].x += 0.1;
    s.positions[1].y += 0.1;
    MinimizerConfig cfg;
    cfg.fixed.assign(s.size(), false);
    cfg.fixed[0] = true;
    const auto r = minimize(s, PotentialModel::lennard_jones(), cfg);
    CHECK(r.state.positions[0] == s.positions[0]);
    cfg.fixed.pop_back();
    CHECK_THROWS_AS(minimize(s, PotentialModel::lennard_jones(), cfg), InvalidArgument);
}
