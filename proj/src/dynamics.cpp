#include "atomstress/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "atomstress/error.hpp"

namespace atomstress {

CounterRng::result_type CounterRng::operator()() {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (++counter_);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double kinetic_energy(const ParticleState& s) {
    double k = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a) k += 0.5 * s.masses[a] * norm2(s.velocities[a]);
    return k;
}

double kinetic_temperature(const ParticleState& s) {
    if (s.size() < 2) throw InvalidArgument("kinetic temperature needs N >= 2");
    return 2.0 * kinetic_energy(s) / (3.0 * static_cast<double>(s.size()) - 3.0);
}

Vec3 center_of_mass_velocity(const ParticleState& s) {
    Vec3 p;
    double m = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a) {
        p += s.velocities[a] * s.masses[a];
        m += s.masses[a];
    }
    return p / m;
}

ParticleState initialize_velocities(const ParticleState& state, double temperature, std::uint64_t seed) {
    if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
    if (state.size() < 2) throw InvalidArgument("velocity initialization with momentum removal needs N >= 2");
    ParticleState out = state;
    if (temperature == 0.0) {
        out.velocities.assign(out.size(), Vec3{});
        return out;
    }
    CounterRng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t a = 0; a < out.size(); ++a) {
        const double sd = std::sqrt(temperature / out.masses[a]);
        for (int c = 0; c < 3; ++c) out.velocities[a][c] = sd * gauss(rng);
    }
    const Vec3 vcm = center_of_mass_velocity(out);
    for (auto& v : out.velocities) v -= vcm;
    const double scale = std::sqrt(temperature / kinetic_temperature(out));
    for (auto& v : out.velocities) v *= scale;
    return out;
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (steps < 0) throw InvalidArgument("steps must be >= 0");
    if (stride < 1) throw InvalidArgument("snapshot stride must be >= 1");
    if (skin < 0.0) throw InvalidArgument("skin must be >= 0");
}

ParticleState run_nve(const ParticleState& start, const PotentialModel& model, const IntegratorConfig& cfg,
                      const NveObserver& observer) {
    cfg.validate();
    start.validate();
    ParticleState s = start;
    NeighborList nl = build_neighbor_list(s, model.cutoff(), cfg.skin);
    ForceReport rep = multibody_eval(s, nl, model, true, cfg.threads);
    const std::size_t n = s.size();
    auto energy = [&](double t) {
        const double k = kinetic_energy(s);
        return EnergySample{t, k, rep.energy, k + rep.energy};
    };
    const EnergySample e0 = energy(0.0);
    if (observer) observer(Snapshot{0.0, s}, rep, e0);
    for (long step = 1; step <= cfg.steps; ++step) {
        for (std::size_t a = 0; a < n; ++a) {
            s.velocities[a] += rep.forces[a] * (0.5 * cfg.dt / s.masses[a]);
            s.positions[a] += s.velocities[a] * cfg.dt;
        }
        if (needs_rebuild(nl, s)) nl = build_neighbor_list(s, model.cutoff(), cfg.skin);
        const bool record = step % cfg.stride == 0;
        rep = multibody_eval(s, nl, model, record && observer, cfg.threads);
        for (std::size_t a = 0; a < n; ++a) s.velocities[a] += rep.forces[a] * (0.5 * cfg.dt / s.masses[a]);
        const double t = step * cfg.dt;
        if (record || step % 100 == 0) {
            const EnergySample e = energy(t);
            if (!std::isfinite(e.total) || (e0.total != 0.0 && std::abs(e.total) > 10.0 * std::abs(e0.total))) {
                std::ostringstream msg;
                msg << "energy blow-up at step " << step << ": E = " << e.total << " (initial " << e0.total
                    << "); reduce dt";
                throw NumericalFailure(msg.str());
            }
            if (record && observer) observer(Snapshot{t, s}, rep, e);
        }
    }
    return s;
}

NveResult run_nve(const ParticleState& state, const PotentialModel& model, const IntegratorConfig& cfg) {
    NveResult r;
    run_nve(state, model, cfg, [&](const Snapshot& snap, const ForceReport&, const EnergySample& e) {
        r.trajectory.snapshots.push_back(snap);
        r.energies.push_back(e);
    });
    return r;
}

void MinimizerConfig::validate() const {
    if (!(ftol > 0.0)) throw InvalidArgument("force tolerance must be positive");
    if (max_iterations < 0) throw InvalidArgument("max iterations must be >= 0");
    if (!(dt > 0.0) || !(dt_max >= dt)) throw InvalidArgument("FIRE needs 0 < dt <= dt_max");
}

MinimizeResult minimize(const ParticleState& start, const PotentialModel& model, const MinimizerConfig& cfg) {
    cfg.validate();
    start.validate();
    const std::size_t n = start.size();
    if (!cfg.fixed.empty() && cfg.fixed.size() != n) throw InvalidArgument("fixed mask size must match particle count");
    auto is_fixed = [&](std::size_t a) { return !cfg.fixed.empty() && cfg.fixed[a]; };

    MinimizeResult res;
    ParticleState s = start;
    s.velocities.assign(n, Vec3{});
    NeighborList nl = build_neighbor_list(s, model.cutoff(), cfg.skin);
    ForceReport rep = multibody_eval(s, nl, model, false, cfg.threads);
    if (!std::isfinite(rep.energy)) throw InvalidArgument("initial energy is not finite");
    auto max_force = [&](const ForceReport& r) {
        double m = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            if (!is_fixed(a)) m = std::max(m, norm(r.forces[a]));
        return m;
    };
    res.energies.push_back(rep.energy);
    double fmax = max_force(rep);

    const double f_inc = 1.1, f_dec = 0.5, a0 = 0.1, f_a = 0.99;
    const int n_min = 5;
    double dt = cfg.dt, alpha = a0;
    int since_neg = 0;
    std::vector<Vec3> v(n), x_old;
    long tries = 0;
    const long max_tries = 4 * cfg.max_iterations + 100;
    while (fmax >= cfg.ftol && res.iterations < cfg.max_iterations && tries < max_tries) {
        ++tries;
        double P = 0.0, vn = 0.0, fn = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (is_fixed(a)) continue;
            P += dot(rep.forces[a], v[a]);
            vn += norm2(v[a]);
            fn += norm2(rep.forces[a]);
        }
        vn = std::sqrt(vn);
        fn = std::sqrt(fn);
        if (P > 0.0) {
            for (std::size_t a = 0; a < n; ++a)
                if (!is_fixed(a) && fn > 0.0) v[a] = v[a] * (1.0 - alpha) + rep.forces[a] * (alpha * vn / fn);
            if (++since_neg > n_min) {
                dt = std::min(dt * f_inc, cfg.dt_max);
                alpha *= f_a;
            }
        } else {
            for (auto& w : v) w = Vec3{};
            dt *= f_dec;
            alpha = a0;
            since_neg = 0;
        }
        x_old = s.positions;
        for (std::size_t a = 0; a < n; ++a) {
            if (is_fixed(a)) continue;
            v[a] += rep.forces[a] * (dt / s.masses[a]);
            s.positions[a] += v[a] * dt;
        }
        if (needs_rebuild(nl, s)) nl = build_neighbor_list(s, model.cutoff(), cfg.skin);
        ForceReport trial = multibody_eval(s, nl, model, false, cfg.threads);
        if (!(trial.energy <= rep.energy + 1e-12 * std::abs(rep.energy))) {
            s.positions = x_old;
            for (auto& w : v) w = Vec3{};
            dt *= f_dec;
            alpha = a0;
            since_neg = 0;
            if (dt < 1e-14) break;
            continue;
        }
        rep = std::move(trial);
        ++res.iterations;
        res.energies.push_back(rep.energy);
        fmax = max_force(rep);
    }
    res.state = s;
    res.energy = rep.energy;
    res.max_force = fmax;
    res.converged = fmax < cfg.ftol;
    return res;
}

}  // namespace atomstress
