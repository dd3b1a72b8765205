#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "atomstress/config_core.hpp"
#include "atomstress/potentials.hpp"

namespace atomstress {

// SplitMix64 on (seed, counter): draw k depends only on seed and k.
class CounterRng {
public:
    using result_type = std::uint64_t;
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

// 2 KE / ((3N - 3) k_B), reduced units with k_B = 1
double kinetic_temperature(const ParticleState& state);
double kinetic_energy(const ParticleState& state);
Vec3 center_of_mass_velocity(const ParticleState& state);

ParticleState initialize_velocities(const ParticleState& state, double temperature, std::uint64_t seed);

struct IntegratorConfig {
    double dt = 0.002;
    long steps = 1000;
    long stride = 1;
    std::uint64_t seed = 1;
    double skin = 0.3;
    int threads = 1;
    void validate() const;
};

struct EnergySample {
    double time = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

using NveObserver = std::function<void(const Snapshot&, const ForceReport&, const EnergySample&)>;

// Velocity Verlet; the observer sees step 0 and every stride-th step. Returns the final state.
ParticleState run_nve(const ParticleState& state, const PotentialModel& model, const IntegratorConfig& cfg,
                      const NveObserver& observer);

struct NveResult {
    Trajectory trajectory;
    std::vector<EnergySample> energies;
};
NveResult run_nve(const ParticleState& state, const PotentialModel& model, const IntegratorConfig& cfg);

struct MinimizerConfig {
    double ftol = 1e-8;
    long max_iterations = 100000;
    double dt = 0.01;
    double dt_max = 0.1;
    double skin = 0.3;
    int threads = 1;
    std::vector<bool> fixed;  // optional per-particle mask
    void validate() const;
};

struct MinimizeResult {
    ParticleState state;
    bool converged = false;
    long iterations = 0;  // accepted moves
    double energy = 0.0;
    double max_force = 0.0;
    std::vector<double> energies;  // after each accepted move, starting with the input energy
};

// FIRE; a move that raises the energy is undone and the step halved.
MinimizeResult minimize(const ParticleState& state, const PotentialModel& model, const MinimizerConfig& cfg);

}  // namespace atomstress
