#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomstress/config_core.hpp"
#include "atomstress/potentials.hpp"
#include "atomstress/weighting.hpp"

namespace atomstress {

struct RegularGrid {
    Vec3 origin;
    Vec3 spacing;
    std::array<int, 3> counts{1, 1, 1};
};

struct FieldGrid {
    std::vector<Vec3> points;
    std::optional<RegularGrid> regular;

    // x fastest, then y, then z
    static FieldGrid make_regular(const Vec3& origin, const Vec3& spacing, std::array<int, 3> counts);
    static FieldGrid from_points(std::vector<Vec3> pts);
    std::size_t size() const { return points.size(); }
};

struct PointStress {
    Mat3 kinetic;
    Mat3 potential;
    Mat3 total;
};

struct StressField {
    std::string estimator;
    FieldGrid grid;
    std::vector<PointStress> values;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct ContinuumSample {
    double density = 0.0;
    Vec3 momentum;
    Vec3 velocity;
    bool velocity_defined = false;
};

std::vector<ContinuumSample> continuum_fields(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid);

// One unordered bond per entry: force = (f_ab - f_ba)/2 acting on alpha, rel = x_b - x_a.
struct BondSegment {
    int alpha = 0;
    int beta = 0;
    Vec3 start;
    Vec3 rel;
    Vec3 force;
};
std::vector<BondSegment> bond_segments(const ParticleState& state, std::span<const BondForceTerm> terms);

// Time-averaged Hardy stress, fed one snapshot at a time.
class HardyAccumulator {
public:
    HardyAccumulator(WeightingFunction wf, FieldGrid grid, int threads = 1);
    void add(const Snapshot& snap, std::span<const BondForceTerm> terms);
    StressField result() const;

private:
    WeightingFunction wf_;
    FieldGrid grid_;
    int threads_;
    std::vector<Mat3> kin_, pot_;
    std::size_t count_ = 0;
    double t0_ = 0.0, t1_ = 0.0;
};

StressField hardy_stress(std::span<const Snapshot> window, const WeightingFunction& wf, const FieldGrid& grid,
                         const PotentialModel& model, int threads = 1);
// same, with caller-supplied bond terms per snapshot (e.g. an alternative decomposition)
StressField hardy_stress_terms(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                               const WeightingFunction& wf, const FieldGrid& grid, int threads = 1);

struct Sphere {
    Vec3 center;
    double radius = 1.0;
};

enum class VelocityReference { DomainCenterOfMass, Absolute };

struct VirialResult {
    PointStress stress;
    double volume = 0.0;
    bool empty_domain = false;
};

VirialResult virial_stress(std::span<const Snapshot> window, const Sphere& domain, const PotentialModel& model,
                           VelocityReference ref = VelocityReference::DomainCenterOfMass);
VirialResult virial_stress_terms(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                                 const Sphere& domain, VelocityReference ref = VelocityReference::DomainCenterOfMass);
// spheres of one radius at every grid point; an empty sphere gives zero stress
StressField virial_stress_field(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                                const FieldGrid& grid, double radius,
                                VelocityReference ref = VelocityReference::DomainCenterOfMass, int threads = 1);
// whole periodic cell: every bond, cell volume
VirialResult virial_stress_cell(std::span<const Snapshot> window, const PotentialModel& model,
                                VelocityReference ref = VelocityReference::DomainCenterOfMass);

struct PressureSample {
    double time = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

// p = (1/3V)[sum m |v - v_ref|^2 - 1/2 sum f.r]
PressureSample virial_pressure(const Snapshot& snap, const ForceReport& rep, double volume, const Vec3& v_ref = {});

// Potential part of the doubly averaged stress; the kinetic part is the Hardy one.
StressField da_stress(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid,
                      const PotentialModel& model, int threads = 1);
// z-integral vector for one bond (a = x_a - x, b = x_b - x)
Vec3 da_bond_integral(const WeightingFunction& wf, const Vec3& a, const Vec3& b);

struct PlanarProbe {
    Vec3 center;
    Vec3 normal{1.0, 0.0, 0.0};
    Vec3 axis_a{0.0, 1.0, 0.0};
    Vec3 axis_b{0.0, 0.0, 1.0};
    double half_a = 0.5;
    double half_b = 0.5;

    double area() const { return 4.0 * half_a * half_b; }
    // w_a x w_b rectangle with in-plane axes built from the normal
    static PlanarProbe rectangle(const Vec3& center, const Vec3& normal, double w_a, double w_b);
    static PlanarProbe square(const Vec3& center, const Vec3& normal, double w) { return rectangle(center, normal, w, w); }
};

enum class VelocitySource { Crossings, SlabFallback, Undefined };

struct TractionSample {
    PlanarProbe probe;
    Vec3 potential;
    Vec3 kinetic;
    Vec3 total;
    std::size_t crossings = 0;       // particle crossings
    std::size_t bond_crossings = 0;  // summed over snapshots
    double t_begin = 0.0;
    double t_end = 0.0;
    Vec3 continuum_velocity;
    VelocitySource velocity_source = VelocitySource::Undefined;
    bool large_step_warning = false;
};

struct TsaiOptions {
    double slab_half_thickness = 1.0;
    double max_step_displacement = 0.39;  // about a/4 for the LJ crystal
};

class TsaiAccumulator {
public:
    TsaiAccumulator(const SimulationCell& cell, std::vector<PlanarProbe> probes, TsaiOptions opt = {});
    ~TsaiAccumulator();
    TsaiAccumulator(TsaiAccumulator&&) noexcept;
    TsaiAccumulator& operator=(TsaiAccumulator&&) noexcept;
    void add(const Snapshot& snap, std::span<const BondForceTerm> terms);
    std::vector<TractionSample> result() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

TractionSample tsai_traction(std::span<const Snapshot> window, const PlanarProbe& probe, const PotentialModel& model,
                             TsaiOptions opt = {});

// column j = total traction of the sample whose normal is e_j
Mat3 assemble_tensor_from_tractions(const TractionSample& t1, const TractionSample& t2, const TractionSample& t3);

StressField stress_star_counterexample(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid,
                                       const PotentialModel& model);

struct ChainBond {
    int i = 0;
    int j = 0;
    double force = 0.0;  // x-force on i due to j
};
// 1D Hardy analogue with a uniform window of the given length
double hardy_stress_chain_1d(std::span<const double> x, std::span<const ChainBond> bonds, double center, double length);

}  // namespace atomstress
