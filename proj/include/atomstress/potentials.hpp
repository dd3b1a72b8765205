#pragma once

#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

#include "atomstress/config_core.hpp"

namespace atomstress {

struct EnergyDerivative {
    double value = 0.0;
    double derivative = 0.0;
};

// phi(r) = 4(r^-12 - r^-6) - 0.0078 r^2 + 0.0651, zero from r = 2.5 on
EnergyDerivative lj_eval(double r);
inline constexpr double kLJCutoff = 2.5;

struct EamParams {
    double A = 1.0;   // pair amplitude
    double p = 1.0;   // pair decay
    double q = 1.0;   // density decay
    double D = 1.0;   // embedding strength
    double cutoff = 2.5;
};

class PairTable;

class PotentialModel {
public:
    enum class Kind { LJ, EAM, PairTable };

    static PotentialModel lennard_jones();
    static PotentialModel eam(const EamParams& p);
    // two-column CSV: r, dV/dr
    static PotentialModel pair_table(const std::filesystem::path& csv);
    static PotentialModel pair_table(std::vector<double> r, std::vector<double> dvdr);

    Kind kind() const { return kind_; }
    double cutoff() const { return cutoff_; }
    bool has_embedding() const { return kind_ == Kind::EAM; }
    const EamParams& eam_params() const { return eam_; }

    EnergyDerivative pair(double r) const;
    EnergyDerivative density(double r) const;   // zero for pair models
    EnergyDerivative embed(double rho) const;   // zero for pair models

private:
    Kind kind_ = Kind::LJ;
    double cutoff_ = kLJCutoff;
    EamParams eam_;
    std::shared_ptr<const PairTable> table_;
};

struct BondForceTerm {
    int alpha = 0;
    int beta = 0;
    Vec3 force;  // contribution to the force on alpha due to beta
    Vec3 rel;    // minimum-image x_beta - x_alpha
};

struct ForceReport {
    double energy = 0.0;
    std::vector<Vec3> forces;
    std::vector<BondForceTerm> bonds;  // both orderings, sorted by (alpha, beta)
};

// with_bonds = false leaves ForceReport::bonds empty (faster for plain dynamics)
ForceReport multibody_eval(const ParticleState& state, const NeighborList& nl, const PotentialModel& model,
                           bool with_bonds = true, int threads = 1);
// builds a skinless neighbor list first
ForceReport multibody_eval(const ParticleState& state, const PotentialModel& model);
double total_energy(const ParticleState& state, const PotentialModel& model);

// Energy per atom of a perfect monatomic lattice given the neighbor distances of one site.
double site_energy(const PotentialModel& model, const std::vector<double>& distances);

// f_ab = (f_a - f_b)/3 for an isolated triple; six ordered terms.
std::vector<BondForceTerm> noncentral_three_body_decomposition(const ParticleState& cluster, const PotentialModel& model);

struct Extension1D {
    double f12 = 0.0, f13 = 0.0;          // standard pair decomposition (x-components on particle 1)
    double f12_ext = 0.0, f13_ext = 0.0;  // with the collinearity determinant added
};

// Collinear triple x1 < x2 < x3 under a pair model.
Extension1D alternate_extension_forces_1d(const PotentialModel& model, double x1, double x2, double x3);

// d chi / d r for the three pairs (12, 13, 23) of a collinear triple with r12 = a, r23 = c.
std::array<double, 3> collinear_extension_derivatives(double a, double c);

// Extra bond terms from adding sum_k lambda_k chi_k over the given clusters to the energy.
// chi_k vanishes identically for clusters of 5 or more points in space, so the net
// force on every particle is unchanged.
std::vector<BondForceTerm> extension_bond_terms(const ParticleState& state, const std::vector<std::vector<int>>& clusters,
                                                const std::vector<double>& lambdas);

}  // namespace atomstress
