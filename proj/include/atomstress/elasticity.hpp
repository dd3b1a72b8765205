#pragma once

#include <array>
#include <complex>

#include "atomstress/potentials.hpp"

namespace atomstress {

struct CubicConstants {
    double c11 = 0.0, c12 = 0.0, c44 = 0.0;
    void validate() const;
    double zener_ratio() const { return 2.0 * c44 / (c11 - c12); }
};

struct Moduli {
    double E = 0.0, mu = 0.0, nu = 0.0;
};

// zero-pressure fcc lattice constant, searched in [lo, hi]
double relaxed_lattice_constant(const PotentialModel& model, double lo = 1.3, double hi = 1.9);
// pressure of the perfect fcc crystal with lattice constant a
double fcc_pressure(const PotentialModel& model, double a);
CubicConstants cubic_constants_fd(const PotentialModel& model, double a, double strain = 1e-4);

Moduli engineering_moduli(const CubicConstants& c);

struct KirschPoint {
    std::array<double, 2> displacement{};
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    bool inside_hole = false;
};

// Infinite cubic plate (axes along the cube axes, plane strain) with a traction-free
// circular hole at the origin, remote sigma11 = sigma_inf.
class KirschSolution {
public:
    KirschSolution(const CubicConstants& c, double sigma_inf, double hole_radius);
    KirschPoint at(double x, double y) const;
    double concentration() const;  // sigma11 / sigma_inf at (0, R)

private:
    KirschPoint eval(double x, double y, std::complex<double> mu1, std::complex<double> mu2) const;
    double b11_, b12_, b22_, b66_;
    double p_, R_;
    std::complex<double> mu1_, mu2_;  // roots of the characteristic equation with Im > 0
    bool degenerate_ = false;
};

KirschPoint kirsch_anisotropic(const CubicConstants& c, double sigma_inf, double hole_radius, double x, double y);

std::array<double, 3> uniaxial_cell_strain(double sigma11, const Moduli& m, int n_cells, double a);

// equal triaxial stress of a constrained crystal heated by dT
double thermal_stress(const CubicConstants& c, double alpha_T, double dT);

}  // namespace atomstress
