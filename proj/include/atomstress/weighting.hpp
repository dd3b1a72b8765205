#pragma once

#include <functional>
#include <vector>

#include "atomstress/vec.hpp"

namespace atomstress {

enum class KernelKind { Constant, Gaussian, QuarticSpline };

class WeightingFunction {
public:
    // epsilon = 0 gives the plain step kernel 1/V_w
    static WeightingFunction constant(double r_w, double epsilon = 0.0);
    static WeightingFunction gaussian(double r_w, double cutoff_multiplier = 6.0);
    static WeightingFunction quartic_spline(double r_w);

    KernelKind kind() const { return kind_; }
    double radius() const { return r_w_; }
    double epsilon() const { return eps_; }
    double support() const { return support_; }
    bool is_step() const { return kind_ == KernelKind::Constant && eps_ == 0.0; }

    double operator()(double r) const;
    double operator()(const Vec3& d) const { return (*this)(norm(d)); }
    double max_value() const { return (*this)(0.0); }
    // radii where the kernel is not smooth (inside or at the support boundary)
    std::vector<double> breakpoints() const;

private:
    KernelKind kind_ = KernelKind::Constant;
    double r_w_ = 1.0;
    double eps_ = 0.0;
    double support_ = 1.0;
    double c_ = 0.0;  // normalization constant
};

// integral of s^2 w(s) over [0, u]; equals 1/(4 pi) once u passes the support
double radial_mass(const WeightingFunction& wf, double u);

// b(x; u, v) = integral over s in [0,1] of w((1-s)u + s v - x)
double bond_function(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v);
// generic quadrature path, used by the step kernel cross-check
double bond_function_quadrature(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v);

// Contour Y_l with Y_l(0) = 0, Y_l(1) = (l,0,0) and Y_l(s).e1 = s l.
struct InteractionPath {
    std::function<Vec3(double s, double l)> point;
    std::function<Vec3(double s, double l)> tangent;
    bool straight = true;

    static InteractionPath straight_line();
    // planar circular arc bulging along e2, sagitta = ratio * l, 0 < ratio < 0.5
    static InteractionPath circular_arc(double sagitta_ratio);
    double length(double l) const;
};

// Rotation with Q e1 = -z/|z| and minimal angle.
Mat3 path_rotation(const Vec3& z);

Vec3 bond_vector(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v,
                 const InteractionPath& path = InteractionPath::straight_line());

}  // namespace atomstress
