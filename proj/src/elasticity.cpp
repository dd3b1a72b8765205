#include "atomstress/elasticity.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <vector>

#include "atomstress/error.hpp"

namespace atomstress {

void CubicConstants::validate() const {
    if (!(c11 > std::abs(c12)) || !(c44 > 0.0) || !(c11 + 2.0 * c12 > 0.0))
        throw InvalidArgument("cubic constants violate stability (c11 > |c12|, c44 > 0, c11 + 2 c12 > 0)");
}

namespace {

// fcc lattice vectors (conventional sites) within reach of the origin
std::vector<Vec3> fcc_neighbors(double a, double reach) {
    static const Vec3 basis[4] = {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
    const int n = static_cast<int>(std::ceil(reach / a)) + 1;
    std::vector<Vec3> out;
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j)
            for (int k = -n; k <= n; ++k)
                for (const Vec3& b : basis) {
                    const Vec3 r{(i + b.x) * a, (j + b.y) * a, (k + b.z) * a};
                    const double d = norm(r);
                    if (d > 0.0 && d <= reach) out.push_back(r);
                }
    return out;
}

double deformed_site_energy(const PotentialModel& model, const std::vector<Vec3>& nbrs, const Mat3& F) {
    std::vector<double> d;
    d.reserve(nbrs.size());
    for (const Vec3& r : nbrs) d.push_back(norm(F * r));
    return site_energy(model, d);
}

}  // namespace

double fcc_pressure(const PotentialModel& model, double a) {
    if (!(a > 0.0)) throw InvalidArgument("lattice constant must be positive");
    const auto nbrs = fcc_neighbors(a, model.cutoff());
    // dE/dh under x -> (1+h) x, analytic
    double dpair = 0.0, rho = 0.0, drho = 0.0;
    for (const Vec3& r0 : nbrs) {
        const double r = norm(r0);
        dpair += 0.5 * model.pair(r).derivative * r;
        const auto f = model.density(r);
        rho += f.value;
        drho += f.derivative * r;
    }
    const double dE = dpair + model.embed(rho).derivative * drho;
    const double omega = a * a * a / 4.0;
    return -dE / (3.0 * omega);
}

double relaxed_lattice_constant(const PotentialModel& model, double lo, double hi) {
    auto p = [&](double a) { return fcc_pressure(model, a); };
    if (p(lo) * p(hi) > 0.0) throw NumericalFailure("zero-pressure lattice constant not bracketed");
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(p, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

CubicConstants cubic_constants_fd(const PotentialModel& model, double a, double h) {
    if (!(a > 0.0) || !(h > 0.0)) throw InvalidArgument("lattice constant and strain amplitude must be positive");
    const double p = fcc_pressure(model, a);
    if (!(std::abs(p) < 1e-6))
        throw InvalidArgument("reference lattice is not relaxed (pressure " + std::to_string(p) + ")");
    const auto nbrs = fcc_neighbors(a, model.cutoff() * 1.01 / (1.0 - 2.0 * h));
    const double omega = a * a * a / 4.0;
    auto second = [&](auto make) {
        const double ep = deformed_site_energy(model, nbrs, make(h));
        const double e0 = deformed_site_energy(model, nbrs, make(0.0));
        const double em = deformed_site_energy(model, nbrs, make(-h));
        return (ep - 2.0 * e0 + em) / (h * h) / omega;
    };
    const double c11 = second([](double t) {
        Mat3 F = Mat3::identity();
        F(0, 0) += t;
        return F;
    });
    const double biax = second([](double t) {
        Mat3 F = Mat3::identity();
        F(0, 0) += t;
        F(1, 1) += t;
        return F;
    });
    const double c44 = second([](double t) {
        Mat3 F = Mat3::identity();
        F(0, 1) = t;
        return F;
    });
    CubicConstants c{c11, 0.5 * biax - c11, c44};
    return c;
}

Moduli engineering_moduli(const CubicConstants& c) {
    c.validate();
    Moduli m;
    m.E = (c.c11 * c.c11 + c.c11 * c.c12 - 2.0 * c.c12 * c.c12) / (c.c11 + c.c12);
    m.nu = c.c12 / (c.c11 + c.c12);
    m.mu = c.c44;
    return m;
}

KirschSolution::KirschSolution(const CubicConstants& c, double sigma_inf, double hole_radius) : p_(sigma_inf), R_(hole_radius) {
    c.validate();
    if (!(hole_radius > 0.0)) throw InvalidArgument("hole radius must be positive");
    const double det = (c.c11 - c.c12) * (c.c11 + 2.0 * c.c12);
    const double s11 = (c.c11 + c.c12) / det;
    const double s12 = -c.c12 / det;
    const double s44 = 1.0 / c.c44;
    // plane strain reduced compliances
    b11_ = s11 - s12 * s12 / s11;
    b12_ = s12 - s12 * s12 / s11;
    b22_ = b11_;
    b66_ = s44;
    using cd = std::complex<double>;
    const double B = 2.0 * b12_ + b66_;
    const cd disc = std::sqrt(cd(B * B - 4.0 * b11_ * b22_, 0.0));
    auto root = [](cd X) {
        cd m = std::sqrt(X);
        if (m.imag() < 0.0) m = -m;
        return m;
    };
    mu1_ = root((-B + disc) / (2.0 * b11_));
    mu2_ = root((-B - disc) / (2.0 * b11_));
    degenerate_ = std::abs(mu1_ - mu2_) < 1e-6 * std::abs(mu1_);
}

KirschPoint KirschSolution::eval(double x, double y, std::complex<double> mu1, std::complex<double> mu2) const {
    using cd = std::complex<double>;
    const cd I(0.0, 1.0);
    const cd mu[2] = {mu1, mu2};
    const cd A1 = -I * p_ * R_ / (2.0 * (mu1 - mu2));
    const cd A[2] = {A1, -A1};
    cd phi[2], dphi[2];
    for (int k = 0; k < 2; ++k) {
        const cd z = x + mu[k] * y;
        cd s = std::sqrt(z * z - R_ * R_ * (1.0 + mu[k] * mu[k]));
        const cd den = R_ * (1.0 - I * mu[k]);
        cd zeta = (z + s) / den;
        const cd zeta2 = (z - s) / den;
        if (std::abs(zeta2) > std::abs(zeta)) {
            zeta = zeta2;
            s = -s;
        }
        phi[k] = A[k] / zeta;
        dphi[k] = -A[k] / (zeta * s);
    }
    KirschPoint out;
    out.s11 = p_ + 2.0 * (mu[0] * mu[0] * dphi[0] + mu[1] * mu[1] * dphi[1]).real();
    out.s22 = 2.0 * (dphi[0] + dphi[1]).real();
    out.s12 = -2.0 * (mu[0] * dphi[0] + mu[1] * dphi[1]).real();
    cd u(0.0), v(0.0);
    for (int k = 0; k < 2; ++k) {
        const cd pk = b11_ * mu[k] * mu[k] + b12_;
        const cd qk = b12_ * mu[k] + b22_ / mu[k];
        u += pk * phi[k];
        v += qk * phi[k];
    }
    out.displacement = {b11_ * p_ * x + 2.0 * u.real(), b12_ * p_ * y + 2.0 * v.real()};
    return out;
}

KirschPoint KirschSolution::at(double x, double y) const {
    if (x * x + y * y < R_ * R_ * (1.0 - 1e-12)) {
        KirschPoint k;
        k.inside_hole = true;
        return k;
    }
    if (!degenerate_) return eval(x, y, mu1_, mu2_);
    // repeated root: split symmetrically (the field is even in the split) and extrapolate
    const std::complex<double> m = 0.5 * (mu1_ + mu2_);
    const double h = 1e-4 * std::abs(m);
    const KirschPoint a = eval(x, y, m + h, m - h);
    const KirschPoint b = eval(x, y, m + 2.0 * h, m - 2.0 * h);
    auto rich = [](double fa, double fb) { return (4.0 * fa - fb) / 3.0; };
    KirschPoint r;
    r.s11 = rich(a.s11, b.s11);
    r.s22 = rich(a.s22, b.s22);
    r.s12 = rich(a.s12, b.s12);
    r.displacement = {rich(a.displacement[0], b.displacement[0]), rich(a.displacement[1], b.displacement[1])};
    return r;
}

double KirschSolution::concentration() const { return at(0.0, R_).s11 / p_; }

KirschPoint kirsch_anisotropic(const CubicConstants& c, double sigma_inf, double hole_radius, double x, double y) {
    return KirschSolution(c, sigma_inf, hole_radius).at(x, y);
}

std::array<double, 3> uniaxial_cell_strain(double sigma11, const Moduli& m, int n_cells, double a) {
    if (n_cells < 1 || !(a > 0.0) || !(m.E > 0.0)) throw InvalidArgument("cell strain needs n >= 1, a > 0, E > 0");
    const double l0 = n_cells * a;
    const double e = sigma11 / m.E;
    return {l0 * (1.0 + e), l0 * (1.0 - m.nu * e), l0 * (1.0 - m.nu * e)};
}

double thermal_stress(const CubicConstants& c, double alpha_T, double dT) { return -(c.c11 + 2.0 * c.c12) * alpha_T * dT; }

}  // namespace atomstress
