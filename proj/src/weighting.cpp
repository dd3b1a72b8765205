#include "atomstress/weighting.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atomstress/error.hpp"

namespace atomstress {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double integrate(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 6, 1e-11);
}

}  // namespace

WeightingFunction WeightingFunction::constant(double r_w, double epsilon) {
    if (!(r_w > 0.0) || epsilon < 0.0 || epsilon > r_w) throw InvalidArgument("constant kernel needs r_w > 0 and 0 <= eps <= r_w");
    WeightingFunction w;
    w.kind_ = KernelKind::Constant;
    w.r_w_ = r_w;
    w.eps_ = epsilon;
    w.support_ = r_w;
    const double R = r_w, e = epsilon, Ri = R - e;
    const double I = Ri * Ri * Ri / 3.0 + (R * R * R - Ri * Ri * Ri) / 6.0 - (2.0 * R - e) * e * e / (kPi * kPi);
    w.c_ = 1.0 / (4.0 * kPi * I);
    return w;
}

WeightingFunction WeightingFunction::gaussian(double r_w, double cutoff_multiplier) {
    if (!(r_w > 0.0) || !(cutoff_multiplier > 0.0)) throw InvalidArgument("gaussian kernel needs r_w > 0 and cutoff > 0");
    WeightingFunction w;
    w.kind_ = KernelKind::Gaussian;
    w.r_w_ = r_w;
    w.support_ = cutoff_multiplier * r_w;
    const double x = cutoff_multiplier;
    const double mass = std::erf(x) - 2.0 * x * std::exp(-x * x) / std::sqrt(kPi);
    w.c_ = std::pow(kPi, -1.5) / (r_w * r_w * r_w) / mass;
    return w;
}

WeightingFunction WeightingFunction::quartic_spline(double r_w) {
    if (!(r_w > 0.0)) throw InvalidArgument("quartic kernel needs r_w > 0");
    WeightingFunction w;
    w.kind_ = KernelKind::QuarticSpline;
    w.r_w_ = r_w;
    w.support_ = r_w;
    w.c_ = 105.0 / (16.0 * kPi * r_w * r_w * r_w);
    return w;
}

double WeightingFunction::operator()(double r) const {
    if (r > support_) return 0.0;
    switch (kind_) {
        case KernelKind::Constant:
            if (r <= r_w_ - eps_) return c_;
            return 0.5 * c_ * (1.0 - std::cos((r_w_ - r) / eps_ * kPi));
        case KernelKind::Gaussian: return c_ * std::exp(-r * r / (r_w_ * r_w_));
        case KernelKind::QuarticSpline: {
            const double q = r / r_w_;
            const double m = 1.0 - q;
            return c_ * (1.0 + 3.0 * q) * m * m * m;
        }
    }
    return 0.0;
}

std::vector<double> WeightingFunction::breakpoints() const {
    if (kind_ == KernelKind::Constant && eps_ > 0.0 && eps_ < r_w_) return {r_w_ - eps_, r_w_};
    return {support_};
}

double radial_mass(const WeightingFunction& wf, double u) {
    if (u <= 0.0) return 0.0;
    if (wf.is_step()) {
        const double r = std::min(u, wf.radius());
        return wf.max_value() * r * r * r / 3.0;
    }
    std::vector<double> cuts{0.0};
    for (double b : wf.breakpoints())
        if (b < u) cuts.push_back(b);
    cuts.push_back(std::min(u, wf.support()));
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        m += integrate([&](double s) { return s * s * wf(s); }, cuts[k], cuts[k + 1]);
    return m;
}

namespace {

// s-interval of [0,1] where |a + s d| <= rho; returns false if empty
bool sphere_interval(const Vec3& a, const Vec3& d, double rho, double& s0, double& s1) {
    const double A = norm2(d), B = dot(a, d), C = norm2(a) - rho * rho;
    if (A == 0.0) {
        if (C > 0.0) return false;
        s0 = 0.0;
        s1 = 1.0;
        return true;
    }
    const double disc = B * B - A * C;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    s0 = std::max(0.0, (-B - sq) / A);
    s1 = std::min(1.0, (-B + sq) / A);
    return s1 > s0;
}

}  // namespace

double bond_function_quadrature(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v) {
    const Vec3 a = u - x, d = v - u;
    if (norm2(d) == 0.0) return wf(norm(a));
    double lo, hi;
    if (!sphere_interval(a, d, wf.support(), lo, hi)) return 0.0;
    std::vector<double> cuts{lo, hi};
    for (double b : wf.breakpoints()) {
        double s0, s1;
        if (sphere_interval(a, d, b, s0, s1)) {
            cuts.push_back(s0);
            cuts.push_back(s1);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k] < lo || cuts[k + 1] > hi) continue;
        sum += integrate([&](double s) { return wf(norm(a + d * s)); }, cuts[k], cuts[k + 1]);
    }
    return sum;
}

double bond_function(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v) {
    if (wf.kind() != KernelKind::Constant) return bond_function_quadrature(wf, x, u, v);
    const Vec3 a = u - x, d = v - u;
    if (norm2(d) == 0.0) return wf(norm(a));
    double lo, hi;
    if (!sphere_interval(a, d, wf.radius(), lo, hi)) return 0.0;
    if (wf.is_step()) return (hi - lo) * wf.max_value();
    // flat core exactly, cosine shell by quadrature
    const auto shell = [&](double s) { return wf(norm(a + d * s)); };
    double c0, c1;
    if (!sphere_interval(a, d, wf.radius() - wf.epsilon(), c0, c1)) return integrate(shell, lo, hi);
    return (c1 - c0) * wf.max_value() + integrate(shell, lo, c0) + integrate(shell, c1, hi);
}

InteractionPath InteractionPath::straight_line() {
    InteractionPath p;
    p.point = [](double s, double l) { return Vec3{s * l, 0.0, 0.0}; };
    p.tangent = [](double, double l) { return Vec3{l, 0.0, 0.0}; };
    p.straight = true;
    return p;
}

InteractionPath InteractionPath::circular_arc(double ratio) {
    if (!(ratio > 0.0 && ratio < 0.5)) throw InvalidArgument("arc sagitta ratio must lie in (0, 0.5)");
    InteractionPath p;
    // circle through (0,0), (l,0) with apex height H = ratio*l
    auto geom = [ratio](double l) {
        const double H = ratio * l;
        const double rho = (0.25 * l * l + H * H) / (2.0 * H);
        return std::pair{rho, rho - H};
    };
    p.point = [geom](double s, double l) {
        const auto [rho, off] = geom(l);
        const double t = s * l - 0.5 * l;
        return Vec3{s * l, std::sqrt(rho * rho - t * t) - off, 0.0};
    };
    p.tangent = [geom](double s, double l) {
        const auto [rho, off] = geom(l);
        (void)off;
        const double t = s * l - 0.5 * l;
        return Vec3{l, -l * t / std::sqrt(rho * rho - t * t), 0.0};
    };
    p.straight = false;
    return p;
}

double InteractionPath::length(double l) const {
    return integrate([&](double s) { return norm(tangent(s, l)); }, 0.0, 1.0);
}

Mat3 path_rotation(const Vec3& z) {
    const double zn = norm(z);
    if (zn == 0.0) throw InvalidArgument("path rotation needs a nonzero separation");
    const Vec3 t = -z / zn;
    const Vec3 e1{1.0, 0.0, 0.0};
    const Vec3 k = cross(e1, t);
    const double s = norm(k), c = t.x;
    if (s < 1e-14) {
        if (c > 0.0) return Mat3::identity();
        Mat3 r;
        r(0, 0) = -1.0;
        r(1, 1) = -1.0;
        r(2, 2) = 1.0;
        return r;
    }
    Mat3 K;
    K(0, 1) = -k.z; K(0, 2) = k.y;
    K(1, 0) = k.z;  K(1, 2) = -k.x;
    K(2, 0) = -k.y; K(2, 1) = k.x;
    return Mat3::identity() + K + (K * K) * ((1.0 - c) / (s * s));
}

Vec3 bond_vector(const WeightingFunction& wf, const Vec3& x, const Vec3& u, const Vec3& v, const InteractionPath& path) {
    if (path.straight) return (u - v) * bond_function(wf, x, u, v);
    const Vec3 z = u - v;
    const double l = norm(z);
    if (l == 0.0) throw InvalidArgument("curved bond vector needs u != v");
    const Mat3 Q = path_rotation(z);
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        auto f = [&](double s) {
            const Vec3 y = u + Q * path.point(s, l);
            return -wf(norm(y - x)) * (Q * path.tangent(s, l))[c];
        };
        out[c] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 25, 1e-12);
    }
    return out;
}

}  // namespace atomstress
