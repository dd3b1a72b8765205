#include "atomstress/distance_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atomstress/error.hpp"

namespace atomstress {

SquaredDistanceSet::SquaredDistanceSet(int n) : n_(n), s_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n < 1) throw InvalidArgument("distance set needs n >= 1");
}

SquaredDistanceSet SquaredDistanceSet::from_points(std::span<const Vec3> pts) {
    SquaredDistanceSet d(static_cast<int>(pts.size()));
    for (int i = 0; i < d.n_; ++i)
        for (int j = i + 1; j < d.n_; ++j) d.set(i, j, norm2(pts[i] - pts[j]));
    return d;
}

SquaredDistanceSet SquaredDistanceSet::from_table(int n, const std::vector<double>& s) {
    if (s.size() != static_cast<std::size_t>(n) * n) throw InvalidArgument("distance table must be n x n");
    SquaredDistanceSet d(n);
    for (int i = 0; i < n; ++i) {
        if (s[i * n + i] != 0.0) throw InvalidArgument("distance table diagonal must be zero");
        for (int j = i + 1; j < n; ++j) {
            if (s[i * n + j] != s[j * n + i]) throw InvalidArgument("distance table must be symmetric");
            d.set(i, j, s[i * n + j]);
        }
    }
    return d;
}

void SquaredDistanceSet::set(int i, int j, double v) {
    if (i == j) throw InvalidArgument("diagonal of a distance set is fixed at zero");
    if (!(v >= 0.0)) throw InvalidArgument("squared distances must be >= 0");
    s_[i * n_ + j] = v;
    s_[j * n_ + i] = v;
}

SquaredDistanceSet SquaredDistanceSet::subset(std::span<const int> idx) const {
    SquaredDistanceSet d(static_cast<int>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) d.set(static_cast<int>(a), static_cast<int>(b), (*this)(idx[a], idx[b]));
    return d;
}

double bareiss_determinant(std::vector<double> a, int n) {
    double sign = 1.0, prev = 1.0;
    for (int k = 0; k < n - 1; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (a[piv * n + k] == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            a[i * n + k] = 0.0;
        }
        prev = a[k * n + k];
    }
    return sign * a[(n - 1) * n + (n - 1)];
}

namespace {

std::vector<double> bordered(const SquaredDistanceSet& d) {
    const int n = d.size();
    const int m = n + 1;
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 1; j < m; ++j) a[j] = a[j * m] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[(i + 1) * m + (j + 1)] = d(i, j);
    return a;
}

void check_size(const SquaredDistanceSet& d) {
    if (d.size() < 2 || d.size() > 6) throw InvalidArgument("Cayley-Menger determinant needs 2 <= n <= 6");
}

}  // namespace

double cayley_menger(const SquaredDistanceSet& d) {
    check_size(d);
    return bareiss_determinant(bordered(d), d.size() + 1);
}

double cayley_menger_scale(const SquaredDistanceSet& d) {
    const auto a = bordered(d);
    const int m = d.size() + 1;
    double s = 1.0;
    for (int i = 0; i < m; ++i) {
        double r = 0.0;
        for (int j = 0; j < m; ++j) r += a[i * m + j] * a[i * m + j];
        s *= std::sqrt(r);
    }
    return s;
}

std::vector<double> cayley_menger_gradient(const SquaredDistanceSet& d) {
    check_size(d);
    const int n = d.size();
    const int m = n + 1;
    const auto a = bordered(d);
    // cofactor C_ij = (-1)^(i+j) det(minor)
    auto cofactor = [&](int r, int c) {
        std::vector<double> minor;
        minor.reserve(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            for (int j = 0; j < m; ++j)
                if (j != c) minor.push_back(a[i * m + j]);
        }
        return ((r + c) % 2 ? -1.0 : 1.0) * bareiss_determinant(std::move(minor), n);
    };
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 2.0 * cofactor(i + 1, j + 1);  // the bordered matrix is symmetric
            g[i * n + j] = g[j * n + i] = v;
        }
    return g;
}

EmbeddabilityVerdict embeddability_check(const SquaredDistanceSet& d, double tolerance) {
    const int n = d.size();
    if (n < 3) throw InvalidArgument("embeddability check needs n >= 3");
    if (n > 12) throw InvalidArgument("embeddability check is capped at n = 12");
    EmbeddabilityVerdict v;
    for (int k = 3; k <= std::min(n, 6); ++k) {
        // iterate k-subsets in lexicographic order
        std::vector<int> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            const auto sub = d.subset(idx);
            const double chi = cayley_menger(sub);
            const double tol = tolerance * cayley_menger_scale(sub);
            bool bad = false;
            if (k == 3) bad = chi > tol;
            else if (k == 4) bad = chi < -tol;
            else bad = std::abs(chi) > tol;
            if (bad) {
                v.embeddable = false;
                v.condition = k - 2;
                v.indices = idx;
                v.value = chi;
                return v;
            }
            int p = k - 1;
            while (p >= 0 && idx[p] == n - k + p) --p;
            if (p < 0) break;
            ++idx[p];
            for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
        }
    }
    return v;
}

std::vector<double> tenth_distance_candidates(const SquaredDistanceSet& five) {
    if (five.size() != 5) throw InvalidArgument("tenth-distance solve needs a 5-point set");
    double scale = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            if (!(i == 3 && j == 4)) scale += five(i, j);
    scale /= 9.0;
    if (!(scale > 0.0)) throw InvalidArgument("degenerate distance set");
    SquaredDistanceSet d = five;
    auto chi_at = [&](double t) {
        d.set(3, 4, t);
        return cayley_menger(d);
    };
    // exact quadratic through t = 0, S, 2S
    const double c0 = chi_at(0.0), c1 = chi_at(scale), c2 = chi_at(2.0 * scale);
    const double A = (c0 - 2.0 * c1 + c2) / (2.0 * scale * scale);
    const double B = (c1 - c0) / scale - A * scale;
    const double C = c0;
    if (A == 0.0) {
        if (B == 0.0) return {};
        return {-C / B};
    }
    const double disc = B * B - 4.0 * A * C;
    const double ref = B * B + std::abs(4.0 * A * C);
    if (std::abs(disc) <= 1e-10 * ref) return {-B / (2.0 * A)};
    if (disc < 0.0) return {};
    // stable form
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    double r1 = q / A, r2 = C / q;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

}  // namespace atomstress
