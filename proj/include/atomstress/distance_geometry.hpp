#pragma once

#include <span>
#include <vector>

#include "atomstress/vec.hpp"

namespace atomstress {

class SquaredDistanceSet {
public:
    explicit SquaredDistanceSet(int n);
    static SquaredDistanceSet from_points(std::span<const Vec3> pts);
    // full n x n table of squared distances, row-major
    static SquaredDistanceSet from_table(int n, const std::vector<double>& s);

    int size() const { return n_; }
    double operator()(int i, int j) const { return s_[i * n_ + j]; }
    void set(int i, int j, double v);
    SquaredDistanceSet subset(std::span<const int> idx) const;

private:
    int n_;
    std::vector<double> s_;
};

// Determinant of the bordered (n+1)x(n+1) matrix, 2 <= n <= 6.
double cayley_menger(const SquaredDistanceSet& d);
// Hadamard bound of the bordered matrix; "zero" tests compare |chi| against tol * this.
double cayley_menger_scale(const SquaredDistanceSet& d);
// n x n table of d chi / d s_ij, treating s_ij = s_ji as one variable.
std::vector<double> cayley_menger_gradient(const SquaredDistanceSet& d);

struct EmbeddabilityVerdict {
    bool embeddable = true;
    int condition = 0;         // 1..4 when not embeddable
    std::vector<int> indices;  // offending subset
    double value = 0.0;        // chi of that subset
};

EmbeddabilityVerdict embeddability_check(const SquaredDistanceSet& d, double tolerance = 1e-8);

// Real roots s45 of chi(s45) = 0 for a 5-point set; the stored s45 is ignored.
// Empty when no embedding extends the nine given distances.
std::vector<double> tenth_distance_candidates(const SquaredDistanceSet& five);

// Determinant by fraction-free elimination with row pivoting; exact for small integer matrices.
double bareiss_determinant(std::vector<double> a, int n);

}  // namespace atomstress
