#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atomstress/vec.hpp"

namespace atomstress {

// Orthogonal box with edges along the coordinate axes.
struct SimulationCell {
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::array<bool, 3> periodic{true, true, true};

    double volume() const { return lengths[0] * lengths[1] * lengths[2]; }
    void validate() const;
    // smallest extent over periodic directions, +inf if none
    double min_periodic_length() const;
};

struct ParticleState {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    std::vector<double> masses;
    std::vector<std::string> species;
    SimulationCell cell;

    std::size_t size() const { return positions.size(); }
    void validate() const;
};

struct Snapshot {
    double time = 0.0;
    ParticleState state;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    // set by the reader when frames carried no velocity column
    bool velocities_defaulted = false;

    void validate() const;
};

struct NeighborEntry {
    int index;
    std::array<int, 3> shift;  // x_j + shift*L - x_i is the minimum-image vector
};

struct NeighborList {
    std::vector<std::vector<NeighborEntry>> neighbors;
    double cutoff = 0.0;
    double skin = 0.0;
    std::vector<Vec3> reference_positions;  // positions at build time

    std::size_t pair_count() const;
};

ParticleState build_fcc_lattice(int nx, int ny, int nz, double a, const std::string& species = "X",
                                double mass = 1.0);

// Removes particles whose distance to center in the x-y plane is below radius.
ParticleState carve_plate_with_hole(const ParticleState& state, const Vec3& center, double radius);

Vec3 minimum_image_displacement(const SimulationCell& cell, const Vec3& xa, const Vec3& xb);

NeighborList build_neighbor_list(const ParticleState& state, double cutoff, double skin);

// true once some particle moved more than skin/2 since the list was built
bool needs_rebuild(const NeighborList& nl, const ParticleState& state);

Trajectory read_extxyz(const std::filesystem::path& path);
void write_extxyz(const std::filesystem::path& path, const Trajectory& traj);

// Spatial binning of points with periodic-image enumeration. A query visits every
// periodic image of every point within the radius, so radii larger than half the
// box are fine.
class PointBins {
public:
    PointBins() = default;
    PointBins(const SimulationCell& cell, std::span<const Vec3> points, double bin_size);

    // f(index, image_position) for each image within radius of center
    template <class F>
    void query(const Vec3& center, double radius, F&& f) const {
        std::array<int, 3> nlo{}, nhi{};
        for (int k = 0; k < 3; ++k) {
            if (periodic_[k]) {
                nlo[k] = static_cast<int>(std::floor((center[k] - radius) / length_[k]));
                nhi[k] = static_cast<int>(std::floor((center[k] + radius) / length_[k]));
            }
        }
        const double r2 = radius * radius;
        for (int n0 = nlo[0]; n0 <= nhi[0]; ++n0)
            for (int n1 = nlo[1]; n1 <= nhi[1]; ++n1)
                for (int n2 = nlo[2]; n2 <= nhi[2]; ++n2) {
                    const Vec3 shift{n0 * length_[0], n1 * length_[1], n2 * length_[2]};
                    const Vec3 c = center - shift;
                    std::array<int, 3> lo{}, hi{};
                    bool empty = false;
                    for (int k = 0; k < 3; ++k) {
                        lo[k] = std::max(0, static_cast<int>(std::floor((c[k] - radius - origin_[k]) / width_[k])));
                        hi[k] = std::min(nbins_[k] - 1,
                                         static_cast<int>(std::floor((c[k] + radius - origin_[k]) / width_[k])));
                        if (lo[k] > hi[k]) empty = true;
                    }
                    if (empty) continue;
                    for (int i = lo[0]; i <= hi[0]; ++i)
                        for (int j = lo[1]; j <= hi[1]; ++j)
                            for (int l = lo[2]; l <= hi[2]; ++l) {
                                const std::size_t b = (static_cast<std::size_t>(i) * nbins_[1] + j) * nbins_[2] + l;
                                for (std::size_t e = start_[b]; e < start_[b + 1]; ++e) {
                                    const Vec3& p = sorted_[e];
                                    if (norm2(p - c) <= r2) f(order_[e], p + shift);
                                }
                            }
                }
    }

private:
    std::array<bool, 3> periodic_{};
    std::array<double, 3> length_{};
    std::array<double, 3> origin_{};
    std::array<double, 3> width_{};
    std::array<int, 3> nbins_{};
    std::vector<std::size_t> start_;
    std::vector<Vec3> sorted_;
    std::vector<int> order_;
};

}  // namespace atomstress
