#include "atomstress/config_core.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "atomstress/error.hpp"

namespace atomstress {

void SimulationCell::validate() const {
    for (double l : lengths)
        if (!(l > 0.0) || !std::isfinite(l)) throw GeometryError("cell lengths must be positive and finite");
}

double SimulationCell::min_periodic_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k)
        if (periodic[k]) m = std::min(m, lengths[k]);
    return m;
}

void ParticleState::validate() const {
    const std::size_t n = positions.size();
    if (n == 0) throw InvalidArgument("state has no particles");
    if (velocities.size() != n || masses.size() != n || species.size() != n)
        throw InvalidArgument("state arrays have inconsistent sizes");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(masses[i] > 0.0)) throw InvalidArgument("mass must be positive (particle " + std::to_string(i) + ")");
        const Vec3& x = positions[i];
        if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(x.z))
            throw InvalidArgument("non-finite position (particle " + std::to_string(i) + ")");
    }
    cell.validate();
}

void Trajectory::validate() const {
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
        const auto& a = snapshots[k - 1];
        const auto& b = snapshots[k];
        if (b.state.size() != a.state.size() || b.state.masses != a.state.masses ||
            b.state.species != a.state.species)
            throw InvalidArgument("trajectory frame " + std::to_string(k) + " changes particle identity");
        if (!(b.time >= a.time)) throw InvalidArgument("trajectory time decreases at frame " + std::to_string(k));
    }
}

std::size_t NeighborList::pair_count() const {
    std::size_t c = 0;
    for (const auto& v : neighbors) c += v.size();
    return c / 2;
}

ParticleState build_fcc_lattice(int nx, int ny, int nz, double a, const std::string& species, double mass) {
    if (nx < 1 || ny < 1 || nz < 1) throw InvalidArgument("fcc cell counts must be >= 1");
    if (!(a > 0.0)) throw InvalidArgument("lattice constant must be positive");
    static const Vec3 basis[4] = {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
    ParticleState s;
    const std::size_t n = 4ull * nx * ny * nz;
    s.positions.reserve(n);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k)
                for (const Vec3& b : basis) s.positions.push_back(Vec3{(i + b.x) * a, (j + b.y) * a, (k + b.z) * a});
    s.velocities.assign(n, Vec3{});
    s.masses.assign(n, mass);
    s.species.assign(n, species);
    s.cell.lengths = {nx * a, ny * a, nz * a};
    s.cell.periodic = {true, true, true};
    return s;
}

ParticleState carve_plate_with_hole(const ParticleState& state, const Vec3& center, double radius) {
    if (radius < 0.0) throw InvalidArgument("hole radius must be >= 0");
    ParticleState out;
    out.cell = state.cell;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double dx = state.positions[i].x - center.x;
        const double dy = state.positions[i].y - center.y;
        if (dx * dx + dy * dy < r2) continue;
        out.positions.push_back(state.positions[i]);
        out.velocities.push_back(state.velocities[i]);
        out.masses.push_back(state.masses[i]);
        out.species.push_back(state.species[i]);
    }
    return out;
}

Vec3 minimum_image_displacement(const SimulationCell& cell, const Vec3& xa, const Vec3& xb) {
    Vec3 d = xb - xa;
    for (int k = 0; k < 3; ++k)
        if (cell.periodic[k]) d[k] -= cell.lengths[k] * std::nearbyint(d[k] / cell.lengths[k]);
    return d;
}

PointBins::PointBins(const SimulationCell& cell, std::span<const Vec3> points, double bin_size) {
    if (!(bin_size > 0.0)) throw InvalidArgument("bin size must be positive");
    std::array<double, 3> lo{}, hi{};
    for (int k = 0; k < 3; ++k) {
        periodic_[k] = cell.periodic[k];
        length_[k] = cell.lengths[k];
        lo[k] = std::numeric_limits<double>::infinity();
        hi[k] = -lo[k];
    }
    std::vector<Vec3> wrapped(points.begin(), points.end());
    for (Vec3& p : wrapped)
        for (int k = 0; k < 3; ++k) {
            if (periodic_[k]) {
                p[k] -= length_[k] * std::floor(p[k] / length_[k]);
                if (p[k] >= length_[k]) p[k] = 0.0;
            }
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    for (int k = 0; k < 3; ++k) {
        double extent;
        if (periodic_[k]) {
            origin_[k] = 0.0;
            extent = length_[k];
        } else {
            origin_[k] = points.empty() ? 0.0 : lo[k];
            extent = points.empty() ? 0.0 : hi[k] - lo[k];
        }
        nbins_[k] = std::clamp(static_cast<int>(extent / bin_size), 1, 1 << 10);
        width_[k] = extent > 0.0 ? extent / nbins_[k] : 1.0;
        if (!periodic_[k]) width_[k] *= 1.0 + 1e-12;  // keep the max coordinate inside the last bin
    }
    const std::size_t nb = static_cast<std::size_t>(nbins_[0]) * nbins_[1] * nbins_[2];
    std::vector<std::size_t> bin_of(wrapped.size());
    std::vector<std::size_t> count(nb + 1, 0);
    for (std::size_t i = 0; i < wrapped.size(); ++i) {
        std::array<int, 3> b{};
        for (int k = 0; k < 3; ++k)
            b[k] = std::clamp(static_cast<int>(std::floor((wrapped[i][k] - origin_[k]) / width_[k])), 0, nbins_[k] - 1);
        bin_of[i] = (static_cast<std::size_t>(b[0]) * nbins_[1] + b[1]) * nbins_[2] + b[2];
        ++count[bin_of[i] + 1];
    }
    for (std::size_t b = 0; b < nb; ++b) count[b + 1] += count[b];
    start_ = count;
    sorted_.resize(wrapped.size());
    order_.resize(wrapped.size());
    std::vector<std::size_t> fill(count.begin(), count.end() - 1);
    for (std::size_t i = 0; i < wrapped.size(); ++i) {
        const std::size_t e = fill[bin_of[i]]++;
        sorted_[e] = wrapped[i];
        order_[e] = static_cast<int>(i);
    }
}

NeighborList build_neighbor_list(const ParticleState& state, double cutoff, double skin) {
    if (!(cutoff > 0.0) || skin < 0.0) throw InvalidArgument("neighbor list needs cutoff > 0 and skin >= 0");
    const double reach = cutoff + skin;
    if (!(reach < 0.5 * state.cell.min_periodic_length()))
        throw GeometryError("cutoff + skin must be below half the smallest periodic cell length");
    NeighborList nl;
    nl.cutoff = cutoff;
    nl.skin = skin;
    nl.reference_positions = state.positions;
    nl.neighbors.resize(state.size());
    PointBins bins(state.cell, state.positions, reach);
    const auto& L = state.cell.lengths;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const Vec3& xi = state.positions[i];
        auto& list = nl.neighbors[i];
        bins.query(xi, reach, [&](int j, const Vec3& pj) {
            if (static_cast<std::size_t>(j) == i) return;
            const Vec3& xj = state.positions[j];
            std::array<int, 3> shift{};
            for (int k = 0; k < 3; ++k)
                shift[k] = state.cell.periodic[k] ? static_cast<int>(std::lround((pj[k] - xj[k]) / L[k])) : 0;
            list.push_back({j, shift});
        });
        std::sort(list.begin(), list.end(), [](const NeighborEntry& a, const NeighborEntry& b) { return a.index < b.index; });
    }
    return nl;
}

bool needs_rebuild(const NeighborList& nl, const ParticleState& state) {
    if (nl.reference_positions.size() != state.size()) return true;
    const double lim2 = 0.25 * nl.skin * nl.skin;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (norm2(state.positions[i] - nl.reference_positions[i]) > lim2) return true;
    return false;
}

namespace {

std::string frame_error(std::size_t frame, const std::string& what) {
    return "extxyz frame " + std::to_string(frame) + ": " + what;
}

// value of key=... in the comment line; quoted values allowed
bool comment_value(const std::string& line, const std::string& key, std::string& out) {
    std::size_t pos = 0;
    while ((pos = line.find(key + "=", pos)) != std::string::npos) {
        if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '\t') break;
        ++pos;
    }
    if (pos == std::string::npos) return false;
    std::size_t v = pos + key.size() + 1;
    if (v < line.size() && line[v] == '"') {
        const std::size_t end = line.find('"', v + 1);
        if (end == std::string::npos) return false;
        out = line.substr(v + 1, end - v - 1);
    } else {
        const std::size_t end = line.find_first_of(" \t", v);
        out = line.substr(v, end == std::string::npos ? std::string::npos : end - v);
    }
    return true;
}

}  // namespace

Trajectory read_extxyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory file " + path.string());
    Trajectory traj;
    bool any_missing = false;
    std::string line;
    std::size_t frame = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::size_t n = 0;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(line, &used);
            if (v <= 0) throw std::invalid_argument("count");
            n = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw ParseError(frame_error(frame, "bad atom count line '" + line + "'"));
        }
        std::string comment;
        if (!std::getline(in, comment)) throw ParseError(frame_error(frame, "missing comment line"));
        if (!comment.empty() && comment.back() == '\r') comment.pop_back();

        Snapshot snap;
        std::string lat;
        if (!comment_value(comment, "Lattice", lat)) throw ParseError(frame_error(frame, "missing Lattice"));
        {
            std::istringstream ls(lat);
            double c[9];
            for (double& v : c)
                if (!(ls >> v)) throw ParseError(frame_error(frame, "Lattice needs 9 numbers"));
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    if (a != b && c[3 * a + b] != 0.0) throw ParseError(frame_error(frame, "only orthogonal cells are supported"));
            snap.state.cell.lengths = {c[0], c[4], c[8]};
        }
        std::string pbc;
        if (comment_value(comment, "pbc", pbc)) {
            std::istringstream ps(pbc);
            for (int k = 0; k < 3; ++k) {
                std::string t;
                if (!(ps >> t)) throw ParseError(frame_error(frame, "pbc needs 3 flags"));
                snap.state.cell.periodic[k] = (t == "T" || t == "True" || t == "true" || t == "1");
            }
        }
        std::string tv;
        if (comment_value(comment, "Time", tv)) {
            try {
                snap.time = std::stod(tv);
            } catch (const std::exception&) {
                throw ParseError(frame_error(frame, "bad Time"));
            }
        }
        std::string props = "species:S:1:pos:R:3";
        comment_value(comment, "Properties", props);
        // column layout
        int col_pos = -1, col_vel = -1, col_mass = -1, col_species = -1, ncol = 0;
        {
            std::vector<std::string> parts;
            std::stringstream ps(props);
            std::string t;
            while (std::getline(ps, t, ':')) parts.push_back(t);
            if (parts.size() % 3 != 0) throw ParseError(frame_error(frame, "malformed Properties"));
            for (std::size_t p = 0; p < parts.size(); p += 3) {
                const int width = std::stoi(parts[p + 2]);
                if (parts[p] == "species") col_species = ncol;
                else if (parts[p] == "pos") col_pos = ncol;
                else if (parts[p] == "vel" || parts[p] == "velo") col_vel = ncol;
                else if (parts[p] == "mass" || parts[p] == "masses") col_mass = ncol;
                ncol += width;
            }
            if (col_pos < 0) throw ParseError(frame_error(frame, "Properties has no pos"));
        }
        if (col_vel < 0) any_missing = true;
        auto& st = snap.state;
        st.positions.resize(n);
        st.velocities.assign(n, Vec3{});
        st.masses.assign(n, 1.0);
        st.species.assign(n, "X");
        for (std::size_t i = 0; i < n; ++i) {
            std::string row;
            if (!std::getline(in, row))
                throw ParseError(frame_error(frame, "expected " + std::to_string(n) + " atoms, file ended after " + std::to_string(i)));
            std::istringstream rs(row);
            std::vector<std::string> tok;
            std::string t;
            while (rs >> t) tok.push_back(t);
            if (static_cast<int>(tok.size()) != ncol)
                throw ParseError(frame_error(frame, "atom line " + std::to_string(i) + " has " + std::to_string(tok.size()) +
                                                        " columns, expected " + std::to_string(ncol)));
            try {
                if (col_species >= 0) st.species[i] = tok[col_species];
                st.positions[i] = {std::stod(tok[col_pos]), std::stod(tok[col_pos + 1]), std::stod(tok[col_pos + 2])};
                if (col_vel >= 0) st.velocities[i] = {std::stod(tok[col_vel]), std::stod(tok[col_vel + 1]), std::stod(tok[col_vel + 2])};
                if (col_mass >= 0) st.masses[i] = std::stod(tok[col_mass]);
            } catch (const std::exception&) {
                throw ParseError(frame_error(frame, "bad number on atom line " + std::to_string(i)));
            }
        }
        if (!traj.snapshots.empty() && traj.snapshots.front().state.size() != n)
            throw ParseError(frame_error(frame, "atom count " + std::to_string(n) + " differs from frame 0"));
        traj.snapshots.push_back(std::move(snap));
        ++frame;
    }
    traj.velocities_defaulted = any_missing;
    return traj;
}

void write_extxyz(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trajectory file " + path.string());
    out << std::setprecision(17);
    for (const auto& snap : traj.snapshots) {
        const auto& st = snap.state;
        const auto& L = st.cell.lengths;
        const auto flag = [](bool b) { return b ? "T" : "F"; };
        out << st.size() << '\n';
        out << "Lattice=\"" << L[0] << " 0 0 0 " << L[1] << " 0 0 0 " << L[2] << "\" Properties=species:S:1:pos:R:3:vel:R:3:mass:R:1"
            << " Time=" << snap.time << " pbc=\"" << flag(st.cell.periodic[0]) << ' ' << flag(st.cell.periodic[1]) << ' '
            << flag(st.cell.periodic[2]) << "\"\n";
        for (std::size_t i = 0; i < st.size(); ++i) {
            const Vec3& x = st.positions[i];
            const Vec3& v = st.velocities[i];
            out << st.species[i] << ' ' << x.x << ' ' << x.y << ' ' << x.z << ' ' << v.x << ' ' << v.y << ' ' << v.z << ' '
                << st.masses[i] << '\n';
        }
    }
    if (!out) throw ParseError("write failed for " + path.string());
}

}  // namespace atomstress
