#include "atomstress/potentials.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "atomstress/distance_geometry.hpp"
#include "atomstress/error.hpp"
#include "atomstress/parallel.hpp"

namespace atomstress {

EnergyDerivative lj_eval(double r) {
    if (!(r > 0.0)) throw InvalidArgument("lj_eval needs r > 0");
    if (r >= kLJCutoff) return {};
    const double ir2 = 1.0 / (r * r);
    const double ir6 = ir2 * ir2 * ir2;
    const double ir12 = ir6 * ir6;
    return {4.0 * (ir12 - ir6) - 0.0078 * r * r + 0.0651, (-48.0 * ir12 + 24.0 * ir6) / r - 0.0156 * r};
}

// Cubic spline of dV/dr; V(r) = -integral from r to the last table point.
class PairTable {
public:
    PairTable(std::vector<double> r, std::vector<double> d) : r_(std::move(r)), d_(std::move(d)) {
        if (r_.size() != d_.size() || r_.size() < 3) throw InvalidArgument("pair table needs >= 3 rows");
        for (std::size_t i = 1; i < r_.size(); ++i)
            if (!(r_[i] > r_[i - 1])) throw InvalidArgument("pair table r column must increase strictly");
        if (!(r_.front() > 0.0)) throw InvalidArgument("pair table r must be positive");
        gsl_set_error_handler_off();
        spline_ = gsl_interp_alloc(gsl_interp_cspline, r_.size());
        if (gsl_interp_init(spline_, r_.data(), d_.data(), r_.size()) != GSL_SUCCESS)
            throw InvalidArgument("pair table spline setup failed");
    }
    ~PairTable() { gsl_interp_free(spline_); }
    PairTable(const PairTable&) = delete;
    PairTable& operator=(const PairTable&) = delete;

    double cutoff() const { return r_.back(); }

    EnergyDerivative eval(double r) const {
        if (r >= r_.back()) return {};
        if (r < r_.front()) throw InvalidArgument("pair table evaluated below its first r");
        const double d = gsl_interp_eval(spline_, r_.data(), d_.data(), r, nullptr);
        const double v = -gsl_interp_eval_integ(spline_, r_.data(), d_.data(), r, r_.back(), nullptr);
        return {v, d};
    }

private:
    std::vector<double> r_, d_;
    gsl_interp* spline_ = nullptr;
};

PotentialModel PotentialModel::lennard_jones() { return PotentialModel{}; }

PotentialModel PotentialModel::eam(const EamParams& p) {
    if (!(p.cutoff > 0.0) || !(p.D >= 0.0)) throw InvalidArgument("EAM needs cutoff > 0 and D >= 0");
    PotentialModel m;
    m.kind_ = Kind::EAM;
    m.eam_ = p;
    m.cutoff_ = p.cutoff;
    return m;
}

PotentialModel PotentialModel::pair_table(std::vector<double> r, std::vector<double> dvdr) {
    PotentialModel m;
    m.kind_ = Kind::PairTable;
    m.table_ = std::make_shared<const PairTable>(std::move(r), std::move(dvdr));
    m.cutoff_ = m.table_->cutoff();
    return m;
}

PotentialModel PotentialModel::pair_table(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) throw ParseError("cannot open pair table " + csv.string());
    std::vector<double> r, d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            if (r.empty()) continue;  // header row
            throw ParseError("pair table line " + std::to_string(lineno) + " malformed");
        }
        r.push_back(a);
        d.push_back(b);
    }
    return pair_table(std::move(r), std::move(d));
}

EnergyDerivative PotentialModel::pair(double r) const {
    switch (kind_) {
        case Kind::LJ: return lj_eval(r);
        case Kind::PairTable: return table_->eval(r);
        case Kind::EAM: {
            if (r >= cutoff_) return {};
            const double u = cutoff_ - r;
            const double e = eam_.A * std::exp(-eam_.p * r);
            return {e * u * u, -e * u * (2.0 + eam_.p * u)};
        }
    }
    return {};
}

EnergyDerivative PotentialModel::density(double r) const {
    if (kind_ != Kind::EAM || r >= cutoff_) return {};
    const double u = cutoff_ - r;
    const double e = std::exp(-eam_.q * r);
    return {e * u * u, -e * u * (2.0 + eam_.q * u)};
}

EnergyDerivative PotentialModel::embed(double rho) const {
    if (kind_ != Kind::EAM || rho <= 0.0) return {};
    const double s = std::sqrt(rho);
    return {-eam_.D * s, -0.5 * eam_.D / s};
}

namespace {

struct Pair {
    int i, j;
    Vec3 rel;
    double r;
};

std::vector<Pair> collect_pairs(const ParticleState& state, const NeighborList& nl, double cutoff, int threads) {
    // fixed chunks concatenated in order, so the pair order does not depend on the thread count
    const std::size_t n = nl.neighbors.size();
    const std::size_t nchunk = std::min<std::size_t>(64, std::max<std::size_t>(n, 1));
    std::vector<std::vector<Pair>> chunks(nchunk);
    const auto& L = state.cell.lengths;
    parallel_for(nchunk, threads, [&](std::size_t c) {
        auto& out = chunks[c];
        for (std::size_t i = n * c / nchunk; i < n * (c + 1) / nchunk; ++i) {
            for (const auto& e : nl.neighbors[i]) {
                if (e.index <= static_cast<int>(i)) continue;
                const Vec3 img =
                    state.positions[e.index] + Vec3{e.shift[0] * L[0], e.shift[1] * L[1], e.shift[2] * L[2]};
                const Vec3 rel = img - state.positions[i];
                const double r = norm(rel);
                if (r < 1e-9)
                    throw SingularityError("particles " + std::to_string(i) + " and " + std::to_string(e.index) +
                                           " overlap");
                if (r < cutoff) out.push_back({static_cast<int>(i), e.index, rel, r});
            }
        }
    });
    std::size_t total = 0;
    for (const auto& c : chunks) total += c.size();
    std::vector<Pair> pairs;
    pairs.reserve(total);
    for (const auto& c : chunks) pairs.insert(pairs.end(), c.begin(), c.end());
    return pairs;
}

}  // namespace

ForceReport multibody_eval(const ParticleState& state, const NeighborList& nl, const PotentialModel& model,
                           bool with_bonds, int threads) {
    if (nl.neighbors.size() != state.size()) throw InvalidArgument("neighbor list does not match state");
    const std::vector<Pair> pairs = collect_pairs(state, nl, model.cutoff(), threads);
    const std::size_t n = state.size();
    ForceReport rep;
    std::vector<double> dU(n, 0.0);
    if (model.has_embedding()) {
        std::vector<double> rho(n, 0.0);
        for (const Pair& p : pairs) {
            const double f = model.density(p.r).value;
            rho[p.i] += f;
            rho[p.j] += f;
        }
        for (std::size_t a = 0; a < n; ++a) {
            const auto u = model.embed(rho[a]);
            rep.energy += u.value;
            dU[a] = u.derivative;
        }
    }
    std::vector<Vec3> pf(pairs.size());
    std::vector<double> pe(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const Pair& p = pairs[k];
        const auto v = model.pair(p.r);
        pe[k] = v.value;
        double g = v.derivative;
        if (model.has_embedding()) g += (dU[p.i] + dU[p.j]) * model.density(p.r).derivative;
        pf[k] = p.rel * (g / p.r);
    });
    for (double e : pe) rep.energy += e;
    rep.forces.assign(n, Vec3{});
    if (!with_bonds) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            rep.forces[pairs[k].i] += pf[k];
            rep.forces[pairs[k].j] -= pf[k];
        }
        return rep;
    }
    // bucket by alpha, then order each bucket by beta
    std::vector<std::size_t> start(n + 1, 0);
    for (const Pair& p : pairs) {
        ++start[p.i + 1];
        ++start[p.j + 1];
    }
    for (std::size_t a = 0; a < n; ++a) start[a + 1] += start[a];
    rep.bonds.resize(2 * pairs.size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Pair& p = pairs[k];
        rep.bonds[fill[p.i]++] = {p.i, p.j, pf[k], p.rel};
        rep.bonds[fill[p.j]++] = {p.j, p.i, -pf[k], -p.rel};
    }
    for (std::size_t a = 0; a < n; ++a)
        std::sort(rep.bonds.begin() + start[a], rep.bonds.begin() + start[a + 1],
                  [](const BondForceTerm& x, const BondForceTerm& y) { return x.beta < y.beta; });
    for (const auto& b : rep.bonds) rep.forces[b.alpha] += b.force;
    return rep;
}

ForceReport multibody_eval(const ParticleState& state, const PotentialModel& model) {
    return multibody_eval(state, build_neighbor_list(state, model.cutoff(), 0.0), model);
}

double total_energy(const ParticleState& state, const PotentialModel& model) {
    return multibody_eval(state, model).energy;
}

double site_energy(const PotentialModel& model, const std::vector<double>& distances) {
    double e = 0.0, rho = 0.0;
    for (double r : distances) {
        e += 0.5 * model.pair(r).value;
        rho += model.density(r).value;
    }
    return e + model.embed(rho).value;
}

std::vector<BondForceTerm> noncentral_three_body_decomposition(const ParticleState& cluster, const PotentialModel& model) {
    if (cluster.size() != 3) throw InvalidArgument("three-body decomposition needs exactly 3 particles");
    ParticleState iso = cluster;
    // isolate: make every direction non-periodic with a box that holds the triple
    iso.cell.periodic = {false, false, false};
    const ForceReport rep = multibody_eval(iso, model);
    std::vector<BondForceTerm> out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            out.push_back({a, b, (rep.forces[a] - rep.forces[b]) / 3.0, iso.positions[b] - iso.positions[a]});
        }
    return out;
}

std::array<double, 3> collinear_extension_derivatives(double a, double c) {
    const double k = 8.0 * a * c * (a + c);
    return {-k, k, -k};
}

Extension1D alternate_extension_forces_1d(const PotentialModel& model, double x1, double x2, double x3) {
    if (!(x1 < x2 && x2 < x3)) throw InvalidArgument("collinear triple must satisfy x1 < x2 < x3");
    const double r12 = x2 - x1, r23 = x3 - x2, r13 = x3 - x1;
    Extension1D e;
    // force on 1 due to b is g * (x_b - x_1)/r, which is +g along x
    e.f12 = model.pair(r12).derivative;
    e.f13 = model.pair(r13).derivative;
    const auto d = collinear_extension_derivatives(r12, r23);
    e.f12_ext = e.f12 + d[0];
    e.f13_ext = e.f13 + d[1];
    return e;
}

std::vector<BondForceTerm> extension_bond_terms(const ParticleState& state, const std::vector<std::vector<int>>& clusters,
                                                const std::vector<double>& lambdas) {
    if (clusters.size() != lambdas.size()) throw InvalidArgument("one lambda per cluster required");
    std::map<std::pair<int, int>, std::pair<Vec3, Vec3>> acc;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const auto& c = clusters[k];
        const int n = static_cast<int>(c.size());
        if (n < 2 || n > 6) throw InvalidArgument("extension clusters need 2..6 particles");
        std::vector<Vec3> pts(n);
        pts[0] = state.positions[c[0]];
        for (int i = 1; i < n; ++i) pts[i] = pts[0] + minimum_image_displacement(state.cell, pts[0], state.positions[c[i]]);
        const auto d = SquaredDistanceSet::from_points(pts);
        const auto grad = cayley_menger_gradient(d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const Vec3 rel = pts[j] - pts[i];
                const double r = norm(rel);
                if (r < 1e-9) throw SingularityError("extension cluster has coincident points");
                const double g = lambdas[k] * 2.0 * r * grad[i * n + j];
                auto& slot = acc[{c[i], c[j]}];
                slot.first += rel * (g / r);
                slot.second = rel;
            }
    }
    std::vector<BondForceTerm> out;
    out.reserve(acc.size());
    for (const auto& [key, v] : acc) out.push_back({key.first, key.second, v.first, v.second});
    return out;
}

}  // namespace atomstress
