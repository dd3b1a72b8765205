#include "atomstress/estimators.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atomstress/error.hpp"
#include "atomstress/parallel.hpp"

namespace atomstress {

namespace {

constexpr double kPi = std::numbers::pi;

void check_window(std::span<const Snapshot> window) {
    if (window.empty()) throw InvalidArgument("averaging window has no snapshots");
}

std::vector<Vec3> midpoints(const std::vector<BondSegment>& segs, double& max_half) {
    std::vector<Vec3> mids(segs.size());
    max_half = 0.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        mids[k] = segs[k].start + segs[k].rel * 0.5;
        max_half = std::max(max_half, 0.5 * norm(segs[k].rel));
    }
    return mids;
}

double bin_size_for(double reach) { return std::max(reach, 0.5); }

}  // namespace

FieldGrid FieldGrid::make_regular(const Vec3& origin, const Vec3& spacing, std::array<int, 3> counts) {
    for (int c : counts)
        if (c < 1) throw InvalidArgument("grid counts must be >= 1");
    FieldGrid g;
    g.regular = RegularGrid{origin, spacing, counts};
    g.points.reserve(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2]);
    for (int k = 0; k < counts[2]; ++k)
        for (int j = 0; j < counts[1]; ++j)
            for (int i = 0; i < counts[0]; ++i)
                g.points.push_back(origin + Vec3{i * spacing.x, j * spacing.y, k * spacing.z});
    return g;
}

FieldGrid FieldGrid::from_points(std::vector<Vec3> pts) {
    for (const Vec3& p : pts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) throw InvalidArgument("grid point not finite");
    FieldGrid g;
    g.points = std::move(pts);
    return g;
}

std::vector<ContinuumSample> continuum_fields(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid) {
    PointBins bins(state.cell, state.positions, bin_size_for(wf.support()));
    std::vector<ContinuumSample> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& s = out[g];
        bins.query(grid.points[g], wf.support(), [&](int a, const Vec3& p) {
            const double w = wf(norm(p - grid.points[g]));
            s.density += state.masses[a] * w;
            s.momentum += state.velocities[a] * (state.masses[a] * w);
        });
        if (s.density > 0.0) {
            s.velocity = s.momentum / s.density;
            s.velocity_defined = true;
        }
    }
    return out;
}

std::vector<BondSegment> bond_segments(const ParticleState& state, std::span<const BondForceTerm> terms) {
    auto key_less = [](const BondForceTerm& t, std::pair<int, int> k) {
        return t.alpha != k.first ? t.alpha < k.first : t.beta < k.second;
    };
    const bool sorted = std::is_sorted(terms.begin(), terms.end(), [](const BondForceTerm& a, const BondForceTerm& b) {
        return a.alpha != b.alpha ? a.alpha < b.alpha : a.beta < b.beta;
    });
    std::vector<BondForceTerm> copy;
    if (!sorted) {
        copy.assign(terms.begin(), terms.end());
        std::sort(copy.begin(), copy.end(), [](const BondForceTerm& a, const BondForceTerm& b) {
            return a.alpha != b.alpha ? a.alpha < b.alpha : a.beta < b.beta;
        });
        terms = copy;
    }
    std::vector<BondSegment> out;
    out.reserve(terms.size() / 2 + 1);
    for (const auto& t : terms) {
        const auto rev = std::lower_bound(terms.begin(), terms.end(), std::pair{t.beta, t.alpha}, key_less);
        const bool has_rev = rev != terms.end() && rev->alpha == t.beta && rev->beta == t.alpha;
        if (t.alpha > t.beta && has_rev) continue;  // handled from the other ordering
        const Vec3 back = has_rev ? rev->force : -t.force;
        out.push_back({t.alpha, t.beta, state.positions[t.alpha], t.rel, (t.force - back) * 0.5});
    }
    return out;
}

// ---------------------------------------------------------------- Hardy

HardyAccumulator::HardyAccumulator(WeightingFunction wf, FieldGrid grid, int threads)
    : wf_(std::move(wf)), grid_(std::move(grid)), threads_(threads), kin_(grid_.size()), pot_(grid_.size()) {}

void HardyAccumulator::add(const Snapshot& snap, std::span<const BondForceTerm> terms) {
    const auto& st = snap.state;
    const auto segs = bond_segments(st, terms);
    double max_half = 0.0;
    const auto mids = midpoints(segs, max_half);
    const double S = wf_.support();
    PointBins atom_bins(st.cell, st.positions, bin_size_for(S));
    PointBins bond_bins(st.cell, mids, bin_size_for(S + max_half));
    parallel_for(grid_.size(), threads_, [&](std::size_t g) {
        const Vec3& x = grid_.points[g];
        // kinetic: two passes so v_rel uses the local continuum velocity
        std::vector<std::pair<int, double>> hits;
        double rho = 0.0;
        Vec3 mom;
        atom_bins.query(x, S, [&](int a, const Vec3& p) {
            const double w = wf_(norm(p - x));
            if (w == 0.0) return;
            hits.emplace_back(a, w);
            rho += st.masses[a] * w;
            mom += st.velocities[a] * (st.masses[a] * w);
        });
        std::sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        Mat3 kin;
        if (rho > 0.0) {
            const Vec3 vbar = mom / rho;
            for (const auto& [a, w] : hits) {
                const Vec3 vr = st.velocities[a] - vbar;
                kin -= outer(vr, vr) * (st.masses[a] * w);
            }
        }
        std::vector<std::pair<int, double>> bonds;
        bond_bins.query(x, S + max_half, [&](int k, const Vec3& m) {
            const Vec3 u = m - segs[k].rel * 0.5;
            const double b = bond_function(wf_, x, u, u + segs[k].rel);
            if (b != 0.0) bonds.emplace_back(k, b);
        });
        std::sort(bonds.begin(), bonds.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        Mat3 pot;
        for (const auto& [k, b] : bonds) pot += outer(segs[k].force, segs[k].rel) * b;
        kin_[g] += kin;
        pot_[g] += pot;
    });
    if (count_ == 0) t0_ = snap.time;
    t1_ = snap.time;
    ++count_;
}

StressField HardyAccumulator::result() const {
    if (count_ == 0) throw InvalidArgument("averaging window has no snapshots");
    StressField f;
    f.estimator = "hardy";
    f.grid = grid_;
    f.t_begin = t0_;
    f.t_end = t1_;
    f.values.resize(grid_.size());
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t g = 0; g < grid_.size(); ++g) {
        auto& v = f.values[g];
        v.kinetic = kin_[g] * inv;
        v.potential = pot_[g] * inv;
        v.total = v.kinetic + v.potential;
    }
    return f;
}

StressField hardy_stress_terms(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                               const WeightingFunction& wf, const FieldGrid& grid, int threads) {
    check_window(window);
    if (terms.size() != window.size()) throw InvalidArgument("one bond-term set per snapshot required");
    HardyAccumulator acc(wf, grid, threads);
    for (std::size_t k = 0; k < window.size(); ++k) acc.add(window[k], terms[k]);
    return acc.result();
}

StressField hardy_stress(std::span<const Snapshot> window, const WeightingFunction& wf, const FieldGrid& grid,
                         const PotentialModel& model, int threads) {
    check_window(window);
    HardyAccumulator acc(wf, grid, threads);
    for (const auto& s : window) acc.add(s, multibody_eval(s.state, model).bonds);
    return acc.result();
}

// ---------------------------------------------------------------- virial

namespace {

struct VirialSums {
    Mat3 kin, pot;
    double volume = 0.0;
    bool empty = false;
};

Mat3 kinetic_sum(const ParticleState& st, const std::vector<std::pair<int, Vec3>>& members, VelocityReference ref) {
    Vec3 vref;
    if (ref == VelocityReference::DomainCenterOfMass) {
        double m = 0.0;
        for (const auto& [a, p] : members) {
            m += st.masses[a];
            vref += st.velocities[a] * st.masses[a];
        }
        if (m > 0.0) vref /= m;
    }
    Mat3 k;
    for (const auto& [a, p] : members) {
        const Vec3 vr = st.velocities[a] - vref;
        k -= outer(vr, vr) * st.masses[a];
    }
    return k;
}

struct VirialPrep {
    PointBins bins;
    std::vector<std::size_t> first;     // terms of alpha at [first[a], first[a+1])
    std::vector<BondForceTerm> sorted;
};

VirialPrep virial_prepare(const ParticleState& st, std::span<const BondForceTerm> terms, double radius) {
    VirialPrep v;
    v.bins = PointBins(st.cell, st.positions, bin_size_for(radius));
    v.first.assign(st.size() + 1, 0);
    v.sorted.assign(terms.begin(), terms.end());
    std::stable_sort(v.sorted.begin(), v.sorted.end(), [](const auto& a, const auto& b) {
        return a.alpha != b.alpha ? a.alpha < b.alpha : a.beta < b.beta;
    });
    for (const auto& t : v.sorted) ++v.first[t.alpha + 1];
    for (std::size_t a = 0; a < st.size(); ++a) v.first[a + 1] += v.first[a];
    return v;
}

VirialSums virial_snapshot(const ParticleState& st, const VirialPrep& prep, const Sphere& dom, VelocityReference ref) {
    VirialSums s;
    s.volume = 4.0 / 3.0 * kPi * dom.radius * dom.radius * dom.radius;
    std::vector<std::pair<int, Vec3>> members;
    prep.bins.query(dom.center, dom.radius, [&](int a, const Vec3& p) { members.emplace_back(a, p); });
    if (members.empty()) {
        s.empty = true;
        return s;
    }
    std::sort(members.begin(), members.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first < r.first;
        return std::lexicographical_compare(&l.second.x, &l.second.x + 3, &r.second.x, &r.second.x + 3);
    });
    s.kin = kinetic_sum(st, members, ref);
    const double R2 = dom.radius * dom.radius;
    for (const auto& [a, p] : members)
        for (std::size_t e = prep.first[a]; e < prep.first[a + 1]; ++e) {
            const auto& t = prep.sorted[e];
            if (norm2(p + t.rel - dom.center) <= R2) s.pot += outer(t.force, t.rel) * 0.5;
        }
    return s;
}

VirialSums virial_snapshot(const ParticleState& st, std::span<const BondForceTerm> terms, const Sphere& dom,
                           VelocityReference ref) {
    return virial_snapshot(st, virial_prepare(st, terms, dom.radius), dom, ref);
}

VirialResult finish_virial(const std::vector<VirialSums>& per_snapshot) {
    VirialResult r;
    std::size_t used = 0;
    for (const auto& s : per_snapshot) {
        r.volume = s.volume;
        if (s.empty) continue;
        r.stress.kinetic += s.kin;
        r.stress.potential += s.pot;
        ++used;
    }
    if (used == 0) {
        r.empty_domain = true;
        return r;
    }
    const double f = 1.0 / (static_cast<double>(per_snapshot.size()) * r.volume);
    r.stress.kinetic *= f;
    r.stress.potential *= f;
    r.stress.total = r.stress.kinetic + r.stress.potential;
    return r;
}

}  // namespace

VirialResult virial_stress_terms(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                                 const Sphere& domain, VelocityReference ref) {
    check_window(window);
    if (!(domain.radius > 0.0)) throw InvalidArgument("virial domain radius must be positive");
    if (terms.size() != window.size()) throw InvalidArgument("one bond-term set per snapshot required");
    std::vector<VirialSums> sums;
    for (std::size_t k = 0; k < window.size(); ++k) sums.push_back(virial_snapshot(window[k].state, terms[k], domain, ref));
    return finish_virial(sums);
}

StressField virial_stress_field(std::span<const Snapshot> window, std::span<const std::vector<BondForceTerm>> terms,
                                const FieldGrid& grid, double radius, VelocityReference ref, int threads) {
    check_window(window);
    if (!(radius > 0.0)) throw InvalidArgument("virial domain radius must be positive");
    if (terms.size() != window.size()) throw InvalidArgument("one bond-term set per snapshot required");
    std::vector<VirialPrep> preps;
    for (std::size_t k = 0; k < window.size(); ++k) preps.push_back(virial_prepare(window[k].state, terms[k], radius));
    StressField f;
    f.estimator = "virial";
    f.grid = grid;
    f.values.resize(grid.size());
    f.t_begin = window.front().time;
    f.t_end = window.back().time;
    parallel_for(grid.size(), threads, [&](std::size_t g) {
        std::vector<VirialSums> sums;
        for (std::size_t k = 0; k < window.size(); ++k)
            sums.push_back(virial_snapshot(window[k].state, preps[k], Sphere{grid.points[g], radius}, ref));
        f.values[g] = finish_virial(sums).stress;
    });
    return f;
}

VirialResult virial_stress(std::span<const Snapshot> window, const Sphere& domain, const PotentialModel& model,
                           VelocityReference ref) {
    check_window(window);
    if (!(domain.radius > 0.0)) throw InvalidArgument("virial domain radius must be positive");
    std::vector<VirialSums> sums;
    for (const auto& s : window) sums.push_back(virial_snapshot(s.state, multibody_eval(s.state, model).bonds, domain, ref));
    return finish_virial(sums);
}

VirialResult virial_stress_cell(std::span<const Snapshot> window, const PotentialModel& model, VelocityReference ref) {
    check_window(window);
    std::vector<VirialSums> sums;
    for (const auto& snap : window) {
        const auto& st = snap.state;
        VirialSums s;
        s.volume = st.cell.volume();
        std::vector<std::pair<int, Vec3>> members;
        for (std::size_t a = 0; a < st.size(); ++a) members.emplace_back(static_cast<int>(a), st.positions[a]);
        s.kin = kinetic_sum(st, members, ref);
        for (const auto& t : multibody_eval(st, model).bonds) s.pot += outer(t.force, t.rel) * 0.5;
        sums.push_back(s);
    }
    return finish_virial(sums);
}

PressureSample virial_pressure(const Snapshot& snap, const ForceReport& rep, double volume, const Vec3& v_ref) {
    if (!(volume > 0.0)) throw InvalidArgument("pressure volume must be positive");
    const auto& st = snap.state;
    double two_k = 0.0;
    for (std::size_t a = 0; a < st.size(); ++a) two_k += st.masses[a] * norm2(st.velocities[a] - v_ref);
    double w = 0.0;
    for (const auto& t : rep.bonds) w += dot(t.force, t.rel);
    PressureSample p;
    p.time = snap.time;
    p.kinetic = two_k / (3.0 * volume);
    p.potential = -0.5 * w / (3.0 * volume);
    p.total = p.kinetic + p.potential;
    return p;
}

// ---------------------------------------------------------------- DA

namespace {

// integral of z over the intersection of two balls, returned as volume * centroid
Vec3 lens_moment(const Vec3& c1, double r1, const Vec3& c2, double r2) {
    const Vec3 dv = c2 - c1;
    const double d = norm(dv);
    if (d >= r1 + r2) return {};
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        const Vec3& c = r1 <= r2 ? c1 : c2;
        return c * (4.0 / 3.0 * kPi * r * r * r);
    }
    const Vec3 e = dv / d;
    const double d1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    const double d2 = d - d1;
    const double h1 = r1 - d1, h2 = r2 - d2;
    const double v1 = kPi * h1 * h1 * (3.0 * r1 - h1) / 3.0;
    const double v2 = kPi * h2 * h2 * (3.0 * r2 - h2) / 3.0;
    const double z1 = 3.0 * (2.0 * r1 - h1) * (2.0 * r1 - h1) / (4.0 * (3.0 * r1 - h1));
    const double z2 = 3.0 * (2.0 * r2 - h2) * (2.0 * r2 - h2) / (4.0 * (3.0 * r2 - h2));
    return (c1 + e * z1) * v1 + (c2 - e * z2) * v2;
}

}  // namespace

Vec3 da_bond_integral(const WeightingFunction& wf, const Vec3& a, const Vec3& b) {
    const double S = wf.support();
    if (norm(a - b) > 4.0 * S) return {};
    if (wf.is_step()) {
        const double c = wf.max_value();
        Vec3 out;
        for (int comp = 0; comp < 3; ++comp) {
            auto f = [&](double s) {
                const Vec3 m = lens_moment(a / s, S / s, -b / (1.0 - s), S / (1.0 - s));
                return c * c * m[comp];
            };
            out[comp] = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, 1.0, 15, 1e-9);
        }
        return out;
    }
    using GL12 = boost::math::quadrature::gauss<double, 12>;
    using GL16 = boost::math::quadrature::gauss<double, 16>;
    const Vec3 z0 = a - b;
    const double h = 2.0 * S;
    // nodes/weights on [-1,1] from the symmetric half tables
    auto full = [](const auto& absc, const auto& wts) {
        std::vector<std::pair<double, double>> nw;
        for (std::size_t i = 0; i < absc.size(); ++i) {
            if (absc[i] == 0.0) {
                nw.emplace_back(0.0, wts[i]);
            } else {
                nw.emplace_back(absc[i], wts[i]);
                nw.emplace_back(-absc[i], wts[i]);
            }
        }
        return nw;
    };
    const auto n12 = full(GL12::abscissa(), GL12::weights());
    const auto n16 = full(GL16::abscissa(), GL16::weights());
    Vec3 out;
    for (const auto& [ts, ws] : n16) {
        const double s = 0.5 * (ts + 1.0);
        for (const auto& [t0, w0] : n12)
            for (const auto& [t1, w1] : n12)
                for (const auto& [t2, w2] : n12) {
                    const Vec3 z = z0 + Vec3{t0, t1, t2} * h;
                    const double w = wf(norm(a - z * s));
                    if (w == 0.0) continue;
                    const double v = wf(norm(b + z * (1.0 - s)));
                    if (v == 0.0) continue;
                    out += z * (0.5 * ws * w0 * w1 * w2 * w * v);
                }
    }
    return out * (h * h * h);
}

StressField da_stress(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid,
                      const PotentialModel& model, int threads) {
    const ForceReport rep = multibody_eval(state, model);
    const auto segs = bond_segments(state, rep.bonds);
    double max_half = 0.0;
    const auto mids = midpoints(segs, max_half);
    const double S = wf.support();
    PointBins bond_bins(state.cell, mids, bin_size_for(S + max_half));
    Snapshot snap{0.0, state};
    HardyAccumulator kin(wf, grid, threads);
    kin.add(snap, {});
    StressField f = kin.result();
    f.estimator = "da";
    parallel_for(grid.size(), threads, [&](std::size_t g) {
        const Vec3& x = grid.points[g];
        std::vector<std::pair<int, Mat3>> parts;
        bond_bins.query(x, S + max_half, [&](int k, const Vec3& m) {
            const Vec3 u = m - segs[k].rel * 0.5;
            const Vec3 I = da_bond_integral(wf, u - x, u + segs[k].rel - x);
            if (norm2(I) != 0.0) parts.emplace_back(k, outer(-segs[k].force, I));
        });
        std::sort(parts.begin(), parts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        Mat3 pot;
        for (const auto& [k, t] : parts) pot += t;
        f.values[g].potential = pot;
        f.values[g].total = f.values[g].kinetic + pot;
    });
    return f;
}

// ---------------------------------------------------------------- Tsai

PlanarProbe PlanarProbe::rectangle(const Vec3& center, const Vec3& normal, double w_a, double w_b) {
    const double nn = norm(normal);
    if (!(nn > 0.0)) throw InvalidArgument("probe normal must be nonzero");
    if (!(w_a > 0.0) || !(w_b > 0.0)) throw InvalidArgument("probe area must be positive");
    PlanarProbe p;
    p.center = center;
    p.normal = normal / nn;
    const Vec3& n = p.normal;
    int k = 0;
    for (int c = 1; c < 3; ++c)
        if (std::abs(n[c]) > std::abs(n[k])) k = c;
    if (std::abs(std::abs(n[k]) - 1.0) < 1e-15) {
        Vec3 ea, eb;
        ea[(k + 1) % 3] = 1.0;
        eb[(k + 2) % 3] = 1.0;
        if ((k + 1) % 3 > (k + 2) % 3) std::swap(ea, eb);
        p.axis_a = ea;
        p.axis_b = eb;
    } else {
        int j = 0;
        for (int c = 1; c < 3; ++c)
            if (std::abs(n[c]) < std::abs(n[j])) j = c;
        Vec3 e;
        e[j] = 1.0;
        p.axis_a = cross(n, e);
        p.axis_a /= norm(p.axis_a);
        p.axis_b = cross(n, p.axis_a);
    }
    p.half_a = 0.5 * w_a;
    p.half_b = 0.5 * w_b;
    return p;
}

struct TsaiAccumulator::Impl {
    struct Group {
        Vec3 normal;
        int axis = -1;          // coordinate axis when the normal is +-e_axis
        double sign = 1.0;      // normal = sign * e_axis
        double period = 0.0;    // > 0 when the cell is periodic along the normal
        std::vector<std::pair<double, int>> planes;  // plane coordinate along normal, probe index
        std::vector<int> probes;
    };

    SimulationCell cell;
    std::vector<PlanarProbe> probes;
    TsaiOptions opt;
    std::vector<Group> groups;

    std::vector<Vec3> pot;
    std::vector<std::size_t> bond_hits;
    std::vector<std::vector<std::pair<double, Vec3>>> crossings;  // (mass, velocity at crossing)
    std::vector<double> slab_mass;
    std::vector<Vec3> slab_mom;
    bool warn = false;

    bool have_prev = false;
    std::vector<Vec3> prev_x, prev_v;
    std::size_t count = 0;
    double t0 = 0.0, t1 = 0.0;

    // offset of q within the probe plane, wrapping in-plane periodic directions
    bool inside(const Group& gr, int p, Vec3 q) const {
        const auto& pr = probes[p];
        if (gr.axis >= 0)
            for (int c = 0; c < 3; ++c)
                if (c != gr.axis && cell.periodic[c]) q[c] -= cell.lengths[c] * std::nearbyint(q[c] / cell.lengths[c]);
        return std::abs(dot(q, pr.axis_a)) <= pr.half_a && std::abs(dot(q, pr.axis_b)) <= pr.half_b;
    }

    // f(probe, t) for each probe the segment start..start+rel strictly crosses
    template <class F>
    void crossings_of(const Group& gr, const Vec3& start, const Vec3& rel, F&& f) const {
        if (gr.axis < 0) {
            for (int p : gr.probes) {
                const auto& pr = probes[p];
                const Vec3 D = minimum_image_displacement(cell, pr.center, start);
                const double d0 = dot(D, pr.normal), d1 = d0 + dot(rel, pr.normal);
                if (!((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0))) continue;
                const double t = d0 / (d0 - d1);
                if (inside(gr, p, D + rel * t)) f(p, t);
            }
            return;
        }
        const double s0 = gr.sign * start[gr.axis];
        const double ds = gr.sign * rel[gr.axis];
        if (ds == 0.0) return;
        double lo = std::min(s0, s0 + ds), hi = std::max(s0, s0 + ds);
        double shift = 0.0;
        if (gr.period > 0.0) {
            shift = gr.period * std::floor(lo / gr.period);
            lo -= shift;
            hi -= shift;
        }
        auto visit = [&](double a, double b, double add) {
            auto it = std::upper_bound(gr.planes.begin(), gr.planes.end(), std::pair{a, std::numeric_limits<int>::max()});
            for (; it != gr.planes.end() && it->first < b; ++it) {
                if (!(it->first > a)) continue;
                const double P = it->first + add + shift;  // plane coordinate in the frame of start
                const double t = (P - s0) / ds;
                const int p = it->second;
                const Vec3 X = start + rel * t;
                if (inside(gr, p, X - probes[p].center)) f(p, t);
            }
        };
        visit(lo, hi, 0.0);
        if (gr.period > 0.0 && hi > gr.period) visit(lo - gr.period, hi - gr.period, gr.period);
    }

    template <class F>
    void near_plane(const Group& gr, const Vec3& x, double h, F&& f) const {
        for (int p : gr.probes) {
            const auto& pr = probes[p];
            const Vec3 D = minimum_image_displacement(cell, pr.center, x);
            if (std::abs(dot(D, pr.normal)) <= h && inside(gr, p, D - pr.normal * dot(D, pr.normal))) f(p);
        }
    }
};

TsaiAccumulator::TsaiAccumulator(const SimulationCell& cell, std::vector<PlanarProbe> probes, TsaiOptions opt)
    : impl_(std::make_unique<Impl>()) {
    auto& I = *impl_;
    I.cell = cell;
    I.opt = opt;
    for (const auto& p : probes) {
        if (!(p.area() > 0.0)) throw InvalidArgument("probe area must be positive");
        if (std::abs(norm(p.normal) - 1.0) > 1e-12) throw InvalidArgument("probe normal must be a unit vector");
    }
    I.probes = std::move(probes);
    for (int p = 0; p < static_cast<int>(I.probes.size()); ++p) {
        const Vec3& n = I.probes[p].normal;
        auto it = std::find_if(I.groups.begin(), I.groups.end(), [&](const auto& g) { return g.normal == n; });
        if (it == I.groups.end()) {
            Impl::Group g;
            g.normal = n;
            for (int c = 0; c < 3; ++c)
                if (std::abs(n[c]) == 1.0) {
                    g.axis = c;
                    g.sign = n[c];
                    if (cell.periodic[c]) g.period = cell.lengths[c];
                }
            I.groups.push_back(g);
            it = I.groups.end() - 1;
        }
        it->probes.push_back(p);
        if (it->axis >= 0) {
            double c = it->sign * I.probes[p].center[it->axis];
            if (it->period > 0.0) c -= it->period * std::floor(c / it->period);
            it->planes.emplace_back(c, p);
        }
    }
    for (auto& g : I.groups) std::sort(g.planes.begin(), g.planes.end());
    const std::size_t n = I.probes.size();
    I.pot.assign(n, Vec3{});
    I.bond_hits.assign(n, 0);
    I.crossings.assign(n, {});
    I.slab_mass.assign(n, 0.0);
    I.slab_mom.assign(n, Vec3{});
}

TsaiAccumulator::~TsaiAccumulator() = default;
TsaiAccumulator::TsaiAccumulator(TsaiAccumulator&&) noexcept = default;
TsaiAccumulator& TsaiAccumulator::operator=(TsaiAccumulator&&) noexcept = default;

void TsaiAccumulator::add(const Snapshot& snap, std::span<const BondForceTerm> terms) {
    auto& I = *impl_;
    const auto& st = snap.state;
    if (I.have_prev && I.prev_x.size() != st.size()) throw InvalidArgument("snapshot particle count changed");
    const auto segs = bond_segments(st, terms);
    for (const auto& gr : I.groups) {
        for (const auto& sg : segs) {
            I.crossings_of(gr, sg.start, sg.rel, [&](int p, double) {
                const double sgn = dot(sg.rel, I.probes[p].normal) > 0.0 ? 1.0 : -1.0;
                I.pot[p] += sg.force * sgn;
                ++I.bond_hits[p];
            });
        }
        for (std::size_t a = 0; a < st.size(); ++a)
            I.near_plane(gr, st.positions[a], I.opt.slab_half_thickness, [&](int p) {
                I.slab_mass[p] += st.masses[a];
                I.slab_mom[p] += st.velocities[a] * st.masses[a];
            });
        if (I.have_prev) {
            for (std::size_t a = 0; a < st.size(); ++a) {
                const Vec3 step = minimum_image_displacement(st.cell, I.prev_x[a], st.positions[a]);
                if (norm(step) > I.opt.max_step_displacement) I.warn = true;
                I.crossings_of(gr, I.prev_x[a], step, [&](int p, double t) {
                    I.crossings[p].emplace_back(st.masses[a], I.prev_v[a] * (1.0 - t) + st.velocities[a] * t);
                });
            }
        }
    }
    I.prev_x = st.positions;
    I.prev_v = st.velocities;
    I.have_prev = true;
    if (I.count == 0) I.t0 = snap.time;
    I.t1 = snap.time;
    ++I.count;
}

std::vector<TractionSample> TsaiAccumulator::result() const {
    const auto& I = *impl_;
    if (I.count == 0) throw InvalidArgument("averaging window has no snapshots");
    std::vector<TractionSample> out(I.probes.size());
    const double tau = I.t1 - I.t0;
    for (std::size_t p = 0; p < I.probes.size(); ++p) {
        auto& s = out[p];
        const auto& pr = I.probes[p];
        s.probe = pr;
        s.t_begin = I.t0;
        s.t_end = I.t1;
        s.bond_crossings = I.bond_hits[p];
        s.crossings = I.crossings[p].size();
        s.large_step_warning = I.warn;
        s.potential = I.pot[p] / (static_cast<double>(I.count) * pr.area());
        // plane-limit continuum velocity: crossings weighted by m / |v.n|
        double wsum = 0.0;
        Vec3 vsum;
        for (const auto& [m, v] : I.crossings[p]) {
            const double vn = std::abs(dot(v, pr.normal));
            if (vn < 1e-300) continue;
            wsum += m / vn;
            vsum += v * (m / vn);
        }
        if (wsum > 0.0) {
            s.continuum_velocity = vsum / wsum;
            s.velocity_source = VelocitySource::Crossings;
        } else if (I.slab_mass[p] > 0.0) {
            s.continuum_velocity = I.slab_mom[p] / I.slab_mass[p];
            s.velocity_source = VelocitySource::SlabFallback;
        }
        if (tau > 0.0) {
            Vec3 k;
            for (const auto& [m, v] : I.crossings[p]) {
                const Vec3 vr = v - s.continuum_velocity;
                const double vn = dot(vr, pr.normal);
                if (vn == 0.0) continue;
                k -= vr * (m * (vn > 0.0 ? 1.0 : -1.0));
            }
            s.kinetic = k / (pr.area() * tau);
        }
        s.total = s.potential + s.kinetic;
    }
    return out;
}

TractionSample tsai_traction(std::span<const Snapshot> window, const PlanarProbe& probe, const PotentialModel& model,
                             TsaiOptions opt) {
    check_window(window);
    TsaiAccumulator acc(window.front().state.cell, {probe}, opt);
    for (const auto& s : window) acc.add(s, multibody_eval(s.state, model).bonds);
    return acc.result().front();
}

Mat3 assemble_tensor_from_tractions(const TractionSample& t1, const TractionSample& t2, const TractionSample& t3) {
    const TractionSample* t[3] = {&t1, &t2, &t3};
    Mat3 out;
    for (int j = 0; j < 3; ++j) {
        const Vec3& n = t[j]->probe.normal;
        for (int c = 0; c < 3; ++c) {
            const double want = c == j ? 1.0 : 0.0;
            if (std::abs(n[c] - want) > 1e-12) throw InvalidArgument("traction normals must be e1, e2, e3 in order");
        }
        for (int i = 0; i < 3; ++i) out(i, j) = t[j]->total[i];
    }
    return out;
}

// ---------------------------------------------------------------- sigma*

StressField stress_star_counterexample(const ParticleState& state, const WeightingFunction& wf, const FieldGrid& grid,
                                       const PotentialModel& model) {
    const ForceReport rep = multibody_eval(state, model);
    StressField f;
    f.estimator = "sigma_star";
    f.grid = grid;
    f.values.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Vec3& x = grid.points[g];
        Mat3 s;
        for (std::size_t a = 0; a < state.size(); ++a) {
            const Vec3& F = rep.forces[a];
            if (norm2(F) == 0.0) continue;
            const Vec3 d = minimum_image_displacement(state.cell, state.positions[a], x);
            const double u = norm(d);
            const double ahat = u > 0.0 ? radial_mass(wf, u) / (u * u * u) : wf(0.0) / 3.0;
            s += outer(F, d) * ahat;
        }
        f.values[g].potential = s;
        f.values[g].total = s;
    }
    return f;
}

double hardy_stress_chain_1d(std::span<const double> x, std::span<const ChainBond> bonds, double center, double length) {
    if (!(length > 0.0)) throw InvalidArgument("window length must be positive");
    const double lo = center - 0.5 * length, hi = center + 0.5 * length;
    double s = 0.0;
    for (const auto& b : bonds) {
        const double a = std::min(x[b.i], x[b.j]), c = std::max(x[b.i], x[b.j]);
        if (c <= a) continue;
        const double overlap = std::max(0.0, std::min(c, hi) - std::max(a, lo));
        s += -b.force * (x[b.i] - x[b.j]) * overlap / (c - a);
    }
    return s / length;
}

}  // namespace atomstress
