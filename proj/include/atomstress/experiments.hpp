#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "atomstress/elasticity.hpp"
#include "atomstress/estimators.hpp"
#include "atomstress/potentials.hpp"

namespace atomstress {

class RunConfig;

// Free cube relaxed, heated and run at constant energy; virial pressure over time.
struct Exp1Params {
    int cells = 10;
    double temperature = 0.1;  // target mean temperature
    double dt = 0.004;
    long steps = 20000;
    long stride = 20;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Exp1Result {
    std::size_t atoms = 0;
    double volume = 0.0;  // N a^3 / 4
    std::vector<PressureSample> samples;
    std::vector<double> temperatures;
    // means over the second half of the run
    double kinetic = 0.0, potential = 0.0, total = 0.0, temperature = 0.0;
    double equipartition = 0.0;  // N k T / V at the mean temperature
};

Exp1Result run_experiment1(const PotentialModel& model, const Exp1Params& p);

// N k_B T / (V/N) in MPa for k_B T in eV and V/N in cubic angstrom
double kinetic_pressure_mpa(double kT_eV, double volume_per_atom);

// Periodic crystal at the zero-temperature lattice constant, heated; plane sweep of sigma11.
struct Exp2Params {
    int cells = 8;
    double temperature = 0.05;
    double dt = 0.004;
    long equilibration = 2000;
    long steps = 3000;
    long stride = 1;
    int samples = 21;
    double s_max = 0.1;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Exp2Result {
    std::vector<double> s;
    std::vector<double> kinetic, potential, total;  // sigma11 averaged over all atomic planes
    double temperature = 0.0;
};

Exp2Result run_experiment2(const PotentialModel& model, const Exp2Params& p);

// Uniaxially stressed periodic box; sigma11 against averaging size for all estimators.
struct Exp3Params {
    int cells = 10;
    double sigma = 1.0;
    std::vector<double> sizes{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    double epsilon = 0.1;  // Hardy kernel mollification, fraction of the radius
    // Tsai alone is also swept on a fine ladder from the first to the last size
    double tsai_step = 0.01;
    int threads = 1;
};

struct Exp3Row {
    double s = 0.0, w = 0.0;
    double hardy = 0.0, virial = 0.0, tsai = 0.0, da = 0.0;
};

struct Exp3Result {
    double a = 0.0;
    std::array<double, 3> lengths{};
    std::vector<Exp3Row> rows;
    std::vector<std::pair<double, double>> tsai_fine;  // (s, sigma11)
};

Exp3Result run_experiment3(const PotentialModel& model, const Exp3Params& p);

// Plate with a hole, atoms displaced by the anisotropic reference solution.
struct Exp4Params {
    int cells = 40;
    int thickness = 4;
    double hole_radius_cells = 8.0;
    double sigma = 0.5;  // the LJ crystal is visibly nonlinear at 1
    double domain_fraction = 0.1;  // averaging diameter over plate height
    int grid = 40;
    int da_grid = 15;
    int threads = 1;
};

struct Exp4LinePoint {
    double y = 0.0;
    double hardy = 0.0, reference = 0.0;
    bool compared = false;
};

struct Exp4Result {
    double a = 0.0;
    CubicConstants constants;
    double sigma = 1.0;
    double concentration = 0.0;
    double averaging_radius = 0.0;
    StressField hardy, virial, tsai, da;
    std::vector<KirschPoint> reference;  // on the main grid
    std::vector<KirschPoint> da_reference;
    std::vector<Exp4LinePoint> line;
    double line_max_rel_error = 0.0;
    double hardy_peak = 0.0, da_peak = 0.0;
    double tsai_shear_diff = 0.0, peak_shear = 0.0;
    std::size_t tsai_points = 0;
};

Exp4Result run_experiment4(const PotentialModel& model, const Exp4Params& p);

void write_experiment1(const std::filesystem::path& dir, const Exp1Result& r);
void write_experiment2(const std::filesystem::path& dir, const Exp2Result& r);
void write_experiment3(const std::filesystem::path& dir, const Exp3Result& r);
void write_experiment4(const std::filesystem::path& dir, const Exp4Result& r);

// reads [experiment] and [md], runs, writes CSVs; returns a process exit status
int run_experiment(int id, const RunConfig& cfg, const std::filesystem::path& outdir, int threads);

}  // namespace atomstress
