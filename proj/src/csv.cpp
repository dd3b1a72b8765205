#include "atomstress/csv.hpp"

#include <cstdio>

#include "atomstress/error.hpp"

namespace atomstress {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), ncol_(header.size()) {
    if (!out_) throw ParseError("cannot write " + path.string());
    row_text(header);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw InvalidArgument("csv row has the wrong number of columns");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    row_text(cells);
}

std::vector<std::string> stress_csv_header() {
    std::vector<std::string> h{"x", "y", "z"};
    for (const char* part : {"kin", "pot", "tot"})
        for (int i = 1; i <= 3; ++i)
            for (int j = 1; j <= 3; ++j) h.push_back(std::string(part) + "_" + std::to_string(i) + std::to_string(j));
    return h;
}

void write_stress_csv(const std::filesystem::path& path, const StressField& field) {
    CsvWriter w(path, stress_csv_header());
    for (std::size_t g = 0; g < field.grid.size(); ++g) {
        const Vec3& x = field.grid.points[g];
        std::vector<double> r{x.x, x.y, x.z};
        for (const Mat3* m : {&field.values[g].kinetic, &field.values[g].potential, &field.values[g].total})
            r.insert(r.end(), m->m.begin(), m->m.end());
        w.row(r);
    }
}

void write_traction_csv(const std::filesystem::path& path, std::span<const TractionSample> samples) {
    CsvWriter w(path, {"cx", "cy", "cz", "nx", "ny", "nz", "area", "t_begin", "t_end", "pot_1", "pot_2", "pot_3", "kin_1",
                       "kin_2", "kin_3", "tot_1", "tot_2", "tot_3", "crossings"});
    for (const auto& s : samples) {
        const auto& p = s.probe;
        w.row({p.center.x, p.center.y, p.center.z, p.normal.x, p.normal.y, p.normal.z, p.area(), s.t_begin, s.t_end,
               s.potential.x, s.potential.y, s.potential.z, s.kinetic.x, s.kinetic.y, s.kinetic.z, s.total.x, s.total.y,
               s.total.z, static_cast<double>(s.crossings)});
    }
}

}  // namespace atomstress
