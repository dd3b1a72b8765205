#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "atomstress/estimators.hpp"

namespace atomstress {

// 17 significant digits, '.' separator
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t ncol_;
};

std::vector<std::string> stress_csv_header();
void write_stress_csv(const std::filesystem::path& path, const StressField& field);
void write_traction_csv(const std::filesystem::path& path, std::span<const TractionSample> samples);

}  // namespace atomstress
