#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "atomstress/dynamics.hpp"
#include "atomstress/potentials.hpp"
#include "atomstress/weighting.hpp"

namespace atomstress {

// Sectioned key/value configuration. Every known key has a default; keys outside the
// schema are rejected.
class RunConfig {
public:
    RunConfig();  // all defaults
    static RunConfig from_file(const std::filesystem::path& ini);
    static RunConfig from_string(const std::string& text);

    void set(const std::string& section, const std::string& key, const std::string& value);
    const std::string& get(const std::string& section, const std::string& key) const;
    double number(const std::string& section, const std::string& key) const;
    long integer(const std::string& section, const std::string& key) const;
    bool flag(const std::string& section, const std::string& key) const;
    std::vector<double> numbers(const std::string& section, const std::string& key) const;

    std::string to_ini() const;
    void write(const std::filesystem::path& ini) const;

    PotentialModel potential() const;
    WeightingFunction weighting() const;
    IntegratorConfig integrator() const;
    MinimizerConfig minimizer() const;

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace atomstress
