#include "atomstress/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "atomstress/error.hpp"

namespace atomstress {

namespace {

using Section = std::map<std::string, std::string>;

const std::map<std::string, Section>& schema() {
    static const std::map<std::string, Section> s{
        {"potential", {{"kind", "lj"}, {"table", ""}, {"A", "1"}, {"p", "1"}, {"q", "1"}, {"D", "1"}, {"cutoff", "2.5"}}},
        {"weighting", {{"kind", "constant"}, {"r_w", "2"}, {"epsilon", "0"}, {"gaussian_cutoff", "6"}}},
        {"md",
         {{"dt", "0.004"},
          {"steps", "1000"},
          {"stride", "10"},
          {"seed", "1"},
          {"temperature", "0.1"},
          {"thermalize", "1"},
          {"skin", "0.3"},
          {"input", ""}}},
        {"minimize", {{"ftol", "1e-8"}, {"maxiter", "100000"}, {"input", ""}}},
        // bounds default to the cell; a count of 1 puts the point at the middle
        {"grid",
         {{"nx", "10"},
          {"ny", "10"},
          {"nz", "1"},
          {"xlo", "auto"},
          {"xhi", "auto"},
          {"ylo", "auto"},
          {"yhi", "auto"},
          {"zlo", "auto"},
          {"zhi", "auto"}}},
        {"gen",
         {{"nx", "4"},
          {"ny", "4"},
          {"nz", "4"},
          {"a", "auto"},
          {"periodic", "1 1 1"},
          {"hole_radius", "0"},
          {"temperature", "0"}}},
        {"stress",
         {{"input", ""},
          {"estimator", "hardy"},
          {"t_begin", "-inf"},
          {"t_end", "inf"},
          {"radius", "auto"}}},
        {"traction",
         {{"input", ""},
          {"center", "auto"},
          {"normal", "1 0 0"},
          {"width_a", "auto"},
          {"width_b", "auto"},
          {"t_begin", "-inf"},
          {"t_end", "inf"},
          {"slab_half_thickness", "1"}}},
        {"experiment",
         {{"id", "3"},
          {"cells", "auto"},
          {"a", "auto"},
          {"temperature", "auto"},
          {"steps", "auto"},
          {"equilibration", "auto"},
          {"stride", "auto"},
          {"sigma", "auto"},
          {"hole_radius_cells", "8"},
          {"thickness_cells", "4"},
          {"domain_fraction", "0.1"},
          {"grid", "40"},
          {"da_grid", "15"},
          {"full_scale", "0"}}},
    };
    return s;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size() || t.empty())
        throw ParseError(where + ": expected a number, got '" + text + "'");
    return v;
}

}  // namespace

RunConfig::RunConfig() : values_(schema()) {}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    const auto s = schema().find(section);
    if (s == schema().end()) throw ParseError("unknown config section [" + section + "]");
    if (!s->second.count(key)) throw ParseError("unknown key '" + key + "' in [" + section + "]");
    values_[section][key] = trim(value);
}

RunConfig RunConfig::from_string(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [section, body] : pt) {
        if (body.empty() && !body.data().empty()) throw ParseError("config key '" + section + "' outside any section");
        for (const auto& [key, val] : body) cfg.set(section, key, val.data());
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& ini) {
    std::ifstream in(ini);
    if (!in) throw ParseError("cannot read config " + ini.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

const std::string& RunConfig::get(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end() || !s->second.count(key)) throw ParseError("unknown key '" + key + "' in [" + section + "]");
    return s->second.at(key);
}

double RunConfig::number(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), "[" + section + "] " + key);
}

long RunConfig::integer(const std::string& section, const std::string& key) const {
    const double v = number(section, key);
    if (v != std::floor(v) || std::abs(v) > 9e15)
        throw ParseError("[" + section + "] " + key + ": expected an integer, got '" + get(section, key) + "'");
    return static_cast<long>(v);
}

bool RunConfig::flag(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ParseError("[" + section + "] " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> RunConfig::numbers(const std::string& section, const std::string& key) const {
    std::istringstream in(get(section, key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, "[" + section + "] " + key));
    return out;
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    for (const auto& [section, body] : values_) {
        out << '[' << section << "]\n";
        for (const auto& [k, v] : body) out << k << " = " << v << '\n';
        out << '\n';
    }
    return out.str();
}

void RunConfig::write(const std::filesystem::path& ini) const {
    std::ofstream out(ini, std::ios::binary);
    if (!out) throw ParseError("cannot write " + ini.string());
    out << to_ini();
}

PotentialModel RunConfig::potential() const {
    const std::string& kind = get("potential", "kind");
    if (kind == "lj") return PotentialModel::lennard_jones();
    if (kind == "eam") {
        EamParams p;
        p.A = number("potential", "A");
        p.p = number("potential", "p");
        p.q = number("potential", "q");
        p.D = number("potential", "D");
        p.cutoff = number("potential", "cutoff");
        return PotentialModel::eam(p);
    }
    if (kind == "table") {
        const std::string& f = get("potential", "table");
        if (f.empty()) throw ParseError("[potential] kind = table needs a table file");
        return PotentialModel::pair_table(f);
    }
    throw ParseError("[potential] kind must be lj, eam or table, got '" + kind + "'");
}

WeightingFunction RunConfig::weighting() const {
    const std::string& kind = get("weighting", "kind");
    const double r = number("weighting", "r_w");
    if (kind == "constant") return WeightingFunction::constant(r, number("weighting", "epsilon"));
    if (kind == "gaussian") return WeightingFunction::gaussian(r, number("weighting", "gaussian_cutoff"));
    if (kind == "quartic") return WeightingFunction::quartic_spline(r);
    throw ParseError("[weighting] kind must be constant, gaussian or quartic, got '" + kind + "'");
}

IntegratorConfig RunConfig::integrator() const {
    IntegratorConfig c;
    c.dt = number("md", "dt");
    c.steps = integer("md", "steps");
    c.stride = integer("md", "stride");
    c.seed = static_cast<std::uint64_t>(integer("md", "seed"));
    c.skin = number("md", "skin");
    c.validate();
    return c;
}

MinimizerConfig RunConfig::minimizer() const {
    MinimizerConfig c;
    c.ftol = number("minimize", "ftol");
    c.max_iterations = integer("minimize", "maxiter");
    c.validate();
    return c;
}

}  // namespace atomstress
