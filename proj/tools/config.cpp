#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace khess_cli {

namespace {

struct Default {
    const char* key;
    const char* value;
    const char* help;
};

// "auto" values are filled in from the preset profile.
const Default kDefaults[] = {
    {"seed", "1", "seed for noise, samplers and audits"},
    {"output.prefix", "", "write <prefix>.report.txt, .field.txt, .table.csv (empty: stdout only)"},
    {"chart.kind", "auto", "torus, domain or sphere"},
    {"chart.n", "auto", "dimension"},
    {"chart.N", "32", "grid intervals per axis"},
    {"chart.L", "auto", "side length (sphere: coordinate box side)"},
    {"chart.rho", "1", "sphere radius"},
    {"chart.active", "auto", "axes carrying grid points (0: all)"},
    {"equation.preset", "schouten", "schouten, lc_schouten, optics, gauss_flat, gauss_sphere, csc"},
    {"equation.k", "2", "operator degree"},
    {"equation.l", "0", "quotient lower degree"},
    {"equation.t", "1", "linear-combination weight of sigma_k"},
    {"equation.s", "0.5", "linear-combination weight of sigma_(k-1)"},
    {"equation.c0", "10", "bound on t + n s"},
    {"equation.sign", "-1", "lc_schouten: +1 for f0 exp(-2u), -1 for f0 exp(2u)"},
    {"equation.f0", "1", "Schouten right-hand side factor, in x"},
    {"equation.nu", "1", "optics: nu(x)"},
    {"equation.phi", "1", "optics: phi(T), in t1..t(n+1)"},
    {"equation.kappa", "1", "Gauss curvature, in x"},
    {"equation.op", "sigma_k_root", "csc operator: sigma_k_root, quotient, linear_comb_root"},
    {"equation.a", "0", "csc: coefficient of du (x) du"},
    {"equation.f", "1", "csc: f(x, z)"},
    {"equation.h", "1", "csc: h(p, pp)"},
    {"manufactured.u", "bump", "exact state u*: an expression in x, or bump for the preset's own"},
    {"manufactured.mode", "analytic", "analytic or discrete right-hand side"},
    {"manufactured.margin", "1e-3", "smallest cone margin accepted for u*"},
    {"solve.noise", "0.1", "amplitude of the smooth noise added to u* for the start state"},
    {"solve.continuation_start", "none", "start state for continuation (same boundary data as u*)"},
    {"solve.continuation_steps", "4", "continuation stages"},
    {"solver.max_iters", "25", "Newton iteration limit"},
    {"solver.residual_tol", "1e-10", "residual max-norm target"},
    {"solver.backtrack", "0.5", "step reduction factor"},
    {"solver.min_step", "9.5367431640625e-07", "smallest damped step"},
    {"solver.cone_margin", "1e-6", "cone margin kept by every iterate"},
    {"solver.linear", "direct", "direct or iterative"},
    {"solver.iterative_tol", "1e-13", "iterative solver tolerance"},
    {"solver.iterative_max_iters", "5000", "iterative solver iteration limit"},
    {"estimate.case", "auto", "T1a, T1b, T1c, C31, C32a, C32b or T2"},
    {"estimate.radii", "1,0.5,0.25", "ball radii about the chart origin"},
    {"estimate.rescale", "false", "measure on the rescaled unit-ball problem"},
    {"estimate.max_spread", "2", "largest accepted max/min ratio across radii"},
    {"estimate.collar", "3", "boundary collar in grid steps"},
    {"estimate.solved_tol", "1e-8", "residual accepted as solved"},
    {"estimate.slack_tol", "1e-12", "relative tolerance of audit comparisons"},
    {"estimate.p_samples", "32", "gradient samples per audited node"},
    {"estimate.max_audit_nodes", "256", "audited nodes per report"},
    {"audit.r", "1", "audit ball radius"},
    {"symcheck.kind", "all", "sigma_k_root, quotient, linear_comb_root or all"},
    {"symcheck.samples", "1000", "cone samples per battery"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
    for (const Default& d : kDefaults) {
        index_[d.key] = entries_.size();
        entries_.push_back({d.key, d.value, d.help, "default"});
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        const std::string where = path + ":" + std::to_string(no);
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value', got '" + t + "'");
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), where);
    }
}

void Config::assign(const std::string& key_value, const std::string& origin) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos) throw ConfigError(origin, "expected key=value, got '" + key_value + "'");
    set(trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)), origin);
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
    const auto it = index_.find(key);
    if (it == index_.end()) throw ConfigError(origin, "unknown key '" + key + "'");
    entries_[it->second].value = value;
    entries_[it->second].origin = origin;
}

void Config::set_default(const std::string& key, const std::string& value) {
    Entry& e = entries_[index_.at(key)];
    if (e.origin == "default") e.value = value;
}

const Config::Entry& Config::entry(const std::string& key) const { return entries_[index_.at(key)]; }

const std::string& Config::str(const std::string& key) const { return entry(key).value; }

std::string Config::origin(const std::string& key) const { return entry(key).origin; }

void Config::fail(const std::string& key, const std::string& what) const {
    throw ConfigError(origin(key), key + ": " + what);
}

int Config::integer(const std::string& key) const {
    const std::string& v = str(key);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
    return out;
}

double Config::real(const std::string& key) const {
    const std::string& v = str(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected a number, got '" + v + "'");
    return out;
}

bool Config::boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
            fail(key, "expected a comma-separated list of numbers, got '" + str(key) + "'");
        out.push_back(x);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::string Config::dump(bool with_help) const {
    std::ostringstream os;
    for (const Entry& e : entries_) {
        if (with_help) os << "# " << e.help << "\n";
        os << e.key << " = " << e.value << "\n";
    }
    return os.str();
}

}  // namespace khess_cli
