#include "fg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fg {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

[[noreturn]] void bad(int line, const std::string& msg) {
    fail("ConfigError", "line " + std::to_string(line) + ": " + msg);
}

double to_real(const std::string& s, int line) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) bad(line, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        bad(line, "expected a number, got '" + s + "'");
    }
}

cplx to_cplx(const std::string& s, int line) {
    auto parts = split(s, ',');
    if (parts.size() == 1) return cplx(to_real(parts[0], line), 0.0);
    if (parts.size() != 2) bad(line, "complex values are written re,im");
    return cplx(to_real(parts[0], line), to_real(parts[1], line));
}

int to_int(const std::string& s, int line) {
    const double v = to_real(s, line);
    if (v != std::floor(v)) bad(line, "expected an integer");
    return static_cast<int>(v);
}

} // namespace

SpectralConfig RunConfig::spectral() const {
    SpectralConfig sc;
    sc.mode = mode;
    sc.branch_points = branch_points;
    if (!divisor_admissible) sc.divisor_points = divisor_points;
    sc.flows = flows;
    sc.genus0_d = genus0_d;
    sc.seed = seed;
    return sc;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) bad(lineno, "empty key or value");
        if (!seen.insert(key).second) bad(lineno, "duplicate key '" + key + "'");

        if (key == "mode") {
            if (val == "GENERIC_2D")
                cfg.mode = SpectralMode::GENERIC_2D;
            else if (val == "MKDV_1D")
                cfg.mode = SpectralMode::MKDV_1D;
            else if (val == "GENUS0")
                cfg.mode = SpectralMode::GENUS0;
            else
                bad(lineno, "mode must be GENERIC_2D, MKDV_1D or GENUS0");
        } else if (key == "branch_points") {
            for (const auto& p : split(val, ';')) cfg.branch_points.push_back(to_cplx(p, lineno));
            if (cfg.branch_points.size() % 2 != 0 || cfg.branch_points.size() < 4)
                bad(lineno, "need an even number >= 4 of branch points");
        } else if (key == "divisor") {
            if (val == "admissible") {
                cfg.divisor_admissible = true;
            } else {
                cfg.divisor_admissible = false;
                for (const auto& p : split(val, ';')) {
                    auto ps = split(p, ':');
                    if (ps.size() != 2) bad(lineno, "divisor points are written re,im:sheet");
                    cfg.divisor_points.push_back({to_cplx(ps[0], lineno), to_int(ps[1], lineno)});
                }
            }
        } else if (key == "flows") {
            cfg.flows.clear();
            for (const auto& p : split(val, ';')) cfg.flows.push_back(to_int(p, lineno));
        } else if (key.rfind("time_", 0) == 0) {
            cfg.times[to_int(key.substr(5), lineno)] = to_real(val, lineno);
        } else if (key == "genus0_d") {
            cfg.genus0_d = to_cplx(val, lineno);
        } else if (key == "grid_x" || key == "grid_y") {
            auto ps = split(val, ':');
            if (ps.size() != 3) bad(lineno, "ranges are written lo : hi : count");
            const double lo = to_real(ps[0], lineno), hi = to_real(ps[1], lineno);
            const int n = to_int(ps[2], lineno);
            if (n < 1 || hi <= lo) bad(lineno, "range needs hi > lo and count >= 1");
            if (key == "grid_x") {
                cfg.grid.x0 = lo;
                cfg.grid.x1 = hi;
                cfg.grid.nx = n;
            } else {
                cfg.grid.y0 = lo;
                cfg.grid.y1 = hi;
                cfg.grid.ny = n;
            }
        } else if (key == "t1_values") {
            cfg.t1_values.clear();
            for (const auto& p : split(val, ';')) cfg.t1_values.push_back(to_real(p, lineno));
        } else if (key == "eval_point") {
            auto ps = split(val, ':');
            if (ps.size() != 2) bad(lineno, "eval_point is written re,im:sheet");
            cfg.eval_lambda = to_cplx(ps[0], lineno);
            cfg.eval_sheet = to_int(ps[1], lineno);
        } else if (key == "fd_step") {
            cfg.fd_step = to_real(val, lineno);
        } else if (key == "tol_dirac") {
            cfg.tol_dirac = to_real(val, lineno);
        } else if (key == "tol_reality") {
            cfg.tol_reality = to_real(val, lineno);
        } else if (key == "tol_reduction") {
            cfg.tol_reduction = to_real(val, lineno);
        } else if (key == "tol_y") {
            cfg.tol_y = to_real(val, lineno);
        } else if (key == "lattice") {
            auto ps = split(val, ';');
            if (ps.size() != 2) bad(lineno, "lattice = g1 ; g2");
            cfg.lattice_g1 = to_cplx(ps[0], lineno);
            cfg.lattice_g2 = to_cplx(ps[1], lineno);
        } else if (key == "floquet_potential") {
            if (val != "zero" && val != "constant" && val != "cosine")
                bad(lineno, "floquet_potential must be zero, constant or cosine");
            cfg.floquet_potential = val;
        } else if (key == "cosine_amplitude") {
            cfg.cosine_amplitude = to_cplx(val, lineno);
        } else if (key == "floquet_n") {
            cfg.floquet_n = to_int(val, lineno);
        } else if (key == "floquet_grid") {
            cfg.floquet_grid = to_int(val, lineno);
        } else if (key == "seed") {
            cfg.seed = static_cast<unsigned>(to_int(val, lineno));
        } else if (key == "output_dir") {
            cfg.output_dir = val;
        } else {
            bad(lineno, "unknown key '" + key + "'");
        }
    }
    // cross-field validation
    if (cfg.mode != SpectralMode::GENUS0 && cfg.branch_points.empty())
        fail("ConfigError", "branch_points required outside GENUS0 mode");
    for (const auto& [l, v] : cfg.times) {
        (void)v;
        bool listed = false;
        for (int f : cfg.flows) listed |= (f == l);
        if (!listed) fail("ConfigError", "time_" + std::to_string(l) + " has no matching flow entry");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("ConfigError", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace fg
