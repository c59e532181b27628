#pragma once

#include "fg/bafunction.hpp"
#include "fg/verify.hpp"

#include <optional>
#include <string>

namespace fg {

/// Flat typed run configuration; complex numbers are written "re,im",
/// lists are ';'-separated, ranges are "lo : hi : count".
struct RunConfig {
    SpectralMode mode = SpectralMode::GENUS0;
    std::vector<cplx> branch_points;
    bool divisor_admissible = true;
    std::vector<std::pair<cplx, int>> divisor_points;
    std::vector<int> flows{1};
    TimeMap times;
    cplx genus0_d{1.0, 0.0};

    GridSpec grid;
    std::vector<double> t1_values{0.0};
    cplx eval_lambda{2.0, 0.0};
    int eval_sheet = 1;

    double fd_step = 1e-3;
    double tol_dirac = 1e-6;
    double tol_reality = 1e-6;
    double tol_reduction = 1e-5;
    double tol_y = 1e-8;

    cplx lattice_g1{1.0, 0.0}, lattice_g2{0.0, 1.0};
    std::string floquet_potential = "constant";  // zero | constant | cosine
    cplx cosine_amplitude{0.2, 0.0};
    int floquet_n = 16;
    int floquet_grid = 64;

    unsigned seed = 20260808;
    std::string output_dir = "out";

    SpectralConfig spectral() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

} // namespace fg
