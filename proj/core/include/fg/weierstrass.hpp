#pragma once

#include "fg/verify.hpp"

#include <array>
#include <functional>

namespace fg {

/// Immersion data from the representation formulas: three real coordinate
/// fields over a z-grid, with closedness and conformality diagnostics.
struct SurfaceGrid {
    GridSpec grid;
    std::vector<std::array<double, 3>> X;  // (ny+1) x (nx+1) vertices, row-major
    double max_plaquette_residual = 0.0;   // |loop integral| / cell area, worst form
    double conformality = 0.0;             // max |Xz.Xz| / |Xz.conj(Xz)|
    std::array<double, 3> base{0.0, 0.0, 0.0};
};

/// Integrate the three 1-forms built from psi( . , P) over the grid
/// (trapezoid along the first row, then up the columns) and check closedness
/// on every plaquette with per-edge Gauss quadrature.
SurfaceGrid surface_grid(const SpectralData& sd, const SurfacePoint& P, const GridSpec& grid,
                         const std::array<double, 3>& X0, const TimeMap& t,
                         double closedness_tol = 1e-6);

struct WillmoreValue {
    double W = 0.0;
    int nx = 0, ny = 0;
};

/// W = 4 integral of U^2 over the rectangle, composite trapezoid; when
/// `periodic` is set the periodicity of U is verified first.
WillmoreValue willmore(const std::function<cplx(cplx)>& U, double x0, double x1, double y0,
                       double y1, int nx, int ny, bool periodic = false);

/// Smallest positive x-period of the 1-D reduced potential, found from the
/// lattice compatibility of the linear theta-argument flow and verified by
/// direct sampling.
double mkdv_x_period(const SpectralData& sd, double mismatch_tol = 1e-6);

struct DeformationScan {
    std::vector<double> t1;
    std::vector<double> W;
    double drift = 0.0;  // max |W - W0| / |W0|
};

/// Willmore values along the first deformation flow over one x-period.
DeformationScan deformation_scan(const SpectralData& sd, const std::vector<double>& t1_values,
                                 int nx = 64, int ny = 8);

} // namespace fg
