#pragma once

#include "fg/bafunction.hpp"

#include <string>
#include <vector>

namespace fg {

/// Outcome of one finite-difference residual check. `convergence_order` is
/// measured between steps h and h/2 and must sit within 0.5 of the scheme
/// order for the check to pass (unless the residual is at rounding level).
struct ResidualReport {
    std::string name;
    std::string grid;
    double max_abs = 0.0;
    double rms = 0.0;
    double convergence_order = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct GridSpec {
    double x0 = -0.5, x1 = 0.5;
    int nx = 16;
    double y0 = -0.5, y1 = 0.5;
    int ny = 16;
};

/// Residual of the Dirac zero-mode equation for the theta-functional pair (psi, U):
/// rows d psi2 + U psi1 and -dbar psi1 + U psi2, central differences at h and
/// h/2, Richardson-extrapolated.
ResidualReport dirac_residual(const SpectralData& sd, const SurfacePoint& P, const GridSpec& grid,
                              const TimeMap& t, double h, double tol);

/// One-dimensional reduction bundle: (a) y-independence of U, (b) the mKdV equation
/// U_t = U_xxx/4 + 6 U_x U^2 in t_1, (c) the factorization
/// psi(z,P) = psi~(x,P) exp(lambda(P) y).
std::vector<ResidualReport> reduction_checks(const SpectralData& sd, const GridSpec& grid,
                                             double h, double tol_y, double tol_pde);

/// Zakharov-Shabat first-order system and both Miura-related second-order
/// operators at the sampled curve points.
std::vector<ResidualReport> zakharov_shabat_miura(const SpectralData& sd,
                                                  const std::vector<SurfacePoint>& samples,
                                                  const GridSpec& grid, double h, double tol);

/// max |Im U| / max |U| over the grid.
ResidualReport reality_check(const SpectralData& sd, const GridSpec& grid, const TimeMap& t,
                             double tol);

} // namespace fg
