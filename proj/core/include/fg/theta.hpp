#pragma once

#include "fg/types.hpp"

#include <Eigen/Dense>
#include <vector>

namespace fg {

/// Evaluation context for the genus-g Riemann theta function
///   theta(u) = sum_N exp(pi i (Omega N, N) + 2 pi i (N, u)).
struct ThetaContext {
    Eigen::MatrixXcd Omega;
    double tol = 1e-12;
    int radius = 0;  // lattice truncation bound in the max norm
    int g = 0;
    Eigen::MatrixXd im_inv;
    double lambda_min = 0.0;

    static ThetaContext make(const Eigen::MatrixXcd& Omega, double tol = 1e-12);
};

/// Argument reduction u = u0 + M + Omega N with the quasi-periodicity factor
/// theta(u) = exp(log_factor) * theta(u0).
struct ReducedTheta {
    Eigen::VectorXcd u0;
    Eigen::VectorXi M, N;
    cplx log_factor;
};
ReducedTheta reduce_argument(const Eigen::VectorXcd& u, const ThetaContext& ctx);

cplx theta(const Eigen::VectorXcd& u, const ThetaContext& ctx);
Eigen::VectorXcd theta_grad(const Eigen::VectorXcd& u, const ThetaContext& ctx);
/// |theta| at the reduced argument with the quasi-periodic factor dropped;
/// same zero set as theta, uniform scale across the plane (used by scans).
double theta_reduced_abs(const Eigen::VectorXcd& u, const ThetaContext& ctx);
/// log of theta(u) (branch arbitrary); safe for arguments far from the
/// fundamental cell where theta itself would overflow.
cplx log_theta(const Eigen::VectorXcd& u, const ThetaContext& ctx);

struct HalfPeriod {
    Eigen::VectorXi M, N;     // characteristics in {0,1}^g
    Eigen::VectorXcd value;   // (M + Omega N) / 2
    bool odd = false;         // odd iff M.N is odd
};
std::vector<HalfPeriod> half_periods(const ThetaContext& ctx);

} // namespace fg
