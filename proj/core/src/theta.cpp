#include "fg/theta.hpp"

#include <cmath>

namespace fg {

ThetaContext ThetaContext::make(const Eigen::MatrixXcd& Omega, double tol) {
    ThetaContext ctx;
    ctx.Omega = Omega;
    ctx.tol = tol;
    ctx.g = static_cast<int>(Omega.rows());
    Eigen::MatrixXd im = Omega.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(im);
    ctx.lambda_min = es.eigenvalues()(0);
    if (!(ctx.lambda_min > 0.0)) fail("NotPositiveDefinite", "Im(Omega) must be positive definite");
    ctx.im_inv = im.inverse();
    ctx.radius = static_cast<int>(std::ceil(std::sqrt(-std::log(tol) / (pi * ctx.lambda_min)))) + ctx.g + 2;
    return ctx;
}

ReducedTheta reduce_argument(const Eigen::VectorXcd& u, const ThetaContext& ctx) {
    const int g = ctx.g;
    ReducedTheta r;
    Eigen::VectorXd y = ctx.im_inv * u.imag();
    r.N.resize(g);
    for (int j = 0; j < g; ++j) r.N(j) = static_cast<int>(std::lround(y(j)));
    Eigen::VectorXcd u1 = u - ctx.Omega * r.N.cast<double>().cast<cplx>();
    r.M.resize(g);
    for (int j = 0; j < g; ++j) r.M(j) = static_cast<int>(std::lround(u1(j).real()));
    r.u0 = u1 - r.M.cast<double>().cast<cplx>();
    // theta(u0 + M + Omega N) = exp(-pi i (Omega N,N) - 2 pi i (N,u0)) theta(u0)
    const Eigen::VectorXcd Nc = r.N.cast<double>().cast<cplx>();
    cplx quad = (Nc.transpose() * (ctx.Omega * Nc))(0);
    cplx lin = (Nc.transpose() * r.u0)(0);
    r.log_factor = -pi * iu * quad - 2.0 * pi * iu * lin;
    return r;
}

namespace {

/// Direct lattice sum of theta and its gradient at a reduced argument.
void theta_sum(const Eigen::VectorXcd& u0, const ThetaContext& ctx, cplx& val,
               Eigen::VectorXcd* grad) {
    const int g = ctx.g;
    const int R = ctx.radius;
    val = 0.0;
    if (grad) grad->setZero(g);
    Eigen::VectorXi n = Eigen::VectorXi::Constant(g, -R);
    const Eigen::MatrixXcd& Om = ctx.Omega;
    while (true) {
        Eigen::VectorXcd nc(g);
        for (int j = 0; j < g; ++j) nc(j) = static_cast<double>(n(j));
        cplx quad = (nc.transpose() * (Om * nc))(0);
        cplx lin = (nc.transpose() * u0)(0);
        const cplx term = std::exp(pi * iu * quad + 2.0 * pi * iu * lin);
        val += term;
        if (grad)
            for (int j = 0; j < g; ++j) (*grad)(j) += 2.0 * pi * iu * nc(j) * term;
        int k = 0;
        while (k < g) {
            if (n(k) < R) {
                ++n(k);
                break;
            }
            n(k) = -R;
            ++k;
        }
        if (k == g) break;
    }
}

} // namespace

cplx theta(const Eigen::VectorXcd& u, const ThetaContext& ctx) {
    ReducedTheta r = reduce_argument(u, ctx);
    cplx v;
    theta_sum(r.u0, ctx, v, nullptr);
    return std::exp(r.log_factor) * v;
}

Eigen::VectorXcd theta_grad(const Eigen::VectorXcd& u, const ThetaContext& ctx) {
    ReducedTheta r = reduce_argument(u, ctx);
    cplx v;
    Eigen::VectorXcd gr;
    theta_sum(r.u0, ctx, v, &gr);
    const Eigen::VectorXcd Nc = r.N.cast<double>().cast<cplx>();
    return std::exp(r.log_factor) * (gr - 2.0 * pi * iu * v * Nc);
}

double theta_reduced_abs(const Eigen::VectorXcd& u, const ThetaContext& ctx) {
    ReducedTheta r = reduce_argument(u, ctx);
    cplx v;
    theta_sum(r.u0, ctx, v, nullptr);
    return std::abs(v);
}

cplx log_theta(const Eigen::VectorXcd& u, const ThetaContext& ctx) {
    ReducedTheta r = reduce_argument(u, ctx);
    cplx v;
    theta_sum(r.u0, ctx, v, nullptr);
    if (v == cplx{0.0}) fail("ThetaZeroDenominator", "theta vanishes at the reduced argument");
    return r.log_factor + std::log(v);
}

std::vector<HalfPeriod> half_periods(const ThetaContext& ctx) {
    const int g = ctx.g;
    if (g > 4) fail("NotPositiveDefinite", "half-period enumeration limited to g <= 4");
    std::vector<HalfPeriod> out;
    const int total = 1 << (2 * g);
    out.reserve(total);
    for (int mask = 0; mask < total; ++mask) {
        HalfPeriod hp;
        hp.M.resize(g);
        hp.N.resize(g);
        int dot = 0;
        for (int j = 0; j < g; ++j) {
            hp.M(j) = (mask >> j) & 1;
            hp.N(j) = (mask >> (g + j)) & 1;
            dot += hp.M(j) * hp.N(j);
        }
        hp.odd = (dot % 2) == 1;
        hp.value = 0.5 * (hp.M.cast<double>().cast<cplx>() +
                          ctx.Omega * hp.N.cast<double>().cast<cplx>());
        out.push_back(std::move(hp));
    }
    return out;
}

} // namespace fg
