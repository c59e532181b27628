#include <doctest.h>

#include "fg/curve.hpp"
#include "fg/theta.hpp"
#include "oracles.hpp"

#include <random>

using namespace fg;

namespace {
Eigen::MatrixXcd omega_g1(cplx tau) {
    Eigen::MatrixXcd O(1, 1);
    O(0, 0) = tau;
    return O;
}

Eigen::VectorXcd vec1(cplx u) {
    Eigen::VectorXcd v(1);
    v(0) = u;
    return v;
}
} // namespace

TEST_CASE("theta at the lemniscatic point matches the direct-sum oracle") {
    auto ctx = ThetaContext::make(omega_g1(cplx(0, 1)));
    const cplx v = theta(Eigen::VectorXcd::Zero(1), ctx);
    const cplx ref = oracles::theta1d_direct(0.0, cplx(0, 1));
    CHECK(std::abs(v - ref) < 1e-14);
    CHECK(v.real() == doctest::Approx(1.0864348112).epsilon(1e-10));
}

TEST_CASE("evenness and quasi-periodicity, g = 1..3") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> Z(-2, 2);
    for (int g = 1; g <= 3; ++g) {
        // random Omega with positive-definite imaginary part
        Eigen::MatrixXd A(g, g), B(g, g);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                A(i, j) = U(rng);
                B(i, j) = U(rng);
            }
        Eigen::MatrixXcd Om = (0.5 * (A + A.transpose())).cast<cplx>() +
                              cplx(0, 1) * (B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(g, g)).cast<cplx>();
        auto ctx = ThetaContext::make(Om);
        for (int trial = 0; trial < 8; ++trial) {
            Eigen::VectorXcd u(g);
            for (int j = 0; j < g; ++j) u(j) = cplx(U(rng), U(rng));
            const cplx tv = theta(u, ctx);
            CHECK(std::abs(theta(-u, ctx) - tv) < 1e-10 * (1.0 + std::abs(tv)));

            Eigen::VectorXi M(g), N(g);
            for (int j = 0; j < g; ++j) {
                M(j) = Z(rng);
                N(j) = Z(rng);
            }
            Eigen::VectorXcd Mc = M.cast<double>().cast<cplx>(), Nc = N.cast<double>().cast<cplx>();
            const cplx quad = (Nc.transpose() * (Om * Nc))(0);
            const cplx lin = (Nc.transpose() * u)(0);
            const cplx factor = std::exp(-pi * iu * quad - 2.0 * pi * iu * lin);
            const cplx lhs = theta(u + Mc + Om * Nc, ctx);
            CHECK(std::abs(lhs - factor * tv) < 1e-10 * (std::abs(lhs) + std::abs(factor * tv) + 1.0));
        }
    }
}

TEST_CASE("gradient matches finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    Eigen::MatrixXcd Om(2, 2);
    Om << cplx(0.3, 1.1), cplx(0.1, 0.2), cplx(0.1, 0.2), cplx(-0.2, 0.9);
    auto ctx = ThetaContext::make(Om);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd u(2);
        for (int j = 0; j < 2; ++j) u(j) = cplx(U(rng), U(rng));
        auto grad = theta_grad(u, ctx);
        const double h = 1e-5;
        for (int j = 0; j < 2; ++j) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(2);
            e(j) = h;
            const cplx fd = (theta(u + e, ctx) - theta(u - e, ctx)) / (2.0 * h);
            CHECK(std::abs(fd - grad(j)) < std::max(1e-8, 1e-6 * std::abs(grad(j))));
        }
    }
    // gradient vanishes at the origin (even function)
    CHECK(theta_grad(Eigen::VectorXcd::Zero(2), ctx).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("half periods: counts, parity, theta zeros") {
    Eigen::MatrixXcd Om1 = omega_g1(cplx(0.3, 1.2));
    auto ctx1 = ThetaContext::make(Om1);
    auto hp1 = half_periods(ctx1);
    int odd1 = 0;
    for (const auto& h : hp1) odd1 += h.odd;
    CHECK(odd1 == 1);
    // the odd half period is (1 + Omega)/2
    for (const auto& h : hp1)
        if (h.odd) CHECK(std::abs(h.value(0) - 0.5 * (1.0 + Om1(0, 0))) < 1e-15);

    Eigen::MatrixXcd Om2(2, 2);
    Om2 << cplx(0.2, 1.0), cplx(-0.1, 0.3), cplx(-0.1, 0.3), cplx(0.4, 1.3);
    auto ctx2 = ThetaContext::make(Om2);
    auto hp2 = half_periods(ctx2);
    int odd2 = 0;
    const cplx t0 = theta(Eigen::VectorXcd::Zero(2), ctx2);
    for (const auto& h : hp2)
        if (h.odd) {
            ++odd2;
            CHECK(std::abs(theta(h.value, ctx2)) < 1e-9 * std::abs(t0));
        }
    CHECK(odd2 == 6);
}

TEST_CASE("truncation robustness") {
    Eigen::MatrixXcd Om = omega_g1(cplx(0.2, 0.6));
    auto ctx = ThetaContext::make(Om);
    auto ctx_wide = ctx;
    ctx_wide.radius += 2;
    const cplx u0(0.37, -0.12);
    CHECK(std::abs(theta(vec1(u0), ctx) - theta(vec1(u0), ctx_wide)) < ctx.tol);
}

TEST_CASE("log_theta agrees with theta for large arguments") {
    Eigen::MatrixXcd Om = omega_g1(cplx(0.1, 0.9));
    auto ctx = ThetaContext::make(Om);
    const cplx u(0.3, 2.4);  // far outside the fundamental cell in Im
    const cplx lt = log_theta(vec1(u), ctx);
    const cplx direct = oracles::theta1d_direct(u, Om(0, 0), 80);
    CHECK(std::abs(std::exp(lt) - direct) < 1e-9 * std::abs(direct));
}

TEST_CASE("modular sanity at the lemniscatic point") {
    // theta(0 | -1/Omega) = sqrt(-i Omega) theta(0 | Omega); at Omega = i the
    // factor is 1 and theta(0) is self-dual
    auto ctx = ThetaContext::make(omega_g1(cplx(0, 1)));
    const cplx lhs = theta(Eigen::VectorXcd::Zero(1), ThetaContext::make(omega_g1(-1.0 / cplx(0, 1))));
    const cplx rhs = std::sqrt(-iu * cplx(0, 1)) * theta(Eigen::VectorXcd::Zero(1), ctx);
    CHECK(std::abs(lhs - rhs) < 1e-12);
}
