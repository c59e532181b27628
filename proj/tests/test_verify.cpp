#include <doctest.h>

#include "fg/verify.hpp"

using namespace fg;

namespace {

const SpectralData& constant_data() {
    static SpectralData sd = [] {
        SpectralConfig cfg;
        cfg.mode = SpectralMode::GENUS0;
        cfg.genus0_d = 1.0;
        return SpectralData::make(cfg);
    }();
    return sd;
}

const SpectralData& genus1_2d() {
    static SpectralData sd = [] {
        SpectralConfig cfg;
        cfg.mode = SpectralMode::GENERIC_2D;
        cfg.branch_points = {cplx(1, 2), cplx(-1, -2), cplx(1, -2), cplx(-1, 2)};
        return SpectralData::make(cfg);
    }();
    return sd;
}

const SpectralData& genus1_mkdv() {
    static SpectralData sd = [] {
        SpectralConfig cfg;
        cfg.mode = SpectralMode::MKDV_1D;
        cfg.branch_points = {cplx(1), cplx(-1), cplx(2), cplx(-2)};
        return SpectralData::make(cfg);
    }();
    return sd;
}

} // namespace

TEST_CASE("dirac residual: constant-potential closed form") {
    SurfacePoint P;
    P.lambda = cplx(1.7, 0.4);
    GridSpec grid;
    grid.nx = grid.ny = 6;
    auto rep = dirac_residual(constant_data(), P, grid, {}, 1e-3, 1e-8);
    CHECK(rep.pass);
    CHECK(rep.max_abs <= 1e-8);

    // zero data: psi = (exp(lambda z), 0), U = 0
    SpectralConfig zc;
    zc.mode = SpectralMode::GENUS0;
    zc.genus0_d = 0.0;
    auto sz = SpectralData::make(zc);
    auto rz = dirac_residual(sz, P, grid, {}, 1e-3, 1e-10);
    CHECK(rz.pass);
    CHECK(rz.max_abs <= 1e-10);
}

TEST_CASE("dirac residual: genus-1 GENERIC_2D data") {
    const auto& sd = genus1_2d();
    auto P = sd.curve().lift(cplx(0.7, 1.5), +1);
    GridSpec grid;
    grid.nx = grid.ny = 8;
    auto rep = dirac_residual(sd, P, grid, {{1, 0.02}}, 1e-3, 1e-6);
    CHECK(rep.max_abs <= 1e-6);
    CHECK(std::abs(rep.convergence_order - 2.0) <= 0.5);
    CHECK(rep.pass);
}

TEST_CASE("reduction checks on genus-1 MKDV data") {
    const auto& sd = genus1_mkdv();
    GridSpec grid;
    grid.nx = 12;
    grid.y0 = -0.4;
    grid.y1 = 0.55;
    auto reps = reduction_checks(sd, grid, 2e-3, 1e-8, 1e-5);
    REQUIRE(reps.size() == 3);
    CHECK(reps[0].pass);
    CHECK(reps[0].max_abs <= 1e-8);
    CHECK(reps[1].pass);
    CHECK(reps[1].max_abs <= 1e-5);
    CHECK(std::abs(reps[1].convergence_order - 2.0) <= 0.5);
    CHECK(reps[2].pass);
}

TEST_CASE("reduction checks: constant solution is stationary") {
    GridSpec grid;
    grid.nx = 8;
    auto reps = reduction_checks(constant_data(), grid, 1e-3, 1e-9, 1e-9);
    CHECK(reps[0].pass);
    CHECK(reps[1].pass);
    CHECK(reps[1].max_abs <= 1e-9);
}

TEST_CASE("Zakharov-Shabat and Miura residuals") {
    {
        const auto& sd = constant_data();
        SurfacePoint P;
        P.lambda = cplx(1.4, 0.2);
        GridSpec grid;
        grid.nx = 8;
        auto reps = zakharov_shabat_miura(sd, {P}, grid, 1e-3, 1e-8);
        for (const auto& r : reps) {
            CHECK(r.max_abs <= 1e-8);
            CHECK(r.pass);
        }
    }
    {
        const auto& sd = genus1_mkdv();
        std::vector<SurfacePoint> Ps{sd.curve().lift(cplx(0.4, 0.9), +1),
                                     sd.curve().lift(cplx(-0.8, 1.2), -1),
                                     sd.curve().lift(cplx(3.1, 0.7), +1)};
        GridSpec grid;
        grid.nx = 10;
        auto reps = zakharov_shabat_miura(sd, Ps, grid, 1e-3, 1e-5);
        for (const auto& r : reps) {
            CHECK(r.max_abs <= 1e-5);
            CHECK(std::abs(r.convergence_order - 2.0) <= 0.5);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("reality check and its negative control") {
    const auto& sd = genus1_2d();
    GridSpec grid;
    grid.nx = grid.ny = 8;
    auto rep = reality_check(sd, grid, {{1, 0.03}}, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.max_abs <= 1e-6);

    SpectralConfig cfg;
    cfg.mode = SpectralMode::GENERIC_2D;
    cfg.branch_points = {cplx(1, 2), cplx(-1, -2), cplx(1, -2), cplx(-1, 2)};
    const auto& D = sd.divisor();
    cfg.divisor_points = {{D.points[0].lambda + cplx(0.4, 0.3), D.points[0].sheet},
                          {D.points[1].lambda, D.points[1].sheet}};
    auto broken = SpectralData::make(cfg);
    auto neg = reality_check(broken, grid, {}, 1e-6);
    CHECK(neg.max_abs > 1e-2);
    CHECK(!neg.pass);
}
