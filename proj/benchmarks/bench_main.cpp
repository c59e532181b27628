#include <benchmark/benchmark.h>

#include "fg/bafunction.hpp"
#include "fg/floquet.hpp"
#include "fg/theta.hpp"

using namespace fg;

namespace {

const Curve& quartic() {
    static Curve cv = Curve::build({cplx(1, 2), cplx(-1, -2), cplx(1, -2), cplx(-1, 2)});
    return cv;
}

const SpectralData& spectral() {
    static SpectralData sd = [] {
        SpectralConfig cfg;
        cfg.mode = SpectralMode::GENERIC_2D;
        cfg.branch_points = {cplx(1, 2), cplx(-1, -2), cplx(1, -2), cplx(-1, 2)};
        return SpectralData::make(cfg);
    }();
    return sd;
}

void BM_theta_g1(benchmark::State& state) {
    auto ctx = ThetaContext::make(quartic().periods().Omega);
    Eigen::VectorXcd u(1);
    u(0) = cplx(0.31, 0.17);
    for (auto _ : state) benchmark::DoNotOptimize(theta(u, ctx));
}
BENCHMARK(BM_theta_g1);

void BM_theta_g3(benchmark::State& state) {
    static Curve cv = Curve::build({cplx(1), cplx(-1), cplx(2), cplx(-2), cplx(3), cplx(-3),
                                    cplx(4), cplx(-4)});
    auto ctx = ThetaContext::make(cv.periods().Omega);
    Eigen::VectorXcd u(3);
    u << cplx(0.31, 0.17), cplx(-0.2, 0.4), cplx(0.05, -0.3);
    for (auto _ : state) benchmark::DoNotOptimize(theta(u, ctx));
}
BENCHMARK(BM_theta_g3);

void BM_period_matrix(benchmark::State& state) {
    for (auto _ : state) {
        auto cv = Curve::build({cplx(1, 2), cplx(-1, -2), cplx(1, -2), cplx(-1, 2)});
        benchmark::DoNotOptimize(cv.periods());
    }
}
BENCHMARK(BM_period_matrix)->Unit(benchmark::kMillisecond);

void BM_psi_eval(benchmark::State& state) {
    const auto& sd = spectral();
    auto pc = sd.point(sd.curve().lift(cplx(0.6, 1.4), +1));
    const TimeMap t{{1, 0.02}};
    cplx z(0.1, -0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sd.psi(pc, z, t));
        z += cplx(1e-6, 0.0);
    }
}
BENCHMARK(BM_psi_eval);

void BM_potential_eval(benchmark::State& state) {
    const auto& sd = spectral();
    cplx z(0.1, -0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sd.potential(z, {}));
        z += cplx(1e-6, 0.0);
    }
}
BENCHMARK(BM_potential_eval);

void BM_pencil_sigma_min(benchmark::State& state) {
    auto lat = PeriodLattice::make(cplx(1, 0), cplx(0, 1));
    FourierMap cosU;
    cosU[{0, 0}] = 0.6;
    cosU[{1, 0}] = 0.2;
    cosU[{-1, 0}] = 0.2;
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(pencil_sigma_min(lat, cosU, cosU, cplx(0.21), cplx(0.33), N));
}
BENCHMARK(BM_pencil_sigma_min)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
