#include <doctest.h>

#include "fg/quadrature.hpp"

using namespace fg;

TEST_CASE("adaptive GK reproduces elementary integrals") {
    auto v = integrate_gk<cplx>([](double x) { return cplx(x * x, 0.0); }, 0.0, 1.0, 1e-13);
    CHECK(std::abs(v - cplx(1.0 / 3.0)) < 1e-13);

    // peaked integrand: 1/sqrt(x^2 + a^2)
    const double a = 1e-3;
    auto p = integrate_gk<cplx>([&](double x) { return cplx(1.0 / std::hypot(x, a)); }, -1.0, 1.0, 1e-12);
    const double exact = 2.0 * std::asinh(1.0 / a);
    CHECK(std::abs(p.real() - exact) < 1e-10 * exact);
}

TEST_CASE("complex segment integration") {
    // integral of exp(z) over [0, 1+i]
    const cplx z1(1.0, 1.0);
    auto v = integrate_segment([](cplx z) { return std::exp(z); }, cplx(0.0), z1, 1e-13);
    CHECK(std::abs(v - (std::exp(z1) - 1.0)) < 1e-12);
}

TEST_CASE("vector integrand") {
    auto f = [](double x) {
        Eigen::VectorXcd v(2);
        v << cplx(x), cplx(x * x);
        return v;
    };
    auto v = integrate_gk<Eigen::VectorXcd>(f, 0.0, 2.0, 1e-13, 28, 2);
    CHECK(std::abs(v(0) - cplx(2.0)) < 1e-12);
    CHECK(std::abs(v(1) - cplx(8.0 / 3.0)) < 1e-12);
}
