#include <doctest.h>

#include "fg/series.hpp"

using namespace fg;

TEST_CASE("series inverse and sqrt") {
    Series p(6);
    p[0] = 2.0;
    p[1] = cplx(0.5, 1.0);
    p[2] = -0.25;
    auto inv = p.inverse();
    auto one = p.mul(inv);
    CHECK(std::abs(one[0] - cplx(1.0)) < 1e-14);
    for (int k = 1; k < 6; ++k) CHECK(std::abs(one[k]) < 1e-14);

    auto r = p.sqrt_with(std::sqrt(cplx(2.0)));
    auto sq = r.mul(r);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(sq[k] - p[k]) < 1e-13);
}

TEST_CASE("polynomial from roots") {
    std::vector<cplx> roots{cplx(1.0), cplx(-1.0), cplx(0.0, 1.0), cplx(0.0, -1.0)};
    auto p = Series::from_roots(roots, 6);
    // (x-1)(x+1)(x-i)(x+i) = x^4 - 1
    CHECK(std::abs(p[0] + 1.0) < 1e-14);
    CHECK(std::abs(p[4] - 1.0) < 1e-14);
    for (int k : {1, 2, 3, 5}) CHECK(std::abs(p[k]) < 1e-14);
}
