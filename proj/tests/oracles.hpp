#pragma once

// Test-side oracles, independent of the library implementation paths they check.

#include <complex>
#include <cmath>
#include <vector>

namespace oracles {

using cplx = std::complex<double>;

/// Arithmetic-geometric mean with the standard "right" square-root choice.
inline cplx agm(cplx a, cplx b) {
    for (int i = 0; i < 80; ++i) {
        if (std::abs(a - b) <= 1e-16 * (std::abs(a) + std::abs(b))) break;
        cplx am = 0.5 * (a + b);
        cplx gm = std::sqrt(a * b);
        if (std::abs(am - gm) > std::abs(am + gm)) gm = -gm;
        a = am;
        b = gm;
    }
    return 0.5 * (a + b);
}

/// Elliptic period ratio tau = i K(k')/K(k) for a genus-1 curve
/// w^2 = (l-e1)(l-e2)(l-e3)(l-e4) with cuts [e1,e2], [e3,e4]:
/// k^2 is the cross ratio ((e1-e3)(e2-e4)) / ((e1-e4)(e2-e3)).
inline cplx elliptic_tau(cplx e1, cplx e2, cplx e3, cplx e4) {
    const cplx m = ((e1 - e3) * (e2 - e4)) / ((e1 - e4) * (e2 - e3));
    const cplx k = std::sqrt(m);
    const cplx kp = std::sqrt(1.0 - m);
    return cplx(0, 1) * agm(1.0, kp) / agm(1.0, k);
}

/// Brute-force genus-1 theta sum at large radius (reference for theta()).
inline cplx theta1d_direct(cplx u, cplx omega, int R = 60) {
    cplx s = 0.0;
    const cplx I(0, 1);
    const double pi = 3.141592653589793238462643383279502884;
    for (int n = -R; n <= R; ++n)
        s += std::exp(pi * I * (omega * double(n) * double(n) + 2.0 * double(n) * u));
    return s;
}

/// Direct genus-g theta sum at an explicit radius (dense, slow).
template <class Mat, class Vec>
cplx theta_direct(const Vec& u, const Mat& Om, int R) {
    const int g = int(u.size());
    const cplx I(0, 1);
    const double pi = 3.141592653589793238462643383279502884;
    std::vector<int> n(g, -R);
    cplx s = 0.0;
    while (true) {
        cplx quad = 0.0, lin = 0.0;
        for (int a = 0; a < g; ++a) {
            lin += double(n[a]) * u[a];
            for (int b = 0; b < g; ++b) quad += double(n[a]) * Om(a, b) * double(n[b]);
        }
        s += std::exp(pi * I * (quad + 2.0 * lin));
        int k = 0;
        while (k < g) {
            if (n[k] < R) {
                ++n[k];
                break;
            }
            n[k] = -R;
            ++k;
        }
        if (k == g) break;
    }
    return s;
}

} // namespace oracles
