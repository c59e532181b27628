#include "fg/verify.hpp"

#include <cmath>

namespace fg {

namespace {

struct TwoStep {
    double max_rich = 0.0;  // Richardson-extrapolated residual
    double rms_rich = 0.0;
    double rms_h = 0.0;
    double rms_h2 = 0.0;
    int count = 0;

    void add(cplx res_h, cplx res_h2) {
        const cplx rich = (4.0 * res_h2 - res_h) / 3.0;
        max_rich = std::max(max_rich, std::abs(rich));
        rms_rich += std::norm(rich);
        rms_h += std::norm(res_h);
        rms_h2 += std::norm(res_h2);
        ++count;
    }
    void finalize() {
        if (count == 0) return;
        rms_rich = std::sqrt(rms_rich / count);
        rms_h = std::sqrt(rms_h / count);
        rms_h2 = std::sqrt(rms_h2 / count);
    }
    /// measured order between h and h/2; falls back to `expected` when the
    /// residual is already at rounding level
    double order(double floor_scale, double expected) const {
        if (rms_h2 < 1e-12 * std::max(floor_scale, 1e-300) || rms_h2 == 0.0) return expected;
        return std::log2(rms_h / rms_h2);
    }
};

bool order_ok(double measured, double expected) { return std::abs(measured - expected) <= 0.5; }

} // namespace

ResidualReport dirac_residual(const SpectralData& sd, const SurfacePoint& P, const GridSpec& grid,
                              const TimeMap& t, double h, double tol) {
    PointContext pc = sd.point(P);
    auto psi = [&](cplx z) { return sd.psi(pc, z, t); };

    TwoStep acc1, acc2;
    double psi_scale = 0.0;
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y0 + (grid.y1 - grid.y0) * (iy + 0.5) / grid.ny;
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x0 + (grid.x1 - grid.x0) * (ix + 0.5) / grid.nx;
            const cplx z(x, y);
            const cplx U = sd.potential(z, t);
            const auto [p1, p2] = psi(z);
            psi_scale = std::max({psi_scale, std::abs(p1), std::abs(p2)});
            cplx r1[2], r2[2];
            for (int lev = 0; lev < 2; ++lev) {
                const double hh = (lev == 0) ? h : 0.5 * h;
                const auto [p1px, p2px] = psi(z + hh);
                const auto [p1mx, p2mx] = psi(z - hh);
                const auto [p1py, p2py] = psi(z + cplx(0, hh));
                const auto [p1my, p2my] = psi(z - cplx(0, hh));
                const cplx dx1 = (p1px - p1mx) / (2 * hh), dy1 = (p1py - p1my) / (2 * hh);
                const cplx dx2 = (p2px - p2mx) / (2 * hh), dy2 = (p2py - p2my) / (2 * hh);
                const cplx d2 = 0.5 * (dx2 - iu * dy2);    // d psi2
                const cplx db1 = 0.5 * (dx1 + iu * dy1);   // dbar psi1
                r1[lev] = d2 + U * p1;
                r2[lev] = -db1 + U * p2;
            }
            acc1.add(r1[0], r1[1]);
            acc2.add(r2[0], r2[1]);
        }
    }
    acc1.finalize();
    acc2.finalize();

    ResidualReport rep;
    rep.name = "dirac_zero_mode";
    rep.grid = std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + " h=" + std::to_string(h);
    const double scale = std::max(1.0, psi_scale);
    rep.max_abs = std::max(acc1.max_rich, acc2.max_rich) / scale;
    rep.rms = std::max(acc1.rms_rich, acc2.rms_rich) / scale;
    const double o1 = acc1.order(psi_scale, 2.0), o2 = acc2.order(psi_scale, 2.0);
    rep.convergence_order = 0.5 * (o1 + o2);
    rep.tolerance = tol;
    rep.pass = rep.max_abs <= tol && order_ok(o1, 2.0) && order_ok(o2, 2.0);
    return rep;
}

std::vector<ResidualReport> reduction_checks(const SpectralData& sd, const GridSpec& grid,
                                             double h, double tol_y, double tol_pde) {
    std::vector<ResidualReport> out;
    const int nx = grid.nx;
    auto xat = [&](int i, double hh, int off) {
        return grid.x0 + (grid.x1 - grid.x0) * (i + 0.5) / nx + off * hh;
    };
    auto Uat = [&](double x, double t1) { return sd.potential(cplx(x, 0.0), {{1, t1}}); };

    // (a) y-independence
    {
        ResidualReport rep;
        rep.name = "y_independence";
        rep.grid = std::to_string(nx) + " x-samples, y in {" + std::to_string(grid.y0) + "," +
                   std::to_string(grid.y1) + "}";
        double mx = 0.0, rms = 0.0, scale = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double x = xat(i, 0, 0);
            const cplx u1 = sd.potential(cplx(x, grid.y0), {});
            const cplx u2 = sd.potential(cplx(x, grid.y1), {});
            scale = std::max(scale, std::abs(u1));
            mx = std::max(mx, std::abs(u1 - u2));
            rms += std::norm(u1 - u2);
        }
        rep.max_abs = mx / std::max(1.0, scale);
        rep.rms = std::sqrt(rms / nx) / std::max(1.0, scale);
        rep.convergence_order = 2.0;  // not an FD check
        rep.tolerance = tol_y;
        rep.pass = rep.max_abs <= tol_y;
        out.push_back(rep);
    }

    // (b) mKdV: U_t - U_xxx/4 - 6 U_x U^2 at t_1 = 0
    {
        TwoStep acc;
        double scale = 0.0;
        for (int i = 0; i < nx; ++i) {
            cplx res[2];
            for (int lev = 0; lev < 2; ++lev) {
                const double hx = (lev == 0) ? h : 0.5 * h;
                const double ht = hx;
                const double x = xat(i, 0, 0);
                const cplx u0 = Uat(x, 0.0);
                scale = std::max(scale, std::abs(u0));
                const cplx up = Uat(x + hx, 0.0), um = Uat(x - hx, 0.0);
                const cplx up2 = Uat(x + 2 * hx, 0.0), um2 = Uat(x - 2 * hx, 0.0);
                const cplx ux = (up - um) / (2 * hx);
                const cplx uxxx = (up2 - 2.0 * up + 2.0 * um - um2) / (2 * hx * hx * hx);
                const cplx ut = (Uat(x, ht) - Uat(x, -ht)) / (2 * ht);
                res[lev] = ut - 0.25 * uxxx - 6.0 * ux * u0 * u0;
            }
            acc.add(res[0], res[1]);
        }
        acc.finalize();
        ResidualReport rep;
        rep.name = "mkdv_equation";
        rep.grid = std::to_string(nx) + " x-samples, h=" + std::to_string(h);
        rep.max_abs = acc.max_rich / std::max(1.0, scale);
        rep.rms = acc.rms_rich / std::max(1.0, scale);
        rep.convergence_order = acc.order(scale, 2.0);
        rep.tolerance = tol_pde;
        rep.pass = rep.max_abs <= tol_pde && order_ok(rep.convergence_order, 2.0);
        out.push_back(rep);
    }

    // (c) psi(z, P) = psi~(x, P) exp(lambda(P) y)
    {
        ResidualReport rep;
        rep.name = "psi_factorization";
        rep.grid = "4 sample points x 2 curve points";
        double mx = 0.0, rms = 0.0;
        int cnt = 0;
        std::vector<SurfacePoint> Ps;
        if (sd.mode() == SpectralMode::GENUS0) {
            SurfacePoint a;
            a.lambda = cplx(0.9, 0.4);
            Ps.push_back(a);
        } else {
            const auto& cv = sd.curve();
            Ps.push_back(cv.lift(cplx(0.31, 0.12) * cv.diameter(), +1));
            Ps.push_back(cv.lift(cplx(-0.22, 0.17) * cv.diameter(), -1));
        }
        for (const auto& P : Ps) {
            PointContext pc = sd.point(P);
            const cplx lam = sd.reduction_lambda(P);
            for (double x : {grid.x0 + 0.21 * (grid.x1 - grid.x0), grid.x0 + 0.64 * (grid.x1 - grid.x0)}) {
                for (double y : {0.23 * (grid.y1 - grid.y0), -0.37 * (grid.y1 - grid.y0)}) {
                    const auto [f1, f2] = sd.psi(pc, cplx(x, y), {});
                    const auto [g1, g2] = sd.psi(pc, cplx(x, 0.0), {});
                    const cplx e = std::exp(lam * y);
                    const double sc = std::max({std::abs(f1), std::abs(f2), 1e-30});
                    const double d = std::max(std::abs(f1 - g1 * e), std::abs(f2 - g2 * e)) / sc;
                    mx = std::max(mx, d);
                    rms += d * d;
                    ++cnt;
                }
            }
        }
        rep.max_abs = mx;
        rep.rms = std::sqrt(rms / std::max(1, cnt));
        rep.convergence_order = 2.0;
        rep.tolerance = tol_y;
        rep.pass = mx <= tol_y * 100.0;  // exact identity up to evaluation noise
        out.push_back(rep);
    }
    return out;
}

std::vector<ResidualReport> zakharov_shabat_miura(const SpectralData& sd,
                                                  const std::vector<SurfacePoint>& samples,
                                                  const GridSpec& grid, double h, double tol) {
    TwoStep zs1, zs2, m1, m2;
    double psc = 0.0;
    const int nx = grid.nx;
    for (const auto& P : samples) {
        PointContext pc = sd.point(P);
        const cplx lam = sd.reduction_lambda(P);
        auto psi = [&](double x) { return sd.psi(pc, cplx(x, 0.0), {}); };
        auto Uat = [&](double x) { return sd.potential(cplx(x, 0.0), {}); };
        for (int i = 0; i < nx; ++i) {
            const double x = grid.x0 + (grid.x1 - grid.x0) * (i + 0.5) / nx;
            cplx rz1[2], rz2[2], rm1[2], rm2[2];
            for (int lev = 0; lev < 2; ++lev) {
                const double hh = (lev == 0) ? h : 0.5 * h;
                const auto [p1, p2] = psi(x);
                const auto [p1p, p2p] = psi(x + hh);
                const auto [p1m, p2m] = psi(x - hh);
                const cplx U = Uat(x);
                const cplx Up = Uat(x + hh), Um = Uat(x - hh);
                psc = std::max({psc, std::abs(p1), std::abs(p2)});
                const cplx d1 = (p1p - p1m) / (2 * hh), d2 = (p2p - p2m) / (2 * hh);
                // first-order system: psi2' + 2U psi1 = i lam psi2 ; -psi1' + 2U psi2 = i lam psi1
                rz1[lev] = d2 + 2.0 * U * p1 - iu * lam * p2;
                rz2[lev] = -d1 + 2.0 * U * p2 - iu * lam * p1;
                // Miura pair on eta = psi1 +- i psi2
                const cplx e1 = p1 + iu * p2, e1p = p1p + iu * p2p, e1m = p1m + iu * p2m;
                const cplx e2 = p1 - iu * p2, e2p = p1p - iu * p2p, e2m = p1m - iu * p2m;
                const cplx ux = (Up - Um) / (2 * hh);
                const cplx lape1 = (e1p - 2.0 * e1 + e1m) / (hh * hh);
                const cplx lape2 = (e2p - 2.0 * e2 + e2m) / (hh * hh);
                rm1[lev] = lape1 + (4.0 * U * U + 2.0 * iu * ux) * e1 + lam * lam * e1;
                rm2[lev] = lape2 + (4.0 * U * U - 2.0 * iu * ux) * e2 + lam * lam * e2;
            }
            zs1.add(rz1[0], rz1[1]);
            zs2.add(rz2[0], rz2[1]);
            m1.add(rm1[0], rm1[1]);
            m2.add(rm2[0], rm2[1]);
        }
    }
    for (TwoStep* a : {&zs1, &zs2, &m1, &m2}) a->finalize();

    const double scale = std::max(1.0, psc);
    auto mk = [&](const char* name, const TwoStep& a, double expected_order) {
        ResidualReport rep;
        rep.name = name;
        rep.grid = std::to_string(nx) + " x-samples x " + std::to_string(samples.size()) +
                   " curve points, h=" + std::to_string(h);
        rep.max_abs = a.max_rich / scale;
        rep.rms = a.rms_rich / scale;
        rep.convergence_order = a.order(psc, expected_order);
        rep.tolerance = tol;
        rep.pass = rep.max_abs <= tol && order_ok(rep.convergence_order, expected_order);
        return rep;
    };
    return {mk("zakharov_shabat_row1", zs1, 2.0), mk("zakharov_shabat_row2", zs2, 2.0),
            mk("miura_plus", m1, 2.0), mk("miura_minus", m2, 2.0)};
}

ResidualReport reality_check(const SpectralData& sd, const GridSpec& grid, const TimeMap& t,
                             double tol) {
    double max_im = 0.0, max_u = 0.0, rms = 0.0;
    int cnt = 0;
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y0 + (grid.y1 - grid.y0) * (iy + 0.5) / grid.ny;
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x0 + (grid.x1 - grid.x0) * (ix + 0.5) / grid.nx;
            const cplx U = sd.potential(cplx(x, y), t);
            max_im = std::max(max_im, std::abs(U.imag()));
            max_u = std::max(max_u, std::abs(U));
            rms += U.imag() * U.imag();
            ++cnt;
        }
    }
    ResidualReport rep;
    rep.name = "reality";
    rep.grid = std::to_string(grid.nx) + "x" + std::to_string(grid.ny);
    rep.max_abs = max_im / std::max(max_u, 1e-300);
    rep.rms = std::sqrt(rms / cnt) / std::max(max_u, 1e-300);
    rep.convergence_order = 2.0;
    rep.tolerance = tol;
    rep.pass = rep.max_abs <= tol;
    return rep;
}

} // namespace fg
