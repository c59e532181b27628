#include "fg/weierstrass.hpp"
#include "fg/quadrature.hpp"

#include <cmath>

namespace fg {

namespace {

/// dz- and dzbar-densities of the three representation forms at z.
struct FormValues {
    cplx fz[3], fzb[3];
};

FormValues forms_at(const SpectralData& sd, const PointContext& pc, cplx z, const TimeMap& t) {
    const auto [p1, p2] = sd.psi(pc, z, t);
    const cplx p1b = std::conj(p1), p2b = std::conj(p2);
    FormValues v;
    v.fz[0] = 0.5 * iu * (p2b * p2b + p1 * p1);
    v.fzb[0] = -0.5 * iu * (p1b * p1b + p2 * p2);
    v.fz[1] = 0.5 * (p2b * p2b - p1 * p1);
    v.fzb[1] = -0.5 * (p1b * p1b - p2 * p2);
    v.fz[2] = p1 * p2b;
    v.fzb[2] = p1b * p2;
    return v;
}

/// real increment of form j along the axis segment from z in direction
/// (dx, dy): dX = fz dz + fzb dzbar
double real_increment(const FormValues& v, int j, cplx dz) {
    return (v.fz[j] * dz + v.fzb[j] * std::conj(dz)).real();
}

} // namespace

SurfaceGrid surface_grid(const SpectralData& sd, const SurfacePoint& P, const GridSpec& grid,
                         const std::array<double, 3>& X0, const TimeMap& t, double closedness_tol) {
    PointContext pc = sd.point(P);
    const int nx = grid.nx, ny = grid.ny;
    const double hx = (grid.x1 - grid.x0) / nx, hy = (grid.y1 - grid.y0) / ny;
    auto node = [&](int i, int j) { return cplx(grid.x0 + j * hx, grid.y0 + i * hy); };

    SurfaceGrid out;
    out.grid = grid;
    out.base = X0;
    out.X.assign(static_cast<size_t>(ny + 1) * (nx + 1), {0.0, 0.0, 0.0});

    // cache form values on the nodes
    std::vector<FormValues> F(static_cast<size_t>(ny + 1) * (nx + 1));
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; j <= nx; ++j) F[static_cast<size_t>(i) * (nx + 1) + j] = forms_at(sd, pc, node(i, j), t);
    auto at = [&](int i, int j) -> const FormValues& { return F[static_cast<size_t>(i) * (nx + 1) + j]; };

    // trapezoid integration: first row, then up each column
    out.X[0] = X0;
    for (int j = 1; j <= nx; ++j) {
        auto prev = out.X[static_cast<size_t>(j - 1)];
        for (int c = 0; c < 3; ++c)
            prev[c] += 0.5 * (real_increment(at(0, j - 1), c, hx) + real_increment(at(0, j), c, hx));
        out.X[static_cast<size_t>(j)] = prev;
    }
    for (int j = 0; j <= nx; ++j)
        for (int i = 1; i <= ny; ++i) {
            auto prev = out.X[static_cast<size_t>(i - 1) * (nx + 1) + j];
            const cplx dz(0.0, hy);
            for (int c = 0; c < 3; ++c)
                prev[c] += 0.5 * (real_increment(at(i - 1, j), c, dz) + real_increment(at(i, j), c, dz));
            out.X[static_cast<size_t>(i) * (nx + 1) + j] = prev;
        }

    // plaquette closedness with per-edge Gauss quadrature (exact enough that
    // the residual reflects the non-closedness of the forms, not the rule)
    auto edge_integral = [&](cplx a, cplx b, int c) {
        return integrate_gk<cplx>(
                   [&](double s) {
                       const cplx z = a + s * (b - a);
                       const FormValues v = forms_at(sd, pc, z, t);
                       return v.fz[c] * (b - a) + v.fzb[c] * std::conj(b - a);
                   },
                   0.0, 1.0, 1e-13)
            .real();
    };
    const double cell = hx * hy;
    double worst = 0.0;
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nx; ++j) {
            const cplx a = node(i, j), b = node(i, j + 1), d = node(i + 1, j + 1), e = node(i + 1, j);
            for (int c = 0; c < 3; ++c) {
                const double loop = edge_integral(a, b, c) + edge_integral(b, d, c) +
                                    edge_integral(d, e, c) + edge_integral(e, a, c);
                worst = std::max(worst, std::abs(loop) / cell);
            }
        }
    out.max_plaquette_residual = worst;
    if (!(worst <= closedness_tol))
        fail("NotClosed", "plaquette residual " + std::to_string(worst) + " per unit cell area");

    // conformality: Xz . Xz vanishes for the representation integrands
    double conf = 0.0;
    for (int i = 1; i < ny; ++i)
        for (int j = 1; j < nx; ++j) {
            const FormValues& v = at(i, j);
            cplx dot = 0.0;
            double nrm = 0.0;
            for (int c = 0; c < 3; ++c) {
                dot += v.fz[c] * v.fz[c];
                nrm += std::norm(v.fz[c]);
            }
            if (nrm > 0.0) conf = std::max(conf, std::abs(dot) / nrm);
        }
    out.conformality = conf;
    return out;
}

WillmoreValue willmore(const std::function<cplx(cplx)>& U, double x0, double x1, double y0,
                       double y1, int nx, int ny, bool periodic) {
    if (periodic) {
        double mism = 0.0, scale = 0.0;
        for (int i = 0; i <= ny; ++i) {
            const double y = y0 + (y1 - y0) * i / ny;
            const cplx a = U(cplx(x0, y)), b = U(cplx(x1, y));
            mism = std::max(mism, std::abs(a - b));
            scale = std::max({scale, std::abs(a), std::abs(b)});
        }
        for (int j = 0; j <= nx; ++j) {
            const double x = x0 + (x1 - x0) * j / nx;
            const cplx a = U(cplx(x, y0)), b = U(cplx(x, y1));
            mism = std::max(mism, std::abs(a - b));
            scale = std::max({scale, std::abs(a), std::abs(b)});
        }
        if (!(mism <= 1e-6 * std::max(scale, 1e-300)))
            fail("NotPeriodic", "potential fails the periodicity test on the requested lattice cell");
    }
    const double hx = (x1 - x0) / nx, hy = (y1 - y0) / ny;
    double acc = 0.0;
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; j <= nx; ++j) {
            const cplx u = U(cplx(x0 + j * hx, y0 + i * hy));
            double w = 1.0;
            if (i == 0 || i == ny) w *= 0.5;
            if (j == 0 || j == nx) w *= 0.5;
            acc += w * (u * u).real();
        }
    WillmoreValue out;
    out.W = 4.0 * acc * hx * hy;
    out.nx = nx;
    out.ny = ny;
    return out;
}

double mkdv_x_period(const SpectralData& sd, double mismatch_tol) {
    if (sd.mode() != SpectralMode::MKDV_1D) fail("WrongMode", "x-period scan needs MKDV_1D data");
    const int g = sd.genus();
    const Eigen::MatrixXcd& Om = sd.abel_map().periods().Omega;
    const Eigen::VectorXcd V1 = sd.eta_constants_of(1, +1).U + sd.eta_constants_of(1, -1).U;

    double best = std::numeric_limits<double>::infinity();
    const int R = 6;
    std::vector<int> Mv(g, -R), Nv(g, -R);
    // enumerate small lattice vectors M + Omega N and test T V1 = M + Omega N
    std::vector<int> idx(2 * g, -R);
    while (true) {
        Eigen::VectorXcd L(g);
        for (int j = 0; j < g; ++j) {
            L(j) = static_cast<double>(idx[j]);
            for (int m = 0; m < g; ++m) L(j) += Om(j, m) * static_cast<double>(idx[g + m]);
        }
        // T = L_j / V1_j must be a common positive real value
        bool ok = L.norm() > 1e-12;
        double T = 0.0;
        for (int j = 0; j < g && ok; ++j) {
            if (std::abs(V1(j)) < 1e-14) {
                ok = std::abs(L(j)) < 1e-10;
                continue;
            }
            const cplx r = L(j) / V1(j);
            if (std::abs(r.imag()) > 1e-8 * (1.0 + std::abs(r))) ok = false;
            if (j == 0)
                T = r.real();
            else if (std::abs(r.real() - T) > 1e-8 * (1.0 + std::abs(T)))
                ok = false;
        }
        if (ok && T > 1e-9 && T < best) {
            // verify by direct sampling
            double mism = 0.0, scale = 0.0;
            for (double x : {0.0, 0.31, 0.77}) {
                const cplx a = sd.potential(cplx(x, 0.0), {});
                const cplx b = sd.potential(cplx(x + T, 0.0), {});
                mism = std::max(mism, std::abs(a - b));
                scale = std::max({scale, std::abs(a), std::abs(b)});
            }
            if (mism <= mismatch_tol * std::max(scale, 1e-300)) best = T;
        }
        size_t k = 0;
        while (k < idx.size()) {
            if (++idx[k] <= R) break;
            idx[k] = -R;
            ++k;
        }
        if (k == idx.size()) break;
    }
    if (!std::isfinite(best)) fail("NotPeriodic", "no x-period found in the searched lattice range");
    return best;
}

DeformationScan deformation_scan(const SpectralData& sd, const std::vector<double>& t1_values,
                                 int nx, int ny) {
    DeformationScan out;
    out.t1 = t1_values;
    if (sd.mode() == SpectralMode::GENUS0) {
        for (double t1 : t1_values) {
            auto f = [&](cplx z) { return sd.potential(z, {{1, t1}}); };
            out.W.push_back(willmore(f, 0.0, 1.0, 0.0, 1.0, nx, ny).W);
        }
    } else {
        const double T = mkdv_x_period(sd);
        const double Ly = 0.5 * T;
        for (double t1 : t1_values) {
            auto f = [&](cplx z) { return sd.potential(z, {{1, t1}}); };
            out.W.push_back(willmore(f, 0.0, T, 0.0, Ly, nx, ny, true).W);
        }
    }
    double drift = 0.0;
    for (double w : out.W)
        drift = std::max(drift, std::abs(w - out.W.front()) / std::max(std::abs(out.W.front()), 1e-300));
    out.drift = drift;
    return out;
}

} // namespace fg
