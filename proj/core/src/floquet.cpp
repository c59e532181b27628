#include "fg/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace fg {

PeriodLattice PeriodLattice::make(cplx g1, cplx g2) {
    const double det = g1.real() * g2.imag() - g1.imag() * g2.real();
    if (std::abs(det) < 1e-12 * (std::abs(g1) + std::abs(g2)))
        fail("HypothesisViolated", "lattice generators are collinear");
    PeriodLattice lat;
    lat.g1 = g1;
    lat.g2 = g2;
    // rows of the inverse of [Re g | Im g]: (g_i, d_j) = delta_ij
    lat.d1 = cplx(g2.imag() / det, -g2.real() / det);
    lat.d2 = cplx(-g1.imag() / det, g1.real() / det);
    return lat;
}

FourierMap constant_potential(cplx value) {
    FourierMap m;
    if (value != cplx{0.0}) m[{0, 0}] = value;
    return m;
}

FourierMap sample_potential(const PeriodLattice& lat, const std::function<cplx(cplx)>& f, int K,
                            double tail_tol) {
    const int n = 2 * K + 1;
    std::vector<cplx> vals(static_cast<size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double s = static_cast<double>(a) / n, t = static_cast<double>(b) / n;
            vals[static_cast<size_t>(a) * n + b] = f(s * lat.g1 + t * lat.g2);
        }
    FourierMap out;
    double total = 0.0, tail = 0.0;
    for (int n1 = -K; n1 <= K; ++n1)
        for (int n2 = -K; n2 <= K; ++n2) {
            cplx c = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const double ph = -2.0 * pi * (n1 * static_cast<double>(a) + n2 * static_cast<double>(b)) / n;
                    c += vals[static_cast<size_t>(a) * n + b] * std::polar(1.0, ph);
                }
            c /= static_cast<double>(n) * n;
            const double w = std::abs(c);
            total += w;
            if (std::max(std::abs(n1), std::abs(n2)) == K) tail += w;
            if (w > 1e-13) out[{n1, n2}] = c;
        }
    if (total > 0.0 && tail > tail_tol * total)
        fail("AliasedPotential", "potential spectrum reaches the sampling cutoff");
    return out;
}

namespace {

int support_radius(const FourierMap& m) {
    int r = 0;
    for (const auto& [k, v] : m) {
        (void)v;
        r = std::max({r, std::abs(k.first), std::abs(k.second)});
    }
    return r;
}

bool is_constant(const FourierMap& m) { return support_radius(m) == 0; }

cplx coef(const FourierMap& m, int a, int b) {
    auto it = m.find({a, b});
    return it == m.end() ? cplx{0.0} : it->second;
}

} // namespace

Eigen::MatrixXcd build_pencil(const PeriodLattice& lat, const FourierMap& U, const FourierMap& V,
                              cplx k1, cplx k2, int N) {
    if (support_radius(U) > 2 * N || support_radius(V) > 2 * N)
        fail("AliasedPotential", "potential spectrum exceeds the pencil cutoff");
    const int n = 2 * N + 1;
    const int M = n * n;
    auto idx = [&](int a, int b) { return (a + N) * n + (b + N); };
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * M, 2 * M);
    const cplx off_p = pi * (k2 + iu * k1);   // pairs with d
    const cplx off_m = pi * (k2 - iu * k1);   // pairs with -dbar
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b) {
            const int i = idx(a, b);
            const cplx gstar = static_cast<double>(a) * lat.d1 + static_cast<double>(b) * lat.d2;
            const cplx dsym = pi * iu * std::conj(gstar);   // d exp = pi i conj(g*) exp
            const cplx dbsym = pi * iu * gstar;             // dbar exp = pi i g* exp
            A(i, M + i) += dsym + off_p;
            A(M + i, i) += -dbsym + off_m;
            for (int a2 = -N; a2 <= N; ++a2)
                for (int b2 = -N; b2 <= N; ++b2) {
                    const cplx cu = coef(U, a - a2, b - b2);
                    const cplx cv = coef(V, a - a2, b - b2);
                    if (cu != cplx{0.0}) A(i, idx(a2, b2)) += cu;
                    if (cv != cplx{0.0}) A(M + i, M + idx(a2, b2)) += cv;
                }
        }
    return A;
}

double sigma_min_dense(const Eigen::MatrixXcd& M) {
    const long n = M.rows();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    // inverse power iteration on (A^H A)^{-1}
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n) / std::sqrt(static_cast<double>(n));
    double sigma = 0.0;
    for (int it = 0; it < 30; ++it) {
        Eigen::VectorXcd w = lu.adjoint().solve(v);
        Eigen::VectorXcd x = lu.solve(w);
        const double nx = x.norm();
        if (!std::isfinite(nx) || nx == 0.0) return 0.0;
        const double s_new = 1.0 / std::sqrt(nx);
        v = x / nx;
        if (it > 3 && std::abs(s_new - sigma) < 1e-10 * (s_new + 1e-300)) {
            sigma = s_new;
            break;
        }
        sigma = s_new;
    }
    // one Rayleigh-style sharpening: sigma = |A v| for the converged direction
    return (M * v).norm();
}

namespace {

double sigma_min_2x2(cplx a11, cplx a12, cplx a21, cplx a22) {
    // singular values of a 2x2 complex matrix
    const double f = std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22);
    const cplx det = a11 * a22 - a12 * a21;
    const double d = std::abs(det);
    const double disc = std::max(0.0, f * f - 4.0 * d * d);
    const double s2 = 0.5 * (f - std::sqrt(disc));
    return std::sqrt(std::max(0.0, s2));
}

} // namespace

double pencil_sigma_min(const PeriodLattice& lat, const FourierMap& U, const FourierMap& V,
                        cplx k1, cplx k2, int N) {
    if (is_constant(U) && is_constant(V)) {
        const cplx u = coef(U, 0, 0), v = coef(V, 0, 0);
        const cplx off_p = pi * (k2 + iu * k1);
        const cplx off_m = pi * (k2 - iu * k1);
        double best = std::numeric_limits<double>::infinity();
        for (int a = -N; a <= N; ++a)
            for (int b = -N; b <= N; ++b) {
                const cplx gstar = static_cast<double>(a) * lat.d1 + static_cast<double>(b) * lat.d2;
                const cplx dsym = pi * iu * std::conj(gstar);
                const cplx dbsym = pi * iu * gstar;
                best = std::min(best, sigma_min_2x2(u, dsym + off_p, -dbsym + off_m, v));
            }
        return best;
    }
    return sigma_min_dense(build_pencil(lat, U, V, k1, k2, N));
}

FloquetMap zero_level_map(const PeriodLattice& lat, const FourierMap& U, const FourierMap& V,
                          int nk, int N, double k1_shift, double k2_shift,
                          double threshold_divisor) {
    FloquetMap map;
    map.nk = nk;
    map.cutoff = N;
    map.sigma.assign(static_cast<size_t>(nk) * nk, 0.0);
    // reduce k into the dual fundamental cell: k = s1 d1vec + s2 d2vec
    Eigen::Matrix2d S;
    S << lat.d1.real(), lat.d2.real(), lat.d1.imag(), lat.d2.imag();
    const Eigen::Matrix2d Sinv = S.inverse();
    auto reduced = [&](double k1, double k2) {
        Eigen::Vector2d s = Sinv * Eigen::Vector2d(k1, k2);
        s(0) -= std::floor(s(0));
        s(1) -= std::floor(s(1));
        Eigen::Vector2d k = S * s;
        return std::pair<double, double>(k(0), k(1));
    };
    int workers = 1;
    if (const char* env = std::getenv("FG_WORKERS")) workers = std::max(1, std::atoi(env));
    workers = std::min(workers, nk);
    auto row_job = [&](int i0, int stride) {
        for (int i = i0; i < nk; i += stride)
            for (int j = 0; j < nk; ++j) {
                Eigen::Vector2d k = S * Eigen::Vector2d(static_cast<double>(i) / nk,
                                                        static_cast<double>(j) / nk);
                auto [rk1, rk2] = reduced(k(0) + k1_shift, k(1) + k2_shift);
                map.sigma[static_cast<size_t>(i) * nk + j] =
                    pencil_sigma_min(lat, U, V, rk1, rk2, N);
            }
    };
    if (workers == 1) {
        row_job(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(row_job, w, workers);
        for (auto& th : pool) th.join();
    }
    // adaptive threshold: local minima below median / 100
    std::vector<double> sorted = map.sigma;
    std::sort(sorted.begin(), sorted.end());
    map.threshold = sorted[sorted.size() / 2] / threshold_divisor;
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) {
            const double v = map.sigma[static_cast<size_t>(i) * nk + j];
            if (v >= map.threshold) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1 && is_min; ++dj) {
                    if (!di && !dj) continue;
                    const int ii = (i + di + nk) % nk, jj = (j + dj + nk) % nk;
                    is_min &= map.sigma[static_cast<size_t>(ii) * nk + jj] >= v;
                }
            if (is_min) {
                Eigen::Vector2d k = S * Eigen::Vector2d(static_cast<double>(i) / nk,
                                                        static_cast<double>(j) / nk);
                map.zero_set.push_back({k(0), k(1)});
            }
        }
    return map;
}

SymmetryReport symmetry_check(const PeriodLattice& lat, const FourierMap& U, const FourierMap& V,
                              const FloquetMap& map, int case_number) {
    // hypothesis validation on the Fourier data
    auto conj_map = [](const FourierMap& m) {
        FourierMap out;
        for (const auto& [k, v] : m) out[{-k.first, -k.second}] = std::conj(v);
        return out;
    };
    auto close = [](const FourierMap& a, const FourierMap& b) {
        double d = 0.0, s = 0.0;
        for (const auto& [k, v] : a) {
            auto it = b.find(k);
            d = std::max(d, std::abs(v - (it == b.end() ? cplx{0.0} : it->second)));
            s = std::max(s, std::abs(v));
        }
        for (const auto& [k, v] : b) s = std::max(s, std::abs(v));
        return d <= 1e-10 * std::max(s, 1e-300);
    };
    if (case_number == 1) {
        if (!close(U, conj_map(V))) fail("HypothesisViolated", "case 1 requires U = conj(V)");
    } else if (case_number == 2) {
        if (!close(U, conj_map(U)) || !close(V, conj_map(V)))
            fail("HypothesisViolated", "case 2 requires real U and V");
    } else {
        fail("HypothesisViolated", "case must be 1 or 2");
    }

    SymmetryReport rep;
    // zero-set invariance under the real restriction of the anti-involution
    Eigen::Matrix2d S;
    S << lat.d1.real(), lat.d2.real(), lat.d1.imag(), lat.d2.imag();
    const Eigen::Matrix2d Sinv = S.inverse();
    auto cell_dist = [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
        Eigen::Vector2d ds = Sinv * Eigen::Vector2d(a.first - b.first, a.second - b.second);
        for (int c = 0; c < 2; ++c) {
            ds(c) -= std::round(ds(c));
            ds(c) *= map.nk;
        }
        return ds.norm();
    };
    double haus = 0.0;
    for (const auto& z : map.zero_set) {
        const std::pair<double, double> img =
            (case_number == 1) ? std::pair<double, double>{-z.first, -z.second} : z;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : map.zero_set) best = std::min(best, cell_dist(img, w));
        haus = std::max(haus, best);
    }
    rep.hausdorff_cells = map.zero_set.empty() ? std::numeric_limits<double>::infinity() : haus;

    rep.matrix_residual =
        symmetry_identity_residual(lat, U, V, case_number, map.cutoff > 0 ? std::min(map.cutoff, 6) : 4);
    rep.holds = rep.hausdorff_cells <= 2.0 && rep.matrix_residual <= 1e-7;
    return rep;
}

double symmetry_identity_residual(const PeriodLattice& lat, const FourierMap& U,
                                  const FourierMap& V, int case_number, int N) {
    const cplx samples[3][2] = {{cplx(0.23, 0.11), cplx(-0.37, 0.05)},
                                {cplx(-0.41, -0.17), cplx(0.13, 0.29)},
                                {cplx(0.05, 0.31), cplx(0.44, -0.21)}};
    double res = 0.0;
    for (const auto& s : samples) {
        const cplx k1 = s[0], k2 = s[1];
        const double s0 = pencil_sigma_min(lat, U, V, k1, k2, N);
        const cplx m1 = (case_number == 1) ? -std::conj(k1) : std::conj(k1);
        const cplx m2 = (case_number == 1) ? -std::conj(k2) : std::conj(k2);
        const double s1 = pencil_sigma_min(lat, U, V, m1, m2, N);
        res = std::max(res, std::abs(s0 - s1) / std::max({s0, s1, 1e-300}));
    }
    return res;
}

std::pair<int, int> kernel_cokernel_dims(const Eigen::MatrixXcd& M, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    int k = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) <= tol) ++k;
    // square pencil: kernel and cokernel dimensions coincide with the count
    // of vanishing singular values
    return {k, k};
}

} // namespace fg
