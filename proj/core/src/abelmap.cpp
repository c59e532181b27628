#include "fg/abelmap.hpp"
#include "fg/geometry.hpp"
#include "fg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fg {

cplx FormLC::eval_S(cplx lambda) const {
    cplx s = 0.0;
    for (size_t i = 0; i < p_exps.size(); ++i) s += p_coefs(static_cast<long>(i)) * std::pow(lambda, p_exps[i]);
    return s;
}

cplx FormLC::eval_T(cplx lambda) const {
    cplx s = 0.0;
    for (size_t i = 0; i < w_exps.size(); ++i) s += w_coefs(static_cast<long>(i)) * std::pow(lambda, w_exps[i]);
    return s;
}

// ---------------------------------------------------------------------------

AbelMap::AbelMap(const Curve& curve, double quad_tol)
    : curve_(&curve), tol_(quad_tol), pd_(curve.periods()) {
    tctx_ = ThetaContext::make(pd_.Omega);
    P0_ = curve.lift(curve.lambda_ref(), +1);

    // flip loop: out to the first branch point, a small square around it, back;
    // square vertices rotated 45 degrees off the cut direction so one edge
    // crosses the cut transversally and no vertex lands on it
    const cplx e0 = curve.cuts()[0].a;
    const double r = 0.5 * curve.cuts()[0].clearance;
    const cplx u_dir = (curve.cuts()[0].b - e0) / std::abs(curve.cuts()[0].b - e0);
    cplx corner[4];
    for (int k = 0; k < 4; ++k)
        corner[k] = e0 + std::sqrt(2.0) * r * u_dir * std::polar(1.0, pi / 4.0 + k * pi / 2.0);
    std::vector<cplx> out = curve.route(P0_.lambda, corner[0]);
    flip_loop_ = out;
    flip_loop_.push_back(corner[1]);
    flip_loop_.push_back(corner[2]);
    flip_loop_.push_back(corner[3]);
    flip_loop_.push_back(corner[0]);
    for (auto it = out.rbegin() + 1; it != out.rend(); ++it) flip_loop_.push_back(*it);
    {
        int flips = 0;
        for (size_t i = 0; i + 1 < flip_loop_.size(); ++i)
            flips += curve.segment_crossings(flip_loop_[i], flip_loop_[i + 1]);
        if (flips % 2 == 0) fail("DegenerateConfiguration", "flip loop has even monodromy");
    }

    c_invol_ = curve.integrate_form(flip_loop_, +1, omega_density(), tol_, curve.genus());
}

std::function<Eigen::VectorXcd(cplx, cplx)> AbelMap::omega_density() const {
    const int g = curve_->genus();
    const Eigen::MatrixXcd C = pd_.normalization;
    return [g, C](cplx lam, cplx w) {
        Eigen::VectorXcd v(g);
        cplx p = 1.0;
        for (int m = 0; m < g; ++m) {
            v(m) = p / w;
            p *= lam;
        }
        return Eigen::VectorXcd(C * v);
    };
}

std::vector<cplx> AbelMap::canonical_path(cplx lambda, int sheet) const {
    std::vector<cplx> direct = curve_->route(P0_.lambda, lambda);
    int flips = 0;
    for (size_t i = 0; i + 1 < direct.size(); ++i)
        flips += curve_->segment_crossings(direct[i], direct[i + 1]);
    const int end_sheet = (flips % 2 == 0) ? +1 : -1;
    if (end_sheet == sheet) return direct;
    std::vector<cplx> path = flip_loop_;
    path.insert(path.end(), direct.begin() + 1, direct.end());
    return path;
}

Eigen::VectorXcd AbelMap::abel(const SurfacePoint& P) const {
    if (P.at_branch) fail("PathThroughBranchPoint", "Abel map at a branch point is not supported");
    if (P.at_infinity) return abel_infinity(P.sheet);
    return curve_->integrate_form(canonical_path(P.lambda, P.sheet), +1, omega_density(), tol_,
                                  curve_->genus());
}

Eigen::VectorXcd AbelMap::abel(const Divisor& D) const {
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(curve_->genus());
    for (const auto& p : D.points) s += abel(p);
    return s;
}

cplx AbelMap::centroid() const {
    cplx c = 0.0;
    for (cplx e : curve_->branch().points) c += e;
    return c / static_cast<double>(curve_->branch().points.size());
}

Eigen::VectorXcd AbelMap::abel_infinity(int sheet) const {
    const int g = curve_->genus();
    const cplx c0 = centroid();
    const cplx far = c0 + 3.0 * curve_->diameter();
    Eigen::VectorXcd A = abel(curve_->lift(far, sheet));
    // tail along the ray lambda(t) = c0 + (far - c0)/t, t: 1 -> 0
    const cplx K = far - c0;
    auto f = omega_density();
    auto dens = [&](double t) {
        const cplx lam = c0 + K / t;
        const cplx w = static_cast<double>(sheet) * curve_->sheet_function(lam);
        return Eigen::VectorXcd((-K / (t * t)) * f(lam, w));
    };
    A += integrate_gk<Eigen::VectorXcd>(dens, 1.0, 0.0, tol_, 28, g);
    return A;
}

Eigen::VectorXcd AbelMap::abel_derivative(const SurfacePoint& P) const {
    const int g = curve_->genus();
    Eigen::VectorXcd v(g);
    cplx p = 1.0;
    for (int m = 0; m < g; ++m) {
        v(m) = p / P.w;
        p *= P.lambda;
    }
    return pd_.normalization * v;
}

Eigen::VectorXcd AbelMap::integrate_forms_along(const std::vector<cplx>& poly, int start_sheet,
                                                const std::vector<const FormLC*>& forms,
                                                double tol) const {
    const int n = static_cast<int>(forms.size());
    auto dens = [&](cplx lam, cplx w) {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = forms[i]->density(lam, w);
        return v;
    };
    return curve_->integrate_form(poly, start_sheet, dens, tol, n);
}

Eigen::VectorXcd AbelMap::integrate_forms_to(const SurfacePoint& P,
                                             const std::vector<const FormLC*>& forms) const {
    return integrate_forms_along(canonical_path(P.lambda, P.sheet), +1, forms, tol_);
}

Eigen::VectorXcd AbelMap::lattice_reduce(const Eigen::VectorXcd& v) const {
    const int g = curve_->genus();
    const Eigen::MatrixXcd& Om = pd_.Omega;
    Eigen::VectorXd y = tctx_.im_inv * v.imag();
    Eigen::VectorXcd best = v;
    double bestn = std::numeric_limits<double>::infinity();
    Eigen::VectorXi N0(g);
    for (int j = 0; j < g; ++j) N0(j) = static_cast<int>(std::lround(y(j)));
    Eigen::VectorXi d = Eigen::VectorXi::Constant(g, -1);
    while (true) {
        Eigen::VectorXi N = N0 + d;
        Eigen::VectorXcd r = v - Om * N.cast<double>().cast<cplx>();
        for (int j = 0; j < g; ++j) r(j) -= static_cast<double>(std::lround(r(j).real()));
        if (r.norm() < bestn) {
            bestn = r.norm();
            best = r;
        }
        int k = 0;
        while (k < g) {
            if (d(k) < 1) {
                ++d(k);
                break;
            }
            d(k) = -1;
            ++k;
        }
        if (k == g) break;
    }
    return best;
}

double AbelMap::lattice_distance(const Eigen::VectorXcd& v) const { return lattice_reduce(v).norm(); }

Approach AbelMap::approach(const MarkedPoint& mp, int npoints, double ratio) const {
    Approach ap;
    ap.mp = mp;
    const cplx dir{1.0, 0.0};
    if (!mp.at_infinity) {
        double d0 = std::numeric_limits<double>::infinity();
        for (cplx e : curve_->branch().points) d0 = std::min(d0, std::abs(mp.lambda0 - e));
        for (const auto& c : curve_->cuts()) d0 = std::min(d0, dist_point_segment(mp.lambda0, c.a, c.b));
        const double r0 = 0.3 * d0;
        ap.anchor = curve_->lift(mp.lambda0 + r0 * dir, mp.sheet);
        for (int i = 0; i < npoints; ++i)
            ap.points.push_back(curve_->lift(mp.lambda0 + r0 * std::pow(ratio, -i) * dir, mp.sheet));
    } else {
        const double R0 = 3.0 * curve_->diameter();
        ap.anchor = curve_->lift(centroid() + R0 * dir, mp.sheet);
        for (int i = 0; i < npoints; ++i)
            ap.points.push_back(curve_->lift(centroid() + R0 * std::pow(ratio, i) * dir, mp.sheet));
    }
    ap.path_to_anchor = canonical_path(ap.anchor.lambda, ap.anchor.sheet);
    return ap;
}

// ---------------------------------------------------------------------------
// chart expansions

ChartExpander::ChartExpander(const Curve& cv, const LocalParams& lp, int sign, int nterms)
    : nterms_(nterms) {
    const MarkedPoint& mp = lp.point(sign);
    at_infinity_ = mp.at_infinity;
    sheet_ = mp.sheet;
    genus_ = cv.genus();
    if (!at_infinity_) {
        if (std::abs(mp.lambda0) > 1e-14)
            fail("MarkedPointOnBranchLocus", "finite marked points must sit over lambda = 0");
        scale_ = lp.coef(sign);  // lambda = coef * q
        invw_ = cv.invw_series_at_zero(nterms);
    } else {
        scale_ = 1.0 / lp.coef(sign);  // lambda = scale / q
        invw_ = cv.invw_series_at_infinity(nterms);
    }
}

cplx ChartExpander::coef(int m, bool with_w, int j) const {
    const double sh = static_cast<double>(sheet_);
    if (!at_infinity_) {
        if (!with_w) return (j == m) ? std::pow(scale_, m + 1) : cplx{0.0};
        const int k = j - m;
        if (k < 0 || k >= nterms_) return 0.0;
        return sh * std::pow(scale_, j + 1) * invw_[k];
    }
    if (!with_w) return (j == -m - 2) ? -std::pow(scale_, m + 1) : cplx{0.0};
    const int k = j - (genus_ - m - 1);
    if (k < 0 || k >= nterms_) return 0.0;
    return -sh * std::pow(scale_, m - genus_ - k) * invw_[k];
}

// ---------------------------------------------------------------------------
// prescribed-pole solver

namespace {

struct AnsatzBasis {
    std::vector<std::pair<int, bool>> elems;  // (exponent, with_w)
};

AnsatzBasis make_basis(bool at_infinity, int genus, int maxorder) {
    AnsatzBasis b;
    if (!at_infinity) {
        for (int m = -maxorder; m <= genus - 1; ++m) b.elems.push_back({m, true});
        for (int m = -maxorder; m <= -2; ++m) b.elems.push_back({m, false});
    } else {
        for (int m = 0; m <= genus + maxorder - 1; ++m) b.elems.push_back({m, true});
        for (int m = 0; m <= maxorder - 2; ++m) b.elems.push_back({m, false});
    }
    return b;
}

} // namespace

FormLC solve_principal_parts(const AbelMap& am, const LocalParams& lp, const PoleSpec& spec,
                             bool zero_alpha_periods, double* residual) {
    const Curve& cv = am.curve();
    const int g = cv.genus();
    const int K = spec.maxorder;
    if (lp.plus.at_infinity != lp.minus.at_infinity)
        fail("MarkedPointOnBranchLocus", "marked points must both be finite or both at infinity");
    AnsatzBasis basis = make_basis(lp.plus.at_infinity, g, K);
    const int ne = static_cast<int>(basis.elems.size());
    const int nexp = K + g + 6;
    ChartExpander plus(cv, lp, +1, nexp), minus(cv, lp, -1, nexp);

    const int KC = spec.constrain_residues ? K : K - 1;  // skip q^{-1} rows when free
    const int nrows = 2 * KC + (zero_alpha_periods ? g : 0);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(nrows, ne);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nrows);
    for (int r = 0; r < KC; ++r) {
        const int order = -K + r;  // q^{order} dq coefficient
        rhs(r) = spec.plus_targets(r);
        rhs(KC + r) = spec.minus_targets(r);
        for (int e = 0; e < ne; ++e) {
            M(r, e) = plus.coef(basis.elems[e].first, basis.elems[e].second, order);
            M(KC + r, e) = minus.coef(basis.elems[e].first, basis.elems[e].second, order);
        }
    }
    if (zero_alpha_periods) {
        const auto& cyc = cv.homology();
        auto dens = [&](cplx lam, cplx w) {
            Eigen::VectorXcd v(ne);
            for (int e = 0; e < ne; ++e) {
                const cplx p = std::pow(lam, basis.elems[e].first);
                v(e) = basis.elems[e].second ? p / w : p;
            }
            return v;
        };
        for (int j = 0; j < g; ++j)
            M.row(2 * KC + j) =
                cv.integrate_form(cyc[j].vertices, cyc[j].start_sheet, dens, am.quad_tol(), ne).transpose();
    }

    // extended-precision least squares (the ansatz rows mix scales)
    using cld = std::complex<long double>;
    using MatL = Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<cld, Eigen::Dynamic, 1>;
    MatL Ml(nrows, ne);
    VecL rl(nrows);
    for (int r = 0; r < nrows; ++r) {
        rl(r) = cld(rhs(r).real(), rhs(r).imag());
        for (int e = 0; e < ne; ++e) Ml(r, e) = cld(M(r, e).real(), M(r, e).imag());
    }
    Eigen::ColPivHouseholderQR<MatL> qr(Ml);
    VecL xl = qr.solve(rl);
    Eigen::VectorXcd x(ne);
    for (int e = 0; e < ne; ++e)
        x(e) = cplx(static_cast<double>(xl(e).real()), static_cast<double>(xl(e).imag()));

    const double res = (M * x - rhs).cwiseAbs().maxCoeff();
    if (residual) *residual = res;
    if (!(res < 1e-7 * std::max(1.0, rhs.cwiseAbs().maxCoeff())))
        fail("SingularLinearSystem", "principal-part ansatz mismatch, residual " + std::to_string(res));

    FormLC f;
    for (int e = 0; e < ne; ++e) {
        if (basis.elems[e].second)
            f.w_exps.push_back(basis.elems[e].first);
        else
            f.p_exps.push_back(basis.elems[e].first);
    }
    f.w_coefs.resize(static_cast<long>(f.w_exps.size()));
    f.p_coefs.resize(static_cast<long>(f.p_exps.size()));
    int iw = 0, ip = 0;
    for (int e = 0; e < ne; ++e) {
        if (basis.elems[e].second)
            f.w_coefs(iw++) = x(e);
        else
            f.p_coefs(ip++) = x(e);
    }
    return f;
}

Series form_chart_series(const AbelMap& am, const LocalParams& lp, const FormLC& form, int sign,
                         int subtract_l, int nterms) {
    // nonnegative orders only; d(k^l) = -l q^{-l-1} dq lives entirely in the
    // negative orders, so the series of (form - d(k^l)) equals that of form
    (void)subtract_l;
    ChartExpander ex(am.curve(), lp, sign, nterms + am.curve().genus() + 4);
    Series s(nterms);
    for (int j = 0; j < nterms; ++j) {
        cplx c = 0.0;
        for (size_t i = 0; i < form.w_exps.size(); ++i)
            c += form.w_coefs(static_cast<long>(i)) * ex.coef(form.w_exps[i], true, j);
        for (size_t i = 0; i < form.p_exps.size(); ++i)
            c += form.p_coefs(static_cast<long>(i)) * ex.coef(form.p_exps[i], false, j);
        s[j] = c;
    }
    return s;
}

EtaDifferential eta_differential(const AbelMap& am, const LocalParams& lp, int l, int sign) {
    if (l < 1 || l % 2 == 0) fail("SingularLinearSystem", "eta is defined for odd l >= 1");
    PoleSpec spec;
    spec.maxorder = l + 1;
    spec.plus_targets = Eigen::VectorXcd::Zero(l + 1);
    spec.minus_targets = Eigen::VectorXcd::Zero(l + 1);
    // d(k^l) = -l q^{-l-1} dq at the own marked point (k = 1/q exactly)
    if (sign > 0)
        spec.plus_targets(0) = cplx(-static_cast<double>(l));
    else
        spec.minus_targets(0) = cplx(-static_cast<double>(l));
    EtaDifferential eta;
    eta.l = l;
    eta.sign = sign;
    eta.form = solve_principal_parts(am, lp, spec, true, &eta.fit_residual);
    return eta;
}

Eigen::VectorXcd beta_periods(const AbelMap& am, const EtaDifferential& eta) {
    const Curve& cv = am.curve();
    const int g = cv.genus();
    const auto& cyc = cv.homology();
    Eigen::VectorXcd U(g);
    auto dens = [&](cplx lam, cplx w) {
        Eigen::VectorXcd v(1);
        v(0) = eta.form.density(lam, w);
        return v;
    };
    for (int j = 0; j < g; ++j)
        U(j) = cv.integrate_form(cyc[g + j].vertices, cyc[g + j].start_sheet, dens, am.quad_tol(), 1)(0) /
               (2.0 * pi * iu);
    return U;
}

namespace {

cplx series_segment_integral(const Series& s, cplx q0, cplx q1) {
    // integral of sum c_j q^j dq from q0 to q1
    cplx acc = 0.0;
    cplx p0 = q0, p1 = q1;
    for (int j = 0; j < s.size(); ++j) {
        acc += s[j] * (p1 - p0) / static_cast<double>(j + 1);
        p0 *= q0;
        p1 *= q1;
    }
    return acc;
}

} // namespace

EtaConstants eta_constants(const AbelMap& am, const LocalParams& lp, const EtaDifferential& eta,
                           const Approach& own, const Approach& other) {
    EtaConstants ec;
    const std::vector<const FormLC*> forms{&eta.form};
    const int nterms = 30;

    // a: limit of (int_{P0}^{P} eta - k^l) along the own approach
    {
        const cplx I0 = am.integrate_forms_along(own.path_to_anchor, +1, forms, am.quad_tol())(0);
        Series reg = form_chart_series(am, lp, eta.form, eta.sign, eta.l, nterms);
        const cplx ka = lp.k(eta.sign, own.anchor.lambda);
        const cplx qa = 1.0 / ka;
        std::vector<cplx> qs, vs;
        for (const auto& P : own.points) {
            const cplx q = 1.0 / lp.k(eta.sign, P.lambda);
            qs.push_back(q);
            vs.push_back(I0 + series_segment_integral(reg, qa, q) - std::pow(ka, eta.l));
        }
        ec.a = extrapolate_to_zero(qs, vs);
    }
    // b: plain limit of the integral along the other approach
    {
        const cplx I0 = am.integrate_forms_along(other.path_to_anchor, +1, forms, am.quad_tol())(0);
        Series reg = form_chart_series(am, lp, eta.form, -eta.sign, 0, nterms);
        const cplx qa = 1.0 / lp.k(-eta.sign, other.anchor.lambda);
        std::vector<cplx> qs, vs;
        for (const auto& P : other.points) {
            const cplx q = 1.0 / lp.k(-eta.sign, P.lambda);
            qs.push_back(q);
            vs.push_back(I0 + series_segment_integral(reg, qa, q));
        }
        ec.b = extrapolate_to_zero(qs, vs);
    }
    ec.U = beta_periods(am, eta);
    return ec;
}

cplx extrapolate_to_zero(const std::vector<cplx>& q, const std::vector<cplx>& v, double* err_estimate) {
    const int n = static_cast<int>(q.size());
    std::vector<cplx> p = v;
    for (int level = 1; level < n; ++level)
        for (int i = 0; i + level < n; ++i)
            p[i] = (q[i + level] * p[i] - q[i] * p[i + 1]) / (q[i + level] - q[i]);
    if (err_estimate) {
        std::vector<cplx> p2(v.begin() + 1, v.end());
        std::vector<cplx> q2(q.begin() + 1, q.end());
        const int n2 = n - 1;
        for (int level = 1; level < n2; ++level)
            for (int i = 0; i + level < n2; ++i)
                p2[i] = (q2[i + level] * p2[i] - q2[i] * p2[i + 1]) / (q2[i + level] - q2[i]);
        *err_estimate = std::abs(p[0] - p2[0]);
    }
    return p[0];
}

// ---------------------------------------------------------------------------
// theta-divisor scans

void AbelMap::scan_window(double& half, cplx& center) const {
    const cplx c = centroid();
    double maxr = 0.0;
    for (cplx e : curve_->branch().points) maxr = std::max(maxr, std::abs(e - c));
    center = c;
    half = 1.6 * maxr + 0.2 * curve_->diameter();
}

Divisor AbelMap::theta_zeros(const Eigen::VectorXcd& t, int expected) const {
    const int g = curve_->genus();
    const double theta_scale = std::abs(theta(Eigen::VectorXcd::Zero(g), tctx_));
    auto dens = omega_density();

    cplx center;
    double half;
    scan_window(half, center);

    // outer chart mu = 1/lambda: Abel map as a Taylor series around the two
    // points over infinity (the region no finite window can cover)
    double maxr = 0.0;
    for (cplx e : curve_->branch().points) maxr = std::max(maxr, std::abs(e));
    const double mu_max = 0.45 / maxr;
    const int nmu = 30;
    std::vector<Series> omega_mu;  // per component, sheet +1; sheet -1 negates
    {
        Series invW = curve_->invw_series_at_infinity(nmu + g + 2);
        const Eigen::MatrixXcd& C = pd_.normalization;
        for (int j = 0; j < g; ++j) {
            Series s(nmu);
            for (int k = 0; k < nmu; ++k) {
                // coefficient of mu^k in -sum_m C(j,m) mu^{g-m-1} invW(mu)
                cplx c = 0.0;
                for (int m = 0; m < g; ++m) {
                    const int idx = k - (g - m - 1);
                    if (idx >= 0 && idx < invW.size()) c += C(j, m) * invW[idx];
                }
                s[k] = -c;
            }
            omega_mu.push_back(std::move(s));
        }
    }
    auto abel_outer = [&](cplx mu, int sheet, const Eigen::VectorXcd& Ainf) {
        Eigen::VectorXcd A = Ainf;
        cplx p = mu;
        for (int k = 0; k < nmu; ++k) {
            for (int j = 0; j < g; ++j)
                A(j) += static_cast<double>(sheet) * omega_mu[static_cast<size_t>(j)][k] * p /
                        static_cast<double>(k + 1);
            p *= mu;
        }
        return A;
    };
    auto abel_outer_deriv = [&](cplx mu, int sheet) {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(g);
        cplx p = 1.0;
        for (int k = 0; k < nmu; ++k) {
            for (int j = 0; j < g; ++j)
                d(j) += static_cast<double>(sheet) * omega_mu[static_cast<size_t>(j)][k] * p;
            p *= mu;
        }
        return d;
    };

    const Eigen::VectorXcd Ainf_p = abel_infinity(+1);
    const Eigen::VectorXcd Ainf_m = abel_infinity(-1);

    for (int attempt = 0; attempt < 2; ++attempt) {
        const int n = (attempt == 0) ? 56 : 80;
        const double step = 2.0 * half / n;
        struct Cand {
            double metric;
            cplx lambda;
            int sheet;
            bool outer = false;
            cplx mu{0.0};
        };
        std::vector<Cand> cands;
        std::vector<std::vector<double>> mplus(n, std::vector<double>(n, 1e300)),
            mminus(n, std::vector<double>(n, 1e300));
        std::vector<std::vector<int>> sheet_at(n, std::vector<int>(n, 0));

        auto node = [&](int row, int col) {
            return cplx(center.real() - half + (col + 0.5 + 0.017) * step,
                        center.imag() - half + (row + 0.5 + 0.031) * step);
        };

        for (int row = 0; row < n; ++row) {
            Eigen::VectorXcd A;
            int sheet = +1;
            bool have = false;
            cplx lam_prev;
            for (int col = 0; col < n; ++col) {
                const cplx lam = node(row, col);
                bool near_branch = false;
                for (cplx e : curve_->branch().points)
                    near_branch |= have ? dist_point_segment(e, lam_prev, lam) < 1.5 * curve_->path_margin()
                                        : std::abs(lam - e) < 1.5 * curve_->path_margin();
                if (!have || near_branch) {
                    try {
                        A = curve_->integrate_form(canonical_path(lam, +1), +1, dens, 1e-10, g);
                        sheet = +1;
                        have = true;
                    } catch (const Error&) {
                        have = false;
                        lam_prev = lam;
                        continue;
                    }
                } else {
                    int end_sheet = sheet;
                    A += curve_->integrate_form_fixed({lam_prev, lam}, sheet, dens, g, &end_sheet);
                    sheet = end_sheet;
                }
                lam_prev = lam;
                mplus[row][col] = theta_reduced_abs(A - t, tctx_);
                mminus[row][col] = theta_reduced_abs(c_invol_ - A - t, tctx_);
                sheet_at[row][col] = sheet;
            }
        }

        std::vector<double> all;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (mplus[r][c] < 1e299) all.push_back(mplus[r][c]);
                if (mminus[r][c] < 1e299) all.push_back(mminus[r][c]);
            }
        std::sort(all.begin(), all.end());
        const double med = all.empty() ? 1.0 : all[all.size() / 2];
        const double thresh = 0.5 * med;
        auto is_min = [&](const std::vector<std::vector<double>>& m, int r, int c) {
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (!dr && !dc) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
                    if (m[rr][cc] < m[r][c]) return false;
                }
            return true;
        };
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (sheet_at[r][c] == 0) continue;
                if (mplus[r][c] < thresh && is_min(mplus, r, c))
                    cands.push_back({mplus[r][c], node(r, c), sheet_at[r][c]});
                if (mminus[r][c] < thresh && is_min(mminus, r, c))
                    cands.push_back({mminus[r][c], node(r, c), -sheet_at[r][c]});
            }
        // outer chart: mu grids on both sheets
        {
            const int nm = 40;
            const double mstep = 2.0 * mu_max / nm;
            for (int sheet : {+1, -1}) {
                const Eigen::VectorXcd& Ainf = (sheet > 0) ? Ainf_p : Ainf_m;
                std::vector<std::vector<double>> mm(nm, std::vector<double>(nm, 1e300));
                for (int r = 0; r < nm; ++r)
                    for (int c = 0; c < nm; ++c) {
                        const cplx mu(-mu_max + (c + 0.5) * mstep, -mu_max + (r + 0.5) * mstep);
                        mm[static_cast<size_t>(r)][static_cast<size_t>(c)] =
                            theta_reduced_abs(abel_outer(mu, sheet, Ainf) - t, tctx_);
                    }
                std::vector<double> vals;
                for (const auto& row : mm)
                    for (double v : row) vals.push_back(v);
                std::sort(vals.begin(), vals.end());
                const double omed = vals[vals.size() / 2];
                for (int r = 0; r < nm; ++r)
                    for (int c = 0; c < nm; ++c) {
                        const double v = mm[static_cast<size_t>(r)][static_cast<size_t>(c)];
                        if (v >= 0.5 * omed) continue;
                        bool is_min = true;
                        for (int dr = -1; dr <= 1 && is_min; ++dr)
                            for (int dc = -1; dc <= 1 && is_min; ++dc) {
                                const int rr = r + dr, cc = c + dc;
                                if (rr < 0 || cc < 0 || rr >= nm || cc >= nm) continue;
                                if (!(dr == 0 && dc == 0))
                                    is_min &= mm[static_cast<size_t>(rr)][static_cast<size_t>(cc)] >= v;
                            }
                        if (!is_min) continue;
                        Cand cd;
                        cd.metric = v;
                        cd.mu = cplx(-mu_max + (c + 0.5) * mstep, -mu_max + (r + 0.5) * mstep);
                        cd.sheet = sheet;
                        cd.outer = true;
                        cd.lambda = 1.0 / cd.mu;
                        cands.push_back(cd);
                    }
            }
        }

        std::sort(cands.begin(), cands.end(),
                  [](const Cand& a, const Cand& b) { return a.metric < b.metric; });
        if (cands.size() > static_cast<size_t>(12 * std::max(1, expected)))
            cands.resize(static_cast<size_t>(12 * std::max(1, expected)));
        if (std::getenv("FG_DEBUG_SCAN")) {
            std::fprintf(stderr, "[scan] attempt %d: half=%g candidates=%zu median=%g\n", attempt, half,
                         cands.size(), med);
            for (size_t i = 0; i < cands.size() && i < 8; ++i)
                std::fprintf(stderr, "   cand %.6g%+.6gi sheet %d metric %.3g\n", cands[i].lambda.real(),
                             cands[i].lambda.imag(), cands[i].sheet, cands[i].metric);
        }

        Divisor out;
        for (const Cand& cand : cands) {
            if (cand.outer) {
                // Newton in the mu chart
                cplx mu = cand.mu;
                const int sheet = cand.sheet;
                const Eigen::VectorXcd& Ainf = (sheet > 0) ? Ainf_p : Ainf_m;
                bool ok = false;
                for (int it = 0; it < 50; ++it) {
                    const Eigen::VectorXcd A = abel_outer(mu, sheet, Ainf);
                    const cplx val = theta(Eigen::VectorXcd(A - t), tctx_);
                    const Eigen::VectorXcd gr = theta_grad(Eigen::VectorXcd(A - t), tctx_);
                    const cplx deriv = (gr.transpose() * abel_outer_deriv(mu, sheet))(0);
                    if (deriv == cplx{0.0}) break;
                    cplx dm = -val / deriv;
                    if (std::abs(dm) > 0.25 * mu_max) dm *= 0.25 * mu_max / std::abs(dm);
                    mu += dm;
                    if (std::abs(mu) > 1.05 * mu_max) break;  // left the chart; inner scan owns it
                    if (std::abs(dm) < 1e-13 * mu_max) {
                        ok = true;
                        break;
                    }
                }
                if (!ok) continue;
                if (std::abs(mu) < 1e-8 * mu_max) {
                    // zero sits at the point over lambda = infinity itself
                    const Eigen::VectorXcd& Ainf2 = (sheet > 0) ? Ainf_p : Ainf_m;
                    if (theta_reduced_abs(Ainf2 - t, tctx_) > 1e-8 * theta_scale) continue;
                    bool dup = false;
                    for (const auto& S : out.points) dup |= S.at_infinity && S.sheet == sheet;
                    if (!dup) {
                        SurfacePoint P;
                        P.at_infinity = true;
                        P.sheet = sheet;
                        P.lambda = cplx(std::numeric_limits<double>::infinity(), 0.0);
                        out.points.push_back(P);
                    }
                    if (out.degree() == expected) break;
                    continue;
                }
                const cplx lam_o = 1.0 / mu;
                try {
                    const SurfacePoint P = curve_->lift(lam_o, sheet);
                    const Eigen::VectorXcd Aref = abel(P);
                    if (theta_reduced_abs(Aref - t, tctx_) > 1e-8 * theta_scale) continue;
                    bool dup = false;
                    for (const auto& S : out.points)
                        dup |= !S.at_infinity &&
                               ((std::abs(S.lambda - lam_o) < 1e-6 * curve_->diameter() && S.sheet == sheet) ||
                                (std::abs(S.lambda - lam_o) < 1e-5 * std::abs(lam_o) && S.sheet == sheet));
                    if (!dup) out.points.push_back(P);
                } catch (const Error&) {
                    continue;
                }
                if (out.degree() == expected) break;
                continue;
            }
            cplx lam = cand.lambda;
            int sheet = cand.sheet;
            Eigen::VectorXcd A;
            try {
                A = curve_->integrate_form(canonical_path(lam, sheet), +1, dens, tol_, g);
            } catch (const Error&) {
                continue;
            }
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                const cplx val = theta(Eigen::VectorXcd(A - t), tctx_);
                const Eigen::VectorXcd gr = theta_grad(Eigen::VectorXcd(A - t), tctx_);
                SurfacePoint P;
                try {
                    P = curve_->lift(lam, sheet);
                } catch (const Error&) {
                    break;
                }
                const cplx deriv = (gr.transpose() * abel_derivative(P))(0);
                if (deriv == cplx{0.0}) break;
                cplx dl = -val / deriv;
                const double cap = 0.75 * step;
                if (std::abs(dl) > cap) dl *= cap / std::abs(dl);
                const cplx lam_new = lam + dl;
                bool near_branch = false;
                for (cplx e : curve_->branch().points)
                    near_branch |= dist_point_segment(e, lam, lam_new) < 0.2 * curve_->path_margin();
                if (near_branch) break;
                int end_sheet = sheet;
                A += curve_->integrate_form_fixed({lam, lam_new}, sheet, dens, g, &end_sheet);
                sheet = end_sheet;
                lam = lam_new;
                if (std::abs(dl) < 1e-11 * (1.0 + std::abs(lam))) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            try {
                const SurfacePoint P = curve_->lift(lam, sheet);
                const Eigen::VectorXcd Aref = abel(P);
                if (theta_reduced_abs(Aref - t, tctx_) > 1e-8 * theta_scale) continue;
                bool dup = false;
                for (const auto& S : out.points)
                    dup |= (std::abs(S.lambda - lam) < 1e-6 * curve_->diameter() && S.sheet == sheet);
                if (!dup) out.points.push_back(P);
            } catch (const Error&) {
                continue;
            }
            if (out.degree() == expected) break;
        }
        if (out.degree() == expected) return out;
        half *= 1.5;
    }
    fail("WrongZeroCount", "theta-divisor scan did not find the expected number of zeros");
}

Eigen::VectorXcd AbelMap::riemann_constants(std::mt19937_64& rng) const {
    const int g = curve_->genus();
    std::uniform_real_distribution<double> U(0.12, 0.88);
    bool have_first = false;
    Eigen::VectorXcd delta_first;
    for (int attempt = 0; attempt < 10; ++attempt) {
        Eigen::VectorXcd x(g), y(g);
        for (int j = 0; j < g; ++j) {
            x(j) = U(rng);
            y(j) = U(rng);
        }
        Eigen::VectorXcd u = x + pd_.Omega * y;
        try {
            Divisor S = theta_zeros(u, g);
            Eigen::VectorXcd delta = abel(S) - u;
            if (!have_first) {
                delta_first = delta;
                have_first = true;
                continue;
            }
            if (lattice_distance(delta - delta_first) < 1e-6) return delta_first;
            delta_first = delta;
        } catch (const Error&) {
            continue;
        }
    }
    fail("DegenerateU", "Riemann-constant computation failed to stabilize");
}

Divisor AbelMap::jacobi_invert(const Eigen::VectorXcd& u, const Eigen::VectorXcd& delta) const {
    // zeros of theta(A(P) - t) have sum of Abel images t + delta; ask for u - delta
    const Eigen::VectorXcd t = u - 2.0 * delta;
    return theta_zeros(t, curve_->genus());
}

} // namespace fg
