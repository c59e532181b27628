#include "fg/curve.hpp"
#include "fg/geometry.hpp"
#include "fg/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace fg {

cplx cut_sqrt(cplx lambda, cplx a, cplx b) {
    const cplx c = 0.5 * (a + b);
    const cplx d = 0.5 * (b - a);
    const cplx u = (lambda - c) / d;
    // holomorphic off the segment [a,b]; ~ (lambda - c) for large |u|
    return d * std::sqrt(u - 1.0) * std::sqrt(u + 1.0);
}

namespace {

bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

double segment_distance(cplx a1, cplx b1, cplx a2, cplx b2) {
    // disjoint segments attain min distance at an endpoint
    return std::min(std::min(dist_point_segment(a1, a2, b2), dist_point_segment(b1, a2, b2)),
                    std::min(dist_point_segment(a2, a1, b1), dist_point_segment(b2, a1, b1)));
}

bool set_closed_under(const std::vector<cplx>& pts, const std::function<cplx(cplx)>& map, double tol) {
    for (cplx p : pts) {
        const cplx q = map(p);
        double best = std::numeric_limits<double>::infinity();
        for (cplx r : pts) best = std::min(best, std::abs(q - r));
        if (best > tol) return false;
    }
    return true;
}

} // namespace

Curve Curve::build(std::vector<cplx> points) {
    const int n = static_cast<int>(points.size());
    if (n < 4 || n % 2 != 0) fail("OddCount", "need an even number >= 4 of branch points, got " + std::to_string(n));
    std::sort(points.begin(), points.end(), lex_less);

    Curve cv;
    double diam = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) diam = std::max(diam, std::abs(points[i] - points[j]));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(points[i] - points[j]) < 1e-12 * (1.0 + diam))
                fail("DuplicateBranchPoint", "branch points coincide");

    cv.branch_.points = points;
    cv.branch_.genus = (n - 2) / 2;
    cv.diam_ = diam;
    cv.path_margin_ = 1e-3 * diam;
    const double sym_tol = 1e-9 * (1.0 + diam);
    cv.branch_.negation_closed = set_closed_under(points, [](cplx z) { return -z; }, sym_tol);
    cv.branch_.conjugation_closed = set_closed_under(points, [](cplx z) { return std::conj(z); }, sym_tol);

    cv.build_cuts();

    cplx centroid = 0.0;
    for (cplx p : points) centroid += p;
    centroid /= static_cast<double>(n);
    cv.lambda_ref_ = centroid + diam;  // off to the right of everything

    // fix the global sheet sign at the reference point
    cplx prod = 1.0;
    for (const Cut& c : cv.cuts_) prod *= cut_sqrt(cv.lambda_ref_, c.a, c.b);
    cv.sign_ref_ = 1;
    if (prod.real() < 0.0 || (prod.real() == 0.0 && prod.imag() < 0.0)) cv.sign_ref_ = -1;
    return cv;
}

void Curve::build_cuts() {
    const auto& pts = branch_.points;
    const int ncuts = static_cast<int>(pts.size()) / 2;
    cuts_.clear();
    for (int j = 0; j < ncuts; ++j) {
        Cut c;
        c.a = pts[2 * j];
        c.b = pts[2 * j + 1];
        c.mid = 0.5 * (c.a + c.b);
        c.clearance = 0.0;
        cuts_.push_back(c);
    }
    // cuts must be pairwise disjoint with usable clearance
    for (int i = 0; i < ncuts; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < ncuts; ++j) {
            if (i == j) continue;
            if (segment_intersect(cuts_[i].a, cuts_[i].b, cuts_[j].a, cuts_[j].b))
                fail("DegenerateConfiguration", "branch cuts intersect under the consecutive pairing");
            dmin = std::min(dmin, segment_distance(cuts_[i].a, cuts_[i].b, cuts_[j].a, cuts_[j].b));
        }
        cuts_[i].clearance = 0.4 * dmin;
        if (!(cuts_[i].clearance > path_margin_))
            fail("DegenerateConfiguration", "cut clearance below the routing margin");
    }
}

cplx Curve::defining_poly(cplx lambda) const {
    cplx p = 1.0;
    for (cplx e : branch_.points) p *= (lambda - e);
    return p;
}

cplx Curve::sheet_function(cplx lambda) const {
    cplx prod = 1.0;
    for (const Cut& c : cuts_) prod *= cut_sqrt(lambda, c.a, c.b);
    return static_cast<double>(sign_ref_) * prod;
}

SurfacePoint Curve::lift(cplx lambda, int sheet) const {
    for (cplx e : branch_.points)
        if (std::abs(lambda - e) < 1e-10 * (1.0 + diam_))
            fail("AtBranchPoint", "lift at a branch point; use lift_branch");
    if (sheet != 1 && sheet != -1) fail("AtBranchPoint", "sheet must be +1 or -1");
    SurfacePoint p;
    p.lambda = lambda;
    p.sheet = sheet;
    p.w = static_cast<double>(sheet) * sheet_function(lambda);
    return p;
}

SurfacePoint Curve::lift_branch(int i) const {
    SurfacePoint p;
    p.lambda = branch_.points.at(i);
    p.sheet = 0;
    p.w = 0.0;
    p.at_branch = true;
    return p;
}

std::vector<double> Curve::crossing_params(cplx p, cplx q) const {
    std::vector<double> ts;
    for (const Cut& c : cuts_)
        for (const SegCross& x : crossings_with(p, q, c.a, c.b)) ts.push_back(x.t);
    std::sort(ts.begin(), ts.end());
    return ts;
}

int Curve::segment_crossings(cplx p, cplx q) const {
    return static_cast<int>(crossing_params(p, q).size());
}

SurfacePoint Curve::continue_along(const std::vector<cplx>& polyline, const SurfacePoint& start) const {
    if (polyline.size() < 2) return start;
    if (start.at_branch) fail("PathThroughBranchPoint", "cannot continue from a branch point");
    if (std::abs(polyline.front() - start.lambda) > 1e-9 * (1.0 + diam_))
        fail("PathThroughBranchPoint", "path does not start at the given point");
    int flips = 0;
    for (size_t i = 0; i + 1 < polyline.size(); ++i) {
        for (cplx e : branch_.points)
            if (dist_point_segment(e, polyline[i], polyline[i + 1]) < 0.999 * path_margin_)
                fail("PathTooCloseToBranchPoint", "polyline within margin of a branch point");
        flips += segment_crossings(polyline[i], polyline[i + 1]);
    }
    const int sheet = (flips % 2 == 0) ? start.sheet : -start.sheet;
    return lift(polyline.back(), sheet);
}

Eigen::VectorXcd Curve::integrate_form(const std::vector<cplx>& poly, int start_sheet,
                                       const std::function<Eigen::VectorXcd(cplx, cplx)>& f,
                                       double abs_tol, int dim, int* end_sheet) const {
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(dim);
    int sheet = start_sheet;
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
        const cplx p = poly[i], q = poly[i + 1];
        const cplx dz = q - p;
        std::vector<double> ts = crossing_params(p, q);
        double t0 = 0.0;
        auto piece = [&](double ta, double tb, int s) {
            total += dz * integrate_gk<Eigen::VectorXcd>(
                              [&](double t) {
                                  const cplx lam = p + t * dz;
                                  return f(lam, static_cast<double>(s) * sheet_function(lam));
                              },
                              ta, tb, abs_tol, 28, dim);
        };
        for (double tc : ts) {
            piece(t0, tc, sheet);
            sheet = -sheet;
            t0 = tc;
        }
        if (t0 < 1.0) piece(t0, 1.0, sheet);
    }
    if (end_sheet) *end_sheet = sheet;
    return total;
}

Eigen::VectorXcd Curve::integrate_form_fixed(const std::vector<cplx>& poly, int start_sheet,
                                             const std::function<Eigen::VectorXcd(cplx, cplx)>& f,
                                             int dim, int* end_sheet) const {
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(dim);
    int sheet = start_sheet;
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
        const cplx p = poly[i], q = poly[i + 1];
        const cplx dz = q - p;
        std::vector<double> ts = crossing_params(p, q);
        double t0 = 0.0;
        auto piece = [&](double ta, double tb, int s) {
            if (tb - ta < 1e-15) return;
            total += dz * integrate_fixed15<Eigen::VectorXcd>(
                              [&](double t) {
                                  const cplx lam = p + t * dz;
                                  return f(lam, static_cast<double>(s) * sheet_function(lam));
                              },
                              ta, tb, dim);
        };
        for (double tc : ts) {
            piece(t0, tc, sheet);
            sheet = -sheet;
            t0 = tc;
        }
        if (t0 < 1.0) piece(t0, 1.0, sheet);
    }
    if (end_sheet) *end_sheet = sheet;
    return total;
}

// ---------------------------------------------------------------------------
// homology

std::vector<cplx> Curve::route_leg(cplx p, cplx q, double stagger) const {
    std::vector<cplx> poly{p, q};
    auto cut_of_point = [&](cplx e) {
        for (size_t i = 0; i < cuts_.size(); ++i)
            if (std::abs(cuts_[i].a - e) < 1e-14 || std::abs(cuts_[i].b - e) < 1e-14)
                return static_cast<int>(i);
        return 0;
    };
    auto arc_radius = [&](cplx e) { return 0.5 * cuts_[cut_of_point(e)].clearance * stagger; };

    // Replace segment i by an arc around e avoiding the direction phi_avoid.
    auto insert_arc = [&](size_t i, cplx e, double phi_avoid) {
        const cplx a = poly[i], b = poly[i + 1];
        const double rho = arc_radius(e);
        const double phi_in = std::arg(a - e), phi_out = std::arg(b - e);
        double d_ccw = std::fmod(phi_out - phi_in + 4.0 * pi, 2.0 * pi);
        double off_avoid = std::fmod(phi_avoid - phi_in + 4.0 * pi, 2.0 * pi);
        double sweep = (off_avoid < d_ccw) ? d_ccw - 2.0 * pi : d_ccw;  // avoid the cut direction
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(sweep) / 0.6)));
        std::vector<cplx> wps;
        for (int k = 1; k < steps; ++k)
            wps.push_back(e + rho * std::polar(1.0, phi_in + sweep * k / steps));
        if (wps.empty()) wps.push_back(e + rho * std::polar(1.0, phi_in + 0.5 * sweep));
        poly.insert(poly.begin() + static_cast<long>(i) + 1, wps.begin(), wps.end());
    };

    for (int pass = 0; pass < 64 && poly.size() < 320; ++pass) {
        bool changed = false;
        for (size_t i = 0; i + 1 < poly.size() && !changed; ++i) {
            const cplx a = poly[i], b = poly[i + 1];
            // cut crossings first
            for (size_t ci = 0; ci < cuts_.size() && !changed; ++ci) {
                auto cr = segment_intersect(a, b, cuts_[ci].a, cuts_[ci].b);
                if (!cr) continue;
                const cplx e = (std::abs(cr->point - cuts_[ci].a) < std::abs(cr->point - cuts_[ci].b))
                                   ? cuts_[ci].a
                                   : cuts_[ci].b;
                insert_arc(i, e, std::arg(cuts_[ci].mid - e));
                changed = true;
            }
            if (changed) break;
            // branch-point proximity
            for (size_t bi = 0; bi < branch_.points.size() && !changed; ++bi) {
                const cplx e = branch_.points[bi];
                const double rho = arc_radius(e);
                if (std::abs(a - e) < 1.02 * rho || std::abs(b - e) < 1.02 * rho) continue;
                if (dist_point_segment(e, a, b) >= 0.55 * rho) continue;
                insert_arc(i, e, std::arg(cuts_[cut_of_point(e)].mid - e));
                changed = true;
            }
            if (changed) break;
            // cut proximity / collinear overlap: push the segment off the cut
            for (size_t ci = 0; ci < cuts_.size() && !changed; ++ci) {
                const Cut& c = cuts_[ci];
                const double thresh = 0.25 * c.clearance * stagger;
                // endpoints deliberately close to this cut (arcs, targets) are exempt
                if (dist_point_segment(a, c.a, c.b) < 1.3 * thresh ||
                    dist_point_segment(b, c.a, c.b) < 1.3 * thresh)
                    continue;
                double worst = 1e300;
                cplx worst_pt;
                for (int k = 1; k < 8; ++k) {
                    const cplx s = a + (b - a) * (k / 8.0);
                    const double d = dist_point_segment(s, c.a, c.b);
                    if (d < worst) {
                        worst = d;
                        worst_pt = s;
                    }
                }
                if (worst >= thresh) continue;
                const cplx u = (c.b - c.a) / std::abs(c.b - c.a);
                // closest point on the cut and the perpendicular escape direction
                double t = dot2(worst_pt - c.a, c.b - c.a) / std::norm(c.b - c.a);
                t = std::max(0.0, std::min(1.0, t));
                const cplx x = c.a + t * (c.b - c.a);
                cplx nrm = worst_pt - x;
                if (std::abs(nrm) < 1e-12 * diam_) nrm = iu * u;
                nrm /= std::abs(nrm);
                poly.insert(poly.begin() + static_cast<long>(i) + 1,
                            x + 0.5 * c.clearance * stagger * nrm);
                changed = true;
            }
        }
        if (!changed) return poly;
    }
    fail("DegenerateConfiguration", "leg routing did not converge");
}

namespace {

// intersection number of two closed polylines with sheet parity tracking
int cycle_intersection(const Curve& cv, const CyclePath& c1, const CyclePath& c2) {
    int total = 0;
    // prefix crossing counts per vertex
    auto prefix = [&](const CyclePath& c) {
        std::vector<int> pre(c.vertices.size(), 0);
        for (size_t i = 0; i + 1 < c.vertices.size(); ++i)
            pre[i + 1] = pre[i] + cv.segment_crossings(c.vertices[i], c.vertices[i + 1]);
        return pre;
    };
    const auto pre1 = prefix(c1), pre2 = prefix(c2);
    for (size_t i = 0; i + 1 < c1.vertices.size(); ++i) {
        const cplx p1 = c1.vertices[i], q1 = c1.vertices[i + 1];
        for (size_t j = 0; j + 1 < c2.vertices.size(); ++j) {
            const cplx p2 = c2.vertices[j], q2 = c2.vertices[j + 1];
            auto x = segment_intersect(p1, q1, p2, q2);
            if (!x) continue;
            // sheets at the crossing
            int f1 = pre1[i] + static_cast<int>(cv.crossing_params(p1, p1 + x->t * (q1 - p1)).size());
            double t2 = std::abs(q2 - p2) > 0 ? dot2(x->point - p2, q2 - p2) / std::norm(q2 - p2) : 0.0;
            int f2 = pre2[j] + static_cast<int>(cv.crossing_params(p2, p2 + t2 * (q2 - p2)).size());
            const int sheet1 = (f1 % 2 == 0) ? c1.start_sheet : -c1.start_sheet;
            const int sheet2 = (f2 % 2 == 0) ? c2.start_sheet : -c2.start_sheet;
            if (sheet1 != sheet2) continue;
            total += (cross2(q1 - p1, q2 - p2) > 0) ? 1 : -1;
        }
    }
    return total;
}

} // namespace

void Curve::build_homology() const {
    const int g = branch_.genus;
    const double staggers[4] = {1.0, 1.25, 0.8, 1.45};
    std::string last_err;
    for (double stagger : staggers) {
        std::vector<CyclePath> cycles;
        try {
            // alpha_j: rectangle around cut j+1, counterclockwise, sheet +1
            for (int j = 1; j <= g; ++j) {
                const Cut& c = cuts_[j];
                const cplx u = (c.b - c.a) / std::abs(c.b - c.a);
                const cplx v = iu * u;
                const double r = c.clearance;
                CyclePath cp;
                cp.kind = CyclePath::Kind::Alpha;
                cp.index = j;
                cp.start_sheet = 1;
                cp.vertices = {c.a - r * u + r * v, c.a - r * u - r * v, c.b + r * u - r * v,
                               c.b + r * u + r * v, c.a - r * u + r * v};
                cycles.push_back(cp);
            }
            // beta_j: crosses cut 1 (at fraction) and cut j+1 (at midpoint)
            for (int j = 1; j <= g; ++j) {
                const Cut& c1 = cuts_[0];
                const Cut& cj = cuts_[j];
                const double f = static_cast<double>(j) / (g + 1.0);
                const cplx x1 = c1.a + f * (c1.b - c1.a);
                const cplx u1 = (c1.b - c1.a) / std::abs(c1.b - c1.a);
                const cplx n1 = iu * u1;
                const cplx uj = (cj.b - cj.a) / std::abs(cj.b - cj.a);
                const cplx nj = iu * uj;
                const double rho1 = c1.clearance * (0.30 + 0.10 * (j - 1)) * stagger;
                const double rhoj = cj.clearance * 0.35 * stagger;
                const cplx pP = x1 + rho1 * n1, pM = x1 - rho1 * n1;
                const cplx qP = cj.mid + rhoj * nj, qM = cj.mid - rhoj * nj;
                std::vector<cplx> legA = route_leg(pP, qP, stagger);
                std::vector<cplx> legB = route_leg(qM, pM, stagger);
                CyclePath cp;
                cp.kind = CyclePath::Kind::Beta;
                cp.index = j;
                cp.start_sheet = 1;
                cp.vertices = legA;
                cp.vertices.insert(cp.vertices.end(), legB.begin(), legB.end());
                cp.vertices.push_back(pP);
                cycles.push_back(cp);
                // each beta must cross exactly cut 1 and cut j+1, once each
                int crossings = 0;
                for (size_t i = 0; i + 1 < cp.vertices.size(); ++i)
                    crossings += segment_crossings(cp.vertices[i], cp.vertices[i + 1]);
                if (crossings != 2) fail("DegenerateConfiguration", "beta cycle crossing count != 2");
            }
            // orientation fix and canonical-form verification
            auto inter = [&](int i, int j) { return cycle_intersection(*this, cycles[i], cycles[j]); };
            for (int j = 0; j < g; ++j) {
                const int ab = inter(j, g + j);
                if (ab == -1) {
                    std::reverse(cycles[g + j].vertices.begin(), cycles[g + j].vertices.end());
                } else if (ab != 1) {
                    fail("DegenerateConfiguration", "alpha-beta pairing is not unimodular");
                }
            }
            Eigen::MatrixXi M(2 * g, 2 * g);
            for (int i = 0; i < 2 * g; ++i)
                for (int j = 0; j < 2 * g; ++j) M(i, j) = inter(i, j);
            Eigen::MatrixXi J = Eigen::MatrixXi::Zero(2 * g, 2 * g);
            for (int j = 0; j < g; ++j) {
                J(j, g + j) = 1;
                J(g + j, j) = -1;
            }
            if (M != J) fail("DegenerateConfiguration", "intersection matrix is not canonical");
            homology_ = std::move(cycles);
            return;
        } catch (const Error& e) {
            last_err = e.what();
            continue;
        }
    }
    fail("DegenerateConfiguration", "homology construction failed: " + last_err);
}

const std::vector<CyclePath>& Curve::homology() const {
    if (!homology_) build_homology();
    return *homology_;
}

Eigen::MatrixXi Curve::intersection_matrix() const {
    const auto& cyc = homology();
    const int n = static_cast<int>(cyc.size());
    Eigen::MatrixXi M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = cycle_intersection(*this, cyc[i], cyc[j]);
    return M;
}

PeriodData Curve::compute_periods(double abs_tol) const {
    const int g = branch_.genus;
    const auto& cyc = homology();
    auto monomials = [&](cplx lam, cplx w) {
        Eigen::VectorXcd v(g);
        cplx p = 1.0;
        for (int m = 0; m < g; ++m) {
            v(m) = p / w;
            p *= lam;
        }
        return v;
    };
    PeriodData pd;
    pd.raw_A.resize(g, g);
    pd.raw_B.resize(g, g);
    for (int k = 0; k < g; ++k) {
        pd.raw_A.row(k) =
            integrate_form(cyc[k].vertices, cyc[k].start_sheet, monomials, abs_tol, g).transpose();
        pd.raw_B.row(k) =
            integrate_form(cyc[g + k].vertices, cyc[g + k].start_sheet, monomials, abs_tol, g).transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pd.raw_A);
    const double cond = svd.singularValues()(0) / svd.singularValues()(g - 1);
    if (!(cond < 1e10)) fail("IllConditionedAPeriods", "raw A-period matrix condition number " + std::to_string(cond));
    pd.normalization = pd.raw_A.transpose().partialPivLu().solve(Eigen::MatrixXcd::Identity(g, g));
    pd.Omega = pd.normalization * pd.raw_B.transpose();
    // guard: Riemann relations
    const double asym = (pd.Omega - pd.Omega.transpose()).cwiseAbs().maxCoeff();
    if (!(asym < 1e-6)) fail("DegenerateConfiguration", "period matrix asymmetry " + std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pd.Omega.imag());
    if (!(es.eigenvalues()(0) > 0.0)) fail("DegenerateConfiguration", "Im(Omega) not positive definite");
    return pd;
}

const PeriodData& Curve::periods() const {
    if (!periods_) periods_ = compute_periods(1e-12);
    return *periods_;
}

Series Curve::invw_series_at_zero(int nterms) const {
    for (const Cut& c : cuts_)
        if (dist_point_segment(cplx{0.0}, c.a, c.b) < path_margin_)
            fail("AtBranchPoint", "lambda = 0 lies on or near a cut");
    Series pe = Series::from_roots(branch_.points, nterms);
    pe = pe.scaled(1.0);
    // prod (0 - e_i) is pe[0]; sqrt branch fixed by the sheet function
    Series w = pe.sqrt_with(sheet_function(0.0));
    return w.inverse();
}

Series Curve::invw_series_at_infinity(int nterms) const {
    Series p = Series::constant(1.0, nterms);
    for (cplx e : branch_.points) {
        Series f(nterms);
        f[0] = 1.0;
        if (nterms > 1) f[1] = -e;
        p = p.mul(f);
    }
    Series w = p.sqrt_with(cplx(static_cast<double>(sign_ref_)));
    return w.inverse();
}

} // namespace fg
