#pragma once

#include "fg/curve.hpp"
#include "fg/theta.hpp"

#include <functional>
#include <random>

namespace fg {

/// Marked point: a finite point (lambda0, sheet) or one of the two points
/// over lambda = infinity.
struct MarkedPoint {
    bool at_infinity = false;
    cplx lambda0{0.0};
    int sheet = 1;
};

/// Local-parameter conventions at the two marked points.
///   finite:    k = coef / (lambda - lambda0), so 1/k = (lambda - lambda0)/coef
///   infinity:  k = coef * lambda
struct LocalParams {
    MarkedPoint plus, minus;
    cplx k_coef_plus{1.0}, k_coef_minus{-1.0};

    const MarkedPoint& point(int sign) const { return sign > 0 ? plus : minus; }
    cplx coef(int sign) const { return sign > 0 ? k_coef_plus : k_coef_minus; }
    cplx k(int sign, cplx lambda) const {
        const MarkedPoint& mp = point(sign);
        return mp.at_infinity ? coef(sign) * lambda : coef(sign) / (lambda - mp.lambda0);
    }
};

struct Divisor {
    std::vector<SurfacePoint> points;
    int degree() const { return static_cast<int>(points.size()); }
};

/// Meromorphic 1-form  (S(lambda) + T(lambda)/w) dlambda  with Laurent
/// polynomial S, T. Second-kind differentials and the involution-condition forms are
/// stored this way.
struct FormLC {
    std::vector<int> w_exps;   // exponents m of lambda^m dlambda / w
    Eigen::VectorXcd w_coefs;
    std::vector<int> p_exps;   // exponents m of lambda^m dlambda
    Eigen::VectorXcd p_coefs;

    cplx eval_S(cplx lambda) const;
    cplx eval_T(cplx lambda) const;
    cplx density(cplx lambda, cplx w) const { return eval_S(lambda) + eval_T(lambda) / w; }
};

struct EtaDifferential {
    int l = 1;
    int sign = +1;
    FormLC form;
    double fit_residual = 0.0;
};

struct EtaConstants {
    cplx a{0.0}, b{0.0};
    Eigen::VectorXcd U;  // beta-period vector, (1/2 pi i) * integrals
};

/// Radial approach data toward a marked point: a fixed path from the base
/// point to an anchor, then straight radial hops; fixes the homotopy class of
/// all asymptotic evaluations near that marked point.
struct Approach {
    MarkedPoint mp;
    std::vector<cplx> path_to_anchor;  // lambda polyline from the base point
    SurfacePoint anchor;
    std::vector<SurfacePoint> points;  // anchor-first geometric sequence toward mp
};

/// Abel map with an explicit deterministic path class: base point at the lift
/// of lambda_ref on sheet +1, straight canonical routes with arc detours, and
/// a fixed sheet-flip loop around the first branch point.
class AbelMap {
public:
    explicit AbelMap(const Curve& curve, double quad_tol = 1e-12);

    const Curve& curve() const { return *curve_; }
    const PeriodData& periods() const { return pd_; }
    const ThetaContext& theta_ctx() const { return tctx_; }
    const SurfacePoint& base_point() const { return P0_; }
    double quad_tol() const { return tol_; }

    /// Canonical lambda-route from the base point to (lambda, sheet); a flip
    /// loop is prepended when the direct route lands on the wrong sheet.
    std::vector<cplx> canonical_path(cplx lambda, int sheet) const;

    Eigen::VectorXcd abel(const SurfacePoint& P) const;
    Eigen::VectorXcd abel(const Divisor& D) const;
    Eigen::VectorXcd abel_infinity(int sheet) const;
    /// d A / d lambda on the sheet of P.
    Eigen::VectorXcd abel_derivative(const SurfacePoint& P) const;

    /// Integrate several (S + T/w) dlambda forms along one canonical path.
    Eigen::VectorXcd integrate_forms_to(const SurfacePoint& P,
                                        const std::vector<const FormLC*>& forms) const;
    /// Same along an arbitrary polyline from a known start point.
    Eigen::VectorXcd integrate_forms_along(const std::vector<cplx>& poly, int start_sheet,
                                           const std::vector<const FormLC*>& forms,
                                           double tol) const;

    /// Nearest-lattice reduction of v in Z^g + Omega Z^g.
    Eigen::VectorXcd lattice_reduce(const Eigen::VectorXcd& v) const;
    double lattice_distance(const Eigen::VectorXcd& v) const;

    /// Abel image of the hyperelliptic involution of the base point (used to
    /// evaluate the opposite sheet during scans).
    const Eigen::VectorXcd& involution_offset() const { return c_invol_; }

    Approach approach(const MarkedPoint& mp, int npoints = 8, double ratio = 2.0) const;

    /// Zeros of P -> theta(A(P) - t); throws WrongZeroCount unless `expected`
    /// zeros are found (after one window enlargement).
    Divisor theta_zeros(const Eigen::VectorXcd& t, int expected) const;

    /// Vector of Riemann constants from the defining zero-locus property.
    Eigen::VectorXcd riemann_constants(std::mt19937_64& rng) const;

    /// Divisor S of degree g with A(S) = u - delta mod lattice.
    Divisor jacobi_invert(const Eigen::VectorXcd& u, const Eigen::VectorXcd& delta) const;

private:
    void scan_window(double& half, cplx& center) const;
    std::function<Eigen::VectorXcd(cplx, cplx)> omega_density() const;
    cplx centroid() const;

    const Curve* curve_;
    double tol_;
    PeriodData pd_;
    ThetaContext tctx_;
    SurfacePoint P0_;
    std::vector<cplx> flip_loop_;  // closed loop at lambda_ref around branch point 0
    Eigen::VectorXcd c_invol_;
};

/// Local expansion rows of the ansatz differentials at a marked point: the
/// coefficient of q^j in the dq-density of lambda^m dlambda (optionally /w).
class ChartExpander {
public:
    ChartExpander(const Curve& cv, const LocalParams& lp, int sign, int nterms);
    cplx coef(int m, bool with_w, int j) const;
    int nterms() const { return nterms_; }

private:
    bool at_infinity_;
    int sheet_;
    int genus_;
    int nterms_;
    cplx scale_;   // finite: lambda = scale*q ; infinity: lambda = scale/q
    Series invw_;  // 1/\hat w series (at 0 in lambda, at infinity in mu)
};

/// Differential with prescribed principal parts (orders q^{-maxorder}..q^{-1})
/// at the two marked points, optionally alpha-normalized; least-squares over
/// the standard ansatz, solved in extended precision. With constrain_residues
/// false the q^{-1} coefficients are left free (they are for the
/// admissibility families; the constant-potential rational-curve form carries one).
struct PoleSpec {
    int maxorder = 2;
    Eigen::VectorXcd plus_targets;   // index 0 -> order -maxorder, ..., last -> order -1
    Eigen::VectorXcd minus_targets;
    bool constrain_residues = true;
};
FormLC solve_principal_parts(const AbelMap& am, const LocalParams& lp, const PoleSpec& spec,
                             bool zero_alpha_periods, double* residual = nullptr);

/// Taylor coefficients (orders 0..nterms-1 of the dq-density) of `form` at the
/// marked point `sign`, with d(k^l) subtracted first when subtract_l > 0.
Series form_chart_series(const AbelMap& am, const LocalParams& lp, const FormLC& form, int sign,
                         int subtract_l, int nterms);

/// Second-kind differential with only pole at the marked point `sign`,
/// principal part d(k^l), vanishing alpha-periods.
EtaDifferential eta_differential(const AbelMap& am, const LocalParams& lp, int l, int sign);

/// Beta-period vector (1/2pi i) * oint_beta eta.
Eigen::VectorXcd beta_periods(const AbelMap& am, const EtaDifferential& eta);

/// Constants a, b of the normalized Abelian integral of eta (Richardson
/// limits along the fixed approaches) plus the beta periods.
EtaConstants eta_constants(const AbelMap& am, const LocalParams& lp, const EtaDifferential& eta,
                           const Approach& own, const Approach& other);

/// Neville extrapolation of v(q) to q = 0.
cplx extrapolate_to_zero(const std::vector<cplx>& q, const std::vector<cplx>& v,
                         double* err_estimate = nullptr);

} // namespace fg
