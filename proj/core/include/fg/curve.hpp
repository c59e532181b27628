#pragma once

#include "fg/types.hpp"
#include "fg/series.hpp"

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace fg {

struct BranchSet {
    std::vector<cplx> points;  // sorted lexicographically by (Re, Im)
    int genus = 0;
    bool negation_closed = false;
    bool conjugation_closed = false;
};

struct SurfacePoint {
    cplx lambda;
    int sheet = 0;  // +1 / -1; 0 when at a branch point
    cplx w;
    bool at_branch = false;
    bool at_infinity = false;  // one of the two points over lambda = infinity
};

struct CyclePath {
    enum class Kind { Alpha, Beta };
    Kind kind;
    int index;                   // 1-based
    std::vector<cplx> vertices;  // closed polyline, first == last
    int start_sheet = 1;
};

struct PeriodData {
    Eigen::MatrixXcd raw_A;          // raw_A(k,m) = integral of lambda^m dlambda/w over alpha_{k+1}
    Eigen::MatrixXcd raw_B;          // same over beta cycles
    Eigen::MatrixXcd normalization;  // C with omega_j = sum_m C(j,m) lambda^m dlambda/w
    Eigen::MatrixXcd Omega;          // beta periods of the normalized forms
};

/// Hyperelliptic curve w^2 = prod (lambda - e_i) with a fixed cut system,
/// deterministic sheet convention and canonical homology basis.
///
/// Cuts pair consecutive branch points after lexicographic sort; the sheet
/// function \hat w is the product of per-cut square roots, holomorphic off
/// the cuts, with sheet +1 fixed by Re w >= 0 at the reference point.
class Curve {
public:
    static Curve build(std::vector<cplx> points);

    int genus() const { return branch_.genus; }
    const BranchSet& branch() const { return branch_; }
    int num_cuts() const { return static_cast<int>(cuts_.size()); }
    double diameter() const { return diam_; }
    double path_margin() const { return path_margin_; }
    cplx lambda_ref() const { return lambda_ref_; }

    struct Cut {
        cplx a, b, mid;
        double clearance;  // safe offset distance around this cut
    };
    const std::vector<Cut>& cuts() const { return cuts_; }

    /// Value of the sheet-+1 branch of w at lambda (off the cuts).
    cplx sheet_function(cplx lambda) const;

    SurfacePoint lift(cplx lambda, int sheet) const;
    SurfacePoint lift_branch(int i) const;

    /// Analytic continuation of w along a polyline from `start`; the path must
    /// stay path_margin() away from every branch point.
    SurfacePoint continue_along(const std::vector<cplx>& polyline, const SurfacePoint& start) const;

    /// Number of cut crossings of the open segment [p,q] (used for sheet tracking).
    int segment_crossings(cplx p, cplx q) const;
    /// Sorted crossing parameters t in (0,1] of segment [p,q] against all cuts.
    std::vector<double> crossing_params(cplx p, cplx q) const;

    /// Deterministic polyline from `from` to `to` that crosses no cut and
    /// keeps clear of branch points (arc detours).
    std::vector<cplx> route(cplx from, cplx to, double stagger = 1.0) const {
        return route_leg(from, to, stagger);
    }

    /// g alpha cycles followed by g beta cycles.
    const std::vector<CyclePath>& homology() const;
    /// Numerically computed intersection matrix in the (alpha..., beta...) order.
    Eigen::MatrixXi intersection_matrix() const;

    const PeriodData& periods() const;
    PeriodData compute_periods(double abs_tol) const;

    /// Integrate f(lambda, w) dlambda along a polyline, tracking the sheet
    /// across cuts. Returns the integral; *end_sheet receives the final sheet.
    Eigen::VectorXcd integrate_form(const std::vector<cplx>& poly, int start_sheet,
                                    const std::function<Eigen::VectorXcd(cplx, cplx)>& f,
                                    double abs_tol, int dim, int* end_sheet = nullptr) const;

    /// Same with the fixed 15-point rule per sub-segment (fast, non-adaptive).
    Eigen::VectorXcd integrate_form_fixed(const std::vector<cplx>& poly, int start_sheet,
                                          const std::function<Eigen::VectorXcd(cplx, cplx)>& f,
                                          int dim, int* end_sheet = nullptr) const;

    /// Taylor series of 1/\hat w at lambda = 0 (requires 0 off the branch locus).
    Series invw_series_at_zero(int nterms) const;
    /// Series in mu = 1/lambda of lambda^{g+1} / \hat w at infinity; constant
    /// term 1/sign so that \hat w ~ sign * lambda^{g+1}.
    Series invw_series_at_infinity(int nterms) const;

    /// Polynomial prod (lambda - e_i) evaluated at lambda.
    cplx defining_poly(cplx lambda) const;

    int sign_at_infinity() const { return sign_ref_; }

private:
    Curve() = default;
    void build_cuts();
    void build_homology() const;
    std::vector<cplx> route_leg(cplx p, cplx q, double stagger) const;

    BranchSet branch_;
    std::vector<Cut> cuts_;
    double diam_ = 0.0;
    double path_margin_ = 0.0;
    cplx lambda_ref_;
    int sign_ref_ = 1;  // sign s.t. sheet +1 has w = sign_ref * prod s_j

    mutable std::optional<std::vector<CyclePath>> homology_;
    mutable std::optional<PeriodData> periods_;
};

/// Oracle-independent builder: product of per-cut square roots (no sign fix).
cplx cut_sqrt(cplx lambda, cplx a, cplx b);

} // namespace fg
