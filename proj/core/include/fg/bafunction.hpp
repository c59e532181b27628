#pragma once

#include "fg/abelmap.hpp"

#include <map>
#include <memory>
#include <optional>

namespace fg {

enum class SpectralMode { GENERIC_2D, MKDV_1D, GENUS0 };

using TimeMap = std::map<int, double>;  // flow index l -> time t_l

struct SpectralConfig {
    SpectralMode mode = SpectralMode::GENUS0;
    std::vector<cplx> branch_points;
    // explicit divisor as (lambda, sheet) pairs; empty => construct an
    // admissible divisor via the involution conditions
    std::vector<std::pair<cplx, int>> divisor_points;
    std::vector<int> flows{1};  // l values with nonzero t_l (1 => t_1)
    cplx genus0_d{1.0, 0.0};    // rational-curve parameter
    unsigned seed = 20260808;
};

struct PhaseData {
    cplx Phi1{0.0}, Phi2{0.0}, Psi{0.0};
    Eigen::VectorXcd F1, F2;
};

struct AsymptoticCoeffs {
    cplx xi11_plus{0.0}, xi21_plus{0.0};
    cplx xi11_minus{0.0}, xi21_minus{0.0};
};

struct AdmissibilityReport {
    double sigma_residual = 0.0;  // least-squares misfit of the sigma-condition form
    double tau_residual = 0.0;    // same for the tau-condition form
    bool admissible = false;
};

/// Evaluation cache for a fixed point P: Abel image and all eta integrals
/// along one canonical path (one homotopy class, reused for every theta
/// argument as the construction requires).
struct PointContext {
    SurfacePoint P;
    Eigen::VectorXcd A;
    std::map<std::pair<int, int>, cplx> eta;  // (l, sign) -> int_{P0}^{P} eta_l^sign
};

/// Finite-gap spectral data (Gamma, infinity_pm, k_pm, D) with every cache the
/// explicit theta formulas need: periods, Riemann constants, odd half-period,
/// the divisors Q and R, second-kind differentials and their constants.
class SpectralData {
public:
    static SpectralData make(const SpectralConfig& cfg);

    SpectralMode mode() const { return mode_; }
    int genus() const;
    const Curve& curve() const { return *curve_; }
    const AbelMap& abel_map() const { return *am_; }
    const LocalParams& local_params() const { return lp_; }
    const Divisor& divisor() const { return D_; }
    const std::vector<int>& flow_orders() const { return flows_; }
    cplx genus0_parameter() const { return d_; }

    const Eigen::VectorXcd& delta() const { return delta_; }
    const Eigen::VectorXcd& epsilon() const { return eps_; }
    const Divisor& divisor_Q() const { return Q_; }
    const Divisor& divisor_R() const { return R_; }
    const Eigen::VectorXcd& abel_infinity_plus() const { return A_inf_plus_; }
    const Eigen::VectorXcd& abel_infinity_minus() const { return A_inf_minus_; }
    const EtaConstants& eta_constants_of(int l, int sign) const;
    const Eigen::VectorXcd& derivative_vector_plus() const { return dAdk_plus_; }

    cplx k_plus(cplx lambda) const { return lp_.k(+1, lambda); }
    cplx k_minus(cplx lambda) const { return lp_.k(-1, lambda); }

    /// The meromorphic function of the 1-D reduction (poles at the marked
    /// points, lambda = +i k+ and -i k- there); WrongMode when absent.
    cplx reduction_lambda(const SurfacePoint& P) const;

    /// Evaluation caches. `point` uses the canonical path; `point_with_loop`
    /// prepends a homology cycle (path-class change experiments);
    /// `point_near` places P on the stored approach toward a marked point.
    PointContext point(const SurfacePoint& P) const;
    PointContext point_with_loop(const SurfacePoint& P, const CyclePath& loop) const;

    std::pair<cplx, cplx> psi(const PointContext& pc, cplx z, const TimeMap& t) const;
    PhaseData phase_data(const PointContext& pc, cplx z, const TimeMap& t) const;
    cplx potential(cplx z, const TimeMap& t) const;
    AsymptoticCoeffs asymptotic_coeffs(cplx z, const TimeMap& t) const;

    /// Least-squares admissibility checker for an arbitrary degree-(g+1) divisor.
    AdmissibilityReport check_divisor(const Divisor& D) const;

    /// sigma / tau involutions of surface points for the mode conventions.
    SurfacePoint sigma(const SurfacePoint& P) const;
    SurfacePoint tau(const SurfacePoint& P) const;

private:
    SpectralData() = default;
    void build_caches(std::mt19937_64& rng);
    PointContext point_along(const std::vector<cplx>& path) const;
    AsymptoticCoeffs extract_side(int side, cplx z, const TimeMap& t) const;

    SpectralMode mode_ = SpectralMode::GENUS0;
    cplx d_{1.0, 0.0};
    std::shared_ptr<const Curve> curve_;
    std::shared_ptr<const AbelMap> am_;
    LocalParams lp_;
    Divisor D_;
    std::vector<int> flows_;
    int sigma_w_sign_ = 1;
    int tau_w_sign_ = -1;

    Eigen::VectorXcd delta_, eps_;
    Divisor Q_, R_;
    Eigen::VectorXcd A_inf_plus_, A_inf_minus_;
    std::vector<Eigen::VectorXcd> A_D_, A_Q_, A_R_;
    Eigen::VectorXcd AQ_sum_, AR_sum_;
    std::map<std::pair<int, int>, EtaDifferential> etas_;
    std::map<std::pair<int, int>, EtaConstants> eta_consts_;
    Eigen::VectorXcd dAdk_plus_;
    cplx logC_{0.0};

    // approach charts toward the marked points
    struct Chart {
        Approach ap;
        Eigen::VectorXcd A_anchor;      // Abel image of the anchor
        std::vector<Series> A_series;   // per-component dq-density series of omega
        std::map<std::pair<int, int>, cplx> eta_anchor;  // integrals P0 -> anchor
        std::map<std::pair<int, int>, Series> eta_series;
    };
    Chart chart_plus_, chart_minus_;
    void build_chart(Chart& ch, int side);
    Eigen::VectorXcd chart_abel(const Chart& ch, int side, cplx q) const;
    cplx chart_eta_hat(const Chart& ch, int side, int l, int sign, cplx q) const;
};

/// Construct an admissible divisor (involution compatibility) for the given
/// curve and local parameters; `splits_tried` reports the search order index.
Divisor admissible_divisor(const AbelMap& am, const LocalParams& lp, int sigma_w_sign,
                           int tau_w_sign, SpectralMode mode, int* split_index = nullptr);

} // namespace fg
