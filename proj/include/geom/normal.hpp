#pragma once

// Normal-coordinate expansion along radial geodesics: the coefficient fields
// A_ACD(t) and B_ABCD(t) of the pulled-back coframe
//     w^A = t dz^A + A^A_BC z^B dz^C,      A_ACD = z^B B_ABCD,
// the metric they reconstruct at t = 1, the conformal factor, and an
// independent pullback oracle obtained by shooting geodesics.

#include "geom/geodesic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace geom {

struct NormalExpansion {
    GeodesicPath path;
    std::vector<double> t_grid;    // t_k = k / steps
    std::vector<DenseTensor> A;    // A_ACD(t_k)
    std::vector<DenseTensor> B;    // B_ABCD(t_k)
    std::vector<DenseTensor> dA;   // dA/dt
    std::vector<DenseTensor> dB;
    double error_estimate_A = 0.0; // Richardson estimate at t = 1 from a step-doubled run
    double error_estimate_B = 0.0;

    const Eigen::VectorXd& z() const { return path.z; }
    const Signature& eta() const { return path.eta; }
};

struct ExpansionChecks {
    double A_at_origin = 0.0;          // max |A(0)|
    double A_antisymmetry = 0.0;       // max |A_ACD + A_ADC|
    double B_antisym_first = 0.0;      // max |B_ABCD + B_BACD|
    double B_antisym_second = 0.0;     // max |B_ABCD + B_ABDC|
    double B_pair_symmetry = 0.0;      // max |B_ABCD - B_CDAB|, grows with |z| where curvature varies along the path
    double B_first_bianchi = 0.0;      // max cyclic sum over BCD
    double A_equals_zB = 0.0;          // max |A_ACD - z^B B_ABCD|
};

/// Integrates the second-order systems for A and B with zero initial data on
/// the fixed RK4 grid of the path (curvature taken at path samples). Throws
/// NumericalQualityError if a structurally guaranteed identity drifts above 1e-6.
NormalExpansion solve_AB(const MetricSpec& spec, const GeodesicPath& path);
NormalExpansion solve_AB(const MetricSpec& spec, const GeodesicPath& path, const std::vector<DenseTensor>& frame_curvature);

ExpansionChecks check_expansion(const NormalExpansion& e);

/// Coefficients of the quadratic form
///     ds^2 = eta dz dz + 1/2 { b * w_B * B_ABCD + aa * eta^MN A_MBA A_NCD } P^AB Q^CD,
///     P^AB = z^B dz^A - z^A dz^B,  Q^CD = z^C dz^D - z^D dz^C,
/// with w_B = eta_BB when `signature_weight` is set and 1 otherwise.
struct LineElementConvention {
    double b = 1.0;
    double aa = 0.5;
    bool signature_weight = false;

    /// The exact form, validated against the pullback oracle.
    static LineElementConvention exact() { return {}; }
    /// Coefficients as commonly printed: 1/2 on B weighted by eta_BB, 1 on the AA term.
    static LineElementConvention printed() { return {0.5, 1.0, true}; }
    std::string describe() const;
};

/// X_ABCD of the quadratic form at t = 1.
DenseTensor line_element_kernel(const NormalExpansion& e, const LineElementConvention& c = {});

/// Metric components in normal coordinates at z = e.z() (t = 1).
Eigen::MatrixXd reconstruct_metric(const NormalExpansion& e, const LineElementConvention& c = {});
/// Same metric as M^T eta M with M = I + A z (frame form of the coframe).
Eigen::MatrixXd reconstruct_metric_from_coframe(const NormalExpansion& e);

/// max |g(z) z - eta z|.
double gauss_radial_residual(const Eigen::MatrixXd& g_normal, const Eigen::VectorXd& z, const Signature& eta);

struct PullbackOptions {
    int steps = 512;             // fixed RK4 steps per shot
    double rel_step = 1e-4;      // differentiation step relative to max(1, |z|)
    std::optional<double> chart_radius;  // reject |z| at or beyond this radius
};

/// Normal-coordinate metric D^T g(exp z) D with D the Jacobian of z -> exp_origin(z),
/// by 4th-order central differences of shot geodesics.
Eigen::MatrixXd exp_map_pullback(const MetricSpec& spec, const FrameField& origin_frame, const Eigen::VectorXd& z,
                                 const PullbackOptions& opt = {});
std::vector<Eigen::MatrixXd> exp_map_pullback(const MetricSpec& spec, const Eigen::VectorXd& origin,
                                              const std::vector<Eigen::VectorXd>& z_grid, const PullbackOptions& opt = {});

/// Second-order expansion eta_AB + (1/3) R_AcBd z^c z^d (library sign convention).
Eigen::MatrixXd normal_metric_taylor(const DenseTensor& riemann_frame_origin, const Signature& eta, const Eigen::VectorXd& z);

/// L^AB = z^B v^A - z^A v^B.
Eigen::MatrixXd classical_angular_momentum(const Eigen::VectorXd& z, const Eigen::VectorXd& dz_ds);

struct ConformalFactor {
    Eigen::VectorXd z;
    Eigen::VectorXd velocity;   // dz/ds, normalised with the reconstructed metric
    Eigen::MatrixXd L;          // classical angular momentum
    double exp_minus_2sigma = 1.0;
    double sigma = 0.0;
    double line_element_residual = 0.0;  // |exp(2 sigma) eta(v,v) - g(v,v)| for the unit velocity
    LineElementConvention convention;
};

/// exp(-2 sigma) = 1 + s X_ABCD L^AB L^CD with s the sign of the line element along `dz`.
/// Throws ChartValidityError when the bracket is not positive.
ConformalFactor conformal_factor(const NormalExpansion& e, const Eigen::VectorXd& dz,
                                 const LineElementConvention& c = {});

}  // namespace geom
