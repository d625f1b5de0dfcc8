#pragma once

// Levi-Civita connection and curvature of a metric chart.
//
// Sign convention: the Riemann tensor is stored with the sign for which a
// space of constant curvature K has, in an orthonormal frame,
//     R_ABCD = K (eta_AD eta_BC - eta_AC eta_BD).
// The Ricci tensor R_bc = R^a_bca is positive on spheres, so the scalar
// curvature of a constant-curvature space is n(n-1)K.

#include "geom/metric.hpp"

#include <optional>
#include <vector>

namespace geom {

struct CurvatureBundle {
    Eigen::VectorXd point;
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
    FrameField frame;
    DenseTensor christoffel;     // Gamma^a_bc
    DenseTensor riemann_lower;   // R_abcd (coordinate components)
    DenseTensor riemann_coord;   // R^a_bcd
    DenseTensor riemann_frame;   // R_ABCD
    DenseTensor ricci;           // R_ab
    double scalar = 0.0;
};

/// Gamma^a_bc at a point.
DenseTensor christoffel(const MetricSpec& spec, std::span<const double> x, DerivativeMode mode = DerivativeMode::Dual);
inline DenseTensor christoffel(const MetricSpec& spec, const Eigen::VectorXd& x, DerivativeMode mode = DerivativeMode::Dual) {
    return christoffel(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), mode);
}

/// Christoffel symbols from precomputed metric derivatives.
DenseTensor christoffel_from(const MetricDerivatives& d, const Eigen::MatrixXd& g_inv);

CurvatureBundle riemann(const MetricSpec& spec, std::span<const double> x, DerivativeMode mode = DerivativeMode::Dual);
inline CurvatureBundle riemann(const MetricSpec& spec, const Eigen::VectorXd& x, DerivativeMode mode = DerivativeMode::Dual) {
    return riemann(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), mode);
}

/// All-lower coordinate Riemann tensor and Christoffel symbols only (no frame), for use along paths.
struct LocalCurvature {
    Eigen::MatrixXd g;
    DenseTensor christoffel;
    DenseTensor riemann_lower;
};
LocalCurvature local_curvature(const MetricSpec& spec, std::span<const double> x);

/// R_ABCD = R_abcd e_inv(a,A) e_inv(b,B) e_inv(c,C) e_inv(d,D) for any frame whose
/// coordinate components are the columns of `e_inv`.
DenseTensor to_frame_components(const DenseTensor& riemann_lower, const Eigen::MatrixXd& e_inv);

/// Residuals of the structural identities carried by a bundle.
struct CurvatureChecks {
    double christoffel_symmetry = 0.0;
    double antisym_first_pair = 0.0;
    double antisym_second_pair = 0.0;
    double pair_symmetry = 0.0;
    double first_bianchi = 0.0;
    double metric_compatibility = 0.0;  // max |nabla_c g_ab|
    double frame_consistency = 0.0;     // lowered coordinate Riemann vs frame Riemann
};
CurvatureChecks check_bundle(const MetricSpec& spec, const CurvatureBundle& b);

/// Max cyclic sum |R_ABCD + R_ACDB + R_ADBC| over all index tuples.
double first_bianchi_residual(const DenseTensor& r);

/// K(eta_AD eta_BC - eta_AC eta_BD) as a frame tensor.
DenseTensor constant_curvature_tensor(const Signature& eta, double K);

/// K = R_0101 / (-eta_00 eta_11), or 0 when every component is within `tol`.
double extract_curvature_scale(const DenseTensor& riemann_frame, const Signature& eta, const Tolerance& tol = {});

struct EinsteinReport {
    bool is_einstein = false;
    bool is_constant_curvature = false;
    double einstein_deviation = 0.0;           // max |R_ab - (R/n) g_ab|
    double constant_curvature_deviation = 0.0; // max |R_ABCD - K(...)| with K per point
    double curvature_scale_spread = 0.0;       // max |K_i - K_0|
    double curvature_scale = 0.0;              // K at the first sample
    double max_ricci = 0.0;
    std::vector<double> scalars;               // R per sample
};
EinsteinReport einstein_space_check(const MetricSpec& spec, const std::vector<Eigen::VectorXd>& points,
                                    const Tolerance& tol = {});

/// Conformal factor field psi on a base chart g, at one point.
struct ConformalPair {
    Eigen::VectorXd point;
    double psi = 0.0;
    Eigen::VectorXd gradient;   // psi_,mu
    Eigen::MatrixXd hessian;    // psi_;mu nu (covariant, base metric)
    double delta1 = 0.0;        // g^mu nu psi_,mu psi_,nu
    Eigen::MatrixXd psi_munu;   // psi_;mu nu - psi_,mu psi_,nu
    double delta2 = 0.0;        // g^mu nu psi_;mu nu
};
ConformalPair conformal_pair_at(const MetricSpec& g, const Expr& psi, std::span<const double> x);

struct ConformalReport {
    double relation_residual = 0.0;      // max |g' - exp(2 psi) g|
    double general_residual = 0.0;       // psi_mu nu against the full identity
    double einstein_residual = 0.0;      // Einstein-space form, curvature sign convention `ricci_sign`
    double einstein_residual_flipped = 0.0;  // same form with the opposite curvature sign
    double delta1_consistency = 0.0;     // Delta_1 recomputed from the stored gradient
    double ricci_sign = -1.0;
    bool target_is_einstein = false;
    bool passed = false;
};

/// Compares psi_mu nu computed from psi directly with its expression in terms of
/// the curvatures of g and g' = exp(2 psi) g. The Einstein-space form
///     psi_mu nu = -R_mu nu/(n-2) + (R/(2(n-1)(n-2)) + R' exp(2 psi)/(2n(n-1)) - Delta_1/2) g_mu nu
/// holds when the curvatures are taken with sign `ricci_sign` relative to this
/// library's convention; -1 is the sign that satisfies it.
ConformalReport conformal_identity_check(const MetricSpec& g, const Expr& psi, const MetricSpec& gprime,
                                         const std::vector<Eigen::VectorXd>& points, const Tolerance& tol = Tolerance(1e-6, 1e-6),
                                         double ricci_sign = -1.0);

}  // namespace geom
