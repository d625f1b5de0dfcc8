#pragma once

// Geodesic deviation in the parallel-transported frame and conjugate points.
//
// With J(0) = 0 and dJ/ds(0) = b_i for an eta-orthonormal basis b_i of the
// directions orthogonal to the geodesic, the fundamental matrix F(s) holds the
// components of the (n-1) Jacobi fields in that basis; conjugate points are
// zeros of det F.

#include "geom/geodesic.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geom {

struct JacobiOptions {
    double s_max = 10.0;
    int steps = 1024;
    double null_threshold = 0.05;   // reject |eta(v,v)| below this fraction of |v|^2
    double bracket_tol = 1e-6;      // bisection interval in arclength
    double det_tol = 1e-8;          // |det F| required at a reported conjugate point
    double dip_threshold = 1e-4;    // interpolated local minimum of |det| below this triggers refinement
};

struct JacobiField {
    GeodesicPath path;
    Eigen::VectorXd direction;        // unit frame vector at the origin
    double causal_sign = 1.0;         // sign of eta(direction, direction)
    double speed = 1.0;               // ds/dt along the path
    Eigen::MatrixXd transverse;       // n x (n-1), eta-orthonormal columns
    Eigen::VectorXd transverse_sign;  // eta(b_i, b_i)
    std::vector<double> s;            // arclength at samples
    std::vector<Eigen::MatrixXd> J;   // frame components, n x (n-1)
    std::vector<Eigen::MatrixXd> dJ;  // dJ/ds
    std::vector<Eigen::MatrixXd> fundamental;
    std::vector<double> det;
    std::vector<DenseTensor> curvature;  // frame Riemann at samples
    double s_searched = 0.0;          // last valid arclength (chart exit truncates)
    bool truncated = false;
    std::string stop_reason;
    double residual = 0.0;            // max |J'' - K J| from sample stencils
};

/// Unit direction (eta-normalised); throws ConfigError for near-null directions.
Eigen::VectorXd normalise_direction(const Eigen::VectorXd& v, const Signature& eta, double null_threshold = 0.05);

JacobiField integrate_jacobi(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& direction,
                             const JacobiOptions& opt = {});
JacobiField integrate_jacobi(const MetricSpec& spec, const FrameField& frame, const Eigen::VectorXd& direction,
                             const JacobiOptions& opt = {});

struct ConjugateReport {
    Eigen::VectorXd direction;
    std::optional<double> s_conjugate;
    std::string detector = "none";   // sign_change | grazing | none
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    double det_at_conjugate = 0.0;
    double curvature_magnitude = 0.0;  // max |R_ABCD| at the conjugate point
    double s_searched = 0.0;
    bool truncated = false;
    std::string stop_reason;
};

ConjugateReport find_conjugate_point(const MetricSpec& spec, const JacobiField& field, const JacobiOptions& opt = {});

/// Deterministic unit frame directions: equally spaced angles for n = 2, Halton
/// points mapped through Box-Muller otherwise. A nonzero seed applies a random
/// shift modulo 1 (Cranley-Patterson rotation). Near-null directions are skipped.
std::vector<Eigen::VectorXd> sample_directions(const Signature& eta, int count, std::uint64_t seed = 0,
                                               double null_threshold = 0.05);

struct ChartRadiusReport {
    std::optional<double> radius;
    int argmin = -1;
    std::vector<ConjugateReport> directions;
    double s_searched_min = 0.0;  // smallest searched arclength over directions
};

ChartRadiusReport normal_chart_radius(const MetricSpec& spec, const Eigen::VectorXd& origin, int n_dirs,
                                      std::uint64_t seed = 0, const JacobiOptions& opt = {});

}  // namespace geom
