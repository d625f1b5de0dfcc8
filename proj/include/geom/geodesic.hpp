#pragma once

// Radial geodesics u(t) = exp(t v) with a parallel-transported orthonormal frame.

#include "geom/curvature.hpp"

#include <string>
#include <vector>

namespace geom {

struct GeodesicSample {
    double t = 0.0;
    Eigen::VectorXd u;      // position
    Eigen::VectorXd du;     // du/dt
    Eigen::MatrixXd e_inv;  // coordinate components of the transported frame vectors (columns)
};

struct IntegratorStats {
    long rk4_steps = 0;
    int max_substeps = 1;   // largest per-interval subdivision used
    double max_error_estimate = 0.0;
};

struct GeodesicOptions {
    int steps = 1024;             // intervals of t in [0, 1]; samples are taken at every half interval
    double tol = 1e-12;           // per-interval step-doubling tolerance (relative)
    int max_substeps = 1 << 12;   // subdivision limit before reporting step-size underflow
    bool allow_truncation = false;  // stop at a chart exit instead of throwing
};

struct GeodesicPath {
    Eigen::VectorXd origin;
    Eigen::VectorXd z;      // initial velocity in frame components
    Signature eta = Signature::euclidean(2);
    int steps = 0;
    std::vector<GeodesicSample> samples;  // 2 * steps + 1 when complete
    IntegratorStats stats;
    bool truncated = false;
    double t_end = 1.0;     // last valid sample time
    std::string stop_reason;

    double dt() const { return 1.0 / steps; }
    double sample_spacing() const { return 0.5 / steps; }
};

/// Integrates u'' + Gamma(u', u') = 0 from `origin` with u'(0) = E^{-1} z and transports
/// the frame E (defaults to vielbein_at(origin)). Throws ChartValidityError on a chart
/// exit before t = 1 unless truncation is allowed, and NumericalQualityError on step underflow.
GeodesicPath integrate_radial_geodesic(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& z,
                                       const GeodesicOptions& opt = {});
GeodesicPath integrate_radial_geodesic(const MetricSpec& spec, const FrameField& frame, const Eigen::VectorXd& z,
                                       const GeodesicOptions& opt = {});

struct PathChecks {
    double geodesic_residual = 0.0;  // max |u'' + Gamma u' u'|
    double frame_residual = 0.0;     // max |e_inv^T g e_inv - eta|
    double transport_residual = 0.0; // max |dE/dt + Gamma u' E|
    double origin_residual = 0.0;    // |u(0) - origin|
};
/// Residuals from 5-point stencils on the sampled path.
PathChecks check_path(const MetricSpec& spec, const GeodesicPath& path);

/// Frame Riemann tensor (library sign convention) in the transported frame at every sample.
std::vector<DenseTensor> path_frame_curvature(const MetricSpec& spec, const GeodesicPath& path);

/// Fixed-step RK4 endpoint of the geodesic with u'(0) = v (coordinate components),
/// returned as the displacement u(1) - origin. Used by the pullback oracle.
Eigen::VectorXd geodesic_displacement(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& v,
                                      int steps);

}  // namespace geom
