#include "geom/geodesic.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace geom {

namespace {

// Gamma^a_bc as a flat array (a, b, c) row-major; throws DomainError outside the chart.
std::vector<double> gamma_at(const MetricSpec& spec, const Eigen::VectorXd& x) {
    DenseTensor g = christoffel(spec, x);
    return {g.data().begin(), g.data().end()};
}

inline double G(const std::vector<double>& gm, int n, int a, int b, int c) {
    return gm[static_cast<std::size_t>((a * n + b) * n + c)];
}

// State layout: u (n), du (n), E (n x n, column-major: column A is frame vector A).
struct Layout {
    int n;
    Eigen::Index size() const { return 2 * n + n * n; }
};

Eigen::VectorXd rhs(const MetricSpec& spec, int n, const Eigen::VectorXd& y) {
    Eigen::VectorXd u = y.head(n);
    if (!spec.in_domain(std::span<const double>(u.data(), static_cast<std::size_t>(n))))
        throw ChartValidityError("geodesic left the chart domain");
    std::vector<double> gm = gamma_at(spec, u);
    Eigen::VectorXd f(y.size());
    f.head(n) = y.segment(n, n);
    for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) acc += G(gm, n, a, b, c) * y[n + b] * y[n + c];
        f[n + a] = -acc;
    }
    for (int A = 0; A < n; ++A)
        for (int a = 0; a < n; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) acc += G(gm, n, a, b, c) * y[n + b] * y[2 * n + A * n + c];
            f[2 * n + A * n + a] = -acc;
        }
    return f;
}

template <class F>
Eigen::VectorXd rk4(F&& f, Eigen::VectorXd y, double h, int m) {
    const double s = h / m;
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd k1 = f(y);
        Eigen::VectorXd k2 = f(y + 0.5 * s * k1);
        Eigen::VectorXd k3 = f(y + 0.5 * s * k2);
        Eigen::VectorXd k4 = f(y + s * k3);
        y += (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

GeodesicSample unpack(int n, double t, const Eigen::VectorXd& y) {
    GeodesicSample s;
    s.t = t;
    s.u = y.head(n);
    s.du = y.segment(n, n);
    s.e_inv = Eigen::Map<const Eigen::MatrixXd>(y.data() + 2 * n, n, n);
    return s;
}

}  // namespace

GeodesicPath integrate_radial_geodesic(const MetricSpec& spec, const FrameField& frame, const Eigen::VectorXd& z,
                                       const GeodesicOptions& opt) {
    const int n = spec.dim();
    if (z.size() != n) throw ConfigError("direction has wrong dimension");
    if (!z.allFinite()) throw ConfigError("direction must be finite");
    if (opt.steps < 2) throw ConfigError("geodesic needs at least 2 steps");
    spec.require_in_domain(std::span<const double>(frame.point.data(), static_cast<std::size_t>(n)));

    GeodesicPath path;
    path.origin = frame.point;
    path.z = z;
    path.eta = spec.signature();
    path.steps = opt.steps;

    Eigen::VectorXd y(Layout{n}.size());
    y.head(n) = frame.point;
    y.segment(n, n) = frame.e_inv * z;
    y.tail(n * n) = Eigen::Map<const Eigen::VectorXd>(frame.e_inv.data(), n * n);

    auto f = [&](const Eigen::VectorXd& s) {
        path.stats.rk4_steps += 1;
        return rhs(spec, n, s);
    };
    const int intervals = 2 * opt.steps;
    const double h = 1.0 / intervals;
    path.samples.reserve(static_cast<std::size_t>(intervals + 1));
    path.samples.push_back(unpack(n, 0.0, y));
    for (int k = 0; k < intervals; ++k) {
        const double t0 = k * h;
        try {
            int m = 1;
            Eigen::VectorXd coarse = rk4(f, y, h, m);
            for (;;) {
                Eigen::VectorXd fine = rk4(f, y, h, 2 * m);
                const double err = (fine - coarse).lpNorm<Eigen::Infinity>() / (1.0 + fine.lpNorm<Eigen::Infinity>());
                if (err <= opt.tol || !std::isfinite(err)) {
                    if (!std::isfinite(err) || !fine.allFinite()) throw NumericalQualityError("non-finite geodesic state");
                    path.stats.max_error_estimate = std::max(path.stats.max_error_estimate, err);
                    path.stats.max_substeps = std::max(path.stats.max_substeps, 2 * m);
                    y = fine;
                    break;
                }
                m *= 2;
                if (m > opt.max_substeps) {
                    std::ostringstream os;
                    os << "geodesic step-size underflow near t = " << t0;
                    throw NumericalQualityError(os.str());
                }
                coarse = fine;
            }
        } catch (const GeomError& e) {
            const bool exit = dynamic_cast<const ChartValidityError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
                              dynamic_cast<const NumericalQualityError*>(&e);
            if (!exit) throw;
            if (!opt.allow_truncation) {
                std::ostringstream os;
                os << e.what() << " (t = " << t0 << ")";
                if (dynamic_cast<const NumericalQualityError*>(&e)) throw NumericalQualityError(os.str());
                throw ChartValidityError(os.str());
            }
            path.truncated = true;
            path.t_end = t0;
            path.stop_reason = e.what();
            return path;
        }
        path.samples.push_back(unpack(n, (k + 1) * h, y));
    }
    path.t_end = 1.0;
    return path;
}

GeodesicPath integrate_radial_geodesic(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& z,
                                       const GeodesicOptions& opt) {
    return integrate_radial_geodesic(spec, vielbein_at(spec, origin), z, opt);
}

PathChecks check_path(const MetricSpec& spec, const GeodesicPath& path) {
    PathChecks c;
    const int n = spec.dim();
    const auto& s = path.samples;
    if (s.empty()) return c;
    c.origin_residual = (s.front().u - path.origin).lpNorm<Eigen::Infinity>();
    Eigen::MatrixXd eta = spec.signature().matrix();
    const double h = path.sample_spacing();
    const int m = static_cast<int>(s.size());
    for (int k = 0; k < m; ++k) {
        Eigen::MatrixXd g = eval_metric(spec, s[static_cast<std::size_t>(k)].u);
        const auto& e = s[static_cast<std::size_t>(k)].e_inv;
        c.frame_residual = std::max(c.frame_residual, (e.transpose() * g * e - eta).cwiseAbs().maxCoeff());
        if (m < 5) continue;
        // 5-point first-derivative stencil, one-sided near the ends.
        auto deriv = [&](auto get) {
            using V = decltype(get(0));
            int j = std::clamp(k, 2, m - 3);
            auto at = [&](int i) { return get(i); };
            V c0 = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
            if (j == k) return c0;
            // Shifted stencils for the boundary samples.
            const int off = k - j;
            if (off == -2)
                return V((-25.0 * at(k) + 48.0 * at(k + 1) - 36.0 * at(k + 2) + 16.0 * at(k + 3) - 3.0 * at(k + 4)) / (12.0 * h));
            if (off == -1)
                return V((-3.0 * at(k - 1) - 10.0 * at(k) + 18.0 * at(k + 1) - 6.0 * at(k + 2) + at(k + 3)) / (12.0 * h));
            if (off == 1)
                return V((3.0 * at(k + 1) + 10.0 * at(k) - 18.0 * at(k - 1) + 6.0 * at(k - 2) - at(k - 3)) / (12.0 * h));
            return V((25.0 * at(k) - 48.0 * at(k - 1) + 36.0 * at(k - 2) - 16.0 * at(k - 3) + 3.0 * at(k - 4)) / (12.0 * h));
        };
        Eigen::VectorXd acc = deriv([&](int i) -> Eigen::VectorXd { return s[static_cast<std::size_t>(i)].du; });
        Eigen::MatrixXd dE = deriv([&](int i) -> Eigen::MatrixXd { return s[static_cast<std::size_t>(i)].e_inv; });
        DenseTensor gm = christoffel(spec, s[static_cast<std::size_t>(k)].u);
        const auto& du = s[static_cast<std::size_t>(k)].du;
        for (int a = 0; a < n; ++a) {
            double r = acc[a];
            for (int b = 0; b < n; ++b)
                for (int cc = 0; cc < n; ++cc) r += gm(a, b, cc) * du[b] * du[cc];
            c.geodesic_residual = std::max(c.geodesic_residual, std::abs(r));
            for (int A = 0; A < n; ++A) {
                double t = dE(a, A);
                for (int b = 0; b < n; ++b)
                    for (int cc = 0; cc < n; ++cc) t += gm(a, b, cc) * du[b] * e(cc, A);
                c.transport_residual = std::max(c.transport_residual, std::abs(t));
            }
        }
    }
    return c;
}

std::vector<DenseTensor> path_frame_curvature(const MetricSpec& spec, const GeodesicPath& path) {
    std::vector<DenseTensor> out;
    out.reserve(path.samples.size());
    for (const GeodesicSample& s : path.samples) {
        LocalCurvature lc = local_curvature(spec, std::span<const double>(s.u.data(), static_cast<std::size_t>(s.u.size())));
        out.push_back(to_frame_components(lc.riemann_lower, s.e_inv));
    }
    return out;
}

Eigen::VectorXd geodesic_displacement(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& v,
                                      int steps) {
    const int n = spec.dim();
    // State: displacement d = u - origin, velocity.
    auto f = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd u = origin + y.head(n);
        if (!spec.in_domain(std::span<const double>(u.data(), static_cast<std::size_t>(n))))
            throw ChartValidityError("geodesic left the chart domain");
        std::vector<double> gm = gamma_at(spec, u);
        Eigen::VectorXd r(2 * n);
        r.head(n) = y.tail(n);
        for (int a = 0; a < n; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) acc += G(gm, n, a, b, c) * y[n + b] * y[n + c];
            r[n + a] = -acc;
        }
        return r;
    };
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
    y.tail(n) = v;
    y = rk4(f, y, 1.0, steps);
    return y.head(n);
}

}  // namespace geom
