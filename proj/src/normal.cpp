#include "geom/normal.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace geom {

namespace {

constexpr SlotKind FL = SlotKind::FrameLower;

inline std::size_t i3(int n, int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); }
inline std::size_t i4(int n, int a, int b, int c, int d) { return static_cast<std::size_t>(((a * n + b) * n + c) * n + d); }

// Per-sample source terms built from R_std = -R (the opposite sign convention, in
// which the Jacobi operator is u^B u^C R_ABC^D).
struct Source {
    std::vector<double> r;   // R_std_ABCD
    std::vector<double> zr;  // z^B R_std_ABCD            (A C D)
    std::vector<double> s;   // z^L z^M R_std_ALMN        (A N)
    std::vector<double> w;   // z^L R_std_ABLN            (A B N)
};

Source make_source(const DenseTensor& rf, const Eigen::VectorXd& z) {
    const int n = static_cast<int>(z.size());
    Source src;
    auto R = rf.data();
    src.r.resize(static_cast<std::size_t>(n * n * n * n));
    for (std::size_t k = 0; k < src.r.size(); ++k) src.r[k] = -R[k];
    src.zr.assign(static_cast<std::size_t>(n * n * n), 0.0);
    src.w.assign(static_cast<std::size_t>(n * n * n), 0.0);
    src.s.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const double v = src.r[i4(n, a, b, c, d)];
                    src.zr[i3(n, a, c, d)] += z[b] * v;
                    src.w[i3(n, a, b, d)] += z[c] * v;
                    src.s[static_cast<std::size_t>(a * n + d)] += z[b] * z[c] * v;
                }
    return src;
}

// y = [X, dX]; returns [dX, X''].
Eigen::VectorXd rhs_A(const Source& s, const Signature& eta, double t, const Eigen::VectorXd& y) {
    const int n = eta.dim();
    const Eigen::Index m = n * n * n;
    Eigen::VectorXd f(2 * m);
    f.head(m) = y.tail(m);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
                double v = t * s.zr[i3(n, a, c, d)];
                for (int p = 0; p < n; ++p) v += s.s[static_cast<std::size_t>(a * n + p)] * eta[p] * y[static_cast<Eigen::Index>(i3(n, p, c, d))];
                f[m + static_cast<Eigen::Index>(i3(n, a, c, d))] = v;
            }
    return f;
}

Eigen::VectorXd rhs_B(const Source& s, const Signature& eta, const Eigen::VectorXd& z, double t, const Eigen::VectorXd& y) {
    const int n = eta.dim();
    const Eigen::Index m = n * n * n * n;
    Eigen::VectorXd f(2 * m);
    f.head(m) = y.tail(m);
    // zb_PCD = z^M B_PMCD
    std::vector<double> zb(static_cast<std::size_t>(n * n * n), 0.0);
    for (int p = 0; p < n; ++p)
        for (int mm = 0; mm < n; ++mm)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) zb[i3(n, p, c, d)] += z[mm] * y[static_cast<Eigen::Index>(i4(n, p, mm, c, d))];
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double v = t * s.r[i4(n, a, b, c, d)];
                    for (int p = 0; p < n; ++p) v += s.w[i3(n, a, b, p)] * eta[p] * zb[i3(n, p, c, d)];
                    f[m + static_cast<Eigen::Index>(i4(n, a, b, c, d))] = v;
                }
    return f;
}

// RK4 over the half-sample grid with steps of `stride` half-intervals; records full states
// every `record` half-intervals.
template <class F>
std::vector<Eigen::VectorXd> integrate_grid(F&& f, Eigen::Index size, int half_intervals, double h_half, int stride) {
    std::vector<Eigen::VectorXd> out;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(size);
    out.push_back(y);
    const double H = stride * h_half;
    for (int j = 0; j + stride <= half_intervals; j += stride) {
        const int mid = j + stride / 2, end = j + stride;
        const double t0 = j * h_half;
        Eigen::VectorXd k1 = f(j, t0, y);
        Eigen::VectorXd k2 = f(mid, t0 + 0.5 * H, y + 0.5 * H * k1);
        Eigen::VectorXd k3 = f(mid, t0 + 0.5 * H, y + 0.5 * H * k2);
        Eigen::VectorXd k4 = f(end, t0 + H, y + H * k3);
        y += (H / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(y);
    }
    return out;
}

double cyclic_bcd(const DenseTensor& b) {
    return first_bianchi_residual(b);
}

}  // namespace

NormalExpansion solve_AB(const MetricSpec& spec, const GeodesicPath& path) {
    return solve_AB(spec, path, path_frame_curvature(spec, path));
}

NormalExpansion solve_AB(const MetricSpec& spec, const GeodesicPath& path, const std::vector<DenseTensor>& curv) {
    const int n = spec.dim();
    if (path.truncated) throw ChartValidityError("solve_AB needs a geodesic valid over t in [0, 1]: " + path.stop_reason);
    const int half = 2 * path.steps;
    if (static_cast<int>(path.samples.size()) != half + 1 || curv.size() != path.samples.size())
        throw ShapeError("path samples do not match its step count");
    const Signature& eta = path.eta;
    const Eigen::VectorXd& z = path.z;

    std::vector<Source> src;
    src.reserve(curv.size());
    for (const DenseTensor& r : curv) src.push_back(make_source(r, z));

    const double h_half = path.sample_spacing();
    auto fa = [&](int k, double t, const Eigen::VectorXd& y) { return rhs_A(src[static_cast<std::size_t>(k)], eta, t, y); };
    auto fb = [&](int k, double t, const Eigen::VectorXd& y) { return rhs_B(src[static_cast<std::size_t>(k)], eta, z, t, y); };
    const Eigen::Index ma = n * n * n, mb = n * n * n * n;
    auto A_fine = integrate_grid(fa, 2 * ma, half, h_half, 2);
    auto B_fine = integrate_grid(fb, 2 * mb, half, h_half, 2);

    NormalExpansion e;
    e.path = path;
    const auto un = static_cast<std::size_t>(n);
    for (int k = 0; k <= path.steps; ++k) {
        e.t_grid.push_back(static_cast<double>(k) / path.steps);
        const auto& ya = A_fine[static_cast<std::size_t>(k)];
        const auto& yb = B_fine[static_cast<std::size_t>(k)];
        e.A.emplace_back(std::vector<std::size_t>{un, un, un}, std::vector<SlotKind>{FL, FL, FL},
                         std::vector<double>(ya.data(), ya.data() + ma));
        e.dA.emplace_back(std::vector<std::size_t>{un, un, un}, std::vector<SlotKind>{FL, FL, FL},
                          std::vector<double>(ya.data() + ma, ya.data() + 2 * ma));
        e.B.emplace_back(std::vector<std::size_t>{un, un, un, un}, std::vector<SlotKind>{FL, FL, FL, FL},
                         std::vector<double>(yb.data(), yb.data() + mb));
        e.dB.emplace_back(std::vector<std::size_t>{un, un, un, un}, std::vector<SlotKind>{FL, FL, FL, FL},
                          std::vector<double>(yb.data() + mb, yb.data() + 2 * mb));
    }

    if (path.steps % 2 == 0) {
        auto A_coarse = integrate_grid(fa, 2 * ma, half, h_half, 4);
        auto B_coarse = integrate_grid(fb, 2 * mb, half, h_half, 4);
        e.error_estimate_A = (A_fine.back().head(ma) - A_coarse.back().head(ma)).lpNorm<Eigen::Infinity>() / 15.0;
        e.error_estimate_B = (B_fine.back().head(mb) - B_coarse.back().head(mb)).lpNorm<Eigen::Infinity>() / 15.0;
    }

    ExpansionChecks c = check_expansion(e);
    const double drift = std::max({c.A_at_origin, c.A_antisymmetry, c.B_antisym_first, c.B_antisym_second, c.A_equals_zB});
    if (!(drift <= 1e-6)) {
        std::ostringstream os;
        os << "A/B invariant drift " << drift << " exceeds 1e-6";
        throw NumericalQualityError(os.str());
    }
    return e;
}

ExpansionChecks check_expansion(const NormalExpansion& e) {
    ExpansionChecks c;
    if (e.A.empty()) return c;
    const int n = e.eta().dim();
    c.A_at_origin = e.A.front().max_abs();
    for (std::size_t k = 0; k < e.A.size(); ++k) {
        const DenseTensor& A = e.A[k];
        const DenseTensor& B = e.B[k];
        c.A_antisymmetry = std::max(c.A_antisymmetry, check_symmetry(A, {0, 2, 1}, -1));
        c.B_antisym_first = std::max(c.B_antisym_first, check_symmetry(B, {1, 0, 2, 3}, -1));
        c.B_antisym_second = std::max(c.B_antisym_second, check_symmetry(B, {0, 1, 3, 2}, -1));
        c.B_pair_symmetry = std::max(c.B_pair_symmetry, check_symmetry(B, {2, 3, 0, 1}, +1));
        c.B_first_bianchi = std::max(c.B_first_bianchi, cyclic_bcd(B));
        for (int a = 0; a < n; ++a)
            for (int cc = 0; cc < n; ++cc)
                for (int d = 0; d < n; ++d) {
                    double zb = 0.0;
                    for (int b = 0; b < n; ++b) zb += e.z()[b] * B(a, b, cc, d);
                    c.A_equals_zB = std::max(c.A_equals_zB, std::abs(A(a, cc, d) - zb));
                }
    }
    return c;
}

std::string LineElementConvention::describe() const {
    std::ostringstream os;
    os << "ds^2 = eta dz dz + 1/2 {" << b << (signature_weight ? " eta_BB" : "") << " B_ABCD + " << aa
       << " eta^MN A_MBA A_NCD} P^AB Q^CD";
    return os.str();
}

DenseTensor line_element_kernel(const NormalExpansion& e, const LineElementConvention& conv) {
    const int n = e.eta().dim();
    const auto un = static_cast<std::size_t>(n);
    const DenseTensor& A = e.A.back();
    const DenseTensor& B = e.B.back();
    const Signature& eta = e.eta();
    DenseTensor X({un, un, un, un}, {FL, FL, FL, FL});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double aa = 0.0;
                    for (int m = 0; m < n; ++m) aa += eta[m] * A(m, b, a) * A(m, c, d);
                    const double wb = conv.signature_weight ? eta[b] : 1.0;
                    X(a, b, c, d) = 0.5 * (conv.b * wb * B(a, b, c, d) + conv.aa * aa);
                }
    return X;
}

Eigen::MatrixXd reconstruct_metric(const NormalExpansion& e, const LineElementConvention& conv) {
    const int n = e.eta().dim();
    const Eigen::VectorXd& z = e.z();
    DenseTensor X = line_element_kernel(e, conv);
    // P^AB = p(A,B,i) dz^i, Q^CD = q(C,D,j) dz^j with q(C,D,j) = -p(C,D,j).
    auto p = [&](int A, int B, int i) { return (A == i ? z[B] : 0.0) - (B == i ? z[A] : 0.0); };
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    if (c == d) continue;
                    const double x = X(a, b, c, d);
                    if (x == 0.0) continue;
                    for (int i = 0; i < n; ++i) {
                        const double pi = p(a, b, i);
                        if (pi == 0.0) continue;
                        for (int j = 0; j < n; ++j) M(i, j) -= x * pi * p(c, d, j);
                    }
                }
        }
    return e.eta().matrix() + 0.5 * (M + M.transpose());
}

Eigen::MatrixXd reconstruct_metric_from_coframe(const NormalExpansion& e) {
    const int n = e.eta().dim();
    const DenseTensor& A = e.A.back();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int b = 0; b < n; ++b) s += A(a, b, c) * e.z()[b];
            M(a, c) += e.eta()[a] * s;
        }
    return M.transpose() * e.eta().matrix() * M;
}

double gauss_radial_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& z, const Signature& eta) {
    return (g * z - eta.matrix() * z).lpNorm<Eigen::Infinity>();
}

Eigen::MatrixXd exp_map_pullback(const MetricSpec& spec, const FrameField& frame, const Eigen::VectorXd& z,
                                 const PullbackOptions& opt) {
    const int n = spec.dim();
    if (z.size() != n) throw ConfigError("z has wrong dimension");
    if (opt.chart_radius) {
        const double r = std::sqrt(std::abs(z.dot(spec.signature().matrix() * z)));
        if (r >= *opt.chart_radius) {
            std::ostringstream os;
            os << "|z| = " << r << " is at or beyond the normal chart radius " << *opt.chart_radius;
            throw ChartValidityError(os.str());
        }
    }
    const double h = opt.rel_step * std::max(1.0, z.norm());
    auto F = [&](const Eigen::VectorXd& zz) { return geodesic_displacement(spec, frame.point, frame.e_inv * zz, opt.steps); };
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd dz = Eigen::VectorXd::Zero(n);
        dz[j] = h;
        D.col(j) = (F(z - 2 * dz) - 8.0 * F(z - dz) + 8.0 * F(z + dz) - F(z + 2 * dz)) / (12.0 * h);
    }
    Eigen::VectorXd x = frame.point + F(z);
    Eigen::MatrixXd g = eval_metric(spec, x);
    Eigen::MatrixXd out = D.transpose() * g * D;
    return 0.5 * (out + out.transpose());
}

std::vector<Eigen::MatrixXd> exp_map_pullback(const MetricSpec& spec, const Eigen::VectorXd& origin,
                                              const std::vector<Eigen::VectorXd>& z_grid, const PullbackOptions& opt) {
    FrameField frame = vielbein_at(spec, origin);
    std::vector<Eigen::MatrixXd> out;
    out.reserve(z_grid.size());
    for (const auto& z : z_grid) out.push_back(exp_map_pullback(spec, frame, z, opt));
    return out;
}

Eigen::MatrixXd normal_metric_taylor(const DenseTensor& rf, const Signature& eta, const Eigen::VectorXd& z) {
    const int n = eta.dim();
    Eigen::MatrixXd g = eta.matrix();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) s += rf(a, c, b, d) * z[c] * z[d];
            g(a, b) += s / 3.0;
        }
    return g;
}

Eigen::MatrixXd classical_angular_momentum(const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
    if (z.size() != v.size()) throw ShapeError("angular momentum: z and velocity differ in dimension");
    return v * z.transpose() - z * v.transpose();
}

ConformalFactor conformal_factor(const NormalExpansion& e, const Eigen::VectorXd& dz, const LineElementConvention& conv) {
    const int n = e.eta().dim();
    if (dz.size() != n) throw ShapeError("conformal_factor: velocity has wrong dimension");
    ConformalFactor cf;
    cf.convention = conv;
    cf.z = e.z();
    Eigen::MatrixXd g = reconstruct_metric(e, conv);
    const double q = dz.dot(g * dz);
    if (!(std::abs(q) > 0.0)) throw ChartValidityError("conformal factor: null velocity has no unit normalisation");
    const double sgn = q > 0 ? 1.0 : -1.0;
    cf.velocity = dz / std::sqrt(std::abs(q));
    cf.L = classical_angular_momentum(cf.z, cf.velocity);
    DenseTensor X = line_element_kernel(e, conv);
    double s = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) s += X(a, b, c, d) * cf.L(a, b) * cf.L(c, d);
    cf.exp_minus_2sigma = 1.0 + sgn * s;
    if (!(cf.exp_minus_2sigma > 0.0)) {
        std::ostringstream os;
        os << "conformal factor bracket " << cf.exp_minus_2sigma << " is not positive";
        throw ChartValidityError(os.str());
    }
    cf.sigma = -0.5 * std::log(cf.exp_minus_2sigma);
    const double eta_vv = cf.velocity.dot(e.eta().matrix() * cf.velocity);
    cf.line_element_residual = std::abs(std::exp(2 * cf.sigma) * eta_vv - cf.velocity.dot(g * cf.velocity));
    return cf;
}

}  // namespace geom
