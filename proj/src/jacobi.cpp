#include "geom/jacobi.hpp"

#include "geom/errors.hpp"
#include "geom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace geom {

namespace {

// K(A, D) = eta_AA R_std_ABCD z^B z^C with R_std = -R, so that J_tt = K J.
Eigen::MatrixXd deviation_operator(const DenseTensor& rf, const Signature& eta, const Eigen::VectorXd& z) {
    const int n = eta.dim();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d) {
            double s = 0.0;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) s += rf(a, b, c, d) * z[b] * z[c];
            K(a, d) = -eta[a] * s;
        }
    return K;
}

struct Transverse {
    Eigen::MatrixXd basis;
    Eigen::VectorXd sign;
};

Transverse transverse_basis(const Eigen::VectorXd& u, double usign, const Signature& eta) {
    const int n = eta.dim();
    const Eigen::MatrixXd E = eta.matrix();
    auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(E * b); };
    std::vector<Eigen::VectorXd> cand;
    for (int a = 0; a < n; ++a) {
        Eigen::VectorXd w = Eigen::VectorXd::Unit(n, a);
        w -= ip(w, u) * usign * u;
        cand.push_back(w);
    }
    Transverse t{Eigen::MatrixXd(n, n - 1), Eigen::VectorXd(n - 1)};
    for (int k = 0; k < n - 1; ++k) {
        std::size_t best = 0;
        double bn = -1.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const double q = std::abs(ip(cand[i], cand[i]));
            if (q > bn * (1.0 + 1e-12)) {
                bn = q;
                best = i;
            }
        }
        if (!(bn > 1e-12)) throw NumericalQualityError("degenerate transverse frame");
        Eigen::VectorXd b = cand[best];
        const double q = ip(b, b);
        const double sg = q > 0 ? 1.0 : -1.0;
        b /= std::sqrt(std::abs(q));
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
        for (auto& w : cand) w -= ip(w, b) * sg * b;
        t.basis.col(k) = b;
        t.sign[k] = sg;
    }
    return t;
}

Eigen::MatrixXd fundamental_of(const Eigen::MatrixXd& J, const Transverse& tb, const Signature& eta) {
    // F(i, j) = sign_i eta(b_i, J_j)
    Eigen::MatrixXd F = tb.basis.transpose() * eta.matrix() * J;
    for (int i = 0; i < F.rows(); ++i) F.row(i) *= tb.sign[i];
    return F;
}

double det_of(const Eigen::MatrixXd& F) { return F.rows() == 0 ? 1.0 : F.determinant(); }

// Joint geodesic + frame + Jacobi state for re-integration between samples.
struct JointState {
    int n;
    int m;  // n - 1
    Eigen::VectorXd y;
};

Eigen::VectorXd joint_rhs(const MetricSpec& spec, const Signature& eta, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
    const int n = eta.dim();
    const int m = n - 1;
    Eigen::VectorXd u = y.head(n);
    if (!spec.in_domain(std::span<const double>(u.data(), static_cast<std::size_t>(n))))
        throw ChartValidityError("geodesic left the chart domain");
    LocalCurvature lc = local_curvature(spec, std::span<const double>(u.data(), static_cast<std::size_t>(n)));
    Eigen::Map<const Eigen::MatrixXd> E(y.data() + 2 * n, n, n);
    DenseTensor rf = to_frame_components(lc.riemann_lower, E);
    Eigen::MatrixXd K = deviation_operator(rf, eta, z);
    Eigen::VectorXd f(y.size());
    f.head(n) = y.segment(n, n);
    const auto& G = lc.christoffel;
    for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) acc += G(a, b, c) * y[n + b] * y[n + c];
        f[n + a] = -acc;
    }
    for (int A = 0; A < n; ++A)
        for (int a = 0; a < n; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) acc += G(a, b, c) * y[n + b] * E(c, A);
            f[2 * n + A * n + a] = -acc;
        }
    const Eigen::Index off = 2 * n + n * n;
    Eigen::Map<const Eigen::MatrixXd> Jt(y.data() + off + n * m, n, m);
    Eigen::Map<const Eigen::MatrixXd> J(y.data() + off, n, m);
    Eigen::MatrixXd Jtt = K * J;
    f.segment(off, n * m) = Eigen::Map<const Eigen::VectorXd>(Jt.data(), n * m);
    f.segment(off + n * m, n * m) = Eigen::Map<const Eigen::VectorXd>(Jtt.data(), n * m);
    return f;
}

Eigen::VectorXd joint_advance(const MetricSpec& spec, const Signature& eta, const Eigen::VectorXd& z, Eigen::VectorXd y,
                              double dt, int substeps) {
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        Eigen::VectorXd k1 = joint_rhs(spec, eta, z, y);
        Eigen::VectorXd k2 = joint_rhs(spec, eta, z, y + 0.5 * h * k1);
        Eigen::VectorXd k3 = joint_rhs(spec, eta, z, y + 0.5 * h * k2);
        Eigen::VectorXd k4 = joint_rhs(spec, eta, z, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

}  // namespace

Eigen::VectorXd normalise_direction(const Eigen::VectorXd& v, const Signature& eta, double null_threshold) {
    if (v.size() != eta.dim()) throw ConfigError("direction has wrong dimension");
    const double e2 = v.squaredNorm();
    if (!(e2 > 0.0) || !v.allFinite()) throw ConfigError("direction must be finite and nonzero");
    const double q = v.dot(eta.matrix() * v);
    if (std::abs(q) < null_threshold * e2) {
        std::ostringstream os;
        os << "direction is null or nearly null (eta(v,v) = " << q << ", |v|^2 = " << e2 << ")";
        throw ConfigError(os.str());
    }
    return v / std::sqrt(std::abs(q));
}

JacobiField integrate_jacobi(const MetricSpec& spec, const Eigen::VectorXd& origin, const Eigen::VectorXd& direction,
                             const JacobiOptions& opt) {
    return integrate_jacobi(spec, vielbein_at(spec, origin), direction, opt);
}

JacobiField integrate_jacobi(const MetricSpec& spec, const FrameField& frame, const Eigen::VectorXd& direction,
                             const JacobiOptions& opt) {
    const Signature& eta = spec.signature();
    const int n = eta.dim();
    const int m = n - 1;
    if (!(opt.s_max > 0.0)) throw ConfigError("s_max must be positive");
    JacobiField jf;
    jf.direction = normalise_direction(direction, eta, opt.null_threshold);
    jf.causal_sign = jf.direction.dot(eta.matrix() * jf.direction) > 0 ? 1.0 : -1.0;
    jf.speed = opt.s_max;
    Eigen::VectorXd z = jf.direction * opt.s_max;

    GeodesicOptions gopt;
    gopt.steps = opt.steps;
    gopt.allow_truncation = true;
    jf.path = integrate_radial_geodesic(spec, frame, z, gopt);
    jf.truncated = jf.path.truncated;
    jf.stop_reason = jf.path.stop_reason;
    jf.curvature = path_frame_curvature(spec, jf.path);

    Transverse tb = transverse_basis(jf.direction, jf.causal_sign, eta);
    jf.transverse = tb.basis;
    jf.transverse_sign = tb.sign;

    const int samples = static_cast<int>(jf.path.samples.size());
    const int full_steps = (samples - 1) / 2;
    const double h = jf.path.dt();
    std::vector<Eigen::MatrixXd> K;
    K.reserve(static_cast<std::size_t>(samples));
    for (const auto& rf : jf.curvature) K.push_back(deviation_operator(rf, eta, z));

    // y = [J, J_t] with J_t = speed * dJ/ds.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, m);
    Eigen::MatrixXd Jt = tb.basis * jf.speed;
    auto push = [&](int k) {
        jf.s.push_back(jf.speed * k * h);
        jf.J.push_back(J);
        jf.dJ.push_back(Jt / jf.speed);
        Eigen::MatrixXd F = fundamental_of(J, tb, eta);
        jf.det.push_back(det_of(F));
        jf.fundamental.push_back(std::move(F));
    };
    push(0);
    for (int k = 0; k < full_steps; ++k) {
        const Eigen::MatrixXd& K0 = K[static_cast<std::size_t>(2 * k)];
        const Eigen::MatrixXd& K1 = K[static_cast<std::size_t>(2 * k + 1)];
        const Eigen::MatrixXd& K2 = K[static_cast<std::size_t>(2 * k + 2)];
        Eigen::MatrixXd a1 = Jt, b1 = K0 * J;
        Eigen::MatrixXd a2 = Jt + 0.5 * h * b1, b2 = K1 * (J + 0.5 * h * a1);
        Eigen::MatrixXd a3 = Jt + 0.5 * h * b2, b3 = K1 * (J + 0.5 * h * a2);
        Eigen::MatrixXd a4 = Jt + h * b3, b4 = K2 * (J + h * a3);
        J += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        Jt += (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        push(k + 1);
    }
    jf.s_searched = jf.s.back();

    // Residual of J'' = K_s J in arclength (interior samples).
    const double ds = jf.speed * h;
    for (int k = 2; k + 2 < static_cast<int>(jf.dJ.size()); ++k) {
        auto at = [&](int i) -> const Eigen::MatrixXd& { return jf.dJ[static_cast<std::size_t>(i)]; };
        Eigen::MatrixXd d2 = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * ds);
        Eigen::MatrixXd r = d2 - K[static_cast<std::size_t>(2 * k)] * jf.J[static_cast<std::size_t>(k)] / (jf.speed * jf.speed);
        jf.residual = std::max(jf.residual, r.cwiseAbs().maxCoeff());
    }
    return jf;
}

ConjugateReport find_conjugate_point(const MetricSpec& spec, const JacobiField& f, const JacobiOptions& opt) {
    ConjugateReport rep;
    rep.direction = f.direction;
    rep.truncated = f.truncated;
    rep.stop_reason = f.stop_reason;
    const Signature& eta = spec.signature();
    const int n = eta.dim();
    const int m = n - 1;
    const double h = f.path.dt();
    const Eigen::VectorXd z = f.direction * f.speed;
    Transverse tb{f.transverse, f.transverse_sign};
    const double s_limit = std::min(opt.s_max, f.s_searched);
    rep.s_searched = s_limit;

    auto state_at = [&](int k) {
        const GeodesicSample& g = f.path.samples[static_cast<std::size_t>(2 * k)];
        Eigen::VectorXd y(2 * n + n * n + 2 * n * m);
        y.head(n) = g.u;
        y.segment(n, n) = g.du;
        y.segment(2 * n, n * n) = Eigen::Map<const Eigen::VectorXd>(g.e_inv.data(), n * n);
        const Eigen::MatrixXd& J = f.J[static_cast<std::size_t>(k)];
        Eigen::MatrixXd Jt = f.dJ[static_cast<std::size_t>(k)] * f.speed;
        y.segment(2 * n + n * n, n * m) = Eigen::Map<const Eigen::VectorXd>(J.data(), n * m);
        y.segment(2 * n + n * n + n * m, n * m) = Eigen::Map<const Eigen::VectorXd>(Jt.data(), n * m);
        return y;
    };
    // det F at time t, re-integrated from full step k.
    auto det_from = [&](int k, double t) {
        const double t0 = k * h;
        if (t == t0) return f.det[static_cast<std::size_t>(k)];
        const int sub = std::max(1, static_cast<int>(std::ceil(8.0 * (t - t0) / h)));
        Eigen::VectorXd y = joint_advance(spec, eta, z, state_at(k), t - t0, sub);
        Eigen::Map<const Eigen::MatrixXd> J(y.data() + 2 * n + n * n, n, m);
        return det_of(fundamental_of(J, tb, eta));
    };
    auto finish = [&](double t, double d, const char* how) {
        rep.s_conjugate = f.speed * t;
        rep.det_at_conjugate = d;
        rep.detector = how;
        const auto idx = static_cast<std::size_t>(std::clamp<long>(std::lround(2.0 * t / h), 0, static_cast<long>(f.curvature.size()) - 1));
        rep.curvature_magnitude = f.curvature[idx].max_abs();
    };
    auto bisect = [&](int k, double lo, double hi, double dlo) {
        rep.iterations = 0;
        double mid = 0.5 * (lo + hi), dmid = 0.0;
        for (; rep.iterations < 200; ++rep.iterations) {
            mid = 0.5 * (lo + hi);
            dmid = det_from(k, mid);
            if ((hi - lo) * f.speed < opt.bracket_tol && std::abs(dmid) < opt.det_tol) break;
            if (dmid == 0.0) break;
            if ((dmid > 0) == (dlo > 0)) {
                lo = mid;
                dlo = dmid;
            } else {
                hi = mid;
            }
        }
        rep.bracket_lo = f.speed * lo;
        rep.bracket_hi = f.speed * hi;
        finish(mid, dmid, "sign_change");
    };

    const int last = static_cast<int>(f.det.size()) - 1;
    for (int k = 1; k <= last; ++k) {
        if (f.s[static_cast<std::size_t>(k)] > s_limit + 1e-12) break;
        const double d0 = f.det[static_cast<std::size_t>(k - 1)], d1 = f.det[static_cast<std::size_t>(k)];
        if (k > 1 && ((d0 > 0 && d1 <= 0) || (d0 < 0 && d1 >= 0))) {
            bisect(k - 1, (k - 1) * h, k * h, d0);
            return rep;
        }
        // Grazing zero: a local minimum of |det| whose parabolic interpolation
        // through the three samples dips below the threshold.
        if (k >= 2 && k < last) {
            const double dp = std::abs(f.det[static_cast<std::size_t>(k + 1)]);
            const double dm = std::abs(d0), dc = std::abs(d1);
            const double curv = dp - 2.0 * dc + dm;
            const double dip = curv > 0.0 ? dc - (dp - dm) * (dp - dm) / (8.0 * curv) : dc;
            if (dip < opt.dip_threshold && dc <= dm && dc <= dp) {
                const int k0 = k - 1;
                const double lo = k0 * h, hi = (k + 1) * h;
                // Refine x4 looking for a sign change.
                double prev_t = lo, prev_d = d0;
                bool found = false;
                for (int i = 1; i <= 8 && !found; ++i) {
                    const double t = lo + (hi - lo) * i / 8.0;
                    const double d = det_from(k0, t);
                    if ((prev_d > 0) != (d > 0) || d == 0.0) {
                        bisect(k0, prev_t, t, prev_d);
                        found = true;
                    }
                    prev_t = t;
                    prev_d = d;
                }
                if (found) return rep;
                // Golden-section minimum of |det|.
                const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
                double a = lo, b = hi;
                double c = b - gr * (b - a), d = a + gr * (b - a);
                double fc = std::abs(det_from(k0, c)), fd = std::abs(det_from(k0, d));
                int it = 0;
                while ((b - a) * f.speed > opt.bracket_tol && it < 200) {
                    if (fc < fd) {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - gr * (b - a);
                        fc = std::abs(det_from(k0, c));
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + gr * (b - a);
                        fd = std::abs(det_from(k0, d));
                    }
                    ++it;
                }
                const double tm = 0.5 * (a + b);
                const double dmin = det_from(k0, tm);
                if (std::abs(dmin) < opt.det_tol) {
                    rep.iterations = it;
                    rep.bracket_lo = f.speed * a;
                    rep.bracket_hi = f.speed * b;
                    finish(tm, dmin, "grazing");
                    return rep;
                }
            }
        }
    }
    return rep;
}

std::vector<Eigen::VectorXd> sample_directions(const Signature& eta, int count, std::uint64_t seed, double null_threshold) {
    if (count < 1) throw ConfigError("direction count must be positive");
    const int n = eta.dim();
    std::vector<double> shift(static_cast<std::size_t>(n + (n % 2)), 0.0);
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (double& s : shift) s = U(rng);
    }
    std::vector<Eigen::VectorXd> out;
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            double frac = std::fmod((k + 0.5) / count + shift[0], 1.0);
            const double a = 2.0 * std::numbers::pi * frac;
            Eigen::VectorXd v(2);
            v << std::cos(a), std::sin(a);
            if (std::abs(v.dot(eta.matrix() * v)) < null_threshold) continue;
            out.push_back(normalise_direction(v, eta, null_threshold));
        }
        return out;
    }
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (static_cast<std::size_t>(n + 1) > std::size(primes)) throw ConfigError("direction sampling supports n <= 15");
    auto radical_inverse = [](long i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        return r;
    };
    const int pairs = (n + 1) / 2;
    // Generate until `count` usable directions are found (bounded).
    for (long i = 1; static_cast<int>(out.size()) < count && i < 64L * count + 64; ++i) {
        Eigen::VectorXd v(n);
        for (int p = 0; p < pairs; ++p) {
            double u1 = std::fmod(radical_inverse(i, primes[2 * p]) + shift[static_cast<std::size_t>(2 * p)], 1.0);
            double u2 = std::fmod(radical_inverse(i, primes[2 * p + 1]) + shift[static_cast<std::size_t>(2 * p + 1)], 1.0);
            u1 = std::max(u1, 1e-12);
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 2.0 * std::numbers::pi * u2;
            v[2 * p] = r * std::cos(a);
            if (2 * p + 1 < n) v[2 * p + 1] = r * std::sin(a);
        }
        if (!(v.norm() > 1e-12)) continue;
        v.normalize();
        if (std::abs(v.dot(eta.matrix() * v)) < null_threshold) continue;
        out.push_back(normalise_direction(v, eta, null_threshold));
    }
    return out;
}

ChartRadiusReport normal_chart_radius(const MetricSpec& spec, const Eigen::VectorXd& origin, int n_dirs, std::uint64_t seed,
                                      const JacobiOptions& opt) {
    FrameField frame = vielbein_at(spec, origin);
    std::vector<Eigen::VectorXd> dirs = sample_directions(spec.signature(), n_dirs, seed, opt.null_threshold);
    ChartRadiusReport rep;
    rep.directions.resize(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
        JacobiField jf = integrate_jacobi(spec, frame, dirs[i], opt);
        rep.directions[i] = find_conjugate_point(spec, jf, opt);
    });
    rep.s_searched_min = opt.s_max;
    for (std::size_t i = 0; i < rep.directions.size(); ++i) {
        const auto& d = rep.directions[i];
        rep.s_searched_min = std::min(rep.s_searched_min, d.s_searched);
        if (d.s_conjugate && (!rep.radius || *d.s_conjugate < *rep.radius)) {
            rep.radius = d.s_conjugate;
            rep.argmin = static_cast<int>(i);
        }
    }
    return rep;
}

}  // namespace geom
