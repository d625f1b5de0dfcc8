#include "geom/curvature.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace geom {

namespace {

constexpr SlotKind U = SlotKind::CoordUpper;
constexpr SlotKind L = SlotKind::CoordLower;
constexpr SlotKind FL = SlotKind::FrameLower;

std::vector<std::size_t> dims_of(int n, int rank) { return std::vector<std::size_t>(static_cast<std::size_t>(rank), static_cast<std::size_t>(n)); }

// Flat row-major index for rank-3 / rank-4 tensors of extent n.
inline std::size_t ix3(int n, int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); }
inline std::size_t ix4(int n, int a, int b, int c, int d) { return static_cast<std::size_t>(((a * n + b) * n + c) * n + d); }

struct Raw {
    int n;
    std::vector<double> gamma;  // Gamma^a_bc
    std::vector<double> r;      // R_abcd
};

Raw compute_raw(const MetricDerivatives& d, const Eigen::MatrixXd& g_inv) {
    const int n = static_cast<int>(d.g.rows());
    auto dg = d.dg.data();
    auto ddg = d.ddg.data();
    auto DG = [&](int a, int b, int c) { return dg[ix3(n, a, b, c)]; };
    auto DDG = [&](int a, int b, int c, int e) { return ddg[ix4(n, a, b, c, e)]; };

    Raw raw{n, std::vector<double>(static_cast<std::size_t>(n * n * n)), {}};
    std::vector<double> first(static_cast<std::size_t>(n * n * n));  // Gamma_ebc
    for (int e = 0; e < n; ++e)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) first[ix3(n, e, b, c)] = 0.5 * (DG(e, c, b) + DG(e, b, c) - DG(b, c, e));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int e = 0; e < n; ++e) s += g_inv(a, e) * first[ix3(n, e, b, c)];
                raw.gamma[ix3(n, a, b, c)] = s;
            }
    if (d.ddg.size() == 0) return raw;

    raw.r.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int e = 0; e < n; ++e) {
                    // Opposite-sign form R_abce = 1/2(g_ae,bc + g_bc,ae - g_ac,be - g_be,ac)
                    //   + Gamma_fbc Gamma^f_ae - Gamma_fbe Gamma^f_ac, negated below.
                    double s = 0.5 * (DDG(a, e, b, c) + DDG(b, c, a, e) - DDG(a, c, b, e) - DDG(b, e, a, c));
                    for (int f = 0; f < n; ++f)
                        s += first[ix3(n, f, b, c)] * raw.gamma[ix3(n, f, a, e)] -
                             first[ix3(n, f, b, e)] * raw.gamma[ix3(n, f, a, c)];
                    raw.r[ix4(n, a, b, c, e)] = -s;
                }
    return raw;
}

Eigen::VectorXd to_vec(std::span<const double> x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace

DenseTensor christoffel_from(const MetricDerivatives& d, const Eigen::MatrixXd& g_inv) {
    const int n = static_cast<int>(d.g.rows());
    MetricDerivatives first_only{d.g, d.dg, {}};
    Raw raw = compute_raw(first_only, g_inv);
    return DenseTensor(dims_of(n, 3), {U, L, L}, std::move(raw.gamma));
}

DenseTensor christoffel(const MetricSpec& spec, std::span<const double> x, DerivativeMode mode) {
    MetricDerivatives d = eval_metric_derivs(spec, x, 1, mode);
    return christoffel_from(d, checked_inverse(d.g));
}

LocalCurvature local_curvature(const MetricSpec& spec, std::span<const double> x) {
    MetricDerivatives d = eval_metric_derivs(spec, x, 2);
    const int n = spec.dim();
    Raw raw = compute_raw(d, checked_inverse(d.g));
    return {d.g, DenseTensor(dims_of(n, 3), {U, L, L}, std::move(raw.gamma)),
            DenseTensor(dims_of(n, 4), {L, L, L, L}, std::move(raw.r))};
}

DenseTensor to_frame_components(const DenseTensor& r, const Eigen::MatrixXd& e_inv) {
    const int n = static_cast<int>(e_inv.rows());
    std::vector<double> cur(r.data().begin(), r.data().end());
    std::vector<double> next(cur.size());
    // Transform one slot at a time: O(n^5).
    for (int slot = 0; slot < 4; ++slot) {
        std::fill(next.begin(), next.end(), 0.0);
        int idx[4];
        for (idx[0] = 0; idx[0] < n; ++idx[0])
            for (idx[1] = 0; idx[1] < n; ++idx[1])
                for (idx[2] = 0; idx[2] < n; ++idx[2])
                    for (idx[3] = 0; idx[3] < n; ++idx[3]) {
                        const int A = idx[slot];
                        double s = 0.0;
                        int j[4] = {idx[0], idx[1], idx[2], idx[3]};
                        for (int a = 0; a < n; ++a) {
                            j[slot] = a;
                            s += e_inv(a, A) * cur[ix4(n, j[0], j[1], j[2], j[3])];
                        }
                        next[ix4(n, idx[0], idx[1], idx[2], idx[3])] = s;
                    }
        std::swap(cur, next);
    }
    return DenseTensor(dims_of(n, 4), {FL, FL, FL, FL}, std::move(cur));
}

CurvatureBundle riemann(const MetricSpec& spec, std::span<const double> x, DerivativeMode mode) {
    const int n = spec.dim();
    MetricDerivatives d = eval_metric_derivs(spec, x, 2, mode);
    CurvatureBundle b;
    b.point = to_vec(x);
    b.g = d.g;
    b.g_inv = checked_inverse(d.g);
    b.frame = vielbein_from_metric(d.g, spec.signature(), b.point);
    Raw raw = compute_raw(d, b.g_inv);
    b.christoffel = DenseTensor(dims_of(n, 3), {U, L, L}, std::move(raw.gamma));
    b.riemann_lower = DenseTensor(dims_of(n, 4), {L, L, L, L}, std::move(raw.r));
    b.riemann_coord = raise_lower(b.riemann_lower, 0, DenseTensor::from_matrix(b.g, L, L), IndexDirection::Up);
    b.riemann_frame = to_frame_components(b.riemann_lower, b.frame.e_inv);
    b.ricci = contract(b.riemann_coord, 0, 3);
    b.scalar = contract(b.ricci, 0, 1, DenseTensor::from_matrix(b.g_inv, U, U)).data()[0];
    return b;
}

double first_bianchi_residual(const DenseTensor& r) {
    const int n = static_cast<int>(r.dim(0));
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    worst = std::max(worst, std::abs(r(a, b, c, d) + r(a, c, d, b) + r(a, d, b, c)));
    return worst;
}

CurvatureChecks check_bundle(const MetricSpec& spec, const CurvatureBundle& b) {
    CurvatureChecks c;
    const int n = spec.dim();
    c.christoffel_symmetry = check_symmetry(b.christoffel, {0, 2, 1}, +1);
    c.antisym_first_pair = check_symmetry(b.riemann_frame, {1, 0, 2, 3}, -1);
    c.antisym_second_pair = check_symmetry(b.riemann_frame, {0, 1, 3, 2}, -1);
    c.pair_symmetry = check_symmetry(b.riemann_frame, {2, 3, 0, 1}, +1);
    c.first_bianchi = first_bianchi_residual(b.riemann_frame);

    MetricDerivatives d = eval_metric_derivs(spec, b.point, 1);
    for (int a = 0; a < n; ++a)
        for (int bb = 0; bb < n; ++bb)
            for (int k = 0; k < n; ++k) {
                double v = d.dg(a, bb, k);
                for (int e = 0; e < n; ++e) v -= b.christoffel(e, k, a) * b.g(e, bb) + b.christoffel(e, k, bb) * b.g(a, e);
                c.metric_compatibility = std::max(c.metric_compatibility, std::abs(v));
            }

    DenseTensor lowered = raise_lower(b.riemann_coord, 0, DenseTensor::from_matrix(b.g, L, L), IndexDirection::Down);
    DenseTensor frame = to_frame_components(lowered, b.frame.e_inv);
    c.frame_consistency = (frame - b.riemann_frame).max_abs();
    return c;
}

DenseTensor constant_curvature_tensor(const Signature& eta, double K) {
    const int n = eta.dim();
    DenseTensor t(dims_of(n, 4), {FL, FL, FL, FL});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            // Nonzero only for {C,D} = {A,B}.
            t(a, b, b, a) = K * eta[a] * eta[b];
            t(a, b, a, b) = -K * eta[a] * eta[b];
        }
    return t;
}

double extract_curvature_scale(const DenseTensor& rf, const Signature& eta, const Tolerance& tol) {
    if (tol.accepts(rf.max_abs())) return 0.0;
    return rf(0, 1, 0, 1) / (-eta[0] * eta[1]);
}

EinsteinReport einstein_space_check(const MetricSpec& spec, const std::vector<Eigen::VectorXd>& points, const Tolerance& tol) {
    if (points.empty()) throw ConfigError("einstein_space_check needs at least one sample point");
    EinsteinReport rep;
    const int n = spec.dim();
    double scale = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        CurvatureBundle b = riemann(spec, points[i]);
        Eigen::MatrixXd ric = b.ricci.to_matrix();
        rep.einstein_deviation = std::max(rep.einstein_deviation, (ric - (b.scalar / n) * b.g).cwiseAbs().maxCoeff());
        rep.max_ricci = std::max(rep.max_ricci, ric.cwiseAbs().maxCoeff());
        const double K = extract_curvature_scale(b.riemann_frame, spec.signature(), tol);
        DenseTensor model = constant_curvature_tensor(spec.signature(), K);
        rep.constant_curvature_deviation =
            std::max(rep.constant_curvature_deviation, (b.riemann_frame - model).max_abs());
        if (i == 0) rep.curvature_scale = K;
        rep.curvature_scale_spread = std::max(rep.curvature_scale_spread, std::abs(K - rep.curvature_scale));
        rep.scalars.push_back(b.scalar);
        scale = std::max(scale, b.riemann_frame.max_abs());
    }
    rep.is_einstein = tol.accepts(rep.einstein_deviation, rep.max_ricci);
    rep.is_constant_curvature = rep.is_einstein && tol.accepts(rep.constant_curvature_deviation, scale) &&
                                tol.accepts(rep.curvature_scale_spread, std::abs(rep.curvature_scale));
    return rep;
}

ConformalPair conformal_pair_at(const MetricSpec& g, const Expr& psi, std::span<const double> x) {
    const int n = g.dim();
    const auto un = static_cast<std::size_t>(n);
    ExprProgram prog(psi);
    ConformalPair p;
    p.point = to_vec(x);
    p.gradient = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd partial2(n, n);
    using D1 = Dual<double>;
    using D2 = Dual<D1>;
    std::vector<D2> xd(un);
    for (int c = 0; c < n; ++c)
        for (int d = c; d < n; ++d) {
            for (int i = 0; i < n; ++i)
                xd[static_cast<std::size_t>(i)] = D2(D1(x[static_cast<std::size_t>(i)], i == c ? 1.0 : 0.0), D1(i == d ? 1.0 : 0.0, 0.0));
            D2 v = prog.eval<D2>(xd);
            if (!all_finite(v)) throw DomainError("non-finite conformal factor evaluation");
            p.psi = v.v.v;
            if (c == d) p.gradient[c] = v.v.d;
            partial2(c, d) = partial2(d, c) = v.d.d;
        }
    DenseTensor gamma = christoffel(g, x);
    Eigen::MatrixXd g_inv = checked_inverse(eval_metric(g, x));
    p.hessian = partial2;
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) p.hessian(m, k) -= gamma(l, m, k) * p.gradient[l];
    p.delta1 = p.gradient.dot(g_inv * p.gradient);
    p.psi_munu = p.hessian - p.gradient * p.gradient.transpose();
    p.delta2 = (g_inv * p.hessian).trace();
    return p;
}

ConformalReport conformal_identity_check(const MetricSpec& g, const Expr& psi, const MetricSpec& gprime,
                                         const std::vector<Eigen::VectorXd>& points, const Tolerance& tol, double ricci_sign) {
    const int n = g.dim();
    if (n <= 2) throw ConfigError("conformal identities need dimension >= 3");
    if (gprime.dim() != n) throw ConfigError("conformal pair dimension mismatch");
    if (points.empty()) throw ConfigError("conformal_identity_check needs at least one sample point");
    ConformalReport rep;
    rep.ricci_sign = ricci_sign;
    rep.target_is_einstein = true;
    double scale = 0.0, einstein_dev = 0.0, ricci_scale = 0.0;
    const double nn = n;
    for (const Eigen::VectorXd& x : points) {
        std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
        ConformalPair p = conformal_pair_at(g, psi, xs);
        CurvatureBundle b = riemann(g, x);
        CurvatureBundle bp = riemann(gprime, x);
        const double e2 = std::exp(2.0 * p.psi);
        rep.relation_residual = std::max(rep.relation_residual, (bp.g - e2 * b.g).cwiseAbs().maxCoeff());

        Eigen::MatrixXd ric = b.ricci.to_matrix(), ricp = bp.ricci.to_matrix();
        Eigen::MatrixXd general = (ric - ricp) / (nn - 2) - (b.g * b.scalar - bp.g * bp.scalar) / (2 * (nn - 1) * (nn - 2)) -
                                  0.5 * p.delta1 * b.g;
        rep.general_residual = std::max(rep.general_residual, (p.psi_munu - general).cwiseAbs().maxCoeff());

        auto einstein_form = [&](double s) {
            return Eigen::MatrixXd(-s * ric / (nn - 2) + (s * b.scalar / (2 * (nn - 1) * (nn - 2)) +
                                                          s * bp.scalar * e2 / (2 * nn * (nn - 1)) - 0.5 * p.delta1) *
                                                             b.g);
        };
        rep.einstein_residual = std::max(rep.einstein_residual, (p.psi_munu - einstein_form(ricci_sign)).cwiseAbs().maxCoeff());
        rep.einstein_residual_flipped =
            std::max(rep.einstein_residual_flipped, (p.psi_munu - einstein_form(-ricci_sign)).cwiseAbs().maxCoeff());

        Eigen::MatrixXd g_inv = checked_inverse(b.g);
        rep.delta1_consistency =
            std::max(rep.delta1_consistency, std::abs(p.delta1 - p.gradient.dot(g_inv * p.gradient)));

        einstein_dev = std::max(einstein_dev, (ricp - (bp.scalar / nn) * bp.g).cwiseAbs().maxCoeff());
        ricci_scale = std::max(ricci_scale, ricp.cwiseAbs().maxCoeff());
        scale = std::max({scale, p.psi_munu.cwiseAbs().maxCoeff(), bp.g.cwiseAbs().maxCoeff()});
    }
    rep.target_is_einstein = Tolerance{}.accepts(einstein_dev, ricci_scale);
    rep.passed = tol.accepts(rep.relation_residual, scale) && tol.accepts(rep.general_residual, scale) &&
                 (!rep.target_is_einstein || tol.accepts(rep.einstein_residual, scale));
    return rep;
}

}  // namespace geom
