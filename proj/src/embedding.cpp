#include "geom/embedding.hpp"

#include "geom/errors.hpp"

#include <cmath>
#include <random>

namespace geom {

namespace {

Signature ambient_for(int n, int eps) {
    std::vector<int> s(static_cast<std::size_t>(n + 1), 1);
    if (eps < 0) s[0] = -1;
    return Signature(std::move(s));
}

MetricSpec chart_for(int n, double K) {
    if (K == 0.0 || !std::isfinite(K)) throw ConfigError("embedding needs a finite nonzero curvature K");
    if (n < 2) throw ConfigError("embedding needs n >= 2");
    return make_preset("constant-curvature", {{"n", n}, {"K", K}, {"p", 0}});
}

// Ambient slot of chart coordinate i.
int slot(int i, int extra) { return extra == 0 ? i + 1 : i; }

}  // namespace

EmbeddingModel::EmbeddingModel(int n, double K)
    : n_(n),
      K_(K),
      R_(1.0 / std::sqrt(std::abs(K))),
      eps_(K > 0 ? 1 : -1),
      extra_(K > 0 ? n : 0),
      ambient_(ambient_for(n, K > 0 ? 1 : -1)),
      chart_(chart_for(n, K)) {}

Eigen::VectorXd EmbeddingModel::embed(const Eigen::VectorXd& omega) const {
    const double a = K_ * omega.squaredNorm() / 4.0;
    if (!(1.0 + a > 0.0)) throw DomainError("chart point outside the stereographic ball");
    Eigen::VectorXd x(n_ + 1);
    for (int i = 0; i < n_; ++i) x(slot(i, extra_)) = omega(i) / (1.0 + a);
    x(extra_) = R_ * (1.0 - a) / (1.0 + a);
    return x;
}

Eigen::MatrixXd EmbeddingModel::jacobian(const Eigen::VectorXd& omega) const {
    const double a = K_ * omega.squaredNorm() / 4.0;
    if (!(1.0 + a > 0.0)) throw DomainError("chart point outside the stereographic ball");
    const double d = 1.0 + a;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_ + 1, n_);
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            double v = -omega(i) * K_ * omega(j) / (2.0 * d * d);
            if (i == j) v += 1.0 / d;
            jac(slot(i, extra_), j) = v;
        }
    }
    for (int j = 0; j < n_; ++j) jac(extra_, j) = -R_ * K_ * omega(j) / (d * d);
    return jac;
}

double EmbeddingModel::constraint_residual(const Eigen::VectorXd& x) const {
    return std::abs(inner(x, x) - eps_ * R_ * R_);
}

double EmbeddingModel::normal_residual(const Eigen::VectorXd& omega) const {
    const Eigen::VectorXd nvec = normal(embed(omega));
    const Eigen::MatrixXd jac = jacobian(omega);
    double r = std::abs(inner(nvec, nvec) - eps_);
    for (int i = 0; i < n_; ++i) r = std::max(r, std::abs(inner(nvec, jac.col(i))));
    return r;
}

Eigen::VectorXd EmbeddingModel::to_chart(const Eigen::VectorXd& omega, const Eigen::VectorXd& tangent) const {
    const Eigen::MatrixXd jac = jacobian(omega);
    const Eigen::MatrixXd eta = ambient_.matrix();
    const Eigen::MatrixXd gram = jac.transpose() * eta * jac;
    return gram.ldlt().solve(jac.transpose() * eta * tangent);
}

Eigen::VectorXd EmbeddingModel::to_ambient(const Eigen::VectorXd& omega, const Eigen::VectorXd& chart_vec) const {
    return jacobian(omega) * chart_vec;
}

std::vector<Eigen::VectorXd> EmbeddingModel::sample_points(int count, std::uint64_t seed, double radius_fraction) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = 2.0 * R_ * radius_fraction;
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
    while (static_cast<int>(pts.size()) < count) {
        Eigen::VectorXd p(n_);
        for (int i = 0; i < n_; ++i) p(i) = 2.0 * unit(rng) - 1.0;
        const double r = p.norm();
        if (r > 1.0 || r < 1e-3) continue;  // rejection sampling in the unit ball
        pts.push_back(scale * p);
    }
    return pts;
}

EmbeddingModel build_embedding(int n, double K) { return EmbeddingModel(n, K); }

Projection project_constant_vector(const EmbeddingModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& x) {
    if (u.size() != m.ambient_dim() || x.size() != m.ambient_dim())
        throw ShapeError("ambient vectors must have " + std::to_string(m.ambient_dim()) + " components");
    const double res = m.constraint_residual(x);
    if (!(res < 1e-8 * std::max(1.0, m.R() * m.R())))
        throw DomainError("point is off the surface (constraint residual " + std::to_string(res) + ")");
    const Eigen::VectorXd nvec = m.normal(x);
    Projection p;
    p.normal_part = m.inner(u, nvec);
    p.tangent = u - m.epsilon() * p.normal_part * nvec;
    p.lambda = -m.epsilon() * p.normal_part / m.R();
    p.tangency = std::abs(m.inner(p.tangent, nvec));
    return p;
}

ChartField projected_field(const EmbeddingModel& m, const Eigen::VectorXd& u) {
    if (u.size() != m.ambient_dim())
        throw ShapeError("ambient vector must have " + std::to_string(m.ambient_dim()) + " components");
    return [m, u](const Eigen::VectorXd& omega) {
        const Eigen::VectorXd x = m.embed(omega);
        const Eigen::VectorXd nvec = m.normal(x);
        const Eigen::VectorXd t = u - m.epsilon() * m.inner(u, nvec) * nvec;
        return m.to_chart(omega, t);
    };
}

ChartField rotation_field(const EmbeddingModel& m, int a, int b) {
    const int d = m.ambient_dim();
    if (a < 0 || b < 0 || a >= d || b >= d) throw ConfigError("rotation axes out of range");
    return [m, a, b](const Eigen::VectorXd& omega) {
        const Eigen::VectorXd x = m.embed(omega);
        const auto& eta = m.ambient_signature();
        Eigen::VectorXd t = Eigen::VectorXd::Zero(m.ambient_dim());
        t(b) += eta[a] * x(a);
        t(a) -= eta[b] * x(b);
        return m.to_chart(omega, t);
    };
}

Eigen::MatrixXd field_jacobian(const ChartField& f, const Eigen::VectorXd& x, double h) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd jac;
    for (int b = 0; b < n; ++b) {
        Eigen::VectorXd xp = x, xm = x, xpp = x, xmm = x;
        xp(b) += h;
        xm(b) -= h;
        xpp(b) += 2 * h;
        xmm(b) -= 2 * h;
        const Eigen::VectorXd col = (8.0 * (f(xp) - f(xm)) - (f(xpp) - f(xmm))) / (12.0 * h);
        if (b == 0) jac.resize(col.size(), n);
        jac.col(b) = col;
    }
    return jac;
}

Eigen::MatrixXd lie_derivative_metric(const MetricSpec& spec, const ChartField& f, const Eigen::VectorXd& x, double h) {
    const int n = spec.dim();
    if (x.size() != n) throw ShapeError("point dimension does not match the metric");
    spec.require_in_domain(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
    for (int b = 0; b < n; ++b) {
        for (double s : {-2.0 * h, 2.0 * h}) {
            Eigen::VectorXd y = x;
            y(b) += s;
            spec.require_in_domain(std::span<const double>(y.data(), static_cast<std::size_t>(n)));
        }
    }
    const MetricDerivatives d = eval_metric_derivs(spec, x, 1);
    const Eigen::VectorXd xi = f(x);
    if (xi.size() != n) throw ShapeError("field dimension does not match the metric");
    const Eigen::MatrixXd dxi = field_jacobian(f, x, h);  // dxi(c, a) = d_a xi^c
    Eigen::MatrixXd lie = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double v = 0.0;
            for (int c = 0; c < n; ++c) {
                v += xi(c) * d.dg(a, b, c);
                v += d.g(c, b) * dxi(c, a) + d.g(a, c) * dxi(c, b);
            }
            lie(a, b) = v;
        }
    }
    return 0.5 * (lie + lie.transpose());
}

Eigen::VectorXd commutator_at(const ChartField& f1, const ChartField& f2, const Eigen::VectorXd& x, double h) {
    return field_jacobian(f2, x, h) * f1(x) - field_jacobian(f1, x, h) * f2(x);
}

ChartField commutator_field(ChartField f1, ChartField f2, double h) {
    return [f1 = std::move(f1), f2 = std::move(f2), h](const Eigen::VectorXd& x) { return commutator_at(f1, f2, x, h); };
}

Eigen::VectorXd ambient_commutator(const EmbeddingModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& x) {
    return m.K() * (m.inner(u, x) * v - m.inner(v, x) * u);
}

std::string to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Killing: return "killing";
        case FieldKind::ConformalKilling: return "conformal_killing";
        case FieldKind::Neither: return "neither";
    }
    return "neither";
}

FieldClassification classify_field(const MetricSpec& spec, const ChartField& f, const std::vector<Eigen::VectorXd>& points,
                                   double tol, double h) {
    if (points.size() < 3) throw ConfigError("classify_field needs at least 3 sample points");
    const int n = spec.dim();
    FieldClassification out;
    out.tol = tol;
    for (const auto& x : points) {
        const Eigen::MatrixXd lie = lie_derivative_metric(spec, f, x, h);
        const Eigen::MatrixXd g = eval_metric(spec, x);
        const double trace = (checked_inverse(g) * lie).trace() / n;
        out.max_lie = std::max(out.max_lie, lie.cwiseAbs().maxCoeff());
        out.conformal_residual = std::max(out.conformal_residual, (lie - trace * g).cwiseAbs().maxCoeff());
        out.lambda.push_back(0.5 * trace);
    }
    if (out.max_lie < tol)
        out.kind = FieldKind::Killing;
    else if (out.conformal_residual < tol)
        out.kind = FieldKind::ConformalKilling;
    return out;
}

}  // namespace geom
