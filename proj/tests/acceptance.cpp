// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cli.hpp"
#include "geom/algebra.hpp"
#include "geom/embedding.hpp"
#include "geom/jacobi.hpp"
#include "geom/normal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace geom;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<Eigen::VectorXd> box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * U(rng);
        out.push_back(x);
    }
    return out;
}

std::vector<Eigen::VectorXd> sphere_points(int n, int count, std::uint64_t seed) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, 0.2), hi = Eigen::VectorXd::Constant(n, kPi - 0.2);
    lo(n - 1) = -kPi;
    hi(n - 1) = kPi;
    return box(lo, hi, count, seed);
}

std::vector<Eigen::VectorXd> ball_points(int n, int count, std::uint64_t seed, double half) {
    return box(Eigen::VectorXd::Constant(n, -half), Eigen::VectorXd::Constant(n, half), count, seed);
}

// Unit frame directions, spacelike when the signature is indefinite.
std::vector<Eigen::VectorXd> random_directions(const Signature& eta, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    std::vector<Eigen::VectorXd> out;
    while (static_cast<int>(out.size()) < count) {
        Eigen::VectorXd v(eta.dim());
        for (int i = 0; i < eta.dim(); ++i) v(i) = eta[i] < 0 ? 0.3 * N(rng) : N(rng);
        const double q = eta.inner(v, v);
        if (q < 0.2 * v.squaredNorm()) continue;
        out.push_back(v / std::sqrt(q));
    }
    return out;
}

Eigen::VectorXd transverse_to(const Eigen::VectorXd& z) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(z.size());
    Eigen::Index k = 0;
    z.cwiseAbs().minCoeff(&k);
    w(k) = 1.0;
    w -= (w.dot(z) / z.squaredNorm()) * z;
    return w.normalized();
}

Outcome constant_curvature_identity() {
    struct Case {
        const char* preset;
        double K;
        std::vector<Eigen::VectorXd> pts;
    };
    const std::vector<Case> cases{
        {"sphere:n=2,R=1", 1.0, sphere_points(2, 20, 101)},   {"sphere:n=2,R=2", 0.25, sphere_points(2, 20, 102)},
        {"sphere:n=3,R=1", 1.0, sphere_points(3, 20, 103)},   {"cc:n=3,K=1", 1.0, ball_points(3, 20, 104, 1.0)},
        {"cc:n=3,K=0.25", 0.25, ball_points(3, 20, 105, 1.5)}, {"cc:n=3,K=-1", -1.0, ball_points(3, 20, 106, 1.0)},
    };
    double worst = 0.0;
    for (const auto& c : cases) {
        const MetricSpec s = make_preset(c.preset);
        const DenseTensor expected = constant_curvature_tensor(s.signature(), c.K);
        for (const auto& x : c.pts) worst = std::max(worst, (riemann(s, x).riemann_frame - expected).max_abs());
    }
    return {worst < 1e-7, "max frame deviation " + fmt(worst)};
}

Outcome schwarzschild_ricci_flat() {
    const MetricSpec s = make_preset("schwarzschild:M=1");
    const auto pts = box(vec({-5, 3, 0.3, -kPi}), vec({5, 50, kPi - 0.3, kPi}), 20, 201);
    double worst = 0.0;
    for (const auto& x : pts) worst = std::max(worst, riemann(s, x).ricci.max_abs());
    const EinsteinReport r = einstein_space_check(s, pts, Tolerance(1e-7, 1e-7));
    return {worst < 1e-7 && r.is_einstein && !r.is_constant_curvature,
            "max |Ricci| " + fmt(worst) + ", is_einstein " + (r.is_einstein ? "true" : "false") +
                ", is_constant_curvature " + (r.is_constant_curvature ? "true" : "false")};
}

struct CurvedPreset {
    const char* preset;
    Eigen::VectorXd origin;
    double length;
};

std::vector<CurvedPreset> curved_presets() {
    return {{"sphere:n=2,R=1", vec({1.2, 0.3}), 1.0},         {"sphere:n=3,R=1", vec({1.2, 1.0, 0.3}), 1.0},
            {"sphere:n=2,R=2", vec({1.0, 0.0}), 2.0},         {"hyperbolic:n=2,R=1", vec({0.0, 1.0}), 1.0},
            {"hyperbolic:n=3,R=1", vec({0.0, 0.5, 1.5}), 1.0}, {"cc:n=3,K=-1", vec({0.1, 0.0, -0.2}), 1.0},
            {"cc:n=4,K=0.5,p=1", vec({0.1, 0.2, -0.1, 0.3}), 1.0}, {"schwarzschild:M=1", vec({0, 10, 1.3, 0}), 2.0}};
}

Outcome ab_structure() {
    double worst = 0.0;
    std::uint64_t seed = 300;
    for (const auto& c : curved_presets()) {
        const MetricSpec s = make_preset(c.preset);
        std::mt19937_64 rng(seed++);
        std::uniform_real_distribution<double> len(0.1, c.length);
        for (const auto& d : random_directions(s.signature(), 20, seed++)) {
            const NormalExpansion e = solve_AB(s, integrate_radial_geodesic(s, c.origin, len(rng) * d));
            const ExpansionChecks k = check_expansion(e);
            worst = std::max({worst, k.A_at_origin, k.A_antisymmetry, k.B_antisym_first, k.B_antisym_second,
                              k.B_pair_symmetry, k.B_first_bianchi, k.A_equals_zB});
        }
    }
    return {worst < 1e-8, "max A/B identity residual " + fmt(worst) + " over 160 geodesics"};
}

Outcome oracle_equivalence() {
    double worst = 0.0, origin = 0.0;
    std::string bounds;
    for (const auto& [preset, o] : std::vector<std::pair<const char*, Eigen::VectorXd>>{
             {"sphere:n=2,R=1", vec({1.2, 0.3})},
             {"sphere:n=3,R=1", vec({1.2, 1.0, 0.3})},
             {"hyperbolic:n=2,R=1", vec({0.0, 1.0})},
             {"hyperbolic:n=3,R=1", vec({0.0, 0.5, 1.5})},
             {"schwarzschild:M=1", vec({0, 10, 1.3, 0})}}) {
        const MetricSpec s = make_preset(preset);
        const FrameField fr = vielbein_at(s, o);
        const ChartRadiusReport cr = normal_chart_radius(s, o, 8);
        // without a conjugate point up to s_max the searched arclength bounds the chart
        const double bound = 0.5 * cr.radius.value_or(cr.s_searched_min);
        bounds += std::string(bounds.empty() ? "" : ", ") + preset + " |z| <= " + fmt(bound);
        const Eigen::MatrixXd eta = s.signature().matrix();
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.dim());
        origin = std::max(origin, (exp_map_pullback(s, fr, zero) - eta).cwiseAbs().maxCoeff());
        origin = std::max(origin, (reconstruct_metric(solve_AB(s, integrate_radial_geodesic(s, fr, zero))) - eta)
                                      .cwiseAbs()
                                      .maxCoeff());
        const auto dirs = random_directions(s.signature(), 4, 401);
        for (const auto& d : dirs)
            for (double f : {0.1, 0.4, 0.7, 1.0}) {
                const Eigen::VectorXd z = f * bound * d;
                const Eigen::MatrixXd g = reconstruct_metric(solve_AB(s, integrate_radial_geodesic(s, fr, z)));
                worst = std::max(worst, (g - exp_map_pullback(s, fr, z)).cwiseAbs().maxCoeff());
            }
    }
    return {worst < 1e-5 && origin < 1e-12,
            "max oracle delta " + fmt(worst) + ", at origin " + fmt(origin) + " (" + bounds + ")"};
}

Outcome conformal_factor_checks() {
    double flat = 0.0, radial = 0.0, ratio = 0.0;
    const MetricSpec f = make_preset("flat:p=0,q=3");
    for (const auto& d : random_directions(f.signature(), 5, 501)) {
        const Eigen::VectorXd z = 0.8 * d;
        flat = std::max(flat, std::abs(conformal_factor(solve_AB(f, integrate_radial_geodesic(f, vec({0, 0, 0}), z)),
                                                        transverse_to(z))
                                           .sigma));
    }
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    const Eigen::VectorXd o = vec({1.2, 0.3});
    const FrameField fr = vielbein_at(s2, o);
    for (const auto& d : random_directions(s2.signature(), 5, 502)) {
        const Eigen::VectorXd z = 0.3 * d;
        const NormalExpansion e = solve_AB(s2, integrate_radial_geodesic(s2, fr, z));
        radial = std::max(radial, std::abs(conformal_factor(e, z).sigma));
        const ConformalFactor cf = conformal_factor(e, transverse_to(z));
        const Eigen::MatrixXd g = exp_map_pullback(s2, fr, z);
        const double reconstructed = cf.velocity.dot(g * cf.velocity);
        const double flat_line = cf.velocity.squaredNorm();
        ratio = std::max(ratio, std::abs(std::exp(2.0 * cf.sigma) * flat_line - reconstructed) / reconstructed);
    }
    return {flat < 1e-12 && radial < 1e-12 && ratio < 1e-4,
            "flat sigma " + fmt(flat) + ", radial sigma " + fmt(radial) + ", S2 line-element ratio error " + fmt(ratio)};
}

Outcome conjugate_points() {
    JacobiOptions jo;
    jo.s_max = 10.0;
    double err = 0.0;
    std::string detail;
    bool ok = true;
    for (double R : {1.0, 2.0}) {
        JacobiOptions jr = jo;
        jr.s_max = std::max(10.0, 2.0 * kPi * R);
        const ChartRadiusReport r =
            normal_chart_radius(make_preset("sphere", {{"n", 2}, {"R", R}}), vec({1.0, 0.2}), 8, 0, jr);
        for (const auto& d : r.directions) {
            if (!d.s_conjugate) {
                ok = false;
                continue;
            }
            err = std::max(err, std::abs(*d.s_conjugate - kPi * R));
        }
    }
    int found = 0;
    for (const auto& [preset, o] : std::vector<std::pair<const char*, Eigen::VectorXd>>{
             {"flat:p=0,q=2", vec({0, 0})}, {"flat:p=1,q=3", vec({0, 0, 0, 0})},
             {"hyperbolic:n=2,R=1", vec({0, 1})}, {"hyperbolic:n=3,R=1", vec({0, 0, 1})}}) {
        const ChartRadiusReport r = normal_chart_radius(make_preset(preset), o, 8, 0, jo);
        for (const auto& d : r.directions)
            if (d.s_conjugate) ++found;
    }
    return {ok && err < 1e-4 && found == 0,
            "sphere |s - pi R| max " + fmt(err) + ", conjugate points on flat/hyperbolic: " + std::to_string(found)};
}

Outcome killing_classification() {
    double identity = 0.0, commutator = 0.0;
    bool all_killing = true;
    std::uint64_t seed = 700;
    for (int n : {2, 3}) {
        const EmbeddingModel m = build_embedding(n, 1.0);
        std::mt19937_64 rng(seed++);
        std::normal_distribution<double> N;
        const auto pts = m.sample_points(50, seed++);
        std::vector<Eigen::VectorXd> us;
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd u(m.ambient_dim());
            for (int i = 0; i < u.size(); ++i) u(i) = N(rng);
            us.push_back(u);
        }
        for (int k = 0; k < 50; ++k) {
            const Projection p = project_constant_vector(m, us[k], m.embed(pts[k]));
            const Eigen::MatrixXd L = lie_derivative_metric(m.chart(), projected_field(m, us[k]), pts[k]);
            const Eigen::MatrixXd target = -(2.0 / m.R()) * p.normal_part * eval_metric(m.chart(), pts[k]);
            identity = std::max(identity, (L - target).cwiseAbs().maxCoeff());
        }
        const std::vector<Eigen::VectorXd> sample(pts.begin(), pts.begin() + 6);
        const int d = m.ambient_dim();
        std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) pairs.emplace_back(Eigen::VectorXd::Unit(d, a), Eigen::VectorXd::Unit(d, b));
        for (int k = 0; k + 1 < 10; k += 2) pairs.emplace_back(us[k], us[k + 1]);
        for (const auto& [u, v] : pairs) {
            const FieldClassification c = classify_field(
                m.chart(), commutator_field(projected_field(m, u), projected_field(m, v)), sample, 1e-7, kNestedStep);
            commutator = std::max(commutator, c.max_lie);
            all_killing = all_killing && c.kind == FieldKind::Killing;
        }
    }
    return {identity < 1e-6 && all_killing && commutator < 1e-7,
            "Lie identity residual " + fmt(identity) + ", commutator max |L g| " + fmt(commutator)};
}

Outcome algebra_and_casimir() {
    double closure = 0.0, jacobi = 0.0, casimir_err = 0.0;
    for (const char* sig : {"+,+,+", "-,+,+"}) {
        const AlgebraReport r = verify_algebra(angular_momentum_rep(Signature::parse(sig)));
        closure = std::max(closure, r.closure_residual);
        jacobi = std::max(jacobi, r.jacobi_residual);
    }
    for (int two_j : {1, 2, 3, 4}) {
        const double j = two_j / 2.0;
        for (const auto& e : casimir(spin_rep(two_j)).spectrum)
            casimir_err = std::max({casimir_err, std::abs(e.value - j * (j + 1)), e.imag});
    }
    return {closure < 1e-12 && jacobi < 1e-12 && casimir_err < 1e-10,
            "closure " + fmt(closure) + ", Jacobi " + fmt(jacobi) + ", spin Casimir error " + fmt(casimir_err)};
}

Outcome conformal_identities() {
    double worst = 0.0;
    bool all = true;
    for (int n : {3, 4})
        for (double K : {1.0, 0.25, -1.0}) {
            const MetricSpec flat = make_preset("flat", {{"p", 0}, {"q", n}});
            const MetricSpec cc = make_preset("constant-curvature", {{"n", n}, {"K", K}, {"p", 0}});
            std::string q;
            for (int i = 0; i < n; ++i) q += (i ? " + " : "") + flat.coords()[static_cast<std::size_t>(i)] + "^2";
            const Expr psi = expr::parse("-ln(1 + " + expr::format_number(K) + " * (" + q + ") / 4)", flat.coords());
            const ConformalReport r = conformal_identity_check(flat, psi, cc, ball_points(n, 20, 900 + n, 0.8));
            worst = std::max(worst, r.einstein_residual);
            all = all && r.passed;
        }
    return {all && worst < 1e-6, "Einstein-space form residual " + fmt(worst) + " (curvatures with sign -1)"};
}

Outcome determinism() {
    const std::vector<std::vector<std::string>> commands{
        {"curvature", "--preset", "sphere:n=3,R=1", "--point", "1.0,0.5,0.2", "--point", "2.0,1.0,-1.0"},
        {"curvature", "--preset", "schwarzschild:M=1", "--point", "0,10,1.2,0", "--format", "csv"},
        {"normal", "--preset", "sphere:n=2,R=1", "--dirs", "4", "--seed", "7"},
        {"normal", "--preset", "schwarzschild:M=1", "--origin", "0,10,1.3,0", "--dirs", "2", "--seed", "3"},
        {"conjugate", "--preset", "sphere:n=2,R=2", "--dirs", "8", "--seed", "5"},
        {"conjugate", "--preset", "hyperbolic:n=2,R=1", "--dirs", "4", "--format", "csv"},
        {"killing", "--n", "2", "--K", "1", "--samples", "6", "--seed", "11"},
        {"killing", "--n", "3", "--K", "-1", "--samples", "4", "--seed", "2"},
        {"algebra", "--signature", "+,+,+", "--reps", "vector,spin:1/2,spin:2"},
        {"algebra", "--signature", "-,+,+,+", "--format", "csv"},
    };
    int same = 0;
    for (const auto& cmd : commands) {
        std::ostringstream a, b, ea, eb;
        const int ca = cli::run(cmd, a, ea);
        const int cb = cli::run(cmd, b, eb);
        if (ca == 0 && cb == 0 && !a.str().empty() && a.str() == b.str() && ea.str() == eb.str()) ++same;
    }
    return {same == static_cast<int>(commands.size()),
            std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"constant-curvature frame identity", constant_curvature_identity},
        {"schwarzschild Ricci-flatness", schwarzschild_ricci_flat},
        {"A/B structure along radial geodesics", ab_structure},
        {"normal-coordinate oracle equivalence", oracle_equivalence},
        {"conformal factor", conformal_factor_checks},
        {"conjugate points", conjugate_points},
        {"Killing classification", killing_classification},
        {"algebra and Casimir", algebra_and_casimir},
        {"conformal identities", conformal_identities},
        {"CLI determinism", determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
