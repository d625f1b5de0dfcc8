#include "geom/errors.hpp"
#include "geom/metric.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace geom;
using geom::test::max_abs;
using geom::test::vec;

namespace {

const std::vector<std::string> kPresets{"flat:p=1,q=3",         "flat:p=0,q=3",        "sphere:n=2,R=1",
                                        "sphere:n=2,R=2",       "sphere:n=3,R=1",      "hyperbolic:n=2,R=1",
                                        "hyperbolic:n=3,R=2",   "cc:n=3,K=1",          "cc:n=2,K=-1",
                                        "cc:n=4,K=0.5,p=1",     "schwarzschild:M=1"};

// Interior sample points: a box around the sample point, kept inside the domain.
std::vector<Eigen::VectorXd> interior_points(const MetricSpec& s, int count, std::uint64_t seed) {
    const Eigen::VectorXd c = s.sample_point();
    Eigen::VectorXd lo(s.dim()), hi(s.dim());
    for (int i = 0; i < s.dim(); ++i) {
        const Interval& iv = s.domain()[static_cast<std::size_t>(i)];
        double w = 0.5;
        if (std::isfinite(iv.lo)) w = std::min(w, 0.4 * (c(i) - iv.lo));
        if (std::isfinite(iv.hi)) w = std::min(w, 0.4 * (iv.hi - c(i)));
        lo(i) = c(i) - w;
        hi(i) = c(i) + w;
    }
    return geom::test::box_points(lo, hi, count, seed);
}

}  // namespace

TEST_SUITE("metric-catalog") {

TEST_CASE("flat and constant-curvature evaluations") {
    const MetricSpec flat = make_preset("flat:p=1,q=3");
    CHECK(flat.signature() == Signature::parse("-,+,+,+"));
    const Eigen::MatrixXd eta = Signature::parse("-,+,+,+").matrix();
    CHECK(max_abs(eval_metric(flat, vec({3, -1, 7, 0.5})) - eta) == 0.0);

    const MetricSpec k0 = make_preset("constant-curvature:n=3,K=0");
    CHECK(max_abs(eval_metric(k0, vec({0.4, -2, 5})) - Eigen::MatrixXd::Identity(3, 3)) == 0.0);
    const MetricSpec k1 = make_preset("constant-curvature:n=4,K=1,p=1");
    CHECK(max_abs(eval_metric(k1, Eigen::VectorXd::Zero(4)) - eta) == 0.0);
}

TEST_CASE("sphere preset from a metric document") {
    const MetricSpec s = parse_metric_spec("preset sphere n=2 R=1\n");
    const double th = 0.8;
    const Eigen::MatrixXd g = eval_metric(s, vec({th, 0.1}));
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(std::sin(th) * std::sin(th)).epsilon(1e-15));
    CHECK(g(0, 1) == 0.0);
    CHECK(s == make_preset("sphere:n=2,R=1"));
}

TEST_CASE("explicit metric document") {
    const std::string doc =
        "# Minkowski in spherical coordinates\n"
        "name = mink\n"
        "dim = 4\n"
        "signature = (-,+,+,+)\n"
        "coords = t, r, th, ph\n"
        "domain r = (0, inf)\n"
        "domain th = (0.001, 3.14)\n"
        "g[0][0] = -1\n"
        "g[1][1] = 1\n"
        "g[2][2] = r^2\n"
        "g[3][3] = r^2 * sin(th)^2\n";
    const MetricSpec s = parse_metric_spec(doc);
    CHECK(s.dim() == 4);
    CHECK(s.coords()[3] == "ph");
    const Eigen::MatrixXd g = eval_metric(s, vec({0, 2, 1, 0}));
    CHECK(g(3, 3) == doctest::Approx(4 * std::sin(1.0) * std::sin(1.0)));
    CHECK_THROWS_AS(eval_metric(s, vec({0, -1, 1, 0})), DomainError);
    // round trip
    const MetricSpec back = parse_metric_spec(print_metric_spec(s));
    CHECK(back == s);
}

TEST_CASE("metric document errors") {
    const std::string head = "dim = 2\nsignature = +,+\ncoords = a, b\ng[0][0] = 1\ng[1][1] = 1\n";
    try {
        parse_metric_spec(head + "g[0][1] = sin(\n");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 6);
        CHECK(e.column() == 14);  // the unclosed '('
    }
    CHECK_THROWS_AS(parse_metric_spec(head + "g[0][1] = c\n"), SyntaxError);      // unknown coordinate
    CHECK_THROWS_AS(parse_metric_spec(head + "g[0][1] = a\ng[1][0] = b\n"), ConfigError);  // asymmetric
    CHECK_THROWS_AS(parse_metric_spec(head + "g[0][0] = 2\n"), ConfigError);      // duplicate
    CHECK_THROWS_AS(parse_metric_spec("dim = 3\nsignature = +,+\ncoords = a, b\ng[0][0] = 1\ng[1][1] = 1\n"),
                    ConfigError);                                                  // dimension mismatch
    CHECK_THROWS_AS(parse_metric_spec("dim = 2\nsignature = -,+\ncoords = a, b\ng[0][0] = 1\ng[1][1] = 1\n"),
                    ConfigError);                                                  // eigen signs vs signature
    CHECK_THROWS_AS(parse_metric_spec("preset sphere n=2 R=1\ndim = 2\n"), ConfigError);
    CHECK_THROWS_AS(make_preset("sphere:n=2,radius=1"), ConfigError);
    CHECK_THROWS_AS(make_preset("torus:n=2"), ConfigError);
    // a mirrored assignment that agrees with its partner is accepted
    CHECK_NOTHROW(parse_metric_spec(head + "g[0][1] = a*b\ng[1][0] = a*b\n"));
}

TEST_CASE("domain checks") {
    const MetricSpec sch = make_preset("schwarzschild:M=1");
    CHECK_THROWS_AS(eval_metric(sch, vec({0, 1.5, 1, 0})), DomainError);
    CHECK_NOTHROW(eval_metric(sch, vec({0, 10, 1, 0})));
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    CHECK_THROWS_AS(eval_metric(s2, vec({0.0, 0.0})), DomainError);  // pole excluded
    CHECK_THROWS_AS(eval_metric(s2, vec({0.5})), ConfigError);
}

TEST_CASE("sphere derivatives") {
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    const MetricDerivatives eq = eval_metric_derivs(s2, vec({std::numbers::pi / 2, 0}), 1);
    CHECK(std::abs(eq.dg(1, 1, 0)) < 1e-15);
    const MetricDerivatives q = eval_metric_derivs(s2, vec({std::numbers::pi / 4, 0}), 2);
    CHECK(q.dg(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.ddg(1, 1, 0, 0) == doctest::Approx(2 * std::cos(std::numbers::pi / 2)).epsilon(1e-14));
    const MetricDerivatives f = eval_metric_derivs(make_preset("flat:p=1,q=2"), vec({1, 2, 3}), 2);
    CHECK(f.dg.max_abs() == 0.0);
    CHECK(f.ddg.max_abs() == 0.0);
}

TEST_CASE("dual derivatives agree with finite differences on all presets") {
    for (const auto& name : kPresets) {
        CAPTURE(name);
        const MetricSpec s = make_preset(name);
        for (const auto& x : interior_points(s, 5, 11)) {
            const MetricDerivatives d = eval_metric_derivs(s, x, 2, DerivativeMode::Dual);
            const MetricDerivatives fd = eval_metric_derivs(s, x, 2, DerivativeMode::FiniteDifference);
            const double s1 = std::max(1.0, d.dg.max_abs()), s2 = std::max(1.0, d.ddg.max_abs());
            CHECK((d.dg - fd.dg).max_abs() < 1e-6 * s1);
            CHECK((d.ddg - fd.ddg).max_abs() < 1e-6 * s2);
        }
    }
}

TEST_CASE("vielbein examples") {
    const FrameField flat = vielbein_at(make_preset("flat:p=1,q=3"), vec({0, 0, 0, 0}));
    CHECK(max_abs(flat.e - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
    const FrameField eq = vielbein_at(make_preset("sphere:n=2,R=1"), vec({std::numbers::pi / 2, 0}));
    CHECK(max_abs(eq.e - Eigen::MatrixXd::Identity(2, 2)) < 1e-15);
    const FrameField s = vielbein_at(make_preset("sphere:n=2,R=2"), vec({std::numbers::pi / 3, 0}));
    CHECK(s.e(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.e(1, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(s.e(0, 1) == 0.0);
}

TEST_CASE("vielbein invariants on all presets") {
    for (const auto& name : kPresets) {
        CAPTURE(name);
        const MetricSpec s = make_preset(name);
        const Eigen::MatrixXd eta = s.signature().matrix();
        double worst = 0.0, inv = 0.0;
        for (const auto& x : interior_points(s, 100, 5)) {
            const FrameField f = vielbein_at(s, x);
            worst = std::max(worst, max_abs(f.e.transpose() * eta * f.e - eval_metric(s, x)));
            inv = std::max(inv, max_abs(f.e * f.e_inv - Eigen::MatrixXd::Identity(s.dim(), s.dim())));
        }
        CHECK(worst < 1e-10);
        CHECK(inv < 1e-10);
    }
}

TEST_CASE("vielbein errors") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(vielbein_from_metric(g, Signature::parse("-,+"), vec({0, 0})), SignatureMismatchError);
    g(1, 1) = 0.0;
    CHECK_THROWS_AS(vielbein_from_metric(g, Signature::parse("+,+"), vec({0, 0})), SingularMetricError);
}

}  // TEST_SUITE
