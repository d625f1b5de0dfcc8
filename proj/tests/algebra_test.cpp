#include "geom/algebra.hpp"
#include "geom/curvature.hpp"
#include "geom/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <complex>

using namespace geom;

namespace {

const std::complex<double> I(0.0, 1.0);

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }


}  // namespace

TEST_SUITE("killing-embedding") {

TEST_CASE("vector representation commutators") {
    const RepBasis so3 = angular_momentum_rep(Signature::euclidean(3));
    CHECK(so3.generators.size() == 3);
    CHECK(so3.rep_dim() == 3);
    CHECK(so3.label == "vector");
    CHECK(max_abs(commutator(so3.get(0, 1), so3.get(1, 2)) - I * so3.get(0, 2)) == 0.0);
    CHECK(max_abs(so3.get(1, 0) + so3.get(0, 1)) == 0.0);
    CHECK(max_abs(so3.get(2, 2)) == 0.0);
    for (const auto& g : so3.generators) CHECK(max_abs(commutator(g.matrix, g.matrix)) == 0.0);

    const RepBasis lor = angular_momentum_rep(Signature::parse("-,+,+,+"));
    CHECK(lor.generators.size() == 6);
    // boosts close on a rotation with a positive coefficient
    CHECK(max_abs(commutator(lor.get(0, 1), lor.get(0, 2)) - I * lor.get(1, 2)) == 0.0);
    CHECK_THROWS_AS(angular_momentum_rep(Signature::euclidean(1)), ConfigError);
}

TEST_CASE("algebra closes for orthogonal families") {
    for (const std::string& sig : std::initializer_list<std::string>{"+,+,+", "-,+,+", "-,+,+,+", "+,+,+,+,+", "-,-,+,+"}) {
        CAPTURE(sig);
        const RepBasis b = angular_momentum_rep(Signature::parse(sig));
        const AlgebraReport r = verify_algebra(b);
        CHECK(r.closure_residual < 1e-12);
        CHECK(r.jacobi_residual < 1e-12);
        CHECK(r.passed);
        const int n = static_cast<int>(b.generators.size());
        CHECK(r.pairs_checked == n * n);  // ordered pairs, self-brackets included
        CHECK(r.triples_checked == n * (n - 1) * (n - 2) / 6);
    }
}

TEST_CASE("real form closes exactly") {
    for (const std::string& sig : std::initializer_list<std::string>{"+,+,+", "-,+,+", "-,+,+,+"}) {
        CAPTURE(sig);
        const Signature eta = Signature::parse(sig);
        const RealRepBasis real = real_angular_momentum_rep(eta);
        CHECK(real_closure_residual(real) == 0);
        const RepBasis cplx = angular_momentum_rep(eta);
        for (std::size_t k = 0; k < real.generators.size(); ++k)
            CHECK(max_abs(I * cplx.generators[k].matrix - real.generators[k].cast<std::complex<double>>()) == 0.0);
    }
}

TEST_CASE("a perturbed generator is detected") {
    RepBasis b = angular_momentum_rep(Signature::euclidean(3));
    b.generators[1].matrix(0, 1) += 1e-3;
    const AlgebraReport r = verify_algebra(b);
    CHECK(r.closure_residual == doctest::Approx(1e-3).epsilon(0.5));
    CHECK_FALSE(r.passed);
}

TEST_CASE("casimir of the vector representations") {
    const CasimirReport so3 = casimir(angular_momentum_rep(Signature::euclidean(3)));
    CHECK(max_abs(so3.matrix - 2.0 * Eigen::MatrixXcd::Identity(3, 3)) < 1e-12);
    REQUIRE(so3.spectrum.size() == 1);
    CHECK(so3.spectrum[0].value == doctest::Approx(2.0));
    CHECK(so3.spectrum[0].multiplicity == 3);
    CHECK(so3.centrality_residual < 1e-10);
    for (const std::string& sig : std::initializer_list<std::string>{"-,+,+", "-,+,+,+", "+,+,+,+,+"}) {
        CAPTURE(sig);
        const Signature eta = Signature::parse(sig);
        const CasimirReport c = casimir(angular_momentum_rep(eta));
        CHECK(c.centrality_residual < 1e-10);
        REQUIRE(c.spectrum.size() == 1);
        CHECK(c.spectrum[0].value == doctest::Approx(eta.dim() - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("spin representations") {
    for (int two_j = 0; two_j <= 6; ++two_j) {
        CAPTURE(two_j);
        const double j = 0.5 * two_j;
        const RepBasis b = spin_rep(two_j);
        CHECK(b.rep_dim() == two_j + 1);
        const AlgebraReport r = verify_algebra(b);
        CHECK(r.closure_residual < 1e-12);
        CHECK(r.jacobi_residual < 1e-12);
        const CasimirReport c = casimir(b);
        CHECK(c.centrality_residual < 1e-10);
        REQUIRE(c.spectrum.size() == 1);
        CHECK(std::abs(c.spectrum[0].value - j * (j + 1)) < 1e-10);
        CHECK(c.spectrum[0].multiplicity == two_j + 1);
        CHECK(c.spectrum[0].imag < 1e-12);
    }
    CHECK(spin_rep(1).label == "spin:1/2");
    CHECK(spin_rep(4).label == "spin:2");
    CHECK(rep_distance(spin_rep(2), spin_rep(2)) == 0.0);
    CHECK_THROWS_AS(spin_rep(-1), ConfigError);
}

TEST_CASE("spin one is equivalent to the vector representation") {
    // same casimir, same bracket structure, but a different basis: distance is nonzero
    const RepBasis v = angular_momentum_rep(Signature::euclidean(3));
    const RepBasis s = spin_rep(2);
    CHECK(std::abs(casimir(v).spectrum[0].value - casimir(s).spectrum[0].value) < 1e-12);
    CHECK(rep_distance(v, s) > 0.1);
}

TEST_CASE("trivial representation") {
    const CasimirReport c = casimir(trivial_rep(Signature::euclidean(3)));
    CHECK(max_abs(c.matrix) == 0.0);
    REQUIRE(c.spectrum.size() == 1);
    CHECK(c.spectrum[0].value == 0.0);
    CHECK(verify_algebra(trivial_rep(Signature::euclidean(3))).passed);
    const RepBasis t = trivial_rep(Signature::parse("-,+,+,+"));
    CHECK(t.generators.size() == 6);
    CHECK(t.rep_dim() == 1);
    CHECK(verify_algebra(t).passed);
}

TEST_CASE("curvature operators reproduce the vector representation") {
    for (const std::string& sig : std::initializer_list<std::string>{"+,+,+", "-,+,+", "-,+,+,+"}) {
        for (double K : {1.0, 0.25, -2.0}) {
            CAPTURE(sig);
            CAPTURE(K);
            const Signature eta = Signature::parse(sig);
            const RepBasis c = curvature_operator_rep(constant_curvature_tensor(eta, K), eta, K);
            CHECK(rep_distance(c, angular_momentum_rep(eta)) < 1e-14);
        }
    }
    const Signature eta = Signature::euclidean(3);
    CHECK_THROWS_AS(curvature_operator_rep(constant_curvature_tensor(eta, 1.0), eta, 0.0), ConfigError);
}

TEST_CASE("bracket right side") {
    const RepBasis b = angular_momentum_rep(Signature::euclidean(3));
    for (int a = 0; a < 3; ++a)
        for (int bb = 0; bb < 3; ++bb)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d)
                    CHECK(max_abs(commutator(b.get(a, bb), b.get(c, d)) - bracket_rhs(b, a, bb, c, d)) < 1e-15);
}

}  // TEST_SUITE
