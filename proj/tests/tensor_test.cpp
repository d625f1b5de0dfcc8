#include "geom/curvature.hpp"
#include "geom/errors.hpp"
#include "geom/tensor.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace geom;
using geom::test::vec;

namespace {

DenseTensor random_tensor(std::vector<std::size_t> dims, std::vector<SlotKind> kinds, std::uint64_t seed) {
    DenseTensor t(std::move(dims), std::move(kinds));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : t.data()) v = u(rng);
    return t;
}

}  // namespace

TEST_SUITE("tensor-core") {

TEST_CASE("signature parsing and counts") {
    const Signature s = Signature::parse("(-,+,+,+)");
    CHECK(s.dim() == 4);
    CHECK(s.p_plus() == 3);
    CHECK(s.q_minus() == 1);
    CHECK(Signature::parse("-+++") == s);
    CHECK(Signature::parse("-,+,+,+") == s);
    CHECK(s.to_string() == "(-,+,+,+)");
    CHECK_THROWS_AS(Signature(std::vector<int>{1, 2}), ConfigError);
    CHECK_THROWS_AS(Signature::parse("+,x"), ConfigError);
}

TEST_CASE("tolerance validation") {
    CHECK_THROWS_AS(Tolerance(-1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(Tolerance(0.0, NAN), ConfigError);
    const Tolerance t;
    CHECK(t.abs_tol == 1e-9);
    CHECK(t.rel_tol == 1e-9);
    CHECK(t.accepts(1e-10));
    CHECK(t.accepts(1e-7, 1e3));
    CHECK_FALSE(t.accepts(1e-7, 1.0));
}

TEST_CASE("dense tensor shape invariants") {
    CHECK_THROWS_AS(DenseTensor({2, 2}, {SlotKind::CoordLower}), ShapeError);
    CHECK_THROWS_AS(DenseTensor({2, 2}, {SlotKind::CoordLower, SlotKind::CoordLower}, std::vector<double>(3)),
                    ShapeError);
    DenseTensor t({2, 3}, {SlotKind::CoordUpper, SlotKind::CoordLower});
    CHECK(t.size() == 6);
    t(1, 2) = 5.0;
    CHECK(t.data()[5] == 5.0);  // row-major
}

TEST_CASE("trace of the identity") {
    const DenseTensor delta =
        DenseTensor::from_matrix(Eigen::MatrixXd::Identity(3, 3), SlotKind::CoordUpper, SlotKind::CoordLower);
    const DenseTensor tr = contract(delta, 0, 1);
    CHECK(tr.rank() == 0);
    CHECK(tr.data()[0] == 3.0);
}

TEST_CASE("eta contracted with its inverse gives the Kronecker delta") {
    const Signature eta = Signature::parse("-,+,+,+");
    const DenseTensor lower = DenseTensor::from_matrix(eta.matrix(), SlotKind::FrameLower, SlotKind::FrameLower);
    const DenseTensor upper = DenseTensor::from_matrix(eta.matrix(), SlotKind::FrameUpper, SlotKind::FrameUpper);
    const DenseTensor d = contract(outer(lower, upper), 1, 2);
    CHECK(geom::test::max_abs(d.to_matrix() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("like slots need a mediating metric") {
    const DenseTensor g = DenseTensor::from_matrix(Eigen::MatrixXd::Identity(3, 3), SlotKind::CoordLower,
                                                   SlotKind::CoordLower);
    CHECK_THROWS_AS(contract(g, 0, 1), ShapeError);
    CHECK_THROWS_AS(contract(g, 0, 0), ShapeError);
    const DenseTensor f = DenseTensor::from_matrix(Eigen::MatrixXd::Identity(3, 3), SlotKind::FrameLower,
                                                   SlotKind::FrameLower);
    CHECK(contract(f, 0, 1, Signature::euclidean(3)).data()[0] == 3.0);
    CHECK_THROWS_AS(contract(f, 0, 1, Signature::euclidean(2)), ShapeError);
    const DenseTensor mixed = DenseTensor::from_matrix(Eigen::MatrixXd::Identity(2, 3), SlotKind::CoordUpper,
                                                       SlotKind::CoordLower);
    CHECK_THROWS_AS(contract(mixed, 0, 1), ShapeError);
}

TEST_CASE("unit sphere Riemann contracts to the metric") {
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    const Eigen::VectorXd x = vec({std::numbers::pi / 2, 0.3});
    const CurvatureBundle b = riemann(s2, x);
    const DenseTensor ginv = DenseTensor::from_matrix(b.g_inv, SlotKind::CoordUpper, SlotKind::CoordUpper);
    // library sign: R_abcd = K (g_ad g_bc - g_ac g_bd); first and last slot give +g
    const DenseTensor ricci_ad = contract(b.riemann_lower, 0, 3, ginv);
    CHECK(geom::test::max_abs(ricci_ad.to_matrix() - b.g) < 1e-10);
    // the second and fourth slot give -g in this convention
    const DenseTensor ricci_bd = contract(b.riemann_lower, 1, 3, ginv);
    CHECK(geom::test::max_abs(ricci_bd.to_matrix() + b.g) < 1e-10);
}

TEST_CASE("contraction is linear") {
    const std::vector<std::size_t> dims{3, 3, 3};
    const std::vector<SlotKind> kinds{SlotKind::CoordUpper, SlotKind::CoordLower, SlotKind::CoordLower};
    const DenseTensor x = random_tensor(dims, kinds, 1), y = random_tensor(dims, kinds, 2);
    const DenseTensor lhs = contract(2.5 * x + (-0.75) * y, 0, 1);
    const DenseTensor rhs = 2.5 * contract(x, 0, 1) + (-0.75) * contract(y, 0, 1);
    CHECK((lhs - rhs).max_abs() < 1e-12);
    CHECK(lhs.rank() == 1);
    CHECK(lhs.kind(0) == SlotKind::CoordLower);
}

TEST_CASE("check_symmetry") {
    const DenseTensor r = random_tensor({4, 4}, {SlotKind::CoordLower, SlotKind::CoordLower}, 3);
    DenseTensor anti = r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) anti(i, j) = r(i, j) - r(j, i);
    CHECK(check_symmetry(anti, {1, 0}, -1) == 0.0);
    CHECK(check_symmetry(anti, {1, 0}, +1) > 0.1);
    CHECK(check_symmetry(r, {0, 1}, +1) == 0.0);  // identity permutation
    const DenseTensor zero({3, 3, 3}, {SlotKind::CoordLower, SlotKind::CoordLower, SlotKind::CoordLower});
    CHECK(check_symmetry(zero, {2, 0, 1}, -1) == 0.0);
    CHECK(check_symmetry(zero, {1, 0, 2}, +1) == 0.0);
    const DenseTensor rect({2, 3}, {SlotKind::CoordLower, SlotKind::CoordLower});
    CHECK_THROWS_AS(check_symmetry(rect, {1, 0}, 1), ShapeError);
    CHECK_THROWS_AS(check_symmetry(r, {0, 0}, 1), ShapeError);
}

TEST_CASE("sphere Riemann pair symmetry") {
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    const CurvatureBundle b = riemann(s2, vec({1.1, 0.4}));
    CHECK(check_symmetry(b.riemann_lower, {2, 3, 0, 1}, +1) < 1e-9);
    CHECK(check_symmetry(b.riemann_frame, {2, 3, 0, 1}, +1) < 1e-9);
}

TEST_CASE("raise and lower") {
    const Signature eta = Signature::parse("-,+,+,+");
    const DenseTensor v = DenseTensor::from_vector(vec({1, 0, 0, 0}), SlotKind::FrameUpper);
    const DenseTensor lowered = raise_lower(v, 0, eta, IndexDirection::Down);
    CHECK(lowered.kind(0) == SlotKind::FrameLower);
    CHECK(lowered.to_vector()(0) == -1.0);
    CHECK_THROWS_AS(raise_lower(lowered, 0, eta, IndexDirection::Down), ShapeError);

    Eigen::MatrixXd gm(3, 3);
    gm << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 3.0;
    const DenseTensor g = DenseTensor::from_matrix(gm, SlotKind::CoordLower, SlotKind::CoordLower);
    const DenseTensor t = random_tensor({3, 3}, {SlotKind::CoordUpper, SlotKind::CoordLower}, 9);
    const DenseTensor back = raise_lower(raise_lower(t, 0, g, IndexDirection::Down), 0, g, IndexDirection::Up);
    CHECK((back - t).max_abs() < 1e-12 * std::max(1.0, t.max_abs()));

    const DenseTensor sing = DenseTensor::from_matrix(Eigen::MatrixXd::Zero(3, 3), SlotKind::CoordLower, SlotKind::CoordLower);
    CHECK_THROWS_AS(raise_lower(raise_lower(t, 0, g, IndexDirection::Down), 0, sing, IndexDirection::Up),
                    SingularMetricError);
}

TEST_CASE("sphere Riemann raise/lower round trip") {
    const MetricSpec s2 = make_preset("sphere:n=2,R=1");
    const CurvatureBundle b = riemann(s2, vec({0.9, 0.2}));
    const DenseTensor g = DenseTensor::from_matrix(b.g, SlotKind::CoordLower, SlotKind::CoordLower);
    const DenseTensor up = raise_lower(b.riemann_lower, 0, g, IndexDirection::Up);
    CHECK((up - b.riemann_coord).max_abs() < 1e-10);
    const DenseTensor down = raise_lower(up, 0, g, IndexDirection::Down);
    CHECK((down - b.riemann_lower).max_abs() < 1e-10);
}

}  // TEST_SUITE
