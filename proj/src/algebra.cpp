#include "geom/algebra.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace geom {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

std::vector<std::pair<int, int>> index_pairs(int m) {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) out.emplace_back(a, b);
    return out;
}

std::size_t pair_slot(int a, int b, int m) {
    // position of (a, b), a < b, in lexicographic order
    return static_cast<std::size_t>(a * m - a * (a + 1) / 2 + (b - a - 1));
}

double max_abs(const Eigen::MatrixXcd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

}  // namespace

int RepBasis::rep_dim() const { return generators.empty() ? 0 : static_cast<int>(generators.front().matrix.rows()); }

Eigen::MatrixXcd RepBasis::get(int a, int b) const {
    const int m = signature.dim();
    if (a < 0 || b < 0 || a >= m || b >= m) throw ConfigError("generator index out of range");
    if (a == b) return Eigen::MatrixXcd::Zero(rep_dim(), rep_dim());
    if (a < b) return generators.at(pair_slot(a, b, m)).matrix;
    return -generators.at(pair_slot(b, a, m)).matrix;
}

Eigen::MatrixXi RealRepBasis::get(int a, int b) const {
    const int m = signature.dim();
    if (a == b) return Eigen::MatrixXi::Zero(m, m);
    if (a < b) return generators.at(pair_slot(a, b, m));
    return -generators.at(pair_slot(b, a, m));
}

RealRepBasis real_angular_momentum_rep(const Signature& eta) {
    const int m = eta.dim();
    if (m < 2) throw ConfigError("angular momentum representation needs a signature of dimension >= 2");
    RealRepBasis out;
    out.signature = eta;
    for (auto [a, b] : index_pairs(m)) {
        Eigen::MatrixXi g = Eigen::MatrixXi::Zero(m, m);
        // (M_ab)^c_d = eta_ad delta^c_b - eta_bd delta^c_a
        g(b, a) += eta[a];
        g(a, b) -= eta[b];
        out.generators.push_back(g);
    }
    return out;
}

long long real_closure_residual(const RealRepBasis& basis) {
    const int m = basis.signature.dim();
    const auto& eta = basis.signature;
    auto e = [&](int i, int j) { return i == j ? eta[i] : 0; };
    long long worst = 0;
    for (auto [a, b] : index_pairs(m)) {
        for (auto [c, d] : index_pairs(m)) {
            const Eigen::MatrixXi x = basis.get(a, b), y = basis.get(c, d);
            const Eigen::MatrixXi lhs = x * y - y * x;
            const Eigen::MatrixXi rhs = e(a, c) * basis.get(b, d) + e(a, d) * basis.get(c, b) +
                                        e(b, c) * basis.get(d, a) + e(b, d) * basis.get(a, c);
            worst = std::max<long long>(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

RepBasis angular_momentum_rep(const Signature& eta) {
    const RealRepBasis real = real_angular_momentum_rep(eta);
    RepBasis out;
    out.signature = eta;
    out.label = "vector";
    const auto pairs = index_pairs(eta.dim());
    for (std::size_t k = 0; k < pairs.size(); ++k)
        out.generators.push_back({pairs[k].first, pairs[k].second, -kI * real.generators[k].cast<cd>()});
    return out;
}

RepBasis trivial_rep(const Signature& eta) {
    if (eta.dim() < 2) throw ConfigError("representations need dimension >= 2");
    RepBasis out;
    out.signature = eta;
    out.label = "trivial";
    for (const auto& [a, b] : index_pairs(eta.dim())) out.generators.push_back({a, b, Eigen::MatrixXcd::Zero(1, 1)});
    return out;
}

RepBasis spin_rep(int two_j) {
    if (two_j < 0) throw ConfigError("spin must be a non-negative half-integer");
    const int d = two_j + 1;
    const double j = two_j / 2.0;
    Eigen::MatrixXcd j3 = Eigen::MatrixXcd::Zero(d, d), jp = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double mval = j - k;  // basis ordered m = j, j-1, ..., -j
        j3(k, k) = mval;
        if (k > 0) jp(k - 1, k) = std::sqrt(j * (j + 1) - mval * (mval + 1));
    }
    const Eigen::MatrixXcd jm = jp.adjoint();
    const Eigen::MatrixXcd j1 = 0.5 * (jp + jm);
    const Eigen::MatrixXcd j2 = (jp - jm) / (2.0 * kI);
    RepBasis out;
    out.signature = Signature::euclidean(3);
    out.label = "spin:" + (two_j % 2 == 0 ? std::to_string(two_j / 2) : std::to_string(two_j) + "/2");
    out.generators.push_back({0, 1, -j3});  // L_12
    out.generators.push_back({0, 2, j2});   // L_13 = -L_31
    out.generators.push_back({1, 2, -j1});  // L_23
    return out;
}

RepBasis curvature_operator_rep(const DenseTensor& riemann_frame, const Signature& eta, double K) {
    const int m = eta.dim();
    if (K == 0.0) throw ConfigError("curvature operator form needs K != 0");
    if (riemann_frame.rank() != 4 || static_cast<int>(riemann_frame.dim(0)) != m)
        throw ShapeError("curvature tensor does not match the signature");
    RepBasis out;
    out.signature = eta;
    out.label = "curvature";
    for (auto [a, b] : index_pairs(m)) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
        for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d) g(c, d) = -kI * (riemann_frame(a, b, c, d) * eta[c] / K);
        out.generators.push_back({a, b, g});
    }
    return out;
}

double rep_distance(const RepBasis& x, const RepBasis& y) {
    if (x.generators.size() != y.generators.size()) throw ShapeError("bases have different sizes");
    double worst = 0.0;
    for (std::size_t k = 0; k < x.generators.size(); ++k) {
        const auto& gx = x.generators[k].matrix;
        const auto& gy = y.generators[k].matrix;
        if (gx.rows() != gy.rows()) throw ShapeError("bases have different representation dimensions");
        worst = std::max(worst, max_abs(gx - gy));
    }
    return worst;
}

Eigen::MatrixXcd bracket_rhs(const RepBasis& basis, int a, int b, int c, int d) {
    const auto& eta = basis.signature;
    auto e = [&](int i, int j) { return i == j ? static_cast<double>(eta[i]) : 0.0; };
    return -kI * (e(a, c) * basis.get(b, d) + e(a, d) * basis.get(c, b) + e(b, c) * basis.get(d, a) +
                  e(b, d) * basis.get(a, c));
}

AlgebraReport verify_algebra(const RepBasis& basis, double tol) {
    AlgebraReport r;
    const auto& gens = basis.generators;
    for (const auto& x : gens) {
        for (const auto& y : gens) {
            const Eigen::MatrixXcd lhs = commutator(x.matrix, y.matrix);
            r.closure_residual = std::max(r.closure_residual, max_abs(lhs - bracket_rhs(basis, x.a, x.b, y.a, y.b)));
            ++r.pairs_checked;
        }
    }
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            for (std::size_t k = j + 1; k < gens.size(); ++k) {
                const auto &x = gens[i].matrix, &y = gens[j].matrix, &z = gens[k].matrix;
                const Eigen::MatrixXcd s =
                    commutator(x, commutator(y, z)) + commutator(y, commutator(z, x)) + commutator(z, commutator(x, y));
                r.jacobi_residual = std::max(r.jacobi_residual, max_abs(s));
                ++r.triples_checked;
            }
        }
    }
    r.passed = r.closure_residual < tol && r.jacobi_residual < tol;
    return r;
}

CasimirReport casimir(const RepBasis& basis, double cluster_tol) {
    const int d = basis.rep_dim();
    CasimirReport out;
    out.matrix = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& g : basis.generators)
        out.matrix += static_cast<double>(basis.signature[g.a] * basis.signature[g.b]) * (g.matrix * g.matrix);
    for (const auto& g : basis.generators)
        out.centrality_residual = std::max(out.centrality_residual, max_abs(commutator(out.matrix, g.matrix)));
    if (d == 0) return out;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(out.matrix, false);
    std::vector<cd> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
    std::sort(ev.begin(), ev.end(), [](cd x, cd y) { return x.real() < y.real(); });
    for (const cd& v : ev) {
        if (!out.spectrum.empty()) {
            auto& last = out.spectrum.back();
            if (std::abs(v.real() - last.value) <= cluster_tol * std::max(1.0, std::abs(last.value))) {
                last.value = (last.value * last.multiplicity + v.real()) / (last.multiplicity + 1);
                last.imag = std::max(last.imag, std::abs(v.imag()));
                ++last.multiplicity;
                continue;
            }
        }
        out.spectrum.push_back({v.real(), std::abs(v.imag()), 1});
    }
    return out;
}

}  // namespace geom
