#pragma once

// Matrix representations of the pseudo-orthogonal algebra so(p, q) in the
// angular-momentum basis L_AB = -L_BA (hbar = 1), their closure and Jacobi
// checks, and the quadratic Casimir.

#include "geom/tensor.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace geom {

/// One generator L_AB (A < B, 0-based) as a d x d matrix.
struct OperatorRep {
    int a = 0;
    int b = 1;
    Eigen::MatrixXcd matrix;
};

/// Generators for every pair A < B of the signature, in lexicographic order.
struct RepBasis {
    Signature signature;
    std::string label;
    std::vector<OperatorRep> generators;

    int rep_dim() const;
    /// L_AB for any ordered pair (L_BA = -L_AB, L_AA = 0).
    Eigen::MatrixXcd get(int a, int b) const;
};

/// Vector representation (L_AB)^C_D = -i (eta_AD delta^C_B - eta_BD delta^C_A).
/// Throws ConfigError for dimension < 2.
RepBasis angular_momentum_rep(const Signature& eta);

/// Real form (M_AB)^C_D = eta_AD delta^C_B - eta_BD delta^C_A with L = -i M.
/// Entries are small integers.
struct RealRepBasis {
    Signature signature;
    std::vector<Eigen::MatrixXi> generators;  // same pair order as RepBasis
    Eigen::MatrixXi get(int a, int b) const;
};
RealRepBasis real_angular_momentum_rep(const Signature& eta);
/// Max |[M_AB, M_CD] - (eta_AC M_BD + eta_AD M_CB + eta_BC M_DA + eta_BD M_AC)|; exact integers.
long long real_closure_residual(const RealRepBasis& basis);

/// One-dimensional representation with every generator zero (m >= 2).
RepBasis trivial_rep(const Signature& eta);

/// so(3) spin-j representation (2j+1 dimensional) from ladder operators, with
/// L_23 = -J_1, L_31 = -J_2, L_12 = -J_3. `two_j` = 2j >= 0.
RepBasis spin_rep(int two_j);

/// Generators L_AB = -(1/K) i R_ABCD eta^CM acting on the vector index M
/// (with the library's curvature sign), built from a frame curvature tensor.
/// For a constant-curvature tensor this is the vector representation.
RepBasis curvature_operator_rep(const DenseTensor& riemann_frame, const Signature& eta, double K);

/// Largest entrywise difference between two bases over all generators.
double rep_distance(const RepBasis& x, const RepBasis& y);

/// Right side of the commutator [L_AB, L_CD]:
/// -i (eta_AC L_BD + eta_AD L_CB + eta_BC L_DA + eta_BD L_AC).
Eigen::MatrixXcd bracket_rhs(const RepBasis& basis, int a, int b, int c, int d);

inline Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) { return x * y - y * x; }

struct AlgebraReport {
    double closure_residual = 0.0;       // max over generator pairs
    double jacobi_residual = 0.0;        // max over generator triples
    int pairs_checked = 0;
    int triples_checked = 0;
    bool passed = false;
};

AlgebraReport verify_algebra(const RepBasis& basis, double tol = 1e-12);

struct EigenvalueCluster {
    double value = 0.0;      // real part of the cluster mean
    double imag = 0.0;       // largest |imaginary part| in the cluster
    int multiplicity = 0;
};

struct CasimirReport {
    Eigen::MatrixXcd matrix;          // (1/2) eta^AC eta^BD L_AB L_CD
    double centrality_residual = 0.0; // max over generators of max |[C, L_AB]|
    std::vector<EigenvalueCluster> spectrum;  // ascending by value
};

CasimirReport casimir(const RepBasis& basis, double cluster_tol = 1e-8);

}  // namespace geom
