#pragma once

// Constant-curvature manifolds as quadrics eta(x, x) = eps R^2 in a flat
// ambient space, projected constant vectors, numerical Lie derivatives of the
// metric and Killing / conformal Killing classification.

#include "geom/metric.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace geom {

/// Chart components of a vector field as a function of the chart point.
using ChartField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// S embedded through the stereographic chart of the constant-curvature preset:
/// with a = K |Omega|^2 / 4,
///     x^i = Omega^i / (1 + a),   x^extra = R (1 - a) / (1 + a).
/// The extra ambient axis is the last one for the sphere and the first
/// (timelike) one for the hyperboloid.
class EmbeddingModel {
public:
    EmbeddingModel(int n, double K);

    int dim() const noexcept { return n_; }
    int ambient_dim() const noexcept { return n_ + 1; }
    double K() const noexcept { return K_; }
    double R() const noexcept { return R_; }
    int epsilon() const noexcept { return eps_; }
    int extra_axis() const noexcept { return extra_; }
    const Signature& ambient_signature() const noexcept { return ambient_; }
    /// The intrinsic metric g' in the chart coordinates Omega.
    const MetricSpec& chart() const noexcept { return chart_; }

    Eigen::VectorXd embed(const Eigen::VectorXd& omega) const;
    /// dx^alpha / dOmega^i, (n+1) x n.
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& omega) const;
    /// Unit normal x / R at an ambient point.
    Eigen::VectorXd normal(const Eigen::VectorXd& x) const { return x / R_; }
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return ambient_.inner(u, v); }
    /// |eta(x, x) - eps R^2|.
    double constraint_residual(const Eigen::VectorXd& x) const;
    /// Largest |eta(N, N) - eps| and |eta(N, dx/dOmega^i)| at a chart point.
    double normal_residual(const Eigen::VectorXd& omega) const;

    /// Chart components of a tangent ambient vector at the chart point.
    Eigen::VectorXd to_chart(const Eigen::VectorXd& omega, const Eigen::VectorXd& tangent) const;
    /// Ambient components of a chart vector.
    Eigen::VectorXd to_ambient(const Eigen::VectorXd& omega, const Eigen::VectorXd& chart_vec) const;

    /// Deterministic chart points well inside the chart (|Omega| <= radius_fraction of the chart scale).
    std::vector<Eigen::VectorXd> sample_points(int count, std::uint64_t seed, double radius_fraction = 0.6) const;

private:
    int n_;
    double K_;
    double R_;
    int eps_;
    int extra_;
    Signature ambient_;
    MetricSpec chart_;
};

/// Throws ConfigError for K = 0 or n < 2.
EmbeddingModel build_embedding(int n, double K);

struct Projection {
    Eigen::VectorXd tangent;   // U - eps <U, N> N (ambient components)
    double lambda = 0.0;       // characteristic function -eps <U, N> / R
    double normal_part = 0.0;  // <U, N>
    double tangency = 0.0;     // |<tangent, N>|
};

/// Throws DomainError when x is off the surface (constraint residual above 1e-8).
Projection project_constant_vector(const EmbeddingModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& x);

/// The field Omega -> chart components of the projection of a constant ambient vector.
ChartField projected_field(const EmbeddingModel& m, const Eigen::VectorXd& u);
/// The tangent rotation x_a e_b - x_b e_a (indices lowered with the ambient eta), in chart components.
ChartField rotation_field(const EmbeddingModel& m, int a, int b);

/// Default central-difference step for sampled fields.
inline constexpr double kFieldStep = 1e-5;
/// Steps for differentiating a commutator field, itself obtained by differences:
/// inner step for the commutator, outer step for the Lie derivative.
inline constexpr double kCommutatorStep = 1e-3;
inline constexpr double kNestedStep = 1e-2;

/// Jacobian d xi^a / d x^b of a field by 4th-order central differences.
Eigen::MatrixXd field_jacobian(const ChartField& f, const Eigen::VectorXd& x, double h = kFieldStep);

/// (L_xi g)_ab = xi^c d_c g_ab + g_cb d_a xi^c + g_ac d_b xi^c.
/// Throws DomainError if x or any stencil point leaves the chart.
Eigen::MatrixXd lie_derivative_metric(const MetricSpec& spec, const ChartField& f, const Eigen::VectorXd& x,
                                      double h = kFieldStep);

/// [f1, f2]^a = f1^b d_b f2^a - f2^b d_b f1^a at x.
Eigen::VectorXd commutator_at(const ChartField& f1, const ChartField& f2, const Eigen::VectorXd& x,
                              double h = kFieldStep);
/// The commutator as a field; differentiate it with kNestedStep.
ChartField commutator_field(ChartField f1, ChartField f2, double h = kCommutatorStep);

/// Ambient closed form of the projected commutator K (<U, x> V - <V, x> U).
Eigen::VectorXd ambient_commutator(const EmbeddingModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& x);

enum class FieldKind { Killing, ConformalKilling, Neither };
std::string to_string(FieldKind k);

struct FieldClassification {
    FieldKind kind = FieldKind::Neither;
    double max_lie = 0.0;          // max |L_xi g| over points
    double conformal_residual = 0.0;  // max |L_xi g - (tr / n) g|
    std::vector<double> lambda;    // (tr / 2n) per point, so L_xi g = 2 lambda g
    double tol = 0.0;
};

/// Needs at least 3 points (ConfigError otherwise).
FieldClassification classify_field(const MetricSpec& spec, const ChartField& f, const std::vector<Eigen::VectorXd>& points,
                                   double tol = 1e-6, double h = kFieldStep);

}  // namespace geom
