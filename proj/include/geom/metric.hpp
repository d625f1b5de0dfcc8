#pragma once

// Metric charts: presets and parsed expression metrics, evaluated with their
// first and second coordinate derivatives, and orthonormal frames (vielbeins).

#include "geom/dual.hpp"
#include "geom/expr.hpp"
#include "geom/tensor.hpp"

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace geom {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x > lo && x < hi; }
    bool operator==(const Interval&) const = default;
};

/// A chart with symmetric metric components g_ij(x) given as expressions.
/// Only the upper triangle is stored. Immutable once built.
class MetricSpec {
public:
    MetricSpec(std::string name, std::vector<std::string> coords, Signature signature,
               std::vector<Expr> upper_triangle, std::vector<Interval> domain);

    const std::string& name() const noexcept { return name_; }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const noexcept { return coords_; }
    const Signature& signature() const noexcept { return signature_; }
    const std::vector<Interval>& domain() const noexcept { return domain_; }

    /// Component expression g_ij (either triangle).
    const Expr& component(int i, int j) const;
    static std::size_t packed_index(int i, int j, int n);

    bool in_domain(std::span<const double> x) const noexcept;
    /// Throws DomainError naming the first violated coordinate.
    void require_in_domain(std::span<const double> x) const;

    /// A deterministic interior point (interval midpoints, or an offset from a finite bound).
    Eigen::VectorXd sample_point() const;

    /// Evaluates the packed upper triangle on any dual-number scalar.
    template <class T>
    void eval_packed(std::span<const T> x, std::span<T> out) const {
        for (std::size_t k = 0; k < programs_.size(); ++k) out[k] = programs_[k].eval<T>(x);
    }

    bool operator==(const MetricSpec& o) const;

private:
    std::string name_;
    std::vector<std::string> coords_;
    Signature signature_;
    std::vector<Expr> components_;
    std::vector<ExprProgram> programs_;
    std::vector<Interval> domain_;
};

/// Parses the line-oriented metric document (`dim`, `signature`, `coords`,
/// `domain`, `g[i][j]` or a single `preset` line).
MetricSpec parse_metric_spec(const std::string& text);
/// Prints a document that parses back to an equal spec.
std::string print_metric_spec(const MetricSpec& spec);

using PresetParams = std::map<std::string, double>;

/// Presets: flat(p, q), sphere(n, R), hyperbolic(n, R) (upper half-space),
/// constant-curvature(n, K, p) in the conformally flat form
/// g = (1 + K eta(Omega, Omega) / 4)^-2 eta, schwarzschild(M).
MetricSpec make_preset(const std::string& name, const PresetParams& params);
/// "sphere:n=2,R=1" or "sphere n=2 R=1".
MetricSpec make_preset(const std::string& descriptor);

/// Angular margin keeping sphere charts away from their poles.
inline constexpr double kPoleMargin = 1e-6;

Eigen::MatrixXd eval_metric(const MetricSpec& spec, std::span<const double> x);
inline Eigen::MatrixXd eval_metric(const MetricSpec& spec, const Eigen::VectorXd& x) {
    return eval_metric(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

enum class DerivativeMode { Dual, FiniteDifference };

struct MetricDerivatives {
    Eigen::MatrixXd g;
    DenseTensor dg;   // dg(a, b, c)    = d_c g_ab
    DenseTensor ddg;  // ddg(a, b, c, d) = d_c d_d g_ab (empty when order == 1)
};

/// Metric and its derivatives to `order` (1 or 2). Dual mode is exact up to
/// rounding; FiniteDifference uses 4th-order central stencils and is kept as
/// an independent cross-check.
MetricDerivatives eval_metric_derivs(const MetricSpec& spec, std::span<const double> x, int order,
                                     DerivativeMode mode = DerivativeMode::Dual);
inline MetricDerivatives eval_metric_derivs(const MetricSpec& spec, const Eigen::VectorXd& x, int order,
                                            DerivativeMode mode = DerivativeMode::Dual) {
    return eval_metric_derivs(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), order, mode);
}

/// Orthonormal frame at a point: g = E^T eta E, with e(A, L) = E_L^(A).
struct FrameField {
    Eigen::VectorXd point;
    Eigen::MatrixXd e;      // rows: frame index A, columns: coordinate index L
    Eigen::MatrixXd e_inv;  // rows: coordinate index L, columns: frame index A

    /// Coordinate components of a frame vector.
    Eigen::VectorXd to_coord(const Eigen::VectorXd& frame_vec) const { return e_inv * frame_vec; }
    Eigen::VectorXd to_frame(const Eigen::VectorXd& coord_vec) const { return e * coord_vec; }
};

/// Orthonormal frame from the eigendecomposition g = Q diag(lambda) Q^T, E = diag(sqrt|lambda|) Q^T.
/// Negative eigenpairs fill the -1 slots of the signature and positive ones the +1 slots, each class
/// ordered by the eigenvector's dominant coordinate (ties: ascending eigenvalue); eigenvectors are
/// signed so their first nonzero component is positive.
FrameField vielbein_at(const MetricSpec& spec, std::span<const double> x);
inline FrameField vielbein_at(const MetricSpec& spec, const Eigen::VectorXd& x) {
    return vielbein_at(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}
FrameField vielbein_from_metric(const Eigen::MatrixXd& g, const Signature& eta, const Eigen::VectorXd& point);

}  // namespace geom
