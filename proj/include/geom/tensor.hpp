#pragma once

// Dense multi-index tensors with slot-kind tags.
//
// Storage is row-major over the slot extents. Every slot carries a tag telling
// whether it is a coordinate or frame index and whether it is upper or lower,
// so contracting a frame slot against a coordinate slot (or two like slots
// without a metric) is rejected at runtime.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace geom {

enum class SlotKind { CoordUpper, CoordLower, FrameUpper, FrameLower };

bool is_upper(SlotKind k) noexcept;
bool is_frame(SlotKind k) noexcept;
SlotKind flipped(SlotKind k) noexcept;
std::string to_string(SlotKind k);

/// Diagonal of the flat frame metric: every entry +1 or -1.
class Signature {
public:
    Signature() = default;
    explicit Signature(std::vector<int> signs);

    /// `p` minus signs followed by `q` plus signs.
    static Signature with_counts(int minus, int plus);
    static Signature euclidean(int n) { return with_counts(0, n); }
    /// Parses "(-,+,+,+)", "-,+,+,+" or "-+++".
    static Signature parse(const std::string& text);

    int dim() const noexcept { return static_cast<int>(signs_.size()); }
    int operator[](int i) const { return signs_.at(static_cast<std::size_t>(i)); }
    std::span<const int> signs() const noexcept { return signs_; }
    int p_plus() const noexcept { return plus_; }
    int q_minus() const noexcept { return dim() - plus_; }

    /// eta as a dense matrix (also its own inverse).
    Eigen::MatrixXd matrix() const;
    /// eta(a, b) for frame vectors.
    double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    std::string to_string() const;

    bool operator==(const Signature& o) const { return signs_ == o.signs_; }

private:
    std::vector<int> signs_;
    int plus_ = 0;
};

struct Tolerance {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;

    Tolerance() = default;
    Tolerance(double a, double r);

    /// True when `deviation <= abs_tol + rel_tol * scale`.
    bool accepts(double deviation, double scale = 0.0) const noexcept;
};

class DenseTensor {
public:
    DenseTensor() = default;
    DenseTensor(std::vector<std::size_t> dims, std::vector<SlotKind> kinds);
    DenseTensor(std::vector<std::size_t> dims, std::vector<SlotKind> kinds, std::vector<double> data);

    static DenseTensor scalar(double v);
    static DenseTensor from_vector(const Eigen::VectorXd& v, SlotKind kind);
    static DenseTensor from_matrix(const Eigen::MatrixXd& m, SlotKind row, SlotKind col);

    std::size_t rank() const noexcept { return dims_.size(); }
    std::span<const std::size_t> dims() const noexcept { return dims_; }
    std::span<const SlotKind> kinds() const noexcept { return kinds_; }
    std::size_t dim(std::size_t slot) const { return dims_.at(slot); }
    SlotKind kind(std::size_t slot) const { return kinds_.at(slot); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    std::size_t offset(std::span<const std::size_t> index) const;

    double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }

    template <class... I>
    double& operator()(I... idx) {
        const std::size_t ix[] = {static_cast<std::size_t>(idx)...};
        return at(std::span<const std::size_t>(ix, sizeof...(I)));
    }
    template <class... I>
    double operator()(I... idx) const {
        const std::size_t ix[] = {static_cast<std::size_t>(idx)...};
        return at(std::span<const std::size_t>(ix, sizeof...(I)));
    }

    /// Rank-2 view as a matrix.
    Eigen::MatrixXd to_matrix() const;
    Eigen::VectorXd to_vector() const;

    double max_abs() const noexcept;
    /// Copy with the slot tags replaced (same shape).
    DenseTensor retagged(std::vector<SlotKind> kinds) const;

    DenseTensor& operator+=(const DenseTensor& o);
    DenseTensor& operator-=(const DenseTensor& o);
    DenseTensor& operator*=(double s);
    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(DenseTensor a, double s) { return a *= s; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

    /// Visits every multi-index in row-major order.
    template <class F>
    void for_each_index(F&& f) const {
        std::vector<std::size_t> idx(rank(), 0);
        for (std::size_t flat = 0; flat < data_.size(); ++flat) {
            f(std::span<const std::size_t>(idx), flat);
            for (std::size_t s = rank(); s-- > 0;) {
                if (++idx[s] < dims_[s]) break;
                idx[s] = 0;
            }
        }
    }

private:
    void check_shape() const;

    std::vector<std::size_t> dims_;
    std::vector<SlotKind> kinds_;
    std::vector<double> data_;
};

/// Outer product; slot order is a's slots followed by b's.
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

/// Contraction of one upper and one lower slot of the same family.
DenseTensor contract(const DenseTensor& t, std::size_t slot_a, std::size_t slot_b);
/// Contraction of two like frame slots mediated by eta.
DenseTensor contract(const DenseTensor& t, std::size_t slot_a, std::size_t slot_b, const Signature& eta);
/// Contraction of two like coordinate slots mediated by a rank-2 metric of the opposite variance
/// (inverse metric for two lower slots, metric for two upper slots).
DenseTensor contract(const DenseTensor& t, std::size_t slot_a, std::size_t slot_b, const DenseTensor& metric);

/// max over index tuples I of |t[perm(I)] - sign * t[I]|, where perm(I)_k = I_{perm[k]}.
double check_symmetry(const DenseTensor& t, std::span<const std::size_t> perm, int sign);
double check_symmetry(const DenseTensor& t, std::initializer_list<std::size_t> perm, int sign);

enum class IndexDirection { Up, Down };

/// Raises or lowers one coordinate slot with a lower-index metric g_ab taken from `metric`
/// (inverse computed internally for raising).
DenseTensor raise_lower(const DenseTensor& t, std::size_t slot, const DenseTensor& metric, IndexDirection dir);
/// Same for a frame slot with eta.
DenseTensor raise_lower(const DenseTensor& t, std::size_t slot, const Signature& eta, IndexDirection dir);

/// Inverse of a symmetric metric; throws SingularMetricError when
/// |det| < 1e-12 * (max |g_ij|)^n.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g);
bool is_singular(const Eigen::MatrixXd& g, double* det_out = nullptr);

}  // namespace geom
