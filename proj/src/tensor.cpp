#include "geom/tensor.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace geom {

bool is_upper(SlotKind k) noexcept { return k == SlotKind::CoordUpper || k == SlotKind::FrameUpper; }

bool is_frame(SlotKind k) noexcept { return k == SlotKind::FrameUpper || k == SlotKind::FrameLower; }

SlotKind flipped(SlotKind k) noexcept {
    switch (k) {
        case SlotKind::CoordUpper: return SlotKind::CoordLower;
        case SlotKind::CoordLower: return SlotKind::CoordUpper;
        case SlotKind::FrameUpper: return SlotKind::FrameLower;
        case SlotKind::FrameLower: return SlotKind::FrameUpper;
    }
    return k;
}

std::string to_string(SlotKind k) {
    switch (k) {
        case SlotKind::CoordUpper: return "coordinate-upper";
        case SlotKind::CoordLower: return "coordinate-lower";
        case SlotKind::FrameUpper: return "frame-upper";
        case SlotKind::FrameLower: return "frame-lower";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(std::vector<int> signs) : signs_(std::move(signs)) {
    for (int s : signs_) {
        if (s != 1 && s != -1) throw ConfigError("signature entries must be +1 or -1");
        if (s == 1) ++plus_;
    }
}

Signature Signature::with_counts(int minus, int plus) {
    if (minus < 0 || plus < 0) throw ConfigError("signature counts must be non-negative");
    std::vector<int> s(static_cast<std::size_t>(minus), -1);
    s.insert(s.end(), static_cast<std::size_t>(plus), 1);
    return Signature(std::move(s));
}

Signature Signature::parse(const std::string& text) {
    std::vector<int> s;
    for (char c : text) {
        if (c == '+') s.push_back(1);
        else if (c == '-') s.push_back(-1);
        else if (c == '(' || c == ')' || c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
        else throw ConfigError("invalid character '" + std::string(1, c) + "' in signature \"" + text + "\"");
    }
    if (s.empty()) throw ConfigError("empty signature");
    return Signature(std::move(s));
}

Eigen::MatrixXd Signature::matrix() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) m(i, i) = signs_[static_cast<std::size_t>(i)];
    return m;
}

double Signature::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (a.size() != dim() || b.size() != dim()) throw ShapeError("signature inner product: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += signs_[static_cast<std::size_t>(i)] * a[i] * b[i];
    return s;
}

std::string Signature::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < signs_.size(); ++i) {
        if (i) out += ',';
        out += signs_[i] > 0 ? '+' : '-';
    }
    return out + ")";
}

// ---------------------------------------------------------------------------
// Tolerance

Tolerance::Tolerance(double a, double r) : abs_tol(a), rel_tol(r) {
    if (!std::isfinite(a) || !std::isfinite(r) || a < 0 || r < 0)
        throw ConfigError("tolerances must be finite and non-negative");
}

bool Tolerance::accepts(double deviation, double scale) const noexcept {
    return deviation <= abs_tol + rel_tol * std::abs(scale);
}

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<SlotKind> kinds)
    : dims_(std::move(dims)), kinds_(std::move(kinds)) {
    std::size_t n = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    data_.assign(n, 0.0);
    check_shape();
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<SlotKind> kinds, std::vector<double> data)
    : dims_(std::move(dims)), kinds_(std::move(kinds)), data_(std::move(data)) {
    check_shape();
}

void DenseTensor::check_shape() const {
    if (kinds_.size() != dims_.size()) throw ShapeError("slot kinds length must equal rank");
    std::size_t n = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    if (n != data_.size()) throw ShapeError("data length must equal the product of extents");
}

DenseTensor DenseTensor::scalar(double v) { return DenseTensor({}, {}, {v}); }

DenseTensor DenseTensor::from_vector(const Eigen::VectorXd& v, SlotKind kind) {
    return DenseTensor({static_cast<std::size_t>(v.size())}, {kind}, std::vector<double>(v.data(), v.data() + v.size()));
}

DenseTensor DenseTensor::from_matrix(const Eigen::MatrixXd& m, SlotKind row, SlotKind col) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, {row, col});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
    return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != rank()) throw ShapeError("index arity does not match tensor rank");
    std::size_t off = 0;
    for (std::size_t s = 0; s < rank(); ++s) {
        if (index[s] >= dims_[s]) throw ShapeError("tensor index out of range");
        off = off * dims_[s] + index[s];
    }
    return off;
}

Eigen::MatrixXd DenseTensor::to_matrix() const {
    if (rank() != 2) throw ShapeError("to_matrix requires a rank-2 tensor");
    Eigen::MatrixXd m(dims_[0], dims_[1]);
    for (std::size_t i = 0; i < dims_[0]; ++i)
        for (std::size_t j = 0; j < dims_[1]; ++j) m(i, j) = data_[i * dims_[1] + j];
    return m;
}

Eigen::VectorXd DenseTensor::to_vector() const {
    if (rank() != 1) throw ShapeError("to_vector requires a rank-1 tensor");
    return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

double DenseTensor::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseTensor DenseTensor::retagged(std::vector<SlotKind> kinds) const {
    return DenseTensor(dims_, std::move(kinds), data_);
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
    if (!std::equal(dims_.begin(), dims_.end(), o.dims_.begin(), o.dims_.end()) || kinds_ != o.kinds_)
        throw ShapeError("tensor addition: shape or slot kinds differ");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
    if (!std::equal(dims_.begin(), dims_.end(), o.dims_.begin(), o.dims_.end()) || kinds_ != o.kinds_)
        throw ShapeError("tensor subtraction: shape or slot kinds differ");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
    std::vector<std::size_t> dims(a.dims().begin(), a.dims().end());
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    std::vector<SlotKind> kinds(a.kinds().begin(), a.kinds().end());
    kinds.insert(kinds.end(), b.kinds().begin(), b.kinds().end());
    std::vector<double> data;
    data.reserve(a.size() * b.size());
    for (double x : a.data())
        for (double y : b.data()) data.push_back(x * y);
    return DenseTensor(std::move(dims), std::move(kinds), std::move(data));
}

namespace {

// Sums weight(k, l) * t[..k@a..l@b..] over k, l.
template <class Weight>
DenseTensor contract_weighted(const DenseTensor& t, std::size_t a, std::size_t b, Weight&& weight, bool diagonal_only) {
    if (a == b) throw ShapeError("contract: slots must differ");
    if (a >= t.rank() || b >= t.rank()) throw ShapeError("contract: slot out of range");
    if (t.dim(a) != t.dim(b)) throw ShapeError("contract: slot extents differ");

    std::vector<std::size_t> dims;
    std::vector<SlotKind> kinds;
    for (std::size_t s = 0; s < t.rank(); ++s) {
        if (s == a || s == b) continue;
        dims.push_back(t.dim(s));
        kinds.push_back(t.kind(s));
    }
    DenseTensor out(dims, kinds);
    const std::size_t n = t.dim(a);
    std::vector<std::size_t> full(t.rank());
    out.for_each_index([&](std::span<const std::size_t> idx, std::size_t flat) {
        for (std::size_t s = 0, r = 0; s < t.rank(); ++s)
            if (s != a && s != b) full[s] = idx[r++];
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (diagonal_only) {
                full[a] = k;
                full[b] = k;
                sum += weight(k, k) * t.at(full);
            } else {
                for (std::size_t l = 0; l < n; ++l) {
                    double w = weight(k, l);
                    if (w == 0.0) continue;
                    full[a] = k;
                    full[b] = l;
                    sum += w * t.at(full);
                }
            }
        }
        out.data()[flat] = sum;
    });
    return out;
}

}  // namespace

DenseTensor contract(const DenseTensor& t, std::size_t a, std::size_t b) {
    if (a >= t.rank() || b >= t.rank() || a == b) throw ShapeError("contract: invalid slots");
    SlotKind ka = t.kind(a), kb = t.kind(b);
    if (is_frame(ka) != is_frame(kb)) throw ShapeError("contract: cannot contract a frame slot against a coordinate slot");
    if (is_upper(ka) == is_upper(kb))
        throw ShapeError("contract: two " + to_string(ka) + " slots need a metric to mediate");
    return contract_weighted(t, a, b, [](std::size_t, std::size_t) { return 1.0; }, true);
}

DenseTensor contract(const DenseTensor& t, std::size_t a, std::size_t b, const Signature& eta) {
    if (a >= t.rank() || b >= t.rank() || a == b) throw ShapeError("contract: invalid slots");
    SlotKind ka = t.kind(a), kb = t.kind(b);
    if (!is_frame(ka) || !is_frame(kb)) throw ShapeError("contract: signature can only mediate frame slots");
    if (static_cast<std::size_t>(eta.dim()) != t.dim(a)) throw ShapeError("contract: signature dimension mismatch");
    if (is_upper(ka) != is_upper(kb)) return contract(t, a, b);
    return contract_weighted(t, a, b, [&](std::size_t k, std::size_t) { return double(eta[static_cast<int>(k)]); }, true);
}

DenseTensor contract(const DenseTensor& t, std::size_t a, std::size_t b, const DenseTensor& metric) {
    if (a >= t.rank() || b >= t.rank() || a == b) throw ShapeError("contract: invalid slots");
    SlotKind ka = t.kind(a), kb = t.kind(b);
    if (is_frame(ka) || is_frame(kb)) throw ShapeError("contract: coordinate metric cannot mediate frame slots");
    if (is_upper(ka) != is_upper(kb)) return contract(t, a, b);
    if (metric.rank() != 2 || metric.dim(0) != t.dim(a) || metric.dim(1) != t.dim(a))
        throw ShapeError("contract: metric extents do not match");
    if (is_upper(metric.kind(0)) == is_upper(ka) || is_upper(metric.kind(1)) == is_upper(ka))
        throw ShapeError("contract: metric variance must be opposite to the contracted slots");
    return contract_weighted(t, a, b, [&](std::size_t k, std::size_t l) { return metric(k, l); }, false);
}

double check_symmetry(const DenseTensor& t, std::span<const std::size_t> perm, int sign) {
    if (perm.size() != t.rank()) throw ShapeError("check_symmetry: permutation length must equal rank");
    std::vector<bool> seen(t.rank(), false);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        if (perm[k] >= t.rank() || seen[perm[k]]) throw ShapeError("check_symmetry: not a permutation");
        seen[perm[k]] = true;
        if (t.dim(k) != t.dim(perm[k])) throw ShapeError("check_symmetry: permuted slots have different extents");
    }
    double dev = 0.0;
    std::vector<std::size_t> permuted(t.rank());
    t.for_each_index([&](std::span<const std::size_t> idx, std::size_t flat) {
        for (std::size_t k = 0; k < perm.size(); ++k) permuted[k] = idx[perm[k]];
        dev = std::max(dev, std::abs(t.at(permuted) - sign * t.data()[flat]));
    });
    return dev;
}

double check_symmetry(const DenseTensor& t, std::initializer_list<std::size_t> perm, int sign) {
    return check_symmetry(t, std::span<const std::size_t>(perm.begin(), perm.size()), sign);
}

bool is_singular(const Eigen::MatrixXd& g, double* det_out) {
    const double det = g.determinant();
    if (det_out) *det_out = det;
    const double scale = g.cwiseAbs().maxCoeff();
    if (!std::isfinite(det) || scale == 0.0) return true;
    return std::abs(det) < 1e-12 * std::pow(scale, static_cast<double>(g.rows()));
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g) {
    double det = 0.0;
    if (is_singular(g, &det)) {
        std::ostringstream os;
        os << "singular metric (det = " << det << ")";
        throw SingularMetricError(os.str());
    }
    return g.inverse();
}

namespace {

// Applies m (n x n) to one slot: out[..i..] = sum_j m(i, j) t[..j..].
DenseTensor apply_to_slot(const DenseTensor& t, std::size_t slot, const Eigen::MatrixXd& m, SlotKind new_kind) {
    std::vector<SlotKind> kinds(t.kinds().begin(), t.kinds().end());
    kinds[slot] = new_kind;
    DenseTensor out(std::vector<std::size_t>(t.dims().begin(), t.dims().end()), kinds);
    std::vector<std::size_t> src(t.rank());
    const std::size_t n = t.dim(slot);
    out.for_each_index([&](std::span<const std::size_t> idx, std::size_t flat) {
        std::copy(idx.begin(), idx.end(), src.begin());
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            src[slot] = j;
            sum += m(static_cast<Eigen::Index>(idx[slot]), static_cast<Eigen::Index>(j)) * t.at(src);
        }
        out.data()[flat] = sum;
    });
    return out;
}

}  // namespace

DenseTensor raise_lower(const DenseTensor& t, std::size_t slot, const DenseTensor& metric, IndexDirection dir) {
    if (slot >= t.rank()) throw ShapeError("raise_lower: slot out of range");
    const SlotKind k = t.kind(slot);
    if (is_frame(k)) throw ShapeError("raise_lower: coordinate metric given for a frame slot");
    if (metric.rank() != 2 || metric.dim(0) != t.dim(slot) || metric.dim(1) != t.dim(slot))
        throw ShapeError("raise_lower: metric extents do not match");
    if (dir == IndexDirection::Down && !is_upper(k)) throw ShapeError("raise_lower: slot is already lower");
    if (dir == IndexDirection::Up && is_upper(k)) throw ShapeError("raise_lower: slot is already upper");
    Eigen::MatrixXd g = metric.to_matrix();
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw ShapeError("raise_lower: metric is not symmetric");
    Eigen::MatrixXd m = dir == IndexDirection::Down ? g : checked_inverse(g);
    if (dir == IndexDirection::Down && is_singular(g)) throw SingularMetricError("raise_lower: singular metric");
    return apply_to_slot(t, slot, m, flipped(k));
}

DenseTensor raise_lower(const DenseTensor& t, std::size_t slot, const Signature& eta, IndexDirection dir) {
    if (slot >= t.rank()) throw ShapeError("raise_lower: slot out of range");
    const SlotKind k = t.kind(slot);
    if (!is_frame(k)) throw ShapeError("raise_lower: signature given for a coordinate slot");
    if (static_cast<std::size_t>(eta.dim()) != t.dim(slot)) throw ShapeError("raise_lower: signature dimension mismatch");
    if ((dir == IndexDirection::Down) != is_upper(k)) throw ShapeError("raise_lower: slot already has that variance");
    return apply_to_slot(t, slot, eta.matrix(), flipped(k));
}

}  // namespace geom
