#include "geom/metric.hpp"

#include "geom/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

namespace geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricSpec

MetricSpec::MetricSpec(std::string name, std::vector<std::string> coords, Signature signature,
                       std::vector<Expr> upper_triangle, std::vector<Interval> domain)
    : name_(std::move(name)),
      coords_(std::move(coords)),
      signature_(std::move(signature)),
      components_(std::move(upper_triangle)),
      domain_(std::move(domain)) {
    const int n = dim();
    if (n < 2) throw ConfigError("metric dimension must be at least 2");
    if (signature_.dim() != n)
        throw ConfigError("signature " + signature_.to_string() + " does not match dimension " + std::to_string(n));
    if (components_.size() != static_cast<std::size_t>(n * (n + 1) / 2))
        throw ConfigError("metric needs n(n+1)/2 upper-triangle components");
    if (domain_.empty()) domain_.assign(static_cast<std::size_t>(n), Interval{});
    if (domain_.size() != static_cast<std::size_t>(n)) throw ConfigError("domain needs one interval per coordinate");
    for (std::size_t i = 0; i < coords_.size(); ++i)
        for (std::size_t j = i + 1; j < coords_.size(); ++j)
            if (coords_[i] == coords_[j]) throw ConfigError("duplicate coordinate name '" + coords_[i] + "'");
    programs_.reserve(components_.size());
    for (const Expr& e : components_) {
        if (!e) throw ConfigError("missing metric component");
        programs_.emplace_back(e);
    }
}

std::size_t MetricSpec::packed_index(int i, int j, int n) {
    if (i > j) std::swap(i, j);
    // row-major upper triangle
    return static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i));
}

const Expr& MetricSpec::component(int i, int j) const { return components_.at(packed_index(i, j, dim())); }

bool MetricSpec::in_domain(std::span<const double> x) const noexcept {
    if (x.size() != domain_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !domain_[i].contains(x[i])) return false;
    return true;
}

void MetricSpec::require_in_domain(std::span<const double> x) const {
    if (x.size() != domain_.size())
        throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, chart has " + std::to_string(dim()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !domain_[i].contains(x[i])) {
            std::ostringstream os;
            os << "point outside chart domain: " << coords_[i] << " = " << x[i] << " not in ("
               << expr::format_number(domain_[i].lo) << ", " << expr::format_number(domain_[i].hi) << ")";
            throw DomainError(os.str());
        }
    }
}

Eigen::VectorXd MetricSpec::sample_point() const {
    Eigen::VectorXd p(dim());
    for (int i = 0; i < dim(); ++i) {
        const Interval& iv = domain_[static_cast<std::size_t>(i)];
        const bool lo = std::isfinite(iv.lo), hi = std::isfinite(iv.hi);
        if (lo && hi) p[i] = 0.5 * (iv.lo + iv.hi);
        else if (lo) p[i] = iv.lo + std::max(1.0, std::abs(iv.lo));
        else if (hi) p[i] = iv.hi - std::max(1.0, std::abs(iv.hi));
        else p[i] = 0.0;
    }
    return p;
}

bool MetricSpec::operator==(const MetricSpec& o) const {
    if (name_ != o.name_ || coords_ != o.coords_ || !(signature_ == o.signature_) || domain_ != o.domain_) return false;
    for (std::size_t k = 0; k < components_.size(); ++k)
        if (!expr::equal(components_[k], o.components_[k])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

using namespace geom::expr;

double param(const PresetParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

int int_param(const PresetParams& p, const std::string& key, int fallback) {
    double v = param(p, key, fallback);
    if (v != std::floor(v) || std::abs(v) > 64) throw ConfigError("preset parameter " + key + " must be a small integer");
    return static_cast<int>(v);
}

void only_keys(const PresetParams& p, std::initializer_list<const char*> allowed, const std::string& preset) {
    for (const auto& [k, v] : p) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
        if (!ok) throw ConfigError("unknown parameter '" + k + "' for preset " + preset);
        if (!std::isfinite(v)) throw ConfigError("preset parameter " + k + " must be finite");
    }
}

std::vector<Expr> zeros(int n) {
    std::vector<Expr> c(static_cast<std::size_t>(n * (n + 1) / 2));
    for (auto& e : c) e = constant(0.0);
    return c;
}

MetricSpec flat_preset(const PresetParams& p) {
    only_keys(p, {"p", "q", "n"}, "flat");
    int minus = int_param(p, "p", 0);
    int plus = int_param(p, "q", p.count("n") ? int_param(p, "n", 4) - minus : 4 - minus);
    Signature sig = Signature::with_counts(minus, plus);
    const int n = sig.dim();
    std::vector<std::string> coords;
    for (int i = 0; i < n; ++i) coords.push_back("x" + std::to_string(i));
    auto c = zeros(n);
    for (int i = 0; i < n; ++i) c[MetricSpec::packed_index(i, i, n)] = constant(sig[i]);
    return MetricSpec("flat", coords, sig, c, {});
}

MetricSpec sphere_preset(const PresetParams& p) {
    only_keys(p, {"n", "R"}, "sphere");
    const int n = int_param(p, "n", 2);
    const double R = param(p, "R", 1.0);
    if (n < 2) throw ConfigError("sphere preset needs n >= 2");
    if (!(R > 0)) throw ConfigError("sphere preset needs R > 0");
    std::vector<std::string> coords;
    if (n == 2) coords = {"theta", "phi"};
    else
        for (int i = 1; i < n; ++i) coords.push_back("theta" + std::to_string(i));
    if (n > 2) coords.push_back("phi");
    auto c = zeros(n);
    for (int k = 0; k < n; ++k) {
        Expr e = constant(R * R);
        for (int j = 0; j < k; ++j) e = mul(e, expr::pow(unary(NodeKind::Sin, coordinate(j)), constant(2.0)));
        c[MetricSpec::packed_index(k, k, n)] = e;
    }
    std::vector<Interval> dom(static_cast<std::size_t>(n));
    for (int k = 0; k + 1 < n; ++k) dom[static_cast<std::size_t>(k)] = {kPoleMargin, std::numbers::pi - kPoleMargin};
    std::ostringstream name;
    name << "sphere";
    return MetricSpec(name.str(), coords, Signature::euclidean(n), c, dom);
}

MetricSpec hyperbolic_preset(const PresetParams& p) {
    only_keys(p, {"n", "R"}, "hyperbolic");
    const int n = int_param(p, "n", 2);
    const double R = param(p, "R", 1.0);
    if (n < 2) throw ConfigError("hyperbolic preset needs n >= 2");
    if (!(R > 0)) throw ConfigError("hyperbolic preset needs R > 0");
    std::vector<std::string> coords;
    for (int i = 1; i < n; ++i) coords.push_back("x" + std::to_string(i));
    coords.push_back("y");
    auto c = zeros(n);
    for (int k = 0; k < n; ++k)
        c[MetricSpec::packed_index(k, k, n)] = mul(constant(R * R), expr::pow(coordinate(n - 1), constant(-2.0)));
    std::vector<Interval> dom(static_cast<std::size_t>(n));
    dom.back() = {0.0, kInf};
    return MetricSpec("hyperbolic", coords, Signature::euclidean(n), c, dom);
}

MetricSpec constant_curvature_preset(const PresetParams& p) {
    only_keys(p, {"n", "K", "p"}, "constant-curvature");
    const int n = int_param(p, "n", 2);
    const double K = param(p, "K", 1.0);
    const int minus = int_param(p, "p", 0);
    if (n < 2) throw ConfigError("constant-curvature preset needs n >= 2");
    Signature sig = Signature::with_counts(minus, n - minus);
    std::vector<std::string> coords;
    for (int i = 1; i <= n; ++i) coords.push_back("Omega" + std::to_string(i));
    // 1 + K/4 * eta(Omega, Omega)
    Expr quad;
    for (int i = 0; i < n; ++i) {
        Expr sq = expr::pow(coordinate(i), constant(2.0));
        if (sig[i] < 0) sq = neg(sq);
        quad = quad ? add(quad, sq) : sq;
    }
    Expr base = add(constant(1.0), mul(constant(K / 4.0), quad));
    Expr factor = expr::pow(base, constant(-2.0));
    auto c = zeros(n);
    for (int i = 0; i < n; ++i)
        c[MetricSpec::packed_index(i, i, n)] = sig[i] > 0 ? factor : mul(constant(-1.0), factor);
    std::vector<Interval> dom(static_cast<std::size_t>(n));
    if (K < 0 && minus == 0) {
        const double r = 2.0 / std::sqrt(-K);
        for (auto& iv : dom) iv = {-r, r};
    }
    return MetricSpec("constant-curvature", coords, sig, c, dom);
}

MetricSpec schwarzschild_preset(const PresetParams& p) {
    only_keys(p, {"M"}, "schwarzschild");
    const double M = param(p, "M", 1.0);
    if (!(M > 0)) throw ConfigError("schwarzschild preset needs M > 0");
    const int n = 4;
    std::vector<std::string> coords = {"t", "r", "theta", "phi"};
    Expr r = coordinate(1);
    Expr f = sub(constant(1.0), div(constant(2.0 * M), r));
    auto c = zeros(n);
    c[MetricSpec::packed_index(0, 0, n)] = neg(f);
    c[MetricSpec::packed_index(1, 1, n)] = expr::pow(f, constant(-1.0));
    c[MetricSpec::packed_index(2, 2, n)] = expr::pow(r, constant(2.0));
    c[MetricSpec::packed_index(3, 3, n)] =
        mul(expr::pow(r, constant(2.0)), expr::pow(unary(NodeKind::Sin, coordinate(2)), constant(2.0)));
    std::vector<Interval> dom(4);
    dom[1] = {2.0 * M * (1.0 + 1e-6), kInf};
    dom[2] = {kPoleMargin, std::numbers::pi - kPoleMargin};
    return MetricSpec("schwarzschild", coords, Signature::with_counts(1, 3), c, dom);
}

PresetParams parse_params(const std::vector<std::string>& items) {
    PresetParams params;
    for (const std::string& raw : items) {
        std::string item = trim(raw);
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("preset parameter '" + item + "' must be key=value");
        std::string key = trim(item.substr(0, eq));
        std::string val = trim(item.substr(eq + 1));
        // Values may be simple constant expressions such as 1/4.
        Expr e = expr::parse(val, {});
        params[key] = ExprProgram(e).eval(std::span<const double>{});
    }
    return params;
}

}  // namespace

MetricSpec make_preset(const std::string& name, const PresetParams& params) {
    if (name == "flat") return flat_preset(params);
    if (name == "sphere") return sphere_preset(params);
    if (name == "hyperbolic") return hyperbolic_preset(params);
    if (name == "constant-curvature" || name == "cc") return constant_curvature_preset(params);
    if (name == "schwarzschild") return schwarzschild_preset(params);
    throw ConfigError("unknown preset '" + name + "'");
}

MetricSpec make_preset(const std::string& descriptor) {
    std::string d = trim(descriptor);
    std::size_t cut = d.find_first_of(": \t");
    std::string name = d.substr(0, cut);
    std::vector<std::string> items;
    if (cut != std::string::npos) {
        std::string rest = d.substr(cut + 1);
        for (char& c : rest)
            if (c == ',' || c == '\t') c = ' ';
        std::istringstream is(rest);
        std::string tok;
        while (is >> tok) items.push_back(tok);
    }
    return make_preset(name, parse_params(items));
}

// ---------------------------------------------------------------------------
// Metric document

namespace {

struct Line {
    int number;
    std::string text;  // comment stripped
};

double parse_bound(const std::string& s, int line) {
    std::string t = trim(s);
    if (t == "inf" || t == "+inf") return kInf;
    if (t == "-inf") return -kInf;
    Expr e = expr::parse(t, {}, line);
    return ExprProgram(e).eval(std::span<const double>{});
}

}  // namespace

MetricSpec parse_metric_spec(const std::string& text) {
    std::vector<Line> lines;
    {
        std::istringstream is(text);
        std::string raw;
        int no = 0;
        while (std::getline(is, raw)) {
            ++no;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            if (trim(raw).empty()) continue;
            lines.push_back({no, raw});
        }
    }

    std::optional<int> dim;
    std::optional<Signature> sig;
    std::optional<std::vector<std::string>> coords;
    std::string name = "custom";
    struct Pending {
        int line, col, i, j;
        std::string rhs;
    };
    std::vector<Pending> comps;
    struct PendingDomain {
        int line;
        std::string coord, rhs;
    };
    std::vector<PendingDomain> domains;
    std::optional<std::string> preset;

    for (const Line& ln : lines) {
        const std::string body = trim(ln.text);
        const int indent = static_cast<int>(ln.text.find_first_not_of(" \t"));
        if (body.rfind("preset", 0) == 0 && (body.size() == 6 || std::isspace(static_cast<unsigned char>(body[6])))) {
            if (preset) throw SyntaxError("duplicate preset line", ln.number, 1);
            preset = trim(body.substr(6));
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string::npos) throw SyntaxError("expected 'key = value'", ln.number, indent + 1);
        std::string key = trim(body.substr(0, eq));
        std::string rhs = body.substr(eq + 1);
        const int rhs_col = indent + static_cast<int>(eq) + 1;
        if (key == "dim") {
            Expr e = expr::parse(rhs, {}, ln.number, rhs_col);
            double v = ExprProgram(e).eval(std::span<const double>{});
            if (v != std::floor(v) || v < 2 || v > 64) throw SyntaxError("dim must be an integer >= 2", ln.number, rhs_col + 1);
            dim = static_cast<int>(v);
        } else if (key == "signature") {
            sig = Signature::parse(rhs);
        } else if (key == "coords") {
            std::vector<std::string> cs = split(rhs, ',');
            for (const auto& c : cs) {
                bool ok = !c.empty() && (std::isalpha(static_cast<unsigned char>(c[0])) || c[0] == '_');
                for (char ch : c) ok = ok && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
                if (!ok) throw SyntaxError("invalid coordinate name '" + c + "'", ln.number, rhs_col + 1);
            }
            coords = cs;
        } else if (key == "name") {
            name = trim(rhs);
        } else if (key.rfind("domain", 0) == 0) {
            domains.push_back({ln.number, trim(key.substr(6)), trim(rhs)});
        } else if (key.rfind("g[", 0) == 0) {
            int i = -1, j = -1;
            char tail = 0;
            if (std::sscanf(key.c_str(), "g[%d][%d]%c", &i, &j, &tail) != 2)
                throw SyntaxError("malformed component key '" + key + "'", ln.number, indent + 1);
            comps.push_back({ln.number, rhs_col, i, j, rhs});
        } else {
            throw SyntaxError("unknown key '" + key + "'", ln.number, indent + 1);
        }
    }

    if (preset) {
        if (dim || sig || coords || !comps.empty() || !domains.empty())
            throw ConfigError("a preset line cannot be combined with explicit metric keys");
        return make_preset(*preset);
    }

    if (!coords) throw ConfigError("metric document needs a 'coords' line");
    const int n = static_cast<int>(coords->size());
    if (dim && *dim != n)
        throw ConfigError("dim = " + std::to_string(*dim) + " but " + std::to_string(n) + " coordinates declared");
    if (!sig) throw ConfigError("metric document needs a 'signature' line");
    if (sig->dim() != n)
        throw ConfigError("signature " + sig->to_string() + " does not match dimension " + std::to_string(n));

    std::vector<Expr> upper(static_cast<std::size_t>(n * (n + 1) / 2));
    std::vector<bool> lower_only(upper.size(), false);
    for (const Pending& c : comps) {
        if (c.i < 0 || c.j < 0 || c.i >= n || c.j >= n)
            throw SyntaxError("component index out of range", c.line, 1);
        Expr e = expr::parse(c.rhs, *coords, c.line, c.col);
        const std::size_t k = MetricSpec::packed_index(c.i, c.j, n);
        if (upper[k]) {
            if (!expr::equal(upper[k], e))
                throw ConfigError("asymmetric component assignment: g[" + std::to_string(c.i) + "][" + std::to_string(c.j) +
                                  "] differs from its mirror (line " + std::to_string(c.line) + ")");
            if (c.i == c.j || (c.i < c.j) == !lower_only[k])
                throw ConfigError("duplicate assignment of g[" + std::to_string(c.i) + "][" + std::to_string(c.j) + "]");
        }
        upper[k] = e;
        lower_only[k] = c.i > c.j;
    }
    for (auto& e : upper)
        if (!e) e = expr::constant(0.0);

    std::vector<Interval> dom(static_cast<std::size_t>(n));
    for (const PendingDomain& d : domains) {
        auto it = std::find(coords->begin(), coords->end(), d.coord);
        if (it == coords->end()) throw SyntaxError("unknown coordinate name '" + d.coord + "' in domain", d.line, 1);
        std::string r = d.rhs;
        if (r.size() < 2 || r.front() != '(' || r.back() != ')')
            throw SyntaxError("domain must be written (a, b)", d.line, 1);
        auto parts = split(r.substr(1, r.size() - 2), ',');
        if (parts.size() != 2) throw SyntaxError("domain must be written (a, b)", d.line, 1);
        Interval iv{parse_bound(parts[0], d.line), parse_bound(parts[1], d.line)};
        if (!(iv.lo < iv.hi)) throw ConfigError("empty domain interval for " + d.coord);
        dom[static_cast<std::size_t>(it - coords->begin())] = iv;
    }

    MetricSpec spec(name, *coords, *sig, upper, dom);

    // Sign pattern check at a deterministic interior sample; singular or
    // non-finite samples are left for evaluation-time errors.
    Eigen::VectorXd x = spec.sample_point();
    try {
        Eigen::MatrixXd g = eval_metric(spec, x);
        if (!is_singular(g)) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            int neg = static_cast<int>((es.eigenvalues().array() < 0).count());
            if (neg != sig->q_minus())
                throw ConfigError("metric has " + std::to_string(neg) + " negative eigenvalues at the sample point but signature " +
                                  sig->to_string() + " has " + std::to_string(sig->q_minus()));
        }
    } catch (const DomainError&) {
    }
    return spec;
}

std::string print_metric_spec(const MetricSpec& spec) {
    std::ostringstream os;
    const int n = spec.dim();
    os << "name = " << spec.name() << "\n";
    os << "dim = " << n << "\n";
    os << "signature = " << spec.signature().to_string() << "\n";
    os << "coords = ";
    for (int i = 0; i < n; ++i) os << (i ? ", " : "") << spec.coords()[static_cast<std::size_t>(i)];
    os << "\n";
    for (int i = 0; i < n; ++i) {
        const Interval& iv = spec.domain()[static_cast<std::size_t>(i)];
        if (iv == Interval{}) continue;
        os << "domain " << spec.coords()[static_cast<std::size_t>(i)] << " = (" << expr::format_number(iv.lo) << ", "
           << expr::format_number(iv.hi) << ")\n";
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Expr& e = spec.component(i, j);
            if (e->kind == NodeKind::Constant && e->value == 0.0 && !std::signbit(e->value)) continue;
            os << "g[" << i << "][" << j << "] = " << expr::print(e, spec.coords()) << "\n";
        }
    return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void require_finite(double v, const MetricSpec& spec) {
    if (!std::isfinite(v)) throw DomainError("non-finite metric evaluation for chart '" + spec.name() + "'");
}

template <class T>
std::vector<T> packed_eval(const MetricSpec& spec, const std::vector<T>& x) {
    std::vector<T> out(static_cast<std::size_t>(spec.dim() * (spec.dim() + 1) / 2));
    spec.eval_packed<T>(std::span<const T>(x), std::span<T>(out));
    return out;
}

std::vector<double> packed_values(const MetricSpec& spec, std::span<const double> x) {
    return packed_eval<double>(spec, std::vector<double>(x.begin(), x.end()));
}

}  // namespace

Eigen::MatrixXd eval_metric(const MetricSpec& spec, std::span<const double> x) {
    spec.require_in_domain(x);
    const int n = spec.dim();
    std::vector<double> v = packed_values(spec, x);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double c = v[MetricSpec::packed_index(i, j, n)];
            require_finite(c, spec);
            g(i, j) = g(j, i) = c;
        }
    return g;
}

MetricDerivatives eval_metric_derivs(const MetricSpec& spec, std::span<const double> x, int order, DerivativeMode mode) {
    if (order != 1 && order != 2) throw ConfigError("derivative order must be 1 or 2");
    const int n = spec.dim();
    const auto un = static_cast<std::size_t>(n);
    MetricDerivatives out;
    out.g = eval_metric(spec, x);
    out.dg = DenseTensor({un, un, un}, {SlotKind::CoordLower, SlotKind::CoordLower, SlotKind::CoordLower});
    if (order == 2)
        out.ddg = DenseTensor({un, un, un, un},
                              {SlotKind::CoordLower, SlotKind::CoordLower, SlotKind::CoordLower, SlotKind::CoordLower});

    auto store1 = [&](int c, int i, int j, double v) {
        require_finite(v, spec);
        out.dg(i, j, c) = v;
        out.dg(j, i, c) = v;
    };
    auto store2 = [&](int c, int d, int i, int j, double v) {
        require_finite(v, spec);
        out.ddg(i, j, c, d) = v;
        out.ddg(j, i, c, d) = v;
        out.ddg(i, j, d, c) = v;
        out.ddg(j, i, d, c) = v;
    };

    if (mode == DerivativeMode::Dual) {
        if (order == 1) {
            using D = Dual<double>;
            std::vector<D> xd(un);
            for (int c = 0; c < n; ++c) {
                for (int i = 0; i < n; ++i) xd[static_cast<std::size_t>(i)] = D(x[static_cast<std::size_t>(i)], i == c ? 1.0 : 0.0);
                auto v = packed_eval(spec, xd);
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) store1(c, i, j, v[MetricSpec::packed_index(i, j, n)].d);
            }
        } else {
            using D1 = Dual<double>;
            using D2 = Dual<D1>;
            std::vector<D2> xd(un);
            for (int c = 0; c < n; ++c)
                for (int d = c; d < n; ++d) {
                    for (int i = 0; i < n; ++i)
                        xd[static_cast<std::size_t>(i)] =
                            D2(D1(x[static_cast<std::size_t>(i)], i == c ? 1.0 : 0.0), D1(i == d ? 1.0 : 0.0, 0.0));
                    auto v = packed_eval(spec, xd);
                    for (int i = 0; i < n; ++i)
                        for (int j = i; j < n; ++j) {
                            const D2& r = v[MetricSpec::packed_index(i, j, n)];
                            if (c == d) store1(c, i, j, r.v.d);
                            store2(c, d, i, j, r.d.d);
                        }
                }
        }
        return out;
    }

    // Finite-difference cross-check: 4th-order central stencils.
    const double eps = std::numeric_limits<double>::epsilon();
    const double h1_rel = std::cbrt(eps);
    const double h2_rel = std::pow(eps, 1.0 / 6.0);
    std::vector<double> base(x.begin(), x.end());
    auto values = [&](const std::vector<double>& p) {
        spec.require_in_domain(p);
        return packed_values(spec, p);
    };
    // d/dx_c of a packed-vector function f, by a 5-point stencil.
    auto stencil = [&](auto&& f, std::vector<double> p, int c, double h) {
        const auto uc = static_cast<std::size_t>(c);
        const double x0 = p[uc];
        const double offs[] = {-2, -1, 1, 2};
        const double w[] = {1, -8, 8, -1};
        std::vector<double> acc;
        for (int k = 0; k < 4; ++k) {
            p[uc] = x0 + offs[k] * h;
            std::vector<double> v = f(p);
            if (acc.empty()) acc.assign(v.size(), 0.0);
            for (std::size_t m = 0; m < v.size(); ++m) acc[m] += w[k] * v[m];
        }
        for (double& a : acc) a /= 12.0 * h;
        return acc;
    };
    for (int c = 0; c < n; ++c) {
        const double h = h1_rel * std::max(1.0, std::abs(base[static_cast<std::size_t>(c)]));
        auto d = stencil(values, base, c, h);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) store1(c, i, j, d[MetricSpec::packed_index(i, j, n)]);
    }
    if (order == 2) {
        for (int c = 0; c < n; ++c)
            for (int d = c; d < n; ++d) {
                const double hc = h2_rel * std::max(1.0, std::abs(base[static_cast<std::size_t>(c)]));
                const double hd = h2_rel * std::max(1.0, std::abs(base[static_cast<std::size_t>(d)]));
                auto inner = [&](const std::vector<double>& p) { return stencil(values, p, d, hd); };
                auto dd = stencil(inner, base, c, hc);
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) store2(c, d, i, j, dd[MetricSpec::packed_index(i, j, n)]);
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vielbein

FrameField vielbein_from_metric(const Eigen::MatrixXd& g, const Signature& eta, const Eigen::VectorXd& point) {
    const int n = static_cast<int>(g.rows());
    if (eta.dim() != n) throw ShapeError("vielbein: signature dimension mismatch");
    double det = 0.0;
    if (is_singular(g, &det)) {
        std::ostringstream os;
        os << "singular metric at point (det = " << det << ")";
        throw SingularMetricError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.info() != Eigen::Success) throw NumericalQualityError("vielbein: eigendecomposition failed");

    struct Pair {
        double lambda;
        Eigen::VectorXd q;
        int dominant;
    };
    std::vector<Pair> negs, poss;
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd q = es.eigenvectors().col(k);
        const double qmax = q.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
            if (std::abs(q[i]) > 1e-12 * qmax) {
                if (q[i] < 0) q = -q;
                break;
            }
        }
        int dom = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(q[i]) > std::abs(q[dom]) * (1.0 + 1e-12)) dom = i;
        const double lam = es.eigenvalues()[k];
        (lam < 0 ? negs : poss).push_back({lam, q, dom});
    }
    if (static_cast<int>(negs.size()) != eta.q_minus()) {
        std::ostringstream os;
        os << "signature mismatch: metric has " << negs.size() << " negative eigenvalues, signature " << eta.to_string()
           << " expects " << eta.q_minus();
        throw SignatureMismatchError(os.str());
    }
    auto order = [](const Pair& a, const Pair& b) {
        if (a.dominant != b.dominant) return a.dominant < b.dominant;
        return a.lambda < b.lambda;
    };
    std::stable_sort(negs.begin(), negs.end(), order);
    std::stable_sort(poss.begin(), poss.end(), order);

    FrameField f;
    f.point = point;
    f.e.resize(n, n);
    f.e_inv.resize(n, n);
    std::size_t in = 0, ip = 0;
    for (int a = 0; a < n; ++a) {
        const Pair& p = eta[a] < 0 ? negs[in++] : poss[ip++];
        const double s = std::sqrt(std::abs(p.lambda));
        f.e.row(a) = s * p.q.transpose();
        f.e_inv.col(a) = p.q / s;
    }
    return f;
}

FrameField vielbein_at(const MetricSpec& spec, std::span<const double> x) {
    Eigen::MatrixXd g = eval_metric(spec, x);
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return vielbein_from_metric(g, spec.signature(), p);
}

}  // namespace geom
