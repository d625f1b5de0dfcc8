#include "cli.hpp"

#include "report.hpp"

#include "geom/algebra.hpp"
#include "geom/curvature.hpp"
#include "geom/embedding.hpp"
#include "geom/errors.hpp"
#include "geom/jacobi.hpp"
#include "geom/normal.hpp"
#include "geom/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace geom::cli {

namespace {

struct Common {
    std::string preset;
    std::string metric_file;
    std::vector<std::string> points;
    int dirs = 8;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    std::string out;
    std::string format = "json";
    bool timing = false;
};

struct Output {
    Json report = Json::object();
    std::optional<CsvTable> csv;
    InvariantLog invariants;
};

double parse_scalar(const std::string& text) {
    const std::vector<std::string> none;
    const Expr e = expr::parse(text, none);
    if (!expr::is_constant(e)) throw ConfigError("expected a number, got '" + text + "'");
    const double v = ExprProgram(e).eval(std::span<const double>());
    if (!std::isfinite(v)) throw ConfigError("non-finite number '" + text + "'");
    return v;
}

Eigen::VectorXd parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(parse_scalar(tok));
    if (vals.empty()) throw ConfigError("empty vector");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

MetricSpec load_metric(const Common& c) {
    if (!c.preset.empty() && !c.metric_file.empty()) throw ConfigError("give either --preset or --metric, not both");
    if (!c.preset.empty()) return make_preset(c.preset);
    if (!c.metric_file.empty()) {
        std::ifstream in(c.metric_file);
        if (!in) throw ConfigError("cannot read metric file '" + c.metric_file + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_metric_spec(buf.str());
    }
    throw ConfigError("a metric is required (--preset NAME:k=v,... or --metric FILE)");
}

std::vector<Eigen::VectorXd> load_points(const Common& c, const MetricSpec& spec) {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& p : c.points) {
        Eigen::VectorXd x = parse_vector(p);
        if (x.size() != spec.dim())
            throw ConfigError("point has " + std::to_string(x.size()) + " components, metric has dimension " +
                              std::to_string(spec.dim()));
        pts.push_back(x);
    }
    if (pts.empty()) pts.push_back(spec.sample_point());
    return pts;
}

Json tensor_json(const DenseTensor& t) {
    Json dims = Json::array();
    for (auto d : t.dims()) dims.push_back(d);
    Json data = Json::array();
    for (double v : t.data()) data.push_back(v);
    return {{"dims", dims}, {"data", data}};
}

Json metric_json(const MetricSpec& spec) {
    Json coords = Json::array();
    for (const auto& c : spec.coords()) coords.push_back(c);
    return {{"name", spec.name()}, {"dim", spec.dim()}, {"signature", spec.signature().to_string()}, {"coords", coords}};
}

double tensor_scale(const DenseTensor& t) { return std::max(1.0, t.max_abs()); }

// ---------------------------------------------------------------- curvature

void cmd_curvature(const Common& c, Output& o) {
    const MetricSpec spec = load_metric(c);
    const auto pts = load_points(c, spec);
    const double tol = c.tol.value_or(1e-7);
    o.report["metric"] = metric_json(spec);
    Json items = Json::array();
    CsvTable csv({"point", "tensor", "a", "b", "c", "d", "value"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const CurvatureBundle b = riemann(spec, pts[i]);
        const CurvatureChecks ck = check_bundle(spec, b);
        const double scale = tensor_scale(b.riemann_lower);
        const std::string tag = "point" + std::to_string(i) + ".";
        o.invariants.add(tag + "christoffel_symmetry", ck.christoffel_symmetry, 1e-10 * tensor_scale(b.christoffel));
        o.invariants.add(tag + "antisymmetry_first_pair", ck.antisym_first_pair, 1e-10 * scale);
        o.invariants.add(tag + "antisymmetry_second_pair", ck.antisym_second_pair, 1e-10 * scale);
        o.invariants.add(tag + "pair_symmetry", ck.pair_symmetry, 1e-10 * scale);
        o.invariants.add(tag + "first_bianchi", ck.first_bianchi, 1e-10 * scale);
        o.invariants.add(tag + "metric_compatibility", ck.metric_compatibility, 1e-10 * scale);
        o.invariants.add(tag + "frame_consistency", ck.frame_consistency, 1e-10 * scale);
        items.push_back({{"point", to_json(b.point)},
                         {"metric", to_json(b.g)},
                         {"frame", to_json(b.frame.e)},
                         {"christoffel", tensor_json(b.christoffel)},
                         {"riemann_frame", tensor_json(b.riemann_frame)},
                         {"ricci", to_json(b.ricci.to_matrix())},
                         {"scalar", b.scalar},
                         {"checks",
                          {{"christoffel_symmetry", ck.christoffel_symmetry},
                           {"antisymmetry_first_pair", ck.antisym_first_pair},
                           {"antisymmetry_second_pair", ck.antisym_second_pair},
                           {"pair_symmetry", ck.pair_symmetry},
                           {"first_bianchi", ck.first_bianchi},
                           {"metric_compatibility", ck.metric_compatibility},
                           {"frame_consistency", ck.frame_consistency}}}});
        const int n = spec.dim();
        for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb)
                for (int cc = 0; cc < n; ++cc)
                    for (int d = 0; d < n; ++d)
                        csv.row().add(static_cast<long long>(i)).add("riemann_frame").add(a).add(bb).add(cc).add(d).add(
                            b.riemann_frame(a, bb, cc, d));
        for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb)
                csv.row().add(static_cast<long long>(i)).add("ricci").add(a).add(bb).empty().empty().add(b.ricci(a, bb));
    }
    const EinsteinReport er = einstein_space_check(spec, pts, Tolerance(tol, tol));
    Json scalars = Json::array();
    for (double s : er.scalars) scalars.push_back(s);
    o.report["points"] = items;
    o.report["tolerance"] = tol;
    o.report["einstein"] = {{"is_einstein", er.is_einstein},
                            {"is_constant_curvature", er.is_constant_curvature},
                            {"einstein_deviation", er.einstein_deviation},
                            {"constant_curvature_deviation", er.constant_curvature_deviation},
                            {"curvature_scale", er.curvature_scale},
                            {"curvature_scale_spread", er.curvature_scale_spread},
                            {"max_ricci", er.max_ricci},
                            {"scalars", scalars}};
    o.csv = std::move(csv);
}

// ---------------------------------------------------------------- normal

// A frame vector eta-orthogonal to z, from the axis least aligned with it.
Eigen::VectorXd transverse_to(const Eigen::VectorXd& z, const Signature& eta) {
    const int n = static_cast<int>(z.size());
    int k = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(z(i)) < std::abs(z(k))) k = i;
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k);
    const double zz = eta.inner(z, z);
    if (std::abs(zz) > 1e-300) e -= (eta.inner(e, z) / zz) * z;
    return e / e.norm();
}

void cmd_normal(const Common& c, const std::string& origin_text, const std::vector<std::string>& z_texts, double radius,
                int steps, bool oracle, Output& o) {
    const MetricSpec spec = load_metric(c);
    Eigen::VectorXd origin = spec.sample_point();
    if (!origin_text.empty()) origin = parse_vector(origin_text);
    else if (!c.points.empty()) origin = load_points(c, spec).front();
    if (origin.size() != spec.dim()) throw ConfigError("origin dimension does not match the metric");
    const Signature& eta = spec.signature();
    const FrameField frame = vielbein_at(spec, origin);

    std::vector<Eigen::VectorXd> zs;
    for (const auto& t : z_texts) {
        Eigen::VectorXd z = parse_vector(t);
        if (z.size() != spec.dim()) throw ConfigError("z must have one component per frame index");
        zs.push_back(z);
    }
    if (zs.empty())
        for (const auto& d : sample_directions(eta, c.dirs, c.seed)) zs.push_back(radius * d);

    o.report["metric"] = metric_json(spec);
    o.report["origin"] = to_json(origin);
    o.report["frame"] = to_json(frame.e);
    o.report["steps"] = steps;

    Json items = Json::array();
    CsvTable csv({"item", "z_norm", "oracle_delta", "printed_convention_delta", "sigma", "sigma_radial", "gauss_residual",
                  "A_antisymmetry", "B_first_bianchi", "A_equals_zB"});
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const Eigen::VectorXd& z = zs[i];
        const double zz = eta.inner(z, z);
        const double znorm = std::sqrt(std::abs(zz));
        Json item = {{"z", to_json(z)}, {"z_norm", znorm}};
        // refuse z at or beyond the first conjugate point along its direction
        if (std::abs(zz) >= 0.05 * z.squaredNorm() && znorm > 0) {
            JacobiOptions jo;
            jo.s_max = znorm;
            const JacobiField jf = integrate_jacobi(spec, frame, z, jo);
            const ConjugateReport cr = find_conjugate_point(spec, jf, jo);
            if (cr.s_conjugate) {
                throw ChartValidityError("z" + std::to_string(i) + " has |z| = " + format_double(znorm) +
                                         ", beyond the conjugate radius " + format_double(*cr.s_conjugate) +
                                         " along its direction");
            }
            if (cr.truncated) {
                throw ChartValidityError("geodesic along z" + std::to_string(i) + " leaves the chart at s = " +
                                         format_double(cr.s_searched) + " (" + cr.stop_reason + ")");
            }
            item["conjugate_check"] = {{"searched_to", cr.s_searched}, {"found", false}};
        } else {
            item["conjugate_check"] = {{"skipped", "null or zero direction"}};
        }

        GeodesicOptions gopt;
        gopt.steps = steps;
        const GeodesicPath path = integrate_radial_geodesic(spec, frame, z, gopt);
        const PathChecks pc = check_path(spec, path);
        const NormalExpansion e = solve_AB(spec, path);
        const ExpansionChecks ec = check_expansion(e);
        const Eigen::MatrixXd g_rec = reconstruct_metric(e);
        const Eigen::MatrixXd g_cof = reconstruct_metric_from_coframe(e);
        const double gauss = gauss_radial_residual(g_rec, z, eta);
        const std::string tag = "z" + std::to_string(i) + ".";
        o.invariants.add(tag + "A_at_origin", ec.A_at_origin, 1e-12);
        o.invariants.add(tag + "A_antisymmetry", ec.A_antisymmetry, 1e-8);
        o.invariants.add(tag + "B_antisymmetry_first", ec.B_antisym_first, 1e-8);
        o.invariants.add(tag + "B_antisymmetry_second", ec.B_antisym_second, 1e-8);
        o.invariants.add(tag + "B_pair_symmetry", ec.B_pair_symmetry, 1e-8);
        o.invariants.add(tag + "B_first_bianchi", ec.B_first_bianchi, 1e-8);
        o.invariants.add(tag + "A_equals_zB", ec.A_equals_zB, 1e-8);
        o.invariants.add(tag + "gauss_radial", gauss, 1e-8);
        o.invariants.add(tag + "coframe_consistency", (g_rec - g_cof).cwiseAbs().maxCoeff(), 1e-10);
        o.invariants.add(tag + "geodesic_residual", pc.geodesic_residual, 1e-8);
        o.invariants.add(tag + "transport_residual", pc.transport_residual, 1e-8);

        double oracle_delta = NAN, printed_delta = NAN;
        if (oracle) {
            const Eigen::MatrixXd g_pull = exp_map_pullback(spec, frame, z);
            oracle_delta = (g_rec - g_pull).cwiseAbs().maxCoeff();
            printed_delta = (reconstruct_metric(e, LineElementConvention::printed()) - g_pull).cwiseAbs().maxCoeff();
            o.invariants.add(tag + "oracle_delta", oracle_delta, 1e-5);
            item["oracle_metric"] = to_json(g_pull);
        }

        double sigma = NAN, sigma_radial = NAN;
        Json conf = Json::object();
        if (znorm > 0) {
            const ConformalFactor cf = conformal_factor(e, transverse_to(z, eta));
            const ConformalFactor cr = conformal_factor(e, z);
            sigma = cf.sigma;
            sigma_radial = cr.sigma;
            o.invariants.add(tag + "sigma_radial", std::abs(cr.sigma), 1e-12);
            o.invariants.add(tag + "line_element_ratio", cf.line_element_residual, 1e-8);
            conf = {{"velocity", to_json(cf.velocity)},
                    {"exp_minus_2sigma", cf.exp_minus_2sigma},
                    {"sigma", cf.sigma},
                    {"line_element_residual", cf.line_element_residual},
                    {"sigma_radial", cr.sigma},
                    {"angular_momentum", to_json(cf.L)}};
        }
        item["metric"] = to_json(g_rec);
        item["conformal"] = conf;
        item["oracle_delta"] = oracle_delta;
        item["printed_convention_delta"] = printed_delta;
        item["checks"] = {{"A_at_origin", ec.A_at_origin},
                          {"A_antisymmetry", ec.A_antisymmetry},
                          {"B_antisymmetry_first", ec.B_antisym_first},
                          {"B_antisymmetry_second", ec.B_antisym_second},
                          {"B_pair_symmetry", ec.B_pair_symmetry},
                          {"B_first_bianchi", ec.B_first_bianchi},
                          {"A_equals_zB", ec.A_equals_zB},
                          {"gauss_radial", gauss},
                          {"geodesic_residual", pc.geodesic_residual},
                          {"transport_residual", pc.transport_residual},
                          {"error_estimate_A", e.error_estimate_A},
                          {"error_estimate_B", e.error_estimate_B}};
        items.push_back(item);
        csv.row()
            .add(static_cast<long long>(i))
            .add(znorm)
            .add(oracle_delta)
            .add(printed_delta)
            .add(sigma)
            .add(sigma_radial)
            .add(gauss)
            .add(ec.A_antisymmetry)
            .add(ec.B_first_bianchi)
            .add(ec.A_equals_zB);
    }
    o.report["items"] = items;
    o.report["line_element"] = LineElementConvention::exact().describe();
    o.csv = std::move(csv);
}

// ---------------------------------------------------------------- conjugate

void cmd_conjugate(const Common& c, double s_max, int steps, Output& o) {
    const MetricSpec spec = load_metric(c);
    const Eigen::VectorXd origin = load_points(c, spec).front();
    JacobiOptions jo;
    jo.s_max = s_max;
    jo.steps = steps;
    if (c.tol) jo.bracket_tol = *c.tol;
    const FrameField frame = vielbein_at(spec, origin);
    const auto dirs = sample_directions(spec.signature(), c.dirs, c.seed, jo.null_threshold);
    std::vector<JacobiField> fields(dirs.size());
    std::vector<ConjugateReport> reps(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
        fields[i] = integrate_jacobi(spec, frame, dirs[i], jo);
        reps[i] = find_conjugate_point(spec, fields[i], jo);
    });

    o.report["metric"] = metric_json(spec);
    o.report["origin"] = to_json(origin);
    o.report["s_max"] = s_max;
    Json items = Json::array();
    CsvTable csv({"direction", "s", "det_J"});
    std::optional<double> radius;
    double searched_min = s_max;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto& r = reps[i];
        const auto& f = fields[i];
        Json item = {{"direction", to_json(r.direction)},
                     {"detector", r.detector},
                     {"s_searched", r.s_searched},
                     {"truncated", r.truncated},
                     {"stop_reason", r.stop_reason},
                     {"jacobi_residual", f.residual},
                     {"curvature_magnitude", r.curvature_magnitude}};
        double field_scale = 1.0;
        for (const auto& j : f.J) field_scale = std::max(field_scale, j.cwiseAbs().maxCoeff());
        o.invariants.add("direction" + std::to_string(i) + ".jacobi_residual", f.residual, 1e-6 * field_scale);
        if (r.s_conjugate) {
            item["s_conjugate"] = *r.s_conjugate;
            item["bracket"] = {r.bracket_lo, r.bracket_hi};
            item["det_at_conjugate"] = r.det_at_conjugate;
            item["iterations"] = r.iterations;
            o.invariants.add("direction" + std::to_string(i) + ".det_at_conjugate", std::abs(r.det_at_conjugate),
                             jo.det_tol);
            if (!radius || *r.s_conjugate < *radius) radius = r.s_conjugate;
        } else {
            item["s_conjugate"] = nullptr;
            item["note"] = "no conjugate point up to s = " + format_double(r.s_searched);
        }
        searched_min = std::min(searched_min, r.s_searched);
        items.push_back(item);
        for (std::size_t k = 0; k < f.s.size(); ++k) csv.row().add(static_cast<long long>(i)).add(f.s[k]).add(f.det[k]);
    }
    o.report["directions"] = items;
    o.report["chart_radius"] = radius ? Json(*radius) : Json(nullptr);
    o.report["s_searched_min"] = searched_min;
    o.csv = std::move(csv);
}

// ---------------------------------------------------------------- killing

void cmd_killing(const Common& c, int n, double K, const std::vector<std::string>& vector_texts, int samples, Output& o) {
    const EmbeddingModel m = build_embedding(n, K);
    const double tol = c.tol.value_or(1e-6);
    const auto pts = m.sample_points(samples, c.seed);
    std::vector<Eigen::VectorXd> vecs;
    for (const auto& t : vector_texts) {
        Eigen::VectorXd u = parse_vector(t);
        if (u.size() != m.ambient_dim())
            throw ConfigError("ambient vectors need " + std::to_string(m.ambient_dim()) + " components");
        vecs.push_back(u);
    }
    if (vecs.empty())
        for (int a = 0; a < m.ambient_dim(); ++a) vecs.push_back(Eigen::VectorXd::Unit(m.ambient_dim(), a));

    Json pts_json = Json::array();
    double constraint = 0.0, normal = 0.0;
    for (const auto& p : pts) {
        const Eigen::VectorXd x = m.embed(p);
        constraint = std::max(constraint, m.constraint_residual(x));
        normal = std::max(normal, m.normal_residual(p));
        pts_json.push_back({{"chart", to_json(p)}, {"ambient", to_json(x)}});
    }
    o.invariants.add("embedding.constraint", constraint, 1e-10 * std::max(1.0, m.R() * m.R()));
    o.invariants.add("embedding.normal", normal, 1e-10);
    o.report["model"] = {{"n", n},
                         {"K", K},
                         {"R", m.R()},
                         {"epsilon", m.epsilon()},
                         {"ambient_signature", m.ambient_signature().to_string()},
                         {"extra_axis", m.extra_axis()},
                         {"chart", metric_json(m.chart())}};
    o.report["points"] = pts_json;
    o.report["tolerance"] = tol;

    CsvTable csv({"field", "kind", "point", "lambda", "lambda_expected"});
    Json vjson = Json::array();
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        const ChartField f = projected_field(m, vecs[i]);
        const FieldClassification cl = classify_field(m.chart(), f, pts, tol);
        double identity = 0.0, lam_err = 0.0, tangency = 0.0;
        Json samples_json = Json::array();
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Eigen::VectorXd x = m.embed(pts[k]);
            const Projection pr = project_constant_vector(m, vecs[i], x);
            const Eigen::MatrixXd lie = lie_derivative_metric(m.chart(), f, pts[k]);
            const Eigen::MatrixXd g = eval_metric(m.chart(), pts[k]);
            identity = std::max(identity, (lie - 2.0 * pr.lambda * g).cwiseAbs().maxCoeff());
            lam_err = std::max(lam_err, std::abs(cl.lambda[k] - pr.lambda));
            tangency = std::max(tangency, pr.tangency);
            const double cos_colat = x(m.extra_axis()) / m.R();
            samples_json.push_back({{"point", static_cast<int>(k)},
                                    {"lambda", cl.lambda[k]},
                                    {"lambda_expected", pr.lambda},
                                    {"normal_part", pr.normal_part},
                                    {"cos_colatitude", cos_colat}});
            csv.row().add("vector" + std::to_string(i)).add(to_string(cl.kind)).add(static_cast<long long>(k))
                .add(cl.lambda[k]).add(pr.lambda);
        }
        const std::string tag = "vector" + std::to_string(i) + ".";
        o.invariants.add(tag + "lie_identity", identity, 1e-6);
        o.invariants.add(tag + "lambda", lam_err, 1e-6);
        o.invariants.add(tag + "tangency", tangency, 1e-9);
        vjson.push_back({{"vector", to_json(vecs[i])},
                         {"kind", to_string(cl.kind)},
                         {"max_lie", cl.max_lie},
                         {"conformal_residual", cl.conformal_residual},
                         {"lie_identity_residual", identity},
                         {"samples", samples_json}});
    }
    o.report["vectors"] = vjson;

    Json pairs = Json::array();
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t j = i + 1; j < vecs.size(); ++j) {
            const ChartField fi = projected_field(m, vecs[i]), fj = projected_field(m, vecs[j]);
            const ChartField comm = commutator_field(fi, fj);
            const FieldClassification cl = classify_field(m.chart(), comm, pts, 1e-7, kNestedStep);
            double formula = 0.0;
            for (const auto& p : pts) {
                const Eigen::VectorXd amb = m.to_ambient(p, commutator_at(fi, fj, p));
                formula = std::max(formula, (amb - ambient_commutator(m, vecs[i], vecs[j], m.embed(p))).cwiseAbs().maxCoeff());
            }
            const std::string tag = "commutator" + std::to_string(i) + "_" + std::to_string(j) + ".";
            o.invariants.add(tag + "killing", cl.max_lie, 1e-7);
            o.invariants.add(tag + "rotation_formula", formula, 1e-6);
            pairs.push_back({{"pair", {static_cast<int>(i), static_cast<int>(j)}},
                             {"kind", to_string(cl.kind)},
                             {"max_lie", cl.max_lie},
                             {"rotation_formula_residual", formula}});
            for (std::size_t k = 0; k < pts.size(); ++k)
                csv.row().add("commutator" + std::to_string(i) + "_" + std::to_string(j)).add(to_string(cl.kind))
                    .add(static_cast<long long>(k)).add(cl.lambda[k]).add(0.0);
        }
    }
    o.report["commutators"] = pairs;

    Json rots = Json::array();
    for (int a = 0; a < m.ambient_dim(); ++a) {
        for (int b = a + 1; b < m.ambient_dim(); ++b) {
            const FieldClassification cl = classify_field(m.chart(), rotation_field(m, a, b), pts, tol);
            o.invariants.add("rotation" + std::to_string(a) + "_" + std::to_string(b) + ".killing", cl.max_lie, 1e-8);
            rots.push_back({{"axes", {a, b}}, {"kind", to_string(cl.kind)}, {"max_lie", cl.max_lie}});
        }
    }
    o.report["rotations"] = rots;
    o.csv = std::move(csv);
}

// ---------------------------------------------------------------- algebra

int parse_two_j(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            std::size_t used = 0;
            const int j = std::stoi(text, &used);
            if (used != text.size() || j < 0) throw ConfigError("");
            return 2 * j;
        }
        std::size_t used = 0;
        const int num = std::stoi(text.substr(0, slash), &used);
        if (used != slash || text.substr(slash + 1) != "2" || num < 0) throw ConfigError("");
        return num;
    } catch (const std::exception&) {
        throw ConfigError("spin must look like 1, 2 or 3/2, got '" + text + "'");
    }
}

void cmd_algebra(const Common& c, const std::string& signature_text, const std::string& reps_text, Output& o) {
    if (signature_text.empty()) throw ConfigError("--signature is required");
    const Signature eta = Signature::parse(signature_text);
    if (eta.dim() < 2) throw ConfigError("signature needs at least two entries");
    const double tol = c.tol.value_or(1e-12);
    o.report["signature"] = eta.to_string();
    o.report["tolerance"] = tol;

    std::vector<std::string> names;
    std::stringstream ss(reps_text);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) names.push_back(tok);
    if (names.empty()) throw ConfigError("--reps needs at least one representation");

    Json reps = Json::array();
    CsvTable csv({"rep", "dim", "eigenvalue", "multiplicity", "expected", "closure_residual", "jacobi_residual"});
    for (const auto& name : names) {
        RepBasis basis;
        std::optional<double> expected;
        Json extra = Json::object();
        if (name == "vector") {
            basis = angular_momentum_rep(eta);
            expected = eta.dim() - 1.0;
            const long long exact = real_closure_residual(real_angular_momentum_rep(eta));
            const double K = 1.0;
            const double curv = rep_distance(curvature_operator_rep(constant_curvature_tensor(eta, K), eta, K), basis);
            o.invariants.add("vector.real_form_closure", static_cast<double>(exact), 0.0);
            o.invariants.add("vector.curvature_form", curv, tol);
            extra = {{"real_form_closure_residual", exact}, {"curvature_form_residual", curv}};
        } else if (name == "trivial") {
            basis = trivial_rep(eta);
            expected = 0.0;
        } else if (name.rfind("spin:", 0) == 0) {
            if (!(eta == Signature::euclidean(3))) throw ConfigError("spin representations need the signature +,+,+");
            const int two_j = parse_two_j(name.substr(5));
            basis = spin_rep(two_j);
            const double j = two_j / 2.0;
            expected = j * (j + 1);
        } else {
            throw ConfigError("unknown representation '" + name + "' (vector, trivial, spin:J)");
        }
        const AlgebraReport ar = verify_algebra(basis, tol);
        const CasimirReport cr = casimir(basis);
        o.invariants.add(name + ".closure", ar.closure_residual, tol);
        o.invariants.add(name + ".jacobi", ar.jacobi_residual, tol);
        o.invariants.add(name + ".casimir_centrality", cr.centrality_residual, 1e-10);
        Json spectrum = Json::array();
        double eig_err = 0.0;
        for (const auto& e : cr.spectrum) {
            spectrum.push_back({{"value", e.value}, {"imag", e.imag}, {"multiplicity", e.multiplicity}});
            if (expected) eig_err = std::max(eig_err, std::max(std::abs(e.value - *expected), e.imag));
            csv.row().add(name).add(basis.rep_dim()).add(e.value).add(e.multiplicity);
            if (expected) csv.add(*expected);
            else csv.empty();
            csv.add(ar.closure_residual).add(ar.jacobi_residual);
        }
        if (expected) o.invariants.add(name + ".casimir_eigenvalue", eig_err, 1e-10);
        Json r = {{"rep", name},
                  {"dim", basis.rep_dim()},
                  {"generators", static_cast<int>(basis.generators.size())},
                  {"closure_residual", ar.closure_residual},
                  {"jacobi_residual", ar.jacobi_residual},
                  {"pairs_checked", ar.pairs_checked},
                  {"triples_checked", ar.triples_checked},
                  {"casimir_centrality", cr.centrality_residual},
                  {"casimir_spectrum", spectrum}};
        if (expected) r["casimir_expected"] = *expected;
        for (auto it = extra.begin(); it != extra.end(); ++it) r[it.key()] = it.value();
        reps.push_back(r);
    }
    o.report["reps"] = reps;
    o.csv = std::move(csv);
}

void add_common(CLI::App* sub, Common& c, bool needs_metric) {
    if (needs_metric) {
        sub->add_option("--preset", c.preset, "Preset metric, e.g. sphere:n=2,R=1");
        sub->add_option("--metric", c.metric_file, "Metric document file");
        sub->add_option("--point", c.points, "Chart point as comma-separated values (repeatable)");
    }
    sub->add_option("--dirs", c.dirs, "Number of sampled directions")->check(CLI::Range(1, 100000));
    sub->add_option("--seed", c.seed, "Seed for sampled directions and points");
    sub->add_option("--tol", c.tol, "Tolerance for verdicts");
    sub->add_option("--out", c.out, "Write the report to this file");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--timing", c.timing, "Include wall time in the report (breaks byte-identical output)");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ChartValidityError*>(&e)) return 4;
    if (dynamic_cast<const NumericalQualityError*>(&e)) return 5;
    if (dynamic_cast<const DomainError*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return 2;
    return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical pseudo-Riemannian geometry engine", "geom"};
    app.require_subcommand(1);
    Common c;

    auto* curv = app.add_subcommand("curvature", "Curvature bundle and Einstein / constant-curvature verdicts");
    add_common(curv, c, true);

    std::string origin;
    std::vector<std::string> zs;
    double radius = 0.3;
    int steps = 1024;
    bool no_oracle = false;
    auto* normal = app.add_subcommand("normal", "Normal-coordinate expansion, reconstructed metric and conformal factor");
    add_common(normal, c, true);
    normal->add_option("--origin", origin, "Origin of the normal chart (default: --point or the chart sample point)");
    normal->add_option("--z", zs, "Normal-coordinate point as frame components (repeatable)");
    normal->add_option("--radius", radius, "Radius of sampled z when none is given");
    normal->add_option("--steps", steps, "Integration intervals along each radial geodesic")->check(CLI::Range(16, 1 << 16));
    normal->add_flag("--no-oracle", no_oracle, "Skip the exponential-map pullback comparison");

    double s_max = 10.0;
    int jsteps = 1024;
    auto* conj = app.add_subcommand("conjugate", "First conjugate points along sampled directions");
    add_common(conj, c, true);
    conj->add_option("--smax", s_max, "Arclength searched along each direction")->check(CLI::PositiveNumber);
    conj->add_option("--steps", jsteps, "Integration intervals along each direction")->check(CLI::Range(16, 1 << 16));

    int kn = 2;
    std::string kK = "1";
    std::vector<std::string> vectors;
    int samples = 12;
    auto* kill = app.add_subcommand("killing", "Projected constant vectors on an embedded constant-curvature space");
    add_common(kill, c, false);
    kill->add_option("--n", kn, "Dimension of the embedded space")->check(CLI::Range(2, 12));
    kill->add_option("--K", kK, "Curvature (nonzero)");
    kill->add_option("--vector", vectors, "Ambient constant vector (repeatable; default: the ambient axes)");
    kill->add_option("--samples", samples, "Number of sample points")->check(CLI::Range(3, 10000));

    std::string signature;
    std::string reps = "vector";
    auto* alg = app.add_subcommand("algebra", "Angular-momentum algebra closure and Casimir spectra");
    add_common(alg, c, false);
    alg->add_option("--signature", signature, "Signature such as +,+,+ or -,+,+,+");
    alg->add_option("--reps", reps, "Comma-separated list: vector, trivial, spin:J");

    std::vector<const char*> argv{"geom"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::ostringstream msg;
            app.exit(e, msg, err);
            out << msg.str();
            return 0;
        }
        err << "geom: error: " << e.what() << "\n";
        return 2;
    }

    Output o;
    std::string command;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (curv->parsed()) {
            command = "curvature";
            cmd_curvature(c, o);
        } else if (normal->parsed()) {
            command = "normal";
            cmd_normal(c, origin, zs, radius, steps, !no_oracle, o);
        } else if (conj->parsed()) {
            command = "conjugate";
            cmd_conjugate(c, s_max, jsteps, o);
        } else if (kill->parsed()) {
            command = "killing";
            cmd_killing(c, kn, parse_scalar(kK), vectors, samples, o);
        } else {
            command = "algebra";
            cmd_algebra(c, signature, reps, o);
        }
    } catch (const std::exception& e) {
        err << "geom: error: " << e.what() << "\n";
        return exit_code_for(e);
    }

    Json argj = Json::array();
    for (const auto& a : args) argj.push_back(a);
    o.report["schema"] = 1;
    o.report["command"] = command;
    o.report["arguments"] = argj;
    o.report["engine_version"] = kEngineVersion;
    o.report["seed"] = c.seed;
    o.report["invariants"] = o.invariants.to_json();
    o.report["all_invariants_pass"] = o.invariants.all_pass();
    if (c.timing)
        o.report["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string text;
    if (c.format == "csv") {
        text = o.csv ? o.csv->str() : std::string();
        // CSV carries the table only; the invariant summary goes to the diagnostic stream.
        CsvTable inv({"invariant", "residual", "threshold", "pass"});
        for (const auto& i : o.invariants.items())
            inv.row().add(i.name).add(i.residual).add(i.threshold).add(i.pass() ? "true" : "false");
        err << inv.str();
    } else {
        text = write_json(o.report);
    }
    if (!c.out.empty()) {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            err << "geom: error: cannot write '" << c.out << "'\n";
            return 2;
        }
        f << text;
    } else {
        out << text;
    }
    if (!o.invariants.all_pass()) {
        for (const auto& i : o.invariants.items())
            if (!i.pass())
                err << "geom: invariant failed: " << i.name << " residual " << format_double(i.residual) << " > "
                    << format_double(i.threshold) << "\n";
        return 5;
    }
    return 0;
}

}  // namespace geom::cli
