#include "lmcf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lmcf/errors.hpp"

namespace lmcf {

namespace {

// Typed access to a JSON object that remembers which keys were read.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigInvalid(path_ + " must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json* raw(const char* key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    void get(const char* key, double& out) {
        if (const json* v = raw(key)) out = number(*v, at(key));
    }
    void get(const char* key, int& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) throw ConfigInvalid(at(key) + " must be an integer");
            const auto x = v->get<long long>();
            if (x < -2147483647LL || x > 2147483647LL) throw ConfigInvalid(at(key) + " is out of range");
            out = static_cast<int>(x);
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_unsigned()) throw ConfigInvalid(at(key) + " must be a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) throw ConfigInvalid(at(key) + " must be a boolean");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigInvalid(at(key) + " must be a string");
            out = v->get<std::string>();
        }
    }
    void get(const char* key, std::vector<double>& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) throw ConfigInvalid(at(key) + " must be an array");
            out.clear();
            for (const auto& e : *v) out.push_back(number(e, at(key)));
        }
    }
    void get(const char* key, Point4& out) {
        if (const json* v = raw(key)) out = point(*v, at(key));
    }
    void get(const char* key, Annulus& out) {
        std::vector<double> v{out.inner, out.outer};
        get(key, v);
        if (v.size() != 2) throw ConfigInvalid(at(key) + " must be [inner, outer]");
        out = {v[0], v[1]};
    }
    template <class E>
    void get_enum(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> names) {
        std::string s;
        if (!raw(key)) return;
        get(key, s);
        for (const auto& [n, e] : names)
            if (s == n) {
                out = e;
                return;
            }
        std::string all;
        for (const auto& [n, e] : names) all += std::string(all.empty() ? "" : ", ") + n;
        throw ConfigInvalid(at(key) + " must be one of: " + all);
    }

    Obj sub(const char* key) {
        static const json empty = json::object();
        const json* v = raw(key);
        return Obj(v ? *v : empty, at(key));
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigInvalid("unknown field " + at(k.c_str()));
    }

    std::string at(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

    static double number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigInvalid(where + " must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigInvalid(where + " must be finite");
        return x;
    }
    static Point4 point(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 4) throw ConfigInvalid(where + " must be [x1, y1, x2, y2]");
        return {number(v[0], where), number(v[1], where), number(v[2], where), number(v[3], where)};
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

const char* name(InitialKind k) {
    switch (k) {
    case InitialKind::Circle: return "circle";
    case InitialKind::ConnectSum: return "connect_sum";
    case InitialKind::Expander: return "expander";
    }
    return "";
}
const char* name(BridgeShape s) { return s == BridgeShape::Lawlor ? "lawlor" : "corner"; }
const char* name(Integrator i) { return i == Integrator::RKL2 ? "rkl2" : "rk4"; }
const char* name(Boundary b) { return b == Boundary::AsymptoticRay ? "asymptotic_ray" : "fixed_ray"; }
const char* name(TeardropSeries s) {
    switch (s) {
    case TeardropSeries::ThetaZ: return "theta_z";
    case TeardropSeries::PureV: return "pure_v";
    case TeardropSeries::Fast: return "fast";
    }
    return "";
}

json point_json(const Point4& p) { return json::array({p.x1, p.y1, p.x2, p.y2}); }

void read_quad(Obj o, QuadOptions& q) {
    o.get("order", q.order);
    o.get("tol", q.tol);
    o.get("max_depth", q.max_depth);
    o.get("alpha_points", q.alpha_points);
    o.finish();
}

json quad_json(const QuadOptions& q) {
    return {{"order", q.order}, {"tol", q.tol}, {"max_depth", q.max_depth}, {"alpha_points", q.alpha_points}};
}

} // namespace

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate() const {
    auto fail = [](const std::string& m) { throw ConfigInvalid(m); };
    if (name.empty()) fail("name must not be empty");
    flow.validate();
    const InitialSpec& in = initial;
    in.bounds.validate();
    switch (in.kind) {
    case InitialKind::Circle:
        if (!(in.radius > 0.0)) fail("initial.radius must be positive");
        if (in.samples != 0 && in.samples < 8) fail("initial.samples must be 0 or at least 8");
        break;
    case InitialKind::ConnectSum:
        if (!(in.neck_scale > 0.0)) fail("initial.neck_scale must be positive");
        if (!(in.kappa >= 0.0 && in.kappa < 0.25 * 3.141592653589793)) fail("initial.kappa must lie in [0, pi/4)");
        if (!(in.bridge.h > 0.0 && in.bridge.grading >= 0.0 && in.bridge.h_floor > 0.0 && in.bridge.extent > 0.0))
            fail("initial.bridge spacing and extent must be positive");
        break;
    case InitialKind::Expander:
        if (!(in.angle_gap > -0.5 * 3.141592653589793 && in.angle_gap < 0.5 * 3.141592653589793))
            fail("initial.angle_gap must lie in (-pi/2, pi/2)");
        if (!(in.expander.h > 0.0 && in.expander.extent > 0.0 && in.expander.r_lo > 0.0 && in.expander.r_hi > in.expander.r_lo))
            fail("initial.expander parameters are invalid");
        break;
    }
    const NondegOptions& nd = analysis.nondeg;
    auto window = [&](double lo, double hi, double step, const std::string& what) {
        if (!(lo >= 0.0 && hi >= lo && step > 0.0)) fail(what + " window needs 0 <= lo <= hi and step > 0");
    };
    window(nd.tau_lo, nd.tau_hi, nd.tau_step, "analysis.tau");
    window(nd.slow_lo, nd.slow_hi, nd.tau_step, "analysis.slow");
    window(analysis.graph_tau_lo, analysis.graph_tau_hi, analysis.graph_tau_step, "analysis.graph_tau");
    for (const Annulus* a : {&nd.annulus, &analysis.fit_annulus, &analysis.graph_annulus})
        if (!(a->inner > 0.0 && a->outer > a->inner)) fail("annuli need 0 < inner < outer");
    if (!(nd.tol > 0.0)) fail("analysis.tol must be positive");
    if (analysis.graph.samples_u < 5 || analysis.graph.samples_a < 5) fail("graphicality samples must be at least 5");
    if (nd.quad.order < 1 || nd.quad.order > 64) fail("quadrature order must lie in [1, 64]");
    if (!(nd.quad.tol > 0.0) || nd.quad.max_depth < 1 || nd.quad.alpha_points < 0) fail("quadrature options are invalid");
    for (double r : density.scales)
        if (!(r > 0.0)) fail("density.scales must be positive");
    for (const auto& c : density.centers)
        if (!c.finite()) fail("density.centers must be finite");
    if (teardrop.cap < 2 || teardrop.cap > kMaxHermiteDegree) fail("teardrop.cap must lie in [2, 12]");
    if (!(teardrop.options.tol > 0.0)) fail("teardrop.tol must be positive");
    if (teardrop.options.theta1 == teardrop.options.theta2) fail("teardrop plane angles must differ");
    for (std::size_t i = 1; i < teardrop.taus.size(); ++i)
        if (!(teardrop.taus[i] > teardrop.taus[i - 1])) fail("teardrop.taus must be increasing");
    if (exactness.samples < 4) fail("exactness.samples must be at least 4");
    if (!(exactness.tol > 0.0)) fail("exactness.tol must be positive");
}

Scenario parse_scenario(const json& j) {
    Scenario s;
    Obj root(j, "");
    int version = 0;
    if (!root.has("schema_version")) throw ConfigInvalid("schema_version is required");
    root.get("schema_version", version);
    if (version != kSchemaVersion) throw ConfigInvalid("unsupported schema_version " + std::to_string(version));
    root.get("name", s.name);
    root.get("seed", s.seed);
    if (root.has("trajectory")) {
        std::string t;
        root.get("trajectory", t);
        s.trajectory = t;
    }

    {
        Obj o = root.sub("initial");
        InitialSpec& in = s.initial;
        o.get_enum("kind", in.kind,
                   {{"circle", InitialKind::Circle}, {"connect_sum", InitialKind::ConnectSum}, {"expander", InitialKind::Expander}});
        o.get("radius", in.radius);
        o.get("samples", in.samples);
        o.get("kappa", in.kappa);
        o.get("neck_scale", in.neck_scale);
        o.get("smoothing", in.smoothing);
        o.get("angle_gap", in.angle_gap);
        {
            Obj b = o.sub("bridge");
            b.get_enum("shape", in.bridge.shape, {{"lawlor", BridgeShape::Lawlor}, {"corner", BridgeShape::Corner}});
            b.get("extent", in.bridge.extent);
            b.get("h", in.bridge.h);
            b.get("grading", in.bridge.grading);
            b.get("h_floor", in.bridge.h_floor);
            b.finish();
        }
        {
            Obj b = o.sub("bounds");
            b.get("K0", in.bounds.K0);
            b.get("kappa0", in.bounds.kappa0);
            b.get("epsilon0", in.bounds.epsilon0);
            b.get("R0", in.bounds.R0);
            b.finish();
        }
        {
            Obj e = o.sub("expander");
            e.get("h", in.expander.h);
            e.get("grading", in.expander.grading);
            e.get("extent", in.expander.extent);
            e.get("r_lo", in.expander.r_lo);
            e.get("r_hi", in.expander.r_hi);
            e.get("tol", in.expander.tol);
            e.finish();
        }
        o.finish();
    }
    {
        Obj o = root.sub("flow");
        FlowConfig& f = s.flow;
        o.get("h_target", f.h_target);
        o.get("grading", f.grading);
        o.get("h_floor", f.h_floor);
        o.get("sigma", f.sigma);
        o.get_enum("integrator", f.integrator, {{"rkl2", Integrator::RKL2}, {"rk4", Integrator::RK4}});
        o.get("stages", f.stages);
        o.get("remesh_ratio", f.remesh_ratio);
        o.get("min_nodes", f.min_nodes);
        o.get("t_max", f.t_max);
        o.get("min_radius_tol", f.min_radius_tol);
        o.get("max_curvature_tol", f.max_curvature_tol);
        o.get_enum("boundary", f.boundary, {{"asymptotic_ray", Boundary::AsymptoticRay}, {"fixed_ray", Boundary::FixedRay}});
        o.get("snapshot_dt", f.snapshot_dt);
        o.get("snapshot_fraction", f.snapshot_fraction);
        o.get("parallel", f.parallel);
        o.get("remesh", f.remesh);
        if (const json* p = o.raw("probes")) {
            if (!p->is_array()) throw ConfigInvalid("flow.probes must be an array");
            for (const auto& e : *p) {
                Obj po(e, "flow.probes[]");
                Probe pr;
                po.get("x0", pr.x0);
                po.get("t0", pr.t0);
                po.finish();
                f.probes.push_back(pr);
            }
        }
        o.finish();
    }
    {
        Obj o = root.sub("analysis");
        PinchOptions& a = s.analysis;
        NondegOptions& nd = a.nondeg;
        o.get("tau_lo", nd.tau_lo);
        o.get("tau_hi", nd.tau_hi);
        o.get("tau_step", nd.tau_step);
        o.get("annulus", nd.annulus);
        o.get("tol", nd.tol);
        o.get("slow_lo", nd.slow_lo);
        o.get("slow_hi", nd.slow_hi);
        o.get("three_annulus_s", nd.three_annulus_s);
        o.get("swap_branches", nd.swap_branches);
        o.get("use_extrapolated_T0", nd.use_extrapolated_T0);
        read_quad(o.sub("quadrature"), nd.quad);
        o.get("graph_tau_lo", a.graph_tau_lo);
        o.get("graph_tau_hi", a.graph_tau_hi);
        o.get("graph_tau_step", a.graph_tau_step);
        o.get("fit_annulus", a.fit_annulus);
        o.get("graph_annulus", a.graph_annulus);
        o.get("graph_samples_u", a.graph.samples_u);
        o.get("graph_samples_a", a.graph.samples_a);
        o.finish();
    }
    {
        Obj o = root.sub("density");
        if (const json* c = o.raw("centers")) {
            if (!c->is_array()) throw ConfigInvalid("density.centers must be an array");
            s.density.centers.clear();
            for (const auto& e : *c) s.density.centers.push_back(Obj::point(e, "density.centers[]"));
        }
        o.get("scales", s.density.scales);
        o.get("threshold", s.density.threshold);
        o.finish();
    }
    {
        Obj o = root.sub("teardrop");
        TeardropSpec& t = s.teardrop;
        o.get_enum("series", t.series,
                   {{"theta_z", TeardropSeries::ThetaZ}, {"pure_v", TeardropSeries::PureV}, {"fast", TeardropSeries::Fast}});
        o.get("c", t.c);
        o.get("noise", t.noise);
        o.get("taus", t.taus);
        o.get("cap", t.cap);
        o.get("tol", t.options.tol);
        o.get("theta1", t.options.theta1);
        o.get("theta2", t.options.theta2);
        o.finish();
    }
    {
        Obj o = root.sub("exactness");
        o.get("b", s.exactness.b);
        o.get("samples", s.exactness.samples);
        o.get("tol", s.exactness.tol);
        o.finish();
    }
    root.finish();
    s.validate();
    return s;
}

Scenario load_scenario(const fs::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

json to_json(const Scenario& s) {
    const InitialSpec& in = s.initial;
    const FlowConfig& f = s.flow;
    const PinchOptions& a = s.analysis;
    const NondegOptions& nd = a.nondeg;
    json probes = json::array();
    for (const auto& p : f.probes) probes.push_back({{"x0", point_json(p.x0)}, {"t0", p.t0}});
    json centers = json::array();
    for (const auto& c : s.density.centers) centers.push_back(point_json(c));
    json j = {
        {"schema_version", kSchemaVersion},
        {"name", s.name},
        {"seed", s.seed},
    };
    if (s.trajectory) j["trajectory"] = *s.trajectory;
    j["initial"] = {
        {"kind", name(in.kind)},
        {"radius", in.radius},
        {"samples", in.samples},
        {"kappa", in.kappa},
        {"neck_scale", in.neck_scale},
        {"smoothing", in.smoothing},
        {"angle_gap", in.angle_gap},
        {"bridge", {{"shape", name(in.bridge.shape)}, {"extent", in.bridge.extent}, {"h", in.bridge.h},
                    {"grading", in.bridge.grading}, {"h_floor", in.bridge.h_floor}}},
        {"bounds", {{"K0", in.bounds.K0}, {"kappa0", in.bounds.kappa0}, {"epsilon0", in.bounds.epsilon0}, {"R0", in.bounds.R0}}},
        {"expander", {{"h", in.expander.h}, {"grading", in.expander.grading}, {"extent", in.expander.extent},
                      {"r_lo", in.expander.r_lo}, {"r_hi", in.expander.r_hi}, {"tol", in.expander.tol}}},
    };
    j["flow"] = {
        {"h_target", f.h_target},
        {"grading", f.grading},
        {"h_floor", f.h_floor},
        {"sigma", f.sigma},
        {"integrator", name(f.integrator)},
        {"stages", f.stages},
        {"remesh_ratio", f.remesh_ratio},
        {"min_nodes", f.min_nodes},
        {"t_max", f.t_max},
        {"min_radius_tol", f.min_radius_tol},
        {"max_curvature_tol", f.max_curvature_tol},
        {"boundary", name(f.boundary)},
        {"snapshot_dt", f.snapshot_dt},
        {"snapshot_fraction", f.snapshot_fraction},
        {"parallel", f.parallel},
        {"remesh", f.remesh},
        {"probes", probes},
    };
    j["analysis"] = {
        {"tau_lo", nd.tau_lo},
        {"tau_hi", nd.tau_hi},
        {"tau_step", nd.tau_step},
        {"annulus", {nd.annulus.inner, nd.annulus.outer}},
        {"tol", nd.tol},
        {"slow_lo", nd.slow_lo},
        {"slow_hi", nd.slow_hi},
        {"three_annulus_s", nd.three_annulus_s},
        {"swap_branches", nd.swap_branches},
        {"use_extrapolated_T0", nd.use_extrapolated_T0},
        {"quadrature", quad_json(nd.quad)},
        {"graph_tau_lo", a.graph_tau_lo},
        {"graph_tau_hi", a.graph_tau_hi},
        {"graph_tau_step", a.graph_tau_step},
        {"fit_annulus", {a.fit_annulus.inner, a.fit_annulus.outer}},
        {"graph_annulus", {a.graph_annulus.inner, a.graph_annulus.outer}},
        {"graph_samples_u", a.graph.samples_u},
        {"graph_samples_a", a.graph.samples_a},
    };
    j["density"] = {{"centers", centers}, {"scales", s.density.scales}, {"threshold", s.density.threshold}};
    const TeardropSpec& t = s.teardrop;
    j["teardrop"] = {{"series", name(t.series)}, {"c", t.c},         {"noise", t.noise},
                     {"taus", t.taus},           {"cap", t.cap},     {"tol", t.options.tol},
                     {"theta1", t.options.theta1}, {"theta2", t.options.theta2}};
    j["exactness"] = {{"b", s.exactness.b}, {"samples", s.exactness.samples}, {"tol", s.exactness.tol}};
    return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const Scenario& s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(dump(to_json(s)))));
    return buf;
}

void set_quadrature_order(Scenario& s, int order) {
    if (order < 1 || order > 64) throw ConfigInvalid("quadrature order must lie in [1, 64]");
    s.analysis.nondeg.quad.order = order;
}

ProfileCurve initial_curve(const Scenario& s) {
    const InitialSpec& in = s.initial;
    switch (in.kind) {
    case InitialKind::Circle: {
        const int n = in.samples > 0 ? in.samples
                                     : std::max(16, static_cast<int>(std::ceil(2.0 * 3.141592653589793 * in.radius / s.flow.h_target)));
        ProfileCurve c;
        c.components.push_back(circle_component(in.radius, n));
        c.injective = true;
        c.validate();
        return c;
    }
    case InitialKind::ConnectSum: return connect_sum_profile(in.kappa, in.neck_scale, in.smoothing, in.bridge);
    case InitialKind::Expander: return expander_profile(in.angle_gap, in.expander).curve;
    }
    throw ConfigInvalid("unknown initial kind");
}

// ---------------------------------------------------------------------------
// Text helpers

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
        // from_chars does not accept inf/nan spellings from printf
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan" || s == "-nan") return NAN;
        throw IoError(where + ": cannot parse number '" + s + "'");
    }
    return v;
}

long parse_int(const std::string& s, const std::string& where) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw IoError(where + ": cannot parse integer '" + s + "'");
    return v;
}

// Rows of a CSV with the expected header.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& header, const std::string& where) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) throw IoError(where + ": unexpected header");
    const std::size_t cols = split(header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split(line);
        if (r.size() != cols) throw IoError(where + ": wrong column count");
        rows.push_back(std::move(r));
    }
    return rows;
}

// u (chord length) and theta are derived columns for plotting; the reader ignores them.
const char* kSnapshotHeader = "component,closed,ray_front,ray_back,theta_ref,u,x,y,theta";
const char* kIndexHeader = "id,t,mesh_id,first_summand_back,injective,bridge_constant,angle_osc";
const char* kEventsHeader = "kind,t,x1,y1,x2,y2,T0,T0_extrapolated,nodes";
const char* kLedgerHeader = "t,probe,theta";
const char* kProbesHeader = "probe,x1,y1,x2,y2,t0";

EventKind parse_kind(const std::string& s) {
    for (EventKind k : {EventKind::Remesh, EventKind::Pinch, EventKind::Blowup, EventKind::TMax})
        if (to_string(k) == s) return k;
    throw IoError("unknown event kind '" + s + "'");
}

std::string snapshot_name(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.csv", id);
    return buf;
}

} // namespace

std::string snapshot_csv(const ProfileCurve& c) {
    std::string out = std::string(kSnapshotHeader) + "\n";
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        const auto& comp = c.components[k];
        const std::string prefix = std::to_string(k) + "," + (comp.closed ? "1" : "0") + "," + (comp.ray_front ? "1" : "0") +
                                   "," + (comp.ray_back ? "1" : "0") + "," + fmt(comp.theta_ref) + ",";
        const auto u = comp.arclength();
        const auto theta = comp.angles();
        for (std::size_t i = 0; i < comp.z.size(); ++i)
            out += prefix + fmt(u[i]) + "," + fmt(comp.z[i].real()) + "," + fmt(comp.z[i].imag()) + "," + fmt(theta[i]) + "\n";
    }
    return out;
}

ProfileCurve parse_snapshot_csv(const std::string& text) {
    ProfileCurve c;
    for (const auto& r : parse_csv(text, kSnapshotHeader, "snapshot")) {
        const auto k = static_cast<std::size_t>(parse_int(r[0], "snapshot"));
        if (k > c.components.size()) throw IoError("snapshot components out of order");
        if (k == c.components.size()) {
            ProfileComponent comp;
            comp.closed = r[1] == "1";
            comp.ray_front = r[2] == "1";
            comp.ray_back = r[3] == "1";
            comp.theta_ref = parse_double(r[4], "snapshot");
            c.components.push_back(std::move(comp));
        }
        c.components[k].z.emplace_back(parse_double(r[6], "snapshot"), parse_double(r[7], "snapshot"));
    }
    return c;
}

void write_trajectory(const fs::path& dir, const FlowTrajectory& traj) {
    std::error_code ec;
    fs::create_directories(dir / "snapshots", ec);
    if (ec) throw IoError("cannot create " + (dir / "snapshots").string() + ": " + ec.message());
    std::string index = std::string(kIndexHeader) + "\n";
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const Snapshot& s = traj.snapshots[i];
        write_file(dir / "snapshots" / snapshot_name(i), snapshot_csv(s.curve));
        index += std::to_string(i) + "," + fmt(s.t) + "," + std::to_string(s.mesh_id) + "," +
                 (s.curve.first_summand_back ? "1" : "0") + "," + (s.curve.injective ? "1" : "0") + "," +
                 fmt(s.curve.bridge_constant) + "," + fmt(i < traj.angle_osc.size() ? traj.angle_osc[i] : 0.0) + "\n";
    }
    write_file(dir / "snapshots" / "index.csv", index);

    std::string events = std::string(kEventsHeader) + "\n";
    for (const auto& e : traj.events)
        events += to_string(e.kind) + "," + fmt(e.t) + "," + fmt(e.x0.x1) + "," + fmt(e.x0.y1) + "," + fmt(e.x0.x2) + "," +
                  fmt(e.x0.y2) + "," + fmt(e.T0) + "," + fmt(e.T0_extrapolated) + "," + std::to_string(e.nodes) + "\n";
    write_file(dir / "events.csv", events);

    std::string ledger = std::string(kLedgerHeader) + "\n";
    for (const auto& r : traj.ledger) ledger += fmt(r.t) + "," + std::to_string(r.probe) + "," + fmt(r.theta) + "\n";
    write_file(dir / "ledger.csv", ledger);

    std::string probes = std::string(kProbesHeader) + "\n";
    for (std::size_t i = 0; i < traj.probes.size(); ++i) {
        const Probe& p = traj.probes[i];
        probes += std::to_string(i) + "," + fmt(p.x0.x1) + "," + fmt(p.x0.y1) + "," + fmt(p.x0.x2) + "," + fmt(p.x0.y2) + "," +
                  fmt(p.t0) + "\n";
    }
    write_file(dir / "probes.csv", probes);
    write_file(dir / "steps.txt", std::to_string(traj.steps) + "\n");
}

FlowTrajectory read_trajectory(const fs::path& dir) {
    FlowTrajectory traj;
    for (const auto& r : parse_csv(read_file(dir / "snapshots" / "index.csv"), kIndexHeader, "index.csv")) {
        const auto id = static_cast<std::size_t>(parse_int(r[0], "index.csv"));
        if (id != traj.snapshots.size()) throw IoError("index.csv ids must be consecutive");
        Snapshot s;
        s.t = parse_double(r[1], "index.csv");
        s.mesh_id = static_cast<int>(parse_int(r[2], "index.csv"));
        s.curve = parse_snapshot_csv(read_file(dir / "snapshots" / snapshot_name(id)));
        s.curve.first_summand_back = r[3] == "1";
        s.curve.injective = r[4] == "1";
        s.curve.bridge_constant = parse_double(r[5], "index.csv");
        traj.angle_osc.push_back(parse_double(r[6], "index.csv"));
        traj.snapshots.push_back(std::move(s));
    }
    if (traj.snapshots.empty()) throw IoError(dir.string() + ": trajectory has no snapshots");
    for (const auto& r : parse_csv(read_file(dir / "events.csv"), kEventsHeader, "events.csv")) {
        FlowEvent e;
        e.kind = parse_kind(r[0]);
        e.t = parse_double(r[1], "events.csv");
        e.x0 = {parse_double(r[2], "events.csv"), parse_double(r[3], "events.csv"), parse_double(r[4], "events.csv"),
                parse_double(r[5], "events.csv")};
        e.T0 = parse_double(r[6], "events.csv");
        e.T0_extrapolated = parse_double(r[7], "events.csv");
        e.nodes = static_cast<std::size_t>(parse_int(r[8], "events.csv"));
        traj.events.push_back(e);
    }
    for (const auto& r : parse_csv(read_file(dir / "ledger.csv"), kLedgerHeader, "ledger.csv"))
        traj.ledger.push_back({parse_double(r[0], "ledger.csv"), static_cast<int>(parse_int(r[1], "ledger.csv")),
                               parse_double(r[2], "ledger.csv")});
    for (const auto& r : parse_csv(read_file(dir / "probes.csv"), kProbesHeader, "probes.csv"))
        traj.probes.push_back({{parse_double(r[1], "probes.csv"), parse_double(r[2], "probes.csv"),
                                parse_double(r[3], "probes.csv"), parse_double(r[4], "probes.csv")},
                               parse_double(r[5], "probes.csv")});
    std::string steps = read_file(dir / "steps.txt");
    while (!steps.empty() && (steps.back() == '\n' || steps.back() == '\r')) steps.pop_back();
    traj.steps = static_cast<std::size_t>(parse_int(steps, "steps.txt"));
    return traj;
}

// ---------------------------------------------------------------------------
// Reports

json to_json(const NeckPinchReport& r, const PinchOptions& opt) {
    json j;
    j["pinch"] = {{"x0", point_json(r.x0)}, {"T0", r.T0}, {"T0_extrapolated", r.T0_extrapolated}};
    j["density_at_pinch"] = r.density_at_pinch;
    if (r.planes) {
        json frames = json::array();
        for (const auto& p : r.planes->pair.planes)
            frames.push_back({{"e1", point_json(p.e1)}, {"e2", point_json(p.e2)}, {"angle", p.angle}});
        j["planes"] = {{"frames", frames},
                       {"angles", {r.planes->phi[0], r.planes->phi[1]}},
                       {"transverse", r.planes->pair.transverse},
                       {"residual", r.planes->residual}};
    } else {
        j["planes"] = nullptr;
    }
    json g = json::array();
    for (const auto& row : r.graphicality) {
        json e = {{"tau", row.tau}, {"c", row.c ? json(*row.c) : json(nullptr)}};
        if (row.error) e["error"] = *row.error;
        g.push_back(e);
    }
    j["graphicality"] = g;
    const NondegResult& nd = r.nondeg;
    json rows = json::array();
    for (const auto& row : nd.limit.rows)
        rows.push_back({{"tau", row.tau}, {"branch_means", {row.means[0], row.means[1]}}, {"residual", row.residual}, {"norm", row.norm}});
    json three = json::array();
    for (const auto& [tau, v] : nd.three_annulus) three.push_back({{"tau", tau}, {"result", to_string(v)}});
    j["angle_limit"] = {
        {"branch_means", {nd.limit.means[0], nd.limit.means[1]}},
        {"expected", nd.expected},
        {"residual", nd.limit.residual},
        {"window", {opt.nondeg.tau_lo, opt.nondeg.tau_hi, opt.nondeg.tau_step}},
        {"annulus", {opt.nondeg.annulus.inner, opt.nondeg.annulus.outer}},
        {"tol", opt.nondeg.tol},
        {"verdict", to_string(nd.verdict)},
        {"slowdecay_s", nd.slowdecay_s},
        {"kappa0", nd.kappa0},
        {"three_annulus_results", three},
        {"rows", rows},
    };
    if (nd.error) j["angle_limit"]["error"] = *nd.error;
    j["verdict"] = to_string(r.verdict);
    json emb = json::array();
    for (const auto& e : r.embeddedness) emb.push_back({{"t", e.t}, {"intersections", e.intersections}});
    j["embedded"] = r.embedded();
    j["embeddedness"] = emb;
    j["notes"] = r.notes;
    return j;
}

json to_json(const TeardropReport& r) {
    return {{"rate", r.rate ? json(*r.rate) : json(nullptr)},
            {"rate_stderr", r.rate_stderr ? json(*r.rate_stderr) : json(nullptr)},
            {"correlation", r.correlation},
            {"c_estimate", r.c_estimate ? json(*r.c_estimate) : json(nullptr)},
            {"verdict", to_string(r.verdict)}};
}

std::string candidates_csv(const std::vector<DensityCandidate>& c) {
    std::string out = "t,x1,y1,x2,y2,r0,value\n";
    for (const auto& d : c)
        out += fmt(d.t) + "," + fmt(d.x0.x1) + "," + fmt(d.x0.y1) + "," + fmt(d.x0.x2) + "," + fmt(d.x0.y2) + "," + fmt(d.r0) +
               "," + fmt(d.value) + "\n";
    return out;
}

std::string surface_csv(const ParamSurface& s, int samples_u, int samples_a, double radius) {
    if (samples_u < 2 || samples_a < 1 || !(radius > 0.0)) throw ConfigInvalid("surface dump needs samples_u >= 2, samples_a >= 1, radius > 0");
    std::string out = "component,u,alpha,x1,y1,x2,y2,theta\n";
    for (std::size_t k = 0; k < s.components.size(); ++k) {
        const auto& c = s.components[k];
        double lo = c.u_min, hi = c.u_max;
        if (c.infinite) {
            const auto r = c.u_range(radius);
            lo = std::max(lo, r[0]);
            hi = std::min(hi, r[1]);
        }
        for (int i = 0; i < samples_u; ++i) {
            const double u = lo + (hi - lo) * i / (samples_u - 1);
            for (int j = 0; j < samples_a; ++j) {
                const double a = 2.0 * 3.141592653589793 * j / samples_a;
                const Point4 x = c(u, a);
                std::string theta = "nan";
                try {
                    theta = fmt(lagrangian_angle(s, k, u, a));
                } catch (const DegeneratePoint&) {
                }
                out += std::to_string(k) + "," + fmt(u) + "," + fmt(a) + "," + fmt(x.x1) + "," + fmt(x.y1) + "," + fmt(x.x2) +
                       "," + fmt(x.y2) + "," + theta + "\n";
            }
        }
    }
    return out;
}

std::string roots_csv(const std::vector<ExactnessRoot>& r) {
    std::string out = "angle,re,im,value\n";
    for (const auto& x : r)
        out += fmt(x.angle) + "," + fmt(x.t_prime.real()) + "," + fmt(x.t_prime.imag()) + "," + fmt(x.value) + "\n";
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + p.string());
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
    }
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("error writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + p.string() + ": " + ec.message());
}

} // namespace lmcf
