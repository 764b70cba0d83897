#include "pmelab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "pmelab/data.hpp"
#include "pmelab/degiorgi.hpp"

namespace pmelab {

ScenarioError::ScenarioError(std::string field, const std::string& message)
    : std::invalid_argument("field '" + field + "': " + message), field_(std::move(field)) {}

const std::vector<std::string>& operation_names() {
    static const std::vector<std::string> names{"solve",      "verify-barrier", "perron",   "probe",
                                                "dichotomy",  "future-probe",   "capacity", "wiener",
                                                "torsion",    "degiorgi",       "barenblatt"};
    return names;
}

namespace {

// ---------------------------------------------------------------- parsing

class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }
    [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(path_.empty() ? "<root>" : path_, msg); }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void require_object() const {
        if (!j_->is_object()) fail("expected an object");
    }
    void allow(std::initializer_list<const char*> keys) const {
        require_object();
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!ok.count(it.key())) throw ScenarioError(child_path(it.key()), "unknown field");
    }
    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
    Node at(const std::string& key) const {
        require_object();
        if (!j_->contains(key)) throw ScenarioError(child_path(key), "missing required field");
        return Node((*j_)[key], child_path(key));
    }
    std::optional<Node> get(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return Node((*j_)[key], child_path(key));
    }
    std::vector<Node> items() const {
        if (!j_->is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]");
        return out;
    }

    double as_double() const {
        if (!j_->is_number()) fail("expected a number");
        return j_->get<double>();
    }
    long as_long() const {
        if (!j_->is_number_integer()) fail("expected an integer");
        return j_->get<long>();
    }
    bool as_bool() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }
    std::string as_string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    std::vector<double> as_doubles() const {
        std::vector<double> v;
        for (const auto& n : items()) v.push_back(n.as_double());
        return v;
    }
    Point as_point(int n) const {
        auto v = as_doubles();
        if (static_cast<int>(v.size()) != n) fail("expected " + std::to_string(n) + " coordinates");
        Point p{0.0, 0.0, 0.0};
        for (int i = 0; i < n; ++i) p[i] = v[i];
        return p;
    }

    double num(const std::string& k) const { return at(k).as_double(); }
    double num_or(const std::string& k, double d) const { return has(k) ? at(k).as_double() : d; }
    long integer_or(const std::string& k, long d) const { return has(k) ? at(k).as_long() : d; }
    bool flag_or(const std::string& k, bool d) const { return has(k) ? at(k).as_bool() : d; }
    std::string str_or(const std::string& k, const std::string& d) const { return has(k) ? at(k).as_string() : d; }

private:
    const json* j_;
    std::string path_;
};

double positive(const Node& n) {
    double v = n.as_double();
    if (!(v > 0.0)) n.fail("must be positive");
    return v;
}

double positive_key(const Node& parent, const std::string& k) { return positive(parent.at(k)); }

ShapeSpec parse_shape(const Node& n, int dim) {
    ShapeSpec s;
    s.type = n.at("type").as_string();
    if (s.type == "box") {
        n.allow({"type", "lo", "hi"});
        s.lo = n.at("lo").as_point(dim);
        s.hi = n.at("hi").as_point(dim);
        for (int a = 0; a < dim; ++a)
            if (!(s.hi[a] > s.lo[a])) n.at("hi").fail("must exceed lo along every axis");
    } else if (s.type == "ball") {
        n.allow({"type", "center", "radius"});
        s.center = n.at("center").as_point(dim);
        s.radius = positive_key(n, "radius");
    } else if (s.type == "box-minus-segment") {
        n.allow({"type", "lo", "hi", "a", "b"});
        s.lo = n.at("lo").as_point(dim);
        s.hi = n.at("hi").as_point(dim);
        s.a = n.at("a").as_point(dim);
        s.b = n.at("b").as_point(dim);
        for (int a = 0; a < dim; ++a)
            if (!(s.hi[a] > s.lo[a])) n.at("hi").fail("must exceed lo along every axis");
    } else if (s.type == "punctured-ball") {
        n.allow({"type", "center", "radius", "puncture"});
        s.center = n.at("center").as_point(dim);
        s.radius = positive_key(n, "radius");
        s.puncture = n.has("puncture") ? n.at("puncture").as_point(dim) : s.center;
    } else if (s.type == "mask") {
        n.allow({"type", "lo", "hi", "rows"});
        s.lo = n.at("lo").as_point(dim);
        s.hi = n.at("hi").as_point(dim);
        for (int a = 0; a < dim; ++a)
            if (!(s.hi[a] > s.lo[a])) n.at("hi").fail("must exceed lo along every axis");
        // rows: [y][x] in 2D, [z][y][x] in 3D; the first row is the lowest coordinate.
        Node rows = n.at("rows");
        std::vector<std::vector<std::uint8_t>> lines;  // each line along x
        std::function<void(const Node&, int)> walk = [&](const Node& r, int depth) {
            if (depth == dim - 1) {
                std::vector<std::uint8_t> line;
                for (const auto& c : r.items()) {
                    long v = c.as_long();
                    if (v != 0 && v != 1) c.fail("mask entries must be 0 or 1");
                    line.push_back(static_cast<std::uint8_t>(v));
                }
                if (line.empty()) r.fail("empty mask row");
                lines.push_back(std::move(line));
                return;
            }
            auto sub = r.items();
            if (sub.empty()) r.fail("empty mask block");
            for (const auto& x : sub) walk(x, depth + 1);
        };
        walk(rows, 0);
        std::size_t nx = lines.front().size();
        for (const auto& l : lines)
            if (l.size() != nx) rows.fail("mask rows must have equal length");
        s.dims.assign(3, 1);
        s.dims[0] = static_cast<int>(nx);
        if (dim == 2) {
            s.dims[1] = static_cast<int>(lines.size());
        } else {
            auto layers = rows.items();
            s.dims[2] = static_cast<int>(layers.size());
            if (lines.size() % layers.size() != 0) rows.fail("mask layers must have equal row counts");
            s.dims[1] = static_cast<int>(lines.size() / layers.size());
            for (const auto& layer : layers)
                if (layer.items().size() != static_cast<std::size_t>(s.dims[1]))
                    rows.fail("mask layers must have equal row counts");
        }
        for (const auto& l : lines) s.cells.insert(s.cells.end(), l.begin(), l.end());
    } else {
        n.at("type").fail("unknown shape '" + s.type + "' (box, ball, box-minus-segment, punctured-ball, mask)");
    }
    return s;
}

DataSpec parse_data(const Node& n, int dim) {
    DataSpec s;
    s.type = n.at("type").as_string();
    s.label = n.str_or("label", s.type);
    if (s.type == "constant") {
        n.allow({"type", "label", "value"});
        s.value = n.num("value");
        if (s.value < 0.0) n.at("value").fail("must be nonnegative");
    } else if (s.type == "linear" || s.type == "affine-power") {
        n.allow({"type", "label", "a", "b"});
        s.a = n.num("a");
        s.b = n.at("b").as_point(dim);
    } else if (s.type == "barenblatt") {
        n.allow({"type", "label", "C", "t_shift"});
        s.C = positive_key(n, "C");
        s.t_shift = n.num_or("t_shift", 0.0);
    } else if (s.type == "spot") {
        n.allow({"type", "label", "center", "radius", "height", "t_begin", "ramp"});
        s.center = n.at("center").as_point(dim);
        s.radius = positive_key(n, "radius");
        s.height = n.num_or("height", 1.0);
        s.t_begin = n.num_or("t_begin", 0.0);
        s.ramp = n.num_or("ramp", 0.0);
        if (s.height < 0.0) n.at("height").fail("must be nonnegative");
        if (s.ramp < 0.0) n.at("ramp").fail("must be nonnegative");
    } else if (s.type == "bump") {
        n.allow({"type", "label", "center", "radius", "height"});
        s.center = n.at("center").as_point(dim);
        s.radius = positive_key(n, "radius");
        s.height = n.num_or("height", 1.0);
        if (s.height < 0.0) n.at("height").fail("must be nonnegative");
    } else if (s.type == "smooth-random") {
        n.allow({"type", "label", "stream", "modes", "base", "amplitude", "max_wavenumber"});
        s.stream = n.str_or("stream", "smooth");
        s.modes = static_cast<int>(n.integer_or("modes", 4));
        s.base = n.num_or("base", 1.0);
        s.amplitude = n.num_or("amplitude", 0.5);
        s.max_wavenumber = n.num_or("max_wavenumber", 6.0);
        if (s.modes < 1) n.at("modes").fail("must be at least 1");
        if (s.amplitude < 0.0 || s.base < s.amplitude) n.fail("needs base >= amplitude >= 0");
    } else if (s.type == "sum") {
        n.allow({"type", "label", "terms"});
        for (const auto& t : n.at("terms").items()) s.terms.push_back(parse_data(t, dim));
        if (s.terms.empty()) n.at("terms").fail("needs at least one term");
    } else if (s.type == "scaled") {
        n.allow({"type", "label", "factor", "data"});
        s.factor = n.num("factor");
        if (s.factor < 0.0) n.at("factor").fail("must be nonnegative");
        s.terms.push_back(parse_data(n.at("data"), dim));
    } else {
        n.at("type").fail("unknown data profile '" + s.type +
                          "' (constant, linear, affine-power, barenblatt, spot, bump, smooth-random, sum, scaled)");
    }
    return s;
}

DomainSpec parse_domain(const Node& n) {
    n.allow({"n", "grid", "time", "cylinders"});
    DomainSpec d;
    d.n = static_cast<int>(n.integer_or("n", 2));
    if (d.n < 1 || d.n > 3) n.at("n").fail("must be 1, 2 or 3");
    if (auto g = n.get("grid")) {
        g->allow({"lo", "hi"});
        d.has_box = true;
        d.lo = g->at("lo").as_point(d.n);
        d.hi = g->at("hi").as_point(d.n);
        for (int a = 0; a < d.n; ++a)
            if (!(d.hi[a] > d.lo[a])) g->at("hi").fail("must exceed lo along every axis");
    }
    if (auto t = n.get("time")) {
        t->allow({"t0", "t_end", "steps", "steps_scale"});
        d.has_time = true;
        d.time.t0 = t->num_or("t0", 0.0);
        d.time.t_end = t->num("t_end");
        if (!(d.time.t_end > d.time.t0)) t->at("t_end").fail("must exceed t0");
        long steps = t->at("steps").as_long();
        if (steps < 1) t->at("steps").fail("must be at least 1");
        d.time.steps = static_cast<int>(steps);
        d.time.steps_scale = t->num_or("steps_scale", 1.0);
    }
    if (auto cs = n.get("cylinders")) {
        for (const auto& c : cs->items()) {
            c.allow({"base", "t1", "t2"});
            CylinderSpec cy;
            cy.base = parse_shape(c.at("base"), d.n);
            cy.t1 = c.num("t1");
            cy.t2 = c.num("t2");
            if (!(cy.t2 > cy.t1)) c.at("t2").fail("must exceed t1");
            if (d.has_time && (cy.t1 < d.time.t0 - 1e-12 || cy.t2 > d.time.t_end + 1e-12))
                c.fail("cylinder times must lie within [time.t0, time.t_end]");
            d.cylinders.push_back(std::move(cy));
        }
    }
    return d;
}

SolverConfig parse_solver(const Node& n) {
    n.allow({"scheme", "m", "coefficient", "dt", "newton_tol", "newton_max", "linear_tol", "linear_max",
             "degenerate_floor"});
    SolverConfig c;
    std::string scheme = n.str_or("scheme", "implicit");
    if (scheme == "implicit") c.scheme = Scheme::Implicit;
    else if (scheme == "explicit") c.scheme = Scheme::Explicit;
    else n.at("scheme").fail("expected 'implicit' or 'explicit'");
    c.m = n.num_or("m", c.m);
    c.coefficient = n.num_or("coefficient", c.coefficient);
    c.dt = n.num_or("dt", c.dt);
    c.newton_tol = n.num_or("newton_tol", c.newton_tol);
    c.newton_max = static_cast<int>(n.integer_or("newton_max", c.newton_max));
    c.linear_tol = n.num_or("linear_tol", c.linear_tol);
    c.linear_max = static_cast<int>(n.integer_or("linear_max", c.linear_max));
    c.degenerate_floor = n.num_or("degenerate_floor", c.degenerate_floor);
    try {
        validate(c);
    } catch (const std::exception& e) {
        n.fail(e.what());
    }
    return c;
}

ComparisonMode parse_mode(const Node& parent) {
    std::string m = parent.str_or("mode", "parabolic");
    if (m == "parabolic") return ComparisonMode::Parabolic;
    if (m == "elliptic") return ComparisonMode::Elliptic;
    parent.at("mode").fail("expected 'parabolic' or 'elliptic'");
}

std::vector<PointCase> parse_points(const Node& n, int dim, bool allow_truncation) {
    std::vector<PointCase> out;
    for (const auto& p : n.items()) {
        if (allow_truncation) p.allow({"x", "t", "truncation", "expect"});
        else p.allow({"x", "t", "expect"});
        PointCase pc;
        pc.x = p.at("x").as_point(dim);
        pc.t = p.num("t");
        if (allow_truncation && p.has("truncation")) pc.truncation = p.num("truncation");
        pc.expect = p.str_or("expect", "");
        out.push_back(pc);
    }
    if (out.empty()) n.fail("needs at least one point");
    return out;
}

FamilySpec parse_family(const std::optional<Node>& n, int dim) {
    FamilySpec f;
    if (!n) return f;
    if (n->raw().is_string()) {
        if (n->as_string() != "default") n->fail("expected 'default' or an array of data profiles");
        return f;
    }
    f.use_default = false;
    for (const auto& m : n->items()) f.members.push_back(parse_data(m, dim));
    if (f.members.empty()) n->fail("needs at least one member");
    return f;
}

ProbeOptions parse_probe_options(const Node& n) {
    ProbeOptions o;
    if (n.has("radii")) {
        o.radii = n.at("radii").as_doubles();
        for (std::size_t i = 0; i < o.radii.size(); ++i)
            if (!(o.radii[i] > 0.0) || (i && !(o.radii[i] < o.radii[i - 1])))
                n.at("radii").fail("radii must be positive and strictly decreasing");
        if (o.radii.size() < 3) n.at("radii").fail("needs at least three radii");
    }
    if (n.has("eps_fraction")) o.eps_fraction = positive_key(n, "eps_fraction");
    o.with_coarse = n.flag_or("with_coarse", o.with_coarse);
    if (n.has("min_radius_cells")) o.min_radius_cells = positive_key(n, "min_radius_cells");
    return o;
}

std::vector<int> parse_resolutions(const Node& n) {
    std::vector<int> r;
    for (const auto& x : n.items()) {
        long v = x.as_long();
        if (v < 2) x.fail("resolution must be at least 2");
        r.push_back(static_cast<int>(v));
    }
    return r;
}

OperationSpec parse_operation(const Node& n, const std::string& type, int dim) {
    if (type == "solve") {
        n.allow({"type", "output", "compare", "trials", "scaling"});
        SolveOp op;
        op.output = n.str_or("output", "all");
        if (op.output != "all" && op.output != "final" && op.output != "none")
            n.at("output").fail("expected 'all', 'final' or 'none'");
        if (auto c = n.get("compare")) {
            c->allow({"data", "mode"});
            op.compare = SolveOp::Compare{parse_data(c->at("data"), dim), parse_mode(*c)};
        }
        if (auto t = n.get("trials")) {
            t->allow({"count", "mode", "base", "amplitude", "offset_base", "offset_amplitude", "modes",
                      "max_wavenumber"});
            SolveOp::Trials tr;
            tr.count = static_cast<int>(t->integer_or("count", tr.count));
            if (tr.count < 1) t->at("count").fail("must be at least 1");
            tr.mode = parse_mode(*t);
            tr.base = t->num_or("base", tr.base);
            tr.amplitude = t->num_or("amplitude", tr.amplitude);
            tr.offset_base = t->num_or("offset_base", tr.offset_base);
            tr.offset_amplitude = t->num_or("offset_amplitude", tr.offset_amplitude);
            tr.modes = static_cast<int>(t->integer_or("modes", tr.modes));
            tr.max_wavenumber = t->num_or("max_wavenumber", tr.max_wavenumber);
            if (tr.amplitude < 0.0 || tr.base < tr.amplitude) t->fail("needs base >= amplitude >= 0");
            if (tr.offset_amplitude < 0.0 || !(tr.offset_base > tr.offset_amplitude))
                t->fail("needs offset_base > offset_amplitude >= 0 so that the pair is strictly ordered");
            op.trials = tr;
        }
        if (auto s = n.get("scaling")) {
            s->allow({"a", "tol"});
            SolveOp::Scaling sc;
            sc.a = s->at("a").as_doubles();
            for (double a : sc.a)
                if (!(a > 0.0)) s->at("a").fail("scaling factors must be positive");
            if (sc.a.empty()) s->at("a").fail("needs at least one factor");
            sc.tol = s->num_or("tol", 0.0);
            op.scaling = sc;
        }
        return op;
    }
    if (type == "verify-barrier") {
        n.allow({"type", "barriers", "min_j", "sampling"});
        BarrierOp op;
        if (auto bs = n.get("barriers")) {
            for (const auto& b : bs->items()) {
                b.allow({"label", "kind", "c", "j", "m", "n", "diam", "alpha", "gamma", "x0", "t0", "torsion",
                         "expect"});
                BarrierCase bc;
                try {
                    bc.kind = barrier_kind_from_string(b.at("kind").as_string());
                } catch (const ScenarioError&) {
                    throw;
                } catch (const std::exception& e) {
                    b.at("kind").fail(e.what());
                }
                bc.label = b.str_or("label", to_string(bc.kind));
                bc.c = b.at("c").raw().is_array() ? b.at("c").as_doubles() : std::vector<double>{b.num("c")};
                for (double c : bc.c)
                    if (!(c > 0.0)) b.at("c").fail("c must be positive");
                if (b.has("j")) {
                    Node jn = b.at("j");
                    if (jn.raw().is_string()) {
                        if (jn.as_string() != "min_valid") jn.fail("expected an integer list or 'min_valid'");
                    } else if (jn.raw().is_array()) {
                        for (const auto& x : jn.items()) {
                            long v = x.as_long();
                            if (v < 1) x.fail("j must be at least 1");
                            bc.j.push_back(v);
                        }
                    } else {
                        long v = jn.as_long();
                        if (v < 1) jn.fail("j must be at least 1");
                        bc.j.push_back(v);
                    }
                }
                bc.m = b.num_or("m", 2.0);
                bc.n = static_cast<int>(b.integer_or("n", dim));
                bc.diam = b.num_or("diam", 0.0);
                bc.alpha = b.num_or("alpha", 0.0);
                bc.gamma = b.num_or("gamma", 0.0);
                bc.x0 = b.has("x0") ? b.at("x0").as_point(dim) : Point{0.0, 0.0, 0.0};
                bc.t0 = b.num_or("t0", 0.0);
                bc.torsion = b.flag_or("torsion", false);
                bc.expect = b.str_or("expect", "pass");
                if (bc.expect != "pass" && bc.expect != "violation" && bc.expect != "violation-if-insufficient")
                    b.at("expect").fail("expected 'pass', 'violation' or 'violation-if-insufficient'");
                op.cases.push_back(std::move(bc));
            }
        }
        if (auto ms = n.get("min_j")) {
            for (const auto& b : ms->items()) {
                b.allow({"kind", "c", "m", "n", "diam", "expect"});
                MinJCase mc;
                try {
                    mc.kind = barrier_kind_from_string(b.at("kind").as_string());
                } catch (const ScenarioError&) {
                    throw;
                } catch (const std::exception& e) {
                    b.at("kind").fail(e.what());
                }
                mc.c = positive_key(b, "c");
                mc.m = b.num_or("m", 2.0);
                mc.n = static_cast<int>(b.integer_or("n", dim));
                mc.diam = positive_key(b, "diam");
                if (b.has("expect")) mc.expect = b.at("expect").as_long();
                op.min_j.push_back(mc);
            }
        }
        if (op.cases.empty() && op.min_j.empty()) n.fail("needs 'barriers' or 'min_j'");
        if (auto s = n.get("sampling")) {
            s->allow({"include_nodes", "jitter_per_node", "rel_tol", "exclude_cells_near_origin"});
            op.policy.include_nodes = s->flag_or("include_nodes", true);
            op.policy.jitter_per_node = static_cast<int>(s->integer_or("jitter_per_node", 10));
            op.policy.rel_tol = s->num_or("rel_tol", 1e-10);
            op.policy.exclude_cells_near_origin = s->num_or("exclude_cells_near_origin", 1.0);
            if (op.policy.jitter_per_node < 0) s->at("jitter_per_node").fail("must be nonnegative");
        }
        return op;
    }
    if (type == "perron") {
        n.allow({"type", "eps", "with_coarse", "gap_factor"});
        PerronOp op;
        if (n.has("eps")) {
            op.eps = n.at("eps").as_doubles();
            for (double e : op.eps)
                if (!(e > 0.0)) n.at("eps").fail("epsilon values must be positive");
            if (op.eps.empty()) n.at("eps").fail("needs at least one value");
        }
        op.with_coarse = n.flag_or("with_coarse", true);
        op.gap_factor = n.num_or("gap_factor", 3.0);
        return op;
    }
    if (type == "probe") {
        n.allow({"type", "points", "family", "radii", "eps_fraction", "with_coarse", "min_radius_cells",
                 "check_gaps_decrease", "intercept_factor"});
        ProbeOp op;
        op.points = parse_points(n.at("points"), dim, false);
        op.family = parse_family(n.get("family"), dim);
        op.options = parse_probe_options(n);
        op.check_gaps_decrease = n.flag_or("check_gaps_decrease", false);
        if (n.has("intercept_factor")) op.intercept_factor = positive_key(n, "intercept_factor");
        return op;
    }
    if (type == "dichotomy") {
        n.allow({"type", "points", "data", "radii", "eps_fraction", "with_coarse", "min_radius_cells"});
        DichotomyOp op;
        op.points = parse_points(n.at("points"), dim, false);
        for (const auto& p : op.points)
            if (!p.expect.empty() && p.expect != "attains" && p.expect != "drops-to-zero" &&
                p.expect != "inconclusive")
                n.at("points").fail("expect must be 'attains', 'drops-to-zero' or 'inconclusive'");
        if (n.has("data")) op.data = parse_data(n.at("data"), dim);
        op.options = parse_probe_options(n);
        return op;
    }
    if (type == "future-probe") {
        n.allow({"type", "points", "family", "radii", "eps_fraction", "with_coarse", "min_radius_cells"});
        FutureOp op;
        op.points = parse_points(n.at("points"), dim, true);
        for (const auto& p : op.points)
            if (p.truncation && *p.truncation < p.t) n.at("points").fail("truncation must not lie below t");
        op.family = parse_family(n.get("family"), dim);
        op.options = parse_probe_options(n);
        return op;
    }
    if (type == "capacity") {
        n.allow({"type", "ambient", "sets", "nested", "ambient_ladder", "tol", "max_iter"});
        CapacityOp op;
        op.ambient = parse_shape(n.at("ambient"), dim);
        for (const auto& s : n.at("sets").items()) op.sets.push_back(parse_shape(s, dim));
        if (op.sets.empty()) n.at("sets").fail("needs at least one set");
        op.nested = n.flag_or("nested", false);
        if (auto l = n.get("ambient_ladder"))
            for (const auto& s : l->items()) op.ambient_ladder.push_back(parse_shape(s, dim));
        if (n.has("tol")) op.options.tol = positive_key(n, "tol");
        op.options.max_iter = static_cast<int>(n.integer_or("max_iter", op.options.max_iter));
        return op;
    }
    if (type == "wiener") {
        n.allow({"type", "cases", "k_min", "k_max", "box_factor", "slope_tol", "sum_tol"});
        WienerOp op;
        for (const auto& c : n.at("cases").items()) {
            c.allow({"label", "domain", "x0", "expect"});
            WienerCase wc;
            wc.label = c.str_or("label", "case" + std::to_string(op.cases.size()));
            wc.domain = parse_shape(c.at("domain"), dim);
            wc.x0 = c.at("x0").as_point(dim);
            wc.expect = c.str_or("expect", "");
            if (!wc.expect.empty() && wc.expect != "thick" && wc.expect != "thin" && wc.expect != "inconclusive")
                c.at("expect").fail("expected 'thick', 'thin' or 'inconclusive'");
            op.cases.push_back(std::move(wc));
        }
        if (op.cases.empty()) n.at("cases").fail("needs at least one case");
        op.options.k_min = static_cast<int>(n.integer_or("k_min", 0));
        op.options.k_max = static_cast<int>(n.integer_or("k_max", -1));
        if (n.has("box_factor")) op.options.box_factor = positive_key(n, "box_factor");
        if (n.has("slope_tol")) op.thickness.slope_tol = positive_key(n, "slope_tol");
        op.thickness.sum_tol = n.num_or("sum_tol", 0.0);
        return op;
    }
    if (type == "torsion") {
        n.allow({"type", "domain", "x0", "radii", "expect_vanishing"});
        TorsionOp op;
        op.domain = parse_shape(n.at("domain"), dim);
        op.x0 = n.at("x0").as_point(dim);
        op.radii = n.has("radii") ? n.at("radii").as_doubles() : std::vector<double>{0.2, 0.1, 0.05};
        for (std::size_t i = 0; i < op.radii.size(); ++i)
            if (!(op.radii[i] > 0.0) || (i && !(op.radii[i] < op.radii[i - 1])))
                n.at("radii").fail("radii must be positive and strictly decreasing");
        op.expect_vanishing = n.flag_or("expect_vanishing", false);
        return op;
    }
    if (type == "degiorgi") {
        n.allow({"type", "x0", "t0", "rho", "sigma", "k_fraction", "M_fractions", "resolutions", "stability_tol",
                 "j_max"});
        DeGiorgiOp op;
        op.x0 = n.at("x0").as_point(dim);
        op.t0 = n.num("t0");
        op.rho = positive_key(n, "rho");
        op.sigma = n.num_or("sigma", 0.5);
        if (!(op.sigma > 0.0 && op.sigma < 1.0)) n.at("sigma").fail("must lie in (0, 1)");
        if (n.has("k_fraction")) op.k_fraction = positive_key(n, "k_fraction");
        if (n.has("M_fractions")) {
            op.M_fractions = n.at("M_fractions").as_doubles();
            for (double f : op.M_fractions)
                if (f < 0.0 || f >= 1.0) n.at("M_fractions").fail("fractions of L must lie in [0, 1)");
        }
        if (n.has("resolutions")) op.resolutions = parse_resolutions(n.at("resolutions"));
        op.stability_tol = n.num_or("stability_tol", 0.2);
        op.j_max = static_cast<int>(n.integer_or("j_max", 20));
        if (op.j_max < 1) n.at("j_max").fail("must be at least 1");
        return op;
    }
    if (type == "barenblatt") {
        n.allow({"type", "C", "resolutions", "min_order", "max_seconds"});
        BarenblattOp op;
        op.C = n.has("C") ? positive_key(n, "C") : op.C;
        op.resolutions = parse_resolutions(n.at("resolutions"));
        if (op.resolutions.size() < 2) n.at("resolutions").fail("needs at least two resolutions");
        op.min_order = n.num_or("min_order", op.min_order);
        op.max_seconds = n.num_or("max_seconds", op.max_seconds);
        return op;
    }
    std::string all;
    for (const auto& s : operation_names()) all += (all.empty() ? "" : ", ") + s;
    n.at("type").fail("unknown operation '" + type + "' (" + all + ")");
}

bool needs_time(const std::string& op) { return op != "capacity" && op != "wiener" && op != "torsion"; }

}  // namespace

Scenario parse_scenario(const json& j) {
    Node root(j, "");
    root.allow({"name", "description", "seed", "resolution", "output", "domain", "data", "solver", "operation"});
    Scenario s;
    s.raw = j;
    s.name = root.at("name").as_string();
    if (s.name.empty() || s.name.find('/') != std::string::npos) root.at("name").fail("must be a nonempty plain name");
    s.description = root.str_or("description", "");
    if (root.has("seed")) {
        long v = root.at("seed").as_long();
        if (v < 0) root.at("seed").fail("must be nonnegative");
        s.seed = static_cast<std::uint64_t>(v);
    }
    s.resolution = static_cast<int>(root.integer_or("resolution", 64));
    if (s.resolution < 2) root.at("resolution").fail("must be at least 2");
    s.output = root.str_or("output", "");
    Node op = root.at("operation");
    op.require_object();
    s.operation = op.at("type").as_string();
    s.domain = root.has("domain") ? parse_domain(root.at("domain")) : DomainSpec{};
    if (needs_time(s.operation)) {
        root.at("domain");
        if (!s.domain.has_time) throw ScenarioError("domain.time", "missing required field");
        if (s.domain.cylinders.empty()) throw ScenarioError("domain.cylinders", "missing required field");
    }
    if (root.has("data")) s.data = parse_data(root.at("data"), s.domain.n);
    s.solver = root.has("solver") ? parse_solver(root.at("solver")) : SolverConfig{};
    s.op = parse_operation(op, s.operation, s.domain.n);
    bool needs_data = s.operation == "solve" || s.operation == "perron" || s.operation == "degiorgi" ||
                      (s.operation == "dichotomy" && !std::get<DichotomyOp>(s.op).data);
    if (needs_data && !s.data) root.at("data");
    return s;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError("<root>", origin + ": invalid JSON: " + e.what());
    }
    return parse_scenario(j);
}

std::string bundled_dir() {
    if (const char* env = std::getenv("PMELAB_SCENARIOS")) return env;
    return PMELAB_SCENARIO_DIR;
}

Scenario load_scenario(const std::string& path_or_name) {
    std::filesystem::path p(path_or_name);
    if (!std::filesystem::exists(p)) {
        std::filesystem::path b = std::filesystem::path(bundled_dir()) / (path_or_name + ".json");
        if (!std::filesystem::exists(b))
            throw ScenarioError("<root>", "no scenario file or bundled scenario named '" + path_or_name + "'");
        p = b;
    }
    std::ifstream is(p);
    if (!is) throw ScenarioError("<root>", "cannot read " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario_text(ss.str(), p.string());
}

std::vector<std::pair<std::string, std::string>> list_bundled() {
    std::vector<std::pair<std::string, std::string>> out;
    std::filesystem::path dir(bundled_dir());
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        Scenario s = load_scenario(e.path().string());
        out.emplace_back(s.name, s.description);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- builders

namespace {

void shape_bbox(const ShapeSpec& s, int n, Point& lo, Point& hi) {
    for (int a = 0; a < n; ++a) {
        double l, h;
        if (s.type == "ball" || s.type == "punctured-ball") {
            l = s.center[a] - s.radius;
            h = s.center[a] + s.radius;
        } else {
            l = s.lo[a];
            h = s.hi[a];
        }
        lo[a] = std::min(lo[a], l);
        hi[a] = std::max(hi[a], h);
    }
}

}  // namespace

Grid build_grid(const DomainSpec& d, double h, const std::vector<const ShapeSpec*>& shapes) {
    Point lo{0, 0, 0}, hi{0, 0, 0};
    if (d.has_box) {
        lo = d.lo;
        hi = d.hi;
    } else {
        if (shapes.empty()) throw ScenarioError("domain.grid", "needed when no shape fixes the extent");
        const double inf = std::numeric_limits<double>::infinity();
        for (int a = 0; a < d.n; ++a) {
            lo[a] = inf;
            hi[a] = -inf;
        }
        for (const auto* s : shapes) shape_bbox(*s, d.n, lo, hi);
    }
    return Grid::covering(d.n, h, lo, hi);
}

SpatialDomain build_shape(const ShapeSpec& s, const Grid& g) {
    if (s.type == "box") return make_box(g, s.lo, s.hi);
    if (s.type == "ball") return make_ball(g, s.center, s.radius);
    if (s.type == "box-minus-segment") return make_box_minus_segment(g, s.lo, s.hi, s.a, s.b);
    if (s.type == "punctured-ball") return make_punctured_ball(g, s.center, s.radius, s.puncture);
    if (s.type == "mask") {
        const int n = g.n();
        return SpatialDomain::from_predicate(g, [&s, n](const Point& x) {
            std::size_t idx = 0, stride = 1;
            for (int a = 0; a < n; ++a) {
                double u = (x[a] - s.lo[a]) / (s.hi[a] - s.lo[a]);
                const double slack = 1e-9;
                if (u < -slack || u > 1.0 + slack) return false;
                int i = static_cast<int>(std::floor(std::clamp(u, 0.0, 1.0) * s.dims[a]));
                i = std::clamp(i, 0, s.dims[a] - 1);
                idx += static_cast<std::size_t>(i) * stride;
                stride *= static_cast<std::size_t>(s.dims[a]);
            }
            return s.cells[idx] != 0;
        });
    }
    throw ScenarioError("shape", "unknown shape '" + s.type + "'");
}

std::shared_ptr<const SpaceTimeDomain> build_domain(const DomainSpec& d, int resolution, int base_resolution) {
    if (!d.has_time) throw ScenarioError("domain.time", "missing required field");
    if (d.cylinders.empty()) throw ScenarioError("domain.cylinders", "missing required field");
    const double h = 1.0 / resolution;
    std::vector<const ShapeSpec*> shapes;
    for (const auto& c : d.cylinders) shapes.push_back(&c.base);
    Grid g = build_grid(d, h, shapes);
    double ratio = static_cast<double>(resolution) / base_resolution;
    long steps = std::lround(d.time.steps * std::pow(ratio, d.time.steps_scale));
    if (steps < 1) steps = 1;
    TimeGrid tg{d.time.t0, (d.time.t_end - d.time.t0) / static_cast<double>(steps), static_cast<int>(steps)};
    std::vector<Cylinder> cyl;
    for (std::size_t i = 0; i < d.cylinders.size(); ++i) {
        const auto& c = d.cylinders[i];
        std::string where = "domain.cylinders[" + std::to_string(i) + "]";
        try {
            tg.level_of(c.t1);
            tg.level_of(c.t2);
        } catch (const std::exception&) {
            throw ScenarioError(where, "cylinder times must fall on the time grid (steps=" + std::to_string(steps) + ")");
        }
        try {
            cyl.emplace_back(build_shape(c.base, g), c.t1, c.t2);
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            throw ScenarioError(where + ".base", e.what());
        }
    }
    return std::make_shared<const SpaceTimeDomain>(g, tg, std::move(cyl));
}

BoundaryData build_data(const DataSpec& s, double m, int n, std::uint64_t seed, double t0) {
    BoundaryData out;
    if (s.type == "constant") out = constant_data(s.value);
    else if (s.type == "linear") out = linear_data(s.a, s.b, n, 10.0);
    else if (s.type == "affine-power") out = affine_power_data(s.a, s.b, m, n, 10.0);
    else if (s.type == "barenblatt") out = barenblatt_data(m, n, s.C, t0, s.t_shift);
    else if (s.type == "spot") out = spot_data(s.center, n, s.radius, s.height, s.t_begin, s.ramp);
    else if (s.type == "bump") out = bump_data(s.center, n, s.radius, s.height);
    else if (s.type == "smooth-random") {
        SmoothRandomSpec sp;
        sp.seed = seed;
        sp.stream = s.stream;
        sp.modes = s.modes;
        sp.base = s.base;
        sp.amplitude = s.amplitude;
        sp.max_wavenumber = s.max_wavenumber;
        sp.n = n;
        out = smooth_random_data(sp);
    } else if (s.type == "sum") {
        out = build_data(s.terms.front(), m, n, seed, t0);
        for (std::size_t i = 1; i < s.terms.size(); ++i) out = sum_data(out, build_data(s.terms[i], m, n, seed, t0));
    } else if (s.type == "scaled") {
        out = scaled_data(build_data(s.terms.front(), m, n, seed, t0), s.factor);
    } else {
        throw ScenarioError("data.type", "unknown data profile '" + s.type + "'");
    }
    out.label = s.label;
    return out;
}

// ---------------------------------------------------------------- running

bool RunReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json RunReport::to_json() const {
    json cs = json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"name", name},
            {"operation", operation},
            {"seed", seed},
            {"resolution", resolution},
            {"passed", passed()},
            {"wall_time_s", wall_time},
            {"checks", cs},
            {"artifacts", artifacts},
            {"results", results},
            {"scenario", scenario}};
}

namespace {

struct Ctx {
    const Scenario& s;
    const RunOptions& opt;
    std::uint64_t seed;
    int resolution;
    RunReport& rep;

    int threads() const { return std::max(1, opt.threads); }

    void check(std::string name, bool ok, std::string detail) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
    }
    void csv(const std::string& file, const CsvTable& t) {
        if (opt.out_dir.empty()) return;
        std::string path = (std::filesystem::path(opt.out_dir) / file).string();
        write_csv(path, t);
        rep.artifacts.push_back(path);
    }
    std::shared_ptr<const SpaceTimeDomain> domain(int res) const {
        return build_domain(s.domain, res, s.resolution);
    }
    Grid grid_for(const std::vector<const ShapeSpec*>& shapes) const {
        return build_grid(s.domain, 1.0 / resolution, shapes);
    }
    BoundaryData data(const DataSpec& d) const {
        return build_data(d, s.solver.m, s.domain.n, seed, s.domain.time.t0);
    }
    BoundaryData main_data() const { return data(*s.data); }
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results stay indexed.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string pt(const Point& x, int n) {
    std::string s = "(";
    for (int a = 0; a < n; ++a) s += (a ? "," : "") + fmt_num(x[a]);
    return s + ")";
}

SpatialDomain union_of_bases(const SpaceTimeDomain& d) {
    SpatialDomain u = d.cylinders().front().base();
    for (std::size_t i = 1; i < d.cylinders().size(); ++i) u = u.united(d.cylinders()[i].base());
    return u;
}

std::vector<BoundaryData> family_for(Ctx& c, const FamilySpec& f, const SpaceTimePoint& xi, int n, double diam) {
    if (f.use_default) return default_family(xi, n, diam);
    std::vector<BoundaryData> out;
    for (const auto& m : f.members) out.push_back(c.data(m));
    return out;
}

double max_abs_residual(const Field& v, double m, double coefficient, double* worst_rel) {
    const auto& d = v.domain();
    double worst = 0.0, rel = 0.0;
    for (int k = 1; k < d.time().levels(); ++k)
        for (std::size_t cell = 0; cell < d.grid().size(); ++cell) {
            if (d.kind(cell, k) != SampleKind::Interior) continue;
            double r = std::abs(discrete_residual(v, m, coefficient, cell, k));
            double sc = residual_scale(v, m, coefficient, cell, k);
            worst = std::max(worst, r);
            if (sc > 0.0) rel = std::max(rel, r / sc);
        }
    if (worst_rel) *worst_rel = rel;
    return worst;
}

void run_solve(Ctx& c, const SolveOp& op) {
    auto d = c.domain(c.resolution);
    const int n = d->grid().n();
    SolverConfig cfg = c.s.solver;
    json res;
    SolveResult main = solve_union(d, c.main_data(), cfg);
    res["stats"] = to_json(main.stats);
    res["max"] = main.field.max();
    c.check("newton-converged", main.stats.max_final_residual <= cfg.newton_tol,
            "max final residual " + fmt_num(main.stats.max_final_residual));
    if (op.output == "all") c.csv("field.csv", samples_csv(main.field));
    if (op.output != "none") c.csv("field_final.csv", field_csv(main.field, d->time().steps));

    if (op.compare) {
        SolveResult other = solve_union(d, c.data(op.compare->data), cfg);
        ComparisonReport cr = comparison_check(other.field, main.field, op.compare->mode);
        res["comparison"] = to_json(cr);
        c.check("comparison", cr.ordered, std::to_string(cr.violations.size()) + " interior violations");
    }

    if (op.trials) {
        const auto& tr = *op.trials;
        std::vector<ComparisonReport> reps(static_cast<std::size_t>(tr.count));
        parallel_for(tr.count, c.threads(), [&](int i) {
            SmoothRandomSpec fs;
            fs.seed = c.seed;
            fs.stream = "trial-f-" + std::to_string(i);
            fs.modes = tr.modes;
            fs.base = tr.base;
            fs.amplitude = tr.amplitude;
            fs.max_wavenumber = tr.max_wavenumber;
            fs.n = n;
            SmoothRandomSpec gs = fs;
            gs.stream = "trial-g-" + std::to_string(i);
            gs.base = tr.offset_base;
            gs.amplitude = tr.offset_amplitude;
            BoundaryData f = smooth_random_data(fs);
            BoundaryData g = sum_data(f, smooth_random_data(gs));
            Field uf = solve_union(d, f, cfg).field;
            Field ug = solve_union(d, g, cfg).field;
            reps[static_cast<std::size_t>(i)] = comparison_check(ug, uf, tr.mode);
        });
        CsvTable t;
        t.header = {"trial", "ordered", "violations", "min_margin", "samples"};
        int ordered = 0;
        std::size_t violations = 0;
        for (int i = 0; i < tr.count; ++i) {
            const auto& r = reps[static_cast<std::size_t>(i)];
            ordered += r.ordered ? 1 : 0;
            violations += r.violations.size();
            t.add({fmt_num(i), r.ordered ? "1" : "0", fmt_num(r.violations.size()), fmt_num(r.min_margin),
                   fmt_num(r.samples_checked)});
        }
        c.csv("trials.csv", t);
        res["trials"] = {{"count", tr.count}, {"ordered", ordered}, {"interior_violations", violations}};
        c.check("comparison-trials", ordered == tr.count && violations == 0,
                std::to_string(ordered) + "/" + std::to_string(tr.count) + " ordered, " +
                    std::to_string(violations) + " interior violations");
    }

    if (op.scaling) {
        const auto& sc = *op.scaling;
        double tol = sc.tol > 0.0 ? sc.tol : cfg.linear_tol;
        CsvTable t;
        t.header = {"a", "factor", "max_abs_residual", "max_rel_residual", "sup_v"};
        json rows = json::array();
        bool ok = true;
        for (double a : sc.a) {
            SolverConfig ca = cfg;
            ca.coefficient = a;
            Field u = solve_union(d, c.main_data(), ca).field;
            Field v = scale_transform(u, a, cfg.m);
            double rel = 0.0;
            double r = max_abs_residual(v, cfg.m, 1.0, &rel);
            bool pass = r <= tol * std::max(1.0, v.max());
            ok = ok && pass;
            double factor = std::pow(a, 1.0 / (cfg.m - 1.0));
            t.add({fmt_num(a), fmt_num(factor), fmt_num(r), fmt_num(rel), fmt_num(v.max())});
            rows.push_back({{"a", a}, {"factor", factor}, {"max_abs_residual", r}, {"max_rel_residual", rel},
                            {"passed", pass}});
        }
        c.csv("scaling.csv", t);
        res["scaling"] = {{"tolerance", tol}, {"rows", rows}};
        c.check("scaling-zero-residual", ok, "unit-scheme residual of the transformed fields <= " + fmt_num(tol));
    }
    c.rep.results = res;
}

void run_barriers(Ctx& c, const BarrierOp& op) {
    json res;
    CsvTable t;
    t.header = {"label", "kind", "c", "j", "claimed_sign", "min_residual", "max_residual", "samples",
                "violations", "passed", "expect"};
    CsvTable vt;
    vt.header = {"label", "c", "j", "x"};
    if (c.s.domain.n >= 2) vt.header.push_back("y");
    if (c.s.domain.n >= 3) vt.header.push_back("z");
    vt.header.push_back("t");
    vt.header.push_back("residual");
    json cases = json::array();
    std::shared_ptr<const SpaceTimeDomain> d;
    if (!op.cases.empty()) d = c.domain(c.resolution);
    for (const auto& bc : op.cases) {
        double diam = bc.diam > 0.0 ? bc.diam : diameter(union_of_bases(*d));
        std::shared_ptr<const StaticField> torsion;
        if (bc.torsion || bc.kind == BarrierKind::TorsionUpper12 || bc.kind == BarrierKind::TorsionLower12) {
            TorsionResult tr = torsion_profile(d->cylinders().front().base(), bc.x0);
            torsion = std::make_shared<const StaticField>(tr.field);
        }
        for (double cv : bc.c) {
            std::vector<long> js = bc.j;
            bool from_min = js.empty();
            if (from_min) {
                MinJOptions mo;
                mo.alpha = bc.alpha;
                mo.gamma = bc.gamma;
                js.push_back(min_valid_j(bc.kind, cv, bc.m, bc.n, diam, mo));
            }
            for (long j : js) {
                BarrierSpec spec;
                spec.kind = bc.kind;
                spec.c = cv;
                spec.j = j;
                spec.m = bc.m;
                spec.n = bc.n;
                spec.diam = diam;
                spec.alpha = bc.alpha;
                spec.gamma = bc.gamma;
                spec.x0 = bc.x0;
                spec.t0 = bc.t0;
                spec.torsion = torsion;
                SamplingPolicy pol = op.policy;
                pol.seed = c.seed;
                SignReport sr = verify_sign(spec, *d, pol);
                std::string expect = bc.expect;
                bool ok;
                if (expect == "pass") {
                    ok = sr.passed();
                } else if (expect == "violation") {
                    ok = !sr.passed();
                } else {
                    MinJOptions mo;
                    mo.alpha = bc.alpha;
                    mo.gamma = bc.gamma;
                    bool sufficient = min_j_condition(bc.kind, cv, bc.m, bc.n, diam, j, mo);
                    ok = sufficient ? sr.passed() : !sr.passed();
                    expect += sufficient ? " (condition holds)" : " (condition fails)";
                }
                std::string name = "barrier " + bc.label + " c=" + fmt_num(cv) + " j=" + fmt_num(j);
                c.check(name, ok,
                        "expect " + expect + "; " + std::to_string(sr.violating_samples.size()) + " violations in " +
                            std::to_string(sr.samples_checked) + " samples");
                t.add({bc.label, to_string(bc.kind), fmt_num(cv), fmt_num(j), fmt_num(sr.claimed_sign),
                       fmt_num(sr.min_residual), fmt_num(sr.max_residual), fmt_num(sr.samples_checked),
                       fmt_num(sr.violating_samples.size()), sr.passed() ? "1" : "0", bc.expect});
                for (const auto& v : sr.violating_samples) {
                    std::vector<std::string> row{bc.label, fmt_num(cv), fmt_num(j)};
                    for (int a = 0; a < c.s.domain.n; ++a) row.push_back(fmt_num(v.x[a]));
                    row.push_back(fmt_num(v.t));
                    row.push_back(fmt_num(v.residual));
                    vt.add(std::move(row));
                }
                json cj = to_json(sr);
                cj["label"] = bc.label;
                cj["kind"] = to_string(bc.kind);
                cj["c"] = cv;
                cj["j"] = j;
                cj["j_from_min_valid"] = from_min;
                cj["expect"] = expect;
                cj["check_passed"] = ok;
                cases.push_back(cj);
            }
        }
    }
    if (!op.cases.empty()) {
        c.csv("barriers.csv", t);
        c.csv("violations.csv", vt);
    }
    res["cases"] = cases;
    json mins = json::array();
    CsvTable mt;
    mt.header = {"kind", "c", "m", "n", "diam", "min_valid_j", "expect"};
    for (const auto& mc : op.min_j) {
        long j = min_valid_j(mc.kind, mc.c, mc.m, mc.n, mc.diam);
        mins.push_back({{"kind", to_string(mc.kind)}, {"c", mc.c}, {"m", mc.m}, {"n", mc.n}, {"diam", mc.diam},
                        {"min_valid_j", j}});
        mt.add({to_string(mc.kind), fmt_num(mc.c), fmt_num(mc.m), fmt_num(mc.n), fmt_num(mc.diam), fmt_num(j),
                mc.expect ? fmt_num(*mc.expect) : std::string("")});
        if (mc.expect)
            c.check("min_valid_j " + to_string(mc.kind) + " c=" + fmt_num(mc.c), j == *mc.expect,
                    "got " + fmt_num(j) + ", expected " + fmt_num(*mc.expect));
    }
    if (!op.min_j.empty()) c.csv("min_j.csv", mt);
    res["min_j"] = mins;
    c.rep.results = res;
}

void run_perron(Ctx& c, const PerronOp& op) {
    auto d = c.domain(c.resolution);
    BoundaryData f = c.main_data();
    std::vector<double> eps = op.eps.empty() ? default_eps_ladder(f) : op.eps;
    PerronBracket pb = perron_bracket(d, f, eps, c.s.solver, op.with_coarse);
    json res = to_json(pb);
    c.csv("bracket.csv", bracket_csv(pb));
    bool ordered = std::all_of(pb.levels.begin(), pb.levels.end(), [](const PerronLevel& l) { return l.ordered; });
    c.check("bracket-ordered", ordered, "lower <= upper at every sample for every epsilon");
    c.check("gap-nonincreasing", pb.gap_nonincreasing(), "gap along the epsilon ladder");
    for (const auto& l : pb.levels) {
        double bound = 2.0 * l.epsilon + op.gap_factor * pb.discretization_estimate;
        c.check("gap-bound eps=" + fmt_num(l.epsilon), l.gap <= bound,
                "gap " + fmt_num(l.gap) + " vs 2*eps + " + fmt_num(op.gap_factor) + "*disc = " + fmt_num(bound));
    }
    c.rep.results = res;
}

bool nonincreasing_gaps(const MemberProbe& m) {
    for (std::size_t i = 1; i < m.rows.size(); ++i) {
        const double slack = 1e-12;
        if (m.rows[i].upper_gap > m.rows[i - 1].upper_gap + slack) return false;
        if (m.rows[i].lower_gap > m.rows[i - 1].lower_gap + slack) return false;
    }
    return true;
}

void run_probe(Ctx& c, const ProbeOp& op) {
    auto d = c.domain(c.resolution);
    const int n = d->grid().n();
    double diam = diameter(union_of_bases(*d));
    json pts = json::array();
    for (std::size_t i = 0; i < op.points.size(); ++i) {
        const auto& pc = op.points[i];
        SpaceTimePoint xi{pc.x, pc.t};
        auto fam = family_for(c, op.family, xi, n, diam);
        RegularityProbe p = regularity_probe(d, xi, fam, c.s.solver, op.options);
        c.csv("probe_" + std::to_string(i) + ".csv", probe_csv(p));
        std::string where = pt(pc.x, n) + " t=" + fmt_num(pc.t);
        if (!pc.expect.empty())
            c.check("verdict " + where, p.verdict == pc.expect, "got '" + p.verdict + "', expected '" + pc.expect + "'");
        for (const auto& m : p.members) {
            if (op.check_gaps_decrease)
                c.check("gaps-decrease " + m.label + " " + where, nonincreasing_gaps(m),
                        "upper and lower gaps along the radius ladder");
            if (op.intercept_factor) {
                double bound = *op.intercept_factor * m.discretization_estimate + 1e-8 * std::max(1.0, fam.front().sup);
                double worst = std::max(m.upper_intercept, m.lower_intercept);
                c.check("intercept " + m.label + " " + where, worst <= bound,
                        "max intercept " + fmt_num(worst) + " vs " + fmt_num(*op.intercept_factor) + "*disc = " +
                            fmt_num(bound));
            }
        }
        pts.push_back(to_json(p));
    }
    c.rep.results = {{"probes", pts}};
}

void run_dichotomy(Ctx& c, const DichotomyOp& op) {
    auto d = c.domain(c.resolution);
    const int n = d->grid().n();
    BoundaryData f = op.data ? c.data(*op.data) : c.main_data();
    json pts = json::array();
    for (std::size_t i = 0; i < op.points.size(); ++i) {
        const auto& pc = op.points[i];
        DichotomyReport r = dichotomy_check(d, {pc.x, pc.t}, f, c.s.solver, op.options);
        c.csv("dichotomy_" + std::to_string(i) + ".csv", dichotomy_csv(r));
        if (!pc.expect.empty())
            c.check("branch " + pt(pc.x, n) + " t=" + fmt_num(pc.t), to_string(r.branch) == pc.expect,
                    "got '" + to_string(r.branch) + "', expected '" + pc.expect + "'");
        pts.push_back(to_json(r));
    }
    c.rep.results = {{"dichotomy", pts}};
}

void run_future(Ctx& c, const FutureOp& op) {
    auto d = c.domain(c.resolution);
    const int n = d->grid().n();
    double diam = diameter(union_of_bases(*d));
    json pts = json::array();
    for (std::size_t i = 0; i < op.points.size(); ++i) {
        const auto& pc = op.points[i];
        SpaceTimePoint xi{pc.x, pc.t};
        auto fam = family_for(c, op.family, xi, n, diam);
        FutureProbe fp = future_truncation_probe(d, xi, fam, c.s.solver, op.options, pc.truncation);
        c.csv("future_" + std::to_string(i) + "_full.csv", probe_csv(fp.full));
        if (!fp.truncated.earliest_point) c.csv("future_" + std::to_string(i) + "_truncated.csv", probe_csv(fp.truncated));
        c.check("future-independence " + pt(pc.x, n) + " t=" + fmt_num(pc.t), fp.verdicts_agree,
                "full '" + fp.full.verdict + "' vs truncated '" + fp.truncated.verdict + "'" +
                    (fp.truncated.earliest_point ? " (not on the truncated boundary)" : ""));
        if (!pc.expect.empty())
            c.check("verdict " + pt(pc.x, n) + " t=" + fmt_num(pc.t), fp.full.verdict == pc.expect,
                    "got '" + fp.full.verdict + "', expected '" + pc.expect + "'");
        pts.push_back(to_json(fp));
    }
    c.rep.results = {{"future_probes", pts}};
}

void run_capacity(Ctx& c, const CapacityOp& op) {
    std::vector<const ShapeSpec*> shapes{&op.ambient};
    for (const auto& a : op.ambient_ladder) shapes.push_back(&a);
    Grid g = c.grid_for(shapes);
    SpatialDomain V = build_shape(op.ambient, g);
    CsvTable t;
    t.header = {"set", "ambient", "cells", "capacity", "iterations", "relative_residual"};
    json rows = json::array();
    std::vector<double> vals;
    for (std::size_t i = 0; i < op.sets.size(); ++i) {
        SpatialDomain E = build_shape(op.sets[i], g);
        CompactMask mask(V, E.mask());
        CapacityResult r = capacity(mask, op.options);
        vals.push_back(r.value);
        t.add({fmt_num(i), "0", fmt_num(mask.count()), fmt_num(r.value), fmt_num(r.iterations),
               fmt_num(r.relative_residual)});
        json rj = to_json(r);
        rj["set"] = i;
        rj["cells"] = mask.count();
        rows.push_back(rj);
    }
    if (op.nested) {
        bool mono = true;
        for (std::size_t i = 1; i < vals.size(); ++i) mono = mono && vals[i] >= vals[i - 1] * (1.0 - 1e-9);
        c.check("monotone-under-inclusion", mono, "capacities of the nested sets are nondecreasing");
    }
    json ladder = json::array();
    if (!op.ambient_ladder.empty()) {
        SpatialDomain E = build_shape(op.sets.front(), g);
        std::vector<double> lv;
        for (std::size_t i = 0; i < op.ambient_ladder.size(); ++i) {
            SpatialDomain Vi = build_shape(op.ambient_ladder[i], g);
            CapacityResult r = capacity(CompactMask(Vi, E.mask()), op.options);
            lv.push_back(r.value);
            t.add({"0", fmt_num(i + 1), fmt_num(E.count()), fmt_num(r.value), fmt_num(r.iterations),
                   fmt_num(r.relative_residual)});
            ladder.push_back(to_json(r));
        }
        bool mono = true;
        for (std::size_t i = 1; i < lv.size(); ++i) mono = mono && lv[i] <= lv[i - 1] * (1.0 + 1e-9);
        c.check("nonincreasing-under-box-growth", mono, "capacity of the first set along the ambient ladder");
    }
    c.csv("capacity.csv", t);
    c.rep.results = {{"sets", rows}, {"ambient_ladder", ladder}};
}

void run_wiener(Ctx& c, const WienerOp& op) {
    std::vector<const ShapeSpec*> shapes;
    for (const auto& w : op.cases) shapes.push_back(&w.domain);
    std::vector<CapacityProfile> profiles(op.cases.size());
    std::vector<ThicknessReport> reps(op.cases.size());
    std::vector<double> secs(op.cases.size());
    Grid g = c.grid_for(shapes);
    parallel_for(static_cast<int>(op.cases.size()), c.threads(), [&](int i) {
        auto t0 = std::chrono::steady_clock::now();
        const auto& w = op.cases[static_cast<std::size_t>(i)];
        SpatialDomain U = build_shape(w.domain, g);
        profiles[static_cast<std::size_t>(i)] = wiener_profile(U, w.x0, op.options);
        reps[static_cast<std::size_t>(i)] = classify_thickness(profiles[static_cast<std::size_t>(i)], op.thickness);
        secs[static_cast<std::size_t>(i)] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    json cases = json::array();
    for (std::size_t i = 0; i < op.cases.size(); ++i) {
        const auto& w = op.cases[i];
        c.csv("wiener_" + w.label + ".csv", profile_csv(profiles[i]));
        std::string v = to_string(reps[i].verdict);
        if (!w.expect.empty())
            c.check("thickness " + w.label, v == w.expect,
                    "got '" + v + "' (" + reps[i].confidence + " confidence), expected '" + w.expect + "'");
        cases.push_back({{"label", w.label},
                         {"profile", to_json(profiles[i])},
                         {"classification", to_json(reps[i])},
                         {"seconds", secs[i]}});
    }
    c.rep.results = {{"cases", cases}};
}

void run_torsion(Ctx& c, const TorsionOp& op) {
    Grid g = c.grid_for({&op.domain});
    SpatialDomain U = build_shape(op.domain, g);
    TorsionResult tr = torsion_profile(U, op.x0);
    const int n = g.n();
    double vmin = std::numeric_limits<double>::infinity();
    CsvTable ft;
    ft.header = {"x"};
    if (n >= 2) ft.header.push_back("y");
    if (n >= 3) ft.header.push_back("z");
    ft.header.push_back("v");
    for (std::size_t cell = 0; cell < g.size(); ++cell) {
        if (!U.inside(cell)) continue;
        double v = tr.field.values[cell];
        vmin = std::min(vmin, v);
        Point x = g.center(cell);
        std::vector<std::string> row;
        for (int a = 0; a < n; ++a) row.push_back(fmt_num(x[a]));
        row.push_back(fmt_num(v));
        ft.add(std::move(row));
    }
    c.csv("torsion_field.csv", ft);
    CsvTable rt;
    rt.header = {"radius", "min_v", "max_v", "cells"};
    json rows = json::array();
    std::vector<double> maxv;
    for (double r : op.radii) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        std::size_t cnt = 0;
        for (std::size_t cell = 0; cell < g.size(); ++cell) {
            if (!U.is_interior(cell) || distance(g.center(cell), op.x0, n) > r * (1.0 + 1e-12)) continue;
            lo = std::min(lo, tr.field.values[cell]);
            hi = std::max(hi, tr.field.values[cell]);
            ++cnt;
        }
        maxv.push_back(hi);
        rt.add({fmt_num(r), fmt_num(lo), fmt_num(hi), fmt_num(cnt)});
        rows.push_back({{"radius", r}, {"min_v", num(lo)}, {"max_v", hi}, {"cells", cnt}});
    }
    c.csv("torsion_radii.csv", rt);
    c.check("nonnegative", vmin >= -1e-12, "min v = " + fmt_num(vmin));
    c.check("dominates-distance", tr.min_excess >= -1e-9, "min over interior of v - |x - x0| = " + fmt_num(tr.min_excess));
    double icpt = op.radii.size() >= 2 ? fit_intercept(op.radii, maxv) : 0.0;
    if (op.expect_vanishing) {
        bool dec = true;
        for (std::size_t i = 1; i < maxv.size(); ++i) dec = dec && maxv[i] <= maxv[i - 1] + 1e-12;
        c.check("vanishes-at-point", dec && icpt <= 2.0 * g.h(),
                "sup of v over shrinking balls is nonincreasing with intercept " + fmt_num(icpt));
    }
    c.rep.results = {{"min_excess", tr.min_excess}, {"iterations", tr.iterations}, {"min_v", vmin},
                     {"sup_intercept", icpt}, {"radii", rows}};
}

void run_degiorgi(Ctx& c, const DeGiorgiOp& op) {
    std::vector<int> res = op.resolutions;
    if (res.empty()) res = {std::max(2, c.resolution / 2), c.resolution};
    if (c.opt.resolution && !op.resolutions.empty()) {
        double f = static_cast<double>(*c.opt.resolution) / c.s.resolution;
        for (int& r : res) r = std::max(2, static_cast<int>(std::lround(r * f)));
    }
    std::vector<std::optional<Field>> fields(res.size());
    parallel_for(static_cast<int>(res.size()), c.threads(), [&](int i) {
        auto d = c.domain(res[static_cast<std::size_t>(i)]);
        fields[static_cast<std::size_t>(i)] = solve_union(d, c.main_data(), c.s.solver).field;
    });
    const double m = c.s.solver.m;
    const int n = c.s.domain.n;
    CylinderParams base;
    base.x0 = op.x0;
    base.t0 = op.t0;
    base.rho = op.rho;
    base.sigma = op.sigma;
    const Field& finest = *fields.back();
    double L = cylinder_sup(finest, base);
    DeGiorgiConstants k = constants(m, n);
    json runs = json::array();
    bool est_all = true, loop_ok = true;
    IterateOptions io;
    io.j_max = op.j_max;
    for (std::size_t f = 0; f < res.size(); ++f)
        for (std::size_t mi = 0; mi < op.M_fractions.size(); ++mi) {
            CylinderParams p = base;
            p.M = op.M_fractions[mi] * L;
            IterationReport r = iterate(*fields[f], p, op.k_fraction * L, m, io);
            est_all = est_all && r.est_all;
            if (r.smallness_met) loop_ok = loop_ok && r.closed_loop_holds;
            c.csv("iteration_r" + std::to_string(res[f]) + "_M" + std::to_string(mi) + ".csv", iteration_csv(r));
            json rj = to_json(r);
            rj["resolution"] = res[f];
            runs.push_back(rj);
        }
    std::vector<const Field*> fp;
    std::vector<std::string> labels;
    for (std::size_t f = 0; f < res.size(); ++f) {
        fp.push_back(&*fields[f]);
        labels.push_back("h=1/" + std::to_string(res[f]));
    }
    std::vector<double> Ms;
    for (double fr : op.M_fractions) Ms.push_back(fr * L);
    SupEstimateLedger led = sup_estimate_ledger(fp, labels, base, Ms, m, op.stability_tol);
    c.csv("ledger.csv", ledger_csv(led));
    bool flagged = std::any_of(led.entries.begin(), led.entries.end(), [](const SupEstimateEntry& e) { return e.flagged; });
    c.check("est-Ajp1-exact", est_all, "Y_j >= 4^-(j+2) k^2 |A_j| at every j of every run");
    c.check("closed-loop", loop_ok, "Y_j below the closed-loop bound wherever the smallness condition holds");
    c.check("sup-estimate-unflagged", !flagged, "no zero right-hand side with a positive left-hand side");
    c.check("sup-estimate-stable", led.stable,
            "fitted C in [" + fmt_num(led.C_min) + ", " + fmt_num(led.C_max) + "], spread " + fmt_num(led.spread) +
                " vs " + fmt_num(op.stability_tol));
    c.rep.results = {{"constants", {{"alpha", k.alpha}, {"b", k.b}, {"lambda", k.lambda}}},
                     {"L", L},
                     {"resolutions", res},
                     {"runs", runs},
                     {"ledger", to_json(led)}};
}

void run_barenblatt(Ctx& c, const BarenblattOp& op) {
    std::vector<int> res = op.resolutions;
    if (c.opt.resolution) {
        double f = static_cast<double>(*c.opt.resolution) / c.s.resolution;
        for (int& r : res) r = std::max(2, static_cast<int>(std::lround(r * f)));
    }
    const double m = c.s.solver.m;
    const int n = c.s.domain.n;
    if (!(c.s.domain.time.t0 > 0.0)) throw ScenarioError("domain.time.t0", "Barenblatt runs need t0 > 0");
    std::vector<double> err(res.size()), secs(res.size());
    std::vector<int> steps(res.size());
    std::vector<SolveStats> stats(res.size());
    // Timed runs stay sequential so that each level's wall time is its own.
    for (std::size_t i = 0; i < res.size(); ++i) {
        auto d = c.domain(res[i]);
        auto t0 = std::chrono::steady_clock::now();
        SolveResult r = solve_union(d, barenblatt_data(m, n, op.C, c.s.domain.time.t0), c.s.solver);
        secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        steps[i] = d->time().steps;
        stats[i] = r.stats;
        double C = op.C;
        err[i] = l1_error(r.field, [=](const Point& x, double t) { return barenblatt(x, t, m, n, C); }, steps[i]);
    }
    CsvTable t;
    t.header = {"resolution", "h", "steps", "l1_error", "order"};
    json rows = json::array();
    bool mono = true, orders = true, fast = true;
    for (std::size_t i = 0; i < res.size(); ++i) {
        double order = i ? std::log(err[i - 1] / err[i]) / std::log(static_cast<double>(res[i]) / res[i - 1])
                         : std::numeric_limits<double>::quiet_NaN();
        if (i) {
            mono = mono && err[i] < err[i - 1];
            orders = orders && order >= op.min_order;
        }
        fast = fast && secs[i] < op.max_seconds;
        t.add({fmt_num(res[i]), fmt_num(1.0 / res[i]), fmt_num(steps[i]), fmt_num(err[i]), fmt_num(order)});
        rows.push_back({{"resolution", res[i]},
                        {"h", 1.0 / res[i]},
                        {"steps", steps[i]},
                        {"l1_error", err[i]},
                        {"order", num(order)},
                        {"seconds", secs[i]},
                        {"stats", to_json(stats[i])}});
    }
    c.csv("convergence.csv", t);
    c.check("l1-decreasing", mono, "L1 error decreases along the refinement ladder");
    c.check("empirical-order", orders, "every empirical order >= " + fmt_num(op.min_order));
    c.check("runtime", fast, "every level below " + fmt_num(op.max_seconds) + " s");
    c.rep.results = {{"ladder", rows}};
}

}  // namespace

RunReport run_scenario(const Scenario& s, const RunOptions& opt) {
    RunReport rep;
    rep.name = s.name;
    rep.operation = s.operation;
    rep.seed = opt.seed.value_or(s.seed);
    rep.resolution = opt.resolution.value_or(s.resolution);
    rep.scenario = s.raw;
    Ctx c{s, opt, rep.seed, rep.resolution, rep};
    auto t0 = std::chrono::steady_clock::now();
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, SolveOp>) run_solve(c, op);
            else if constexpr (std::is_same_v<T, BarrierOp>) run_barriers(c, op);
            else if constexpr (std::is_same_v<T, PerronOp>) run_perron(c, op);
            else if constexpr (std::is_same_v<T, ProbeOp>) run_probe(c, op);
            else if constexpr (std::is_same_v<T, DichotomyOp>) run_dichotomy(c, op);
            else if constexpr (std::is_same_v<T, FutureOp>) run_future(c, op);
            else if constexpr (std::is_same_v<T, CapacityOp>) run_capacity(c, op);
            else if constexpr (std::is_same_v<T, WienerOp>) run_wiener(c, op);
            else if constexpr (std::is_same_v<T, TorsionOp>) run_torsion(c, op);
            else if constexpr (std::is_same_v<T, DeGiorgiOp>) run_degiorgi(c, op);
            else if constexpr (std::is_same_v<T, BarenblattOp>) run_barenblatt(c, op);
        },
        s.op);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!opt.out_dir.empty()) {
        std::string path = (std::filesystem::path(opt.out_dir) / "report.json").string();
        rep.artifacts.push_back(path);
        write_json(path, rep.to_json());
    }
    return rep;
}

}  // namespace pmelab
