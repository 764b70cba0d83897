#include "pmelab/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pmelab {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
std::string fmt_num(long v) { return std::to_string(v); }
std::string fmt_num(std::size_t v) { return std::to_string(v); }
std::string fmt_num(int v) { return std::to_string(v); }

json num(double v) {
    if (std::isfinite(v)) return v;
    return fmt_num(v);
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }
void write_csv(const std::string& path, const CsvTable& t) { write_text(path, t.str()); }

json to_json(const SolveStats& s) {
    return {{"levels_solved", s.levels_solved},
            {"substeps_per_level", s.substeps_per_level},
            {"newton_iterations", s.newton_iterations},
            {"max_newton_per_step", s.max_newton_per_step},
            {"cg_iterations", s.cg_iterations},
            {"max_final_residual", num(s.max_final_residual)},
            {"cfl_dt", num(s.cfl_dt)},
            {"cfl_unconstrained", s.cfl_unconstrained}};
}

json to_json(const ComparisonReport& r) {
    return {{"ordered", r.ordered},
            {"min_margin", num(r.min_margin)},
            {"samples_checked", r.samples_checked},
            {"violations", r.violations.size()}};
}

json to_json(const SignReport& r) {
    json v = json::array();
    for (std::size_t i = 0; i < r.violating_samples.size() && i < 10; ++i) {
        const auto& s = r.violating_samples[i];
        v.push_back({{"x", {s.x[0], s.x[1], s.x[2]}}, {"t", s.t}, {"residual", num(s.residual)}});
    }
    return {{"claimed_sign", r.claimed_sign},
            {"passed", r.passed()},
            {"min_residual", num(r.min_residual)},
            {"max_residual", num(r.max_residual)},
            {"samples_checked", r.samples_checked},
            {"samples_excluded", r.samples_excluded},
            {"violations", r.violating_samples.size()},
            {"first_violations", v},
            {"tolerance", num(r.tolerance)}};
}

json to_json(const PerronBracket& b) {
    json lv = json::array();
    for (const auto& l : b.levels)
        lv.push_back({{"epsilon", num(l.epsilon)},
                      {"gap", num(l.gap)},
                      {"gap_coarse", num(l.gap_coarse)},
                      {"ordered", l.ordered}});
    return {{"levels", lv},
            {"discretization_estimate", num(b.discretization_estimate)},
            {"coarse_run", b.coarse_run},
            {"gap_nonincreasing", b.gap_nonincreasing()}};
}

json to_json(const RegularityProbe& p) {
    json members = json::array();
    for (const auto& m : p.members) {
        json rows = json::array();
        for (const auto& r : m.rows)
            rows.push_back({{"radius", num(r.radius)},
                            {"sup_upper", num(r.sup_upper)},
                            {"inf_lower", num(r.inf_lower)},
                            {"upper_gap", num(r.upper_gap)},
                            {"lower_gap", num(r.lower_gap)},
                            {"upper_gap_coarse", num(r.upper_gap_coarse)},
                            {"lower_gap_coarse", num(r.lower_gap_coarse)},
                            {"samples", r.samples}});
        members.push_back({{"label", m.label},
                           {"f_at_point", num(m.f_at_point)},
                           {"epsilon", num(m.epsilon)},
                           {"upper_intercept", num(m.upper_intercept)},
                           {"lower_intercept", num(m.lower_intercept)},
                           {"discretization_estimate", num(m.discretization_estimate)},
                           {"tolerance", num(m.tolerance)},
                           {"irregular_threshold", num(m.irregular_threshold)},
                           {"upper_status", m.upper_status},
                           {"lower_status", m.lower_status},
                           {"rows", rows}});
    }
    return {{"point", {{"x", {p.point.x[0], p.point.x[1], p.point.x[2]}}, {"t", p.point.t}}},
            {"approach_radii", p.approach_radii},
            {"verdict", p.verdict},
            {"earliest_point", p.earliest_point},
            {"members", members}};
}

json to_json(const DichotomyReport& r) {
    json coarse = json::array();
    for (double v : r.inf_upper_coarse) coarse.push_back(num(v));
    return {{"branch", to_string(r.branch)},
            {"f_at_point", num(r.f_at_point)},
            {"liminf_estimate", num(r.liminf_estimate)},
            {"tolerance", num(r.tolerance)},
            {"margin", num(r.margin)},
            {"discretization_estimate", num(r.discretization_estimate)},
            {"radii", r.radii},
            {"inf_upper", r.inf_upper},
            {"inf_upper_coarse", coarse}};
}

json to_json(const FutureProbe& p) {
    return {{"truncation_time", p.truncation_time},
            {"verdicts_agree", p.verdicts_agree},
            {"full", to_json(p.full)},
            {"truncated", to_json(p.truncated)}};
}

json to_json(const CapacityResult& r) {
    return {{"value", num(r.value)},
            {"iterations", r.iterations},
            {"relative_residual", num(r.relative_residual)},
            {"free_nodes", r.free_nodes}};
}

json to_json(const CapacityProfile& p) {
    json cap = json::array(), integ = json::array(), ps = json::array(), ri = json::array(), rps = json::array();
    for (double v : p.cap_values) cap.push_back(num(v));
    for (double v : p.integrands) integ.push_back(num(v));
    for (double v : p.partial_sums) ps.push_back(num(v));
    for (double v : p.resolved_integrands) ri.push_back(num(v));
    for (double v : p.resolved_partial_sums) rps.push_back(num(v));
    return {{"x0", {p.x0[0], p.x0[1], p.x0[2]}},
            {"n", p.n},
            {"h", p.h},
            {"k", p.k},
            {"radii", p.radii},
            {"cap", cap},
            {"integrand", integ},
            {"partial_sum", ps},
            {"cell_floor", num(p.cell_floor)},
            {"resolved_integrand", ri},
            {"resolved_partial_sum", rps},
            {"complement_cells", p.complement_cells},
            {"box_half_width", p.box_half_width}};
}

json to_json(const ThicknessReport& r) {
    return {{"verdict", to_string(r.verdict)},
            {"confidence", r.confidence},
            {"slope", num(r.slope)},
            {"total", num(r.total)},
            {"summands_nonincreasing", r.summands_nonincreasing},
            {"slope_tol", num(r.slope_tol)},
            {"sum_tol", num(r.sum_tol)}};
}

json to_json(const IterationReport& r) {
    json rows = json::array();
    for (const auto& w : r.rows)
        rows.push_back({{"j", w.j},
                        {"k_j", num(w.k_j)},
                        {"rho_j", num(w.rho_j)},
                        {"t_half_width", num(w.t_plus)},
                        {"cells", w.cells},
                        {"Y", num(w.Y)},
                        {"A_measure", num(w.A_measure)},
                        {"bound", num(w.bound)},
                        {"ratio", num(w.ratio)},
                        {"est_holds", w.est_holds},
                        {"recursion_ratio", num(w.recursion_ratio)},
                        {"closed_loop_bound", num(w.closed_loop_bound)}});
    const auto& p = r.params;
    return {{"params",
             {{"x0", {p.x0[0], p.x0[1], p.x0[2]}},
              {"t0", p.t0},
              {"rho", p.rho},
              {"sigma", p.sigma},
              {"M", p.M},
              {"k", r.k},
              {"m", r.m},
              {"n", r.n},
              {"L", num(r.L)}}},
            {"constants", {{"alpha", r.c.alpha}, {"b", r.c.b}, {"lambda", r.c.lambda}}},
            {"fitted_A", num(r.fitted_A)},
            {"est_all", r.est_all},
            {"smallness_met", r.smallness_met},
            {"closed_loop_holds", r.closed_loop_holds},
            {"truncated", r.truncated},
            {"stop_reason", r.stop_reason},
            {"rows", rows}};
}

json to_json(const SupEstimateEntry& e) {
    return {{"field", e.field_label},
            {"M", num(e.M)},
            {"lhs", num(e.lhs)},
            {"rhs_mean", num(e.rhs_mean)},
            {"C", num(e.C)},
            {"flagged", e.flagged}};
}

json to_json(const SupEstimateLedger& l) {
    json es = json::array();
    for (const auto& e : l.entries) es.push_back(to_json(e));
    return {{"entries", es},
            {"C_min", num(l.C_min)},
            {"C_max", num(l.C_max)},
            {"spread", num(l.spread)},
            {"stability_tol", l.stability_tol},
            {"stable", l.stable}};
}

CsvTable field_csv(const Field& f, int level) {
    const auto& d = f.domain();
    const Grid& g = d.grid();
    CsvTable t;
    t.header = {"x"};
    if (g.n() >= 2) t.header.push_back("y");
    if (g.n() >= 3) t.header.push_back("z");
    t.header.push_back("t");
    t.header.push_back("u");
    double tt = d.time().time(level);
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (!d.defined(c, level)) continue;
        Point x = g.center(c);
        std::vector<std::string> row;
        for (int a = 0; a < g.n(); ++a) row.push_back(fmt_num(x[a]));
        row.push_back(fmt_num(tt));
        row.push_back(fmt_num(f.at(c, level)));
        t.add(std::move(row));
    }
    return t;
}

CsvTable samples_csv(const Field& f) {
    const auto& d = f.domain();
    const Grid& g = d.grid();
    CsvTable t;
    t.header = {"t", "i"};
    if (g.n() >= 2) t.header.push_back("j");
    if (g.n() >= 3) t.header.push_back("k");
    t.header.push_back("u");
    for (int k = 0; k < d.time().levels(); ++k) {
        std::string tt = fmt_num(d.time().time(k));
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (!d.defined(c, k)) continue;
            Index3 idx = g.index(c);
            std::vector<std::string> row{tt};
            for (int a = 0; a < g.n(); ++a) row.push_back(fmt_num(idx[a]));
            row.push_back(fmt_num(f.at(c, k)));
            t.add(std::move(row));
        }
    }
    return t;
}

CsvTable bracket_csv(const PerronBracket& b) {
    CsvTable t;
    t.header = {"epsilon", "gap", "gap_coarse", "ordered"};
    for (const auto& l : b.levels)
        t.add({fmt_num(l.epsilon), fmt_num(l.gap), fmt_num(l.gap_coarse), l.ordered ? "1" : "0"});
    return t;
}

CsvTable probe_csv(const RegularityProbe& p) {
    CsvTable t;
    t.header = {"member", "radius", "sup_upper", "inf_lower", "upper_gap", "lower_gap",
                "upper_gap_coarse", "lower_gap_coarse", "samples"};
    for (const auto& m : p.members)
        for (const auto& r : m.rows)
            t.add({m.label, fmt_num(r.radius), fmt_num(r.sup_upper), fmt_num(r.inf_lower), fmt_num(r.upper_gap),
                   fmt_num(r.lower_gap), fmt_num(r.upper_gap_coarse), fmt_num(r.lower_gap_coarse),
                   fmt_num(r.samples)});
    return t;
}

CsvTable dichotomy_csv(const DichotomyReport& r) {
    CsvTable t;
    t.header = {"radius", "inf_upper", "inf_upper_coarse"};
    for (std::size_t i = 0; i < r.radii.size(); ++i)
        t.add({fmt_num(r.radii[i]), fmt_num(r.inf_upper[i]),
               i < r.inf_upper_coarse.size() ? fmt_num(r.inf_upper_coarse[i]) : std::string("nan")});
    return t;
}

CsvTable profile_csv(const CapacityProfile& p) {
    CsvTable t;
    t.header = {"k", "r", "cap", "integrand", "partial_sum", "resolved_integrand", "resolved_partial_sum"};
    for (std::size_t i = 0; i < p.k.size(); ++i)
        t.add({fmt_num(p.k[i]), fmt_num(p.radii[i]), fmt_num(p.cap_values[i]), fmt_num(p.integrands[i]),
               fmt_num(p.partial_sums[i]), fmt_num(p.resolved_integrands[i]), fmt_num(p.resolved_partial_sums[i])});
    return t;
}

CsvTable iteration_csv(const IterationReport& r) {
    CsvTable t;
    t.header = {"j", "k_j", "Y_j", "A_j", "ratio", "bound"};
    for (const auto& w : r.rows)
        t.add({fmt_num(w.j), fmt_num(w.k_j), fmt_num(w.Y), fmt_num(w.A_measure), fmt_num(w.ratio), fmt_num(w.bound)});
    return t;
}

CsvTable ledger_csv(const SupEstimateLedger& l) {
    CsvTable t;
    t.header = {"field", "M", "lhs", "rhs_mean", "C", "flagged"};
    for (const auto& e : l.entries)
        t.add({e.field_label, fmt_num(e.M), fmt_num(e.lhs), fmt_num(e.rhs_mean), fmt_num(e.C), e.flagged ? "1" : "0"});
    return t;
}

}  // namespace pmelab
