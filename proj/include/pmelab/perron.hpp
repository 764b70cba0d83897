#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

struct PerronLevel {
    double epsilon = 0.0;
    double gap = 0.0;         // sup(upper - lower) on the fine grid
    double gap_coarse = 0.0;  // same on the coarsened grid (NaN when not run)
    bool ordered = true;      // lower <= upper at every sample
};

struct PerronBracket {
    std::vector<PerronLevel> levels;
    std::vector<Field> lower, upper;
    /// sup |u_h - u_2h| over shared samples for the smallest epsilon (upper field).
    double discretization_estimate = 0.0;
    bool coarse_run = false;

    bool gap_nonincreasing() const;
};

/// Upper and lower fields with data f + eps and (f - eps)_+ for each eps.
PerronBracket perron_bracket(std::shared_ptr<const SpaceTimeDomain> d, const BoundaryData& f,
                             const std::vector<double>& eps_ladder, const SolverConfig& cfg,
                             bool with_coarse = true);

/// Default ladder {0.1, 0.05, 0.025} * sup f.
std::vector<double> default_eps_ladder(const BoundaryData& f);

struct SpaceTimePoint {
    Point x{0.0, 0.0, 0.0};
    double t = 0.0;
};

struct ProbeOptions {
    std::vector<double> radii{0.2, 0.1, 0.05};
    double eps_fraction = 0.025;
    bool with_coarse = true;
    /// Radii below this many cells are dropped.
    double min_radius_cells = 2.0;
};

struct RadiusRow {
    double radius = 0.0;
    double sup_upper = 0.0;
    double inf_lower = 0.0;
    double upper_gap = 0.0;
    double lower_gap = 0.0;
    double upper_gap_coarse = 0.0;
    double lower_gap_coarse = 0.0;
    std::size_t samples = 0;
};

struct MemberProbe {
    std::string label;
    double f_at_point = 0.0;
    double epsilon = 0.0;
    std::vector<RadiusRow> rows;
    double upper_intercept = 0.0;
    double lower_intercept = 0.0;
    double discretization_estimate = 0.0;
    double tolerance = 0.0;
    double irregular_threshold = 0.0;
    std::string upper_status;  // "ok", "bad", "unclear"
    std::string lower_status;
};

struct RegularityProbe {
    SpaceTimePoint point;
    std::vector<double> approach_radii;
    std::vector<MemberProbe> members;
    std::string verdict;
    /// Set when the domain below the point is empty (an earliest point).
    bool earliest_point = false;
};

/// Linear least-squares fit y = a + b r over the three smallest radii; returns a.
double fit_intercept(const std::vector<double>& r, const std::vector<double>& y);

bool on_parabolic_boundary(const SpaceTimeDomain& d, const SpaceTimePoint& p);

RegularityProbe regularity_probe(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                 const std::vector<BoundaryData>& family, const SolverConfig& cfg,
                                 const ProbeOptions& opt = {});

/// Constants {1, 2}, a linear profile and a profile vanishing away from x0.
std::vector<BoundaryData> default_family(const SpaceTimePoint& xi0, int n, double diam);

enum class DichotomyBranch { Attains, DropsToZero, Inconclusive };
std::string to_string(DichotomyBranch b);

struct DichotomyReport {
    DichotomyBranch branch = DichotomyBranch::Inconclusive;
    double f_at_point = 0.0;
    double liminf_estimate = 0.0;
    double tolerance = 0.0;
    double margin = 0.0;
    double discretization_estimate = 0.0;
    std::vector<double> radii;
    std::vector<double> inf_upper;
    std::vector<double> inf_upper_coarse;
};

DichotomyReport dichotomy_check(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                const BoundaryData& f, const SolverConfig& cfg, const ProbeOptions& opt = {});

struct FutureProbe {
    RegularityProbe full;
    RegularityProbe truncated;
    bool verdicts_agree = false;
    double truncation_time = 0.0;
};

FutureProbe future_truncation_probe(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                    const std::vector<BoundaryData>& family, const SolverConfig& cfg,
                                    const ProbeOptions& opt = {}, std::optional<double> truncation = {});

/// Pointwise a^{1/(m-1)} f (maps solutions of u_t = a Lap u^m to the unit equation).
Field scale_transform(const Field& f, double a, double m);

}  // namespace pmelab
