#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"

namespace pmelab {

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double worst_residual = 0.0)
        : std::runtime_error(what), worst_residual_(worst_residual) {}
    double worst_residual() const { return worst_residual_; }

private:
    double worst_residual_;
};

/// Nonnegative grid function on the samples of a space-time domain. Values at
/// samples outside the domain are stored as 0 and reported undefined.
class Field {
public:
    Field(std::shared_ptr<const SpaceTimeDomain> domain, std::vector<double> values);

    const SpaceTimeDomain& domain() const { return *domain_; }
    const std::shared_ptr<const SpaceTimeDomain>& domain_ptr() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    double at(std::size_t cell, int level) const { return values_[domain_->sample_index(cell, level)]; }
    bool defined(std::size_t cell, int level) const { return domain_->defined(cell, level); }
    double max() const;

private:
    std::shared_ptr<const SpaceTimeDomain> domain_;
    std::vector<double> values_;
};

struct BoundaryData {
    std::function<double(const Point& x, double t)> sampler;
    double inf = 0.0;
    double sup = 0.0;
    std::string label;

    double operator()(const Point& x, double t) const { return sampler(x, t); }
    BoundaryData shifted(double eps) const;   // f + eps
    BoundaryData lowered(double eps) const;   // (f - eps)_+
};

BoundaryData constant_data(double c);

enum class Scheme { Implicit, Explicit };

struct SolverConfig {
    Scheme scheme = Scheme::Implicit;
    double m = 2.0;
    /// Multiplier a in u_t = a * Lap(u^m).
    double coefficient = 1.0;
    /// Substep length; 0 means automatic (one substep per level when
    /// implicit, the largest CFL-admissible split of the level when explicit).
    double dt = 0.0;
    double newton_tol = 1e-12;
    int newton_max = 50;
    double linear_tol = 1e-10;
    int linear_max = 20000;
    double degenerate_floor = 1e-12;
};

struct SolveStats {
    int levels_solved = 0;
    int substeps_per_level = 1;
    long newton_iterations = 0;
    int max_newton_per_step = 0;
    long cg_iterations = 0;
    double max_final_residual = 0.0;  // Newton residual, relative to the step scale
    double cfl_dt = 0.0;              // explicit only; 0 when unconstrained
    bool cfl_unconstrained = false;
};

struct SolveResult {
    Field field;
    SolveStats stats;
};

void validate(const SolverConfig& cfg);

SolveResult solve_union(std::shared_ptr<const SpaceTimeDomain> d, const BoundaryData& data,
                        const SolverConfig& cfg);
SolveResult solve_union(const SpaceTimeDomain& d, const BoundaryData& data, const SolverConfig& cfg);
SolveResult solve_cylinder(const Cylinder& cyl, const TimeGrid& time, const BoundaryData& data,
                           const SolverConfig& cfg);

/// Field equal to `f` at every defined sample of d (no solve).
Field sample_field(std::shared_ptr<const SpaceTimeDomain> d,
                   const std::function<double(const Point&, double)>& f);

/// Backward-difference scheme residual (u^k - u^{k-1})/dt - a Lap_h((u^k)^m)
/// at an interior sample, with dt the level spacing.
double discrete_residual(const Field& f, double m, double coefficient, std::size_t cell, int level);
/// Sum of magnitudes of the terms entering discrete_residual.
double residual_scale(const Field& f, double m, double coefficient, std::size_t cell, int level);

struct CflBound {
    double dt = 0.0;
    bool unconstrained = false;
};
CflBound cfl_max_dt(double L, double h, double m, int n, double coefficient = 1.0);

enum class ComparisonMode { Parabolic, Elliptic };

struct ComparisonViolation {
    std::size_t cell;
    int level;
    double v_minus_u;
};

struct ComparisonReport {
    bool ordered = true;
    double min_margin = 0.0;  // min of u - v over checked samples
    std::size_t samples_checked = 0;
    std::vector<ComparisonViolation> violations;
};

/// Checks v <= u on interior samples given v <= u on the boundary samples of
/// the mode (parabolic boundary, or parabolic boundary plus the top level).
ComparisonReport comparison_check(const Field& u, const Field& v, ComparisonMode mode,
                                  double tol = 1e-10);

double l1_error(const Field& f, const std::function<double(const Point&, double)>& exact, int level);

}  // namespace pmelab
