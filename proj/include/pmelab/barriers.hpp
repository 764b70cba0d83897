#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"

namespace pmelab {

enum class BarrierKind { SubSeed7, LowerLog8, EarliestUpper10, EarliestLower10, TorsionUpper12, TorsionLower12 };

std::string to_string(BarrierKind k);
BarrierKind barrier_kind_from_string(const std::string& s);

/// Closed-form barrier family member. Coordinates are taken relative to the
/// anchor (x0, t0), except that torsion kinds read the torsion field at the
/// absolute point.
struct BarrierSpec {
    BarrierKind kind = BarrierKind::SubSeed7;
    double c = 1.0;
    long j = 1;
    double m = 2.0;
    int n = 2;
    double diam = 1.0;
    double alpha = 0.0;  // LowerLog8; 0 selects 1/(4m)
    double gamma = 0.0;  // LowerLog8; 0 selects 1/(2m)
    Point x0{0.0, 0.0, 0.0};
    double t0 = 0.0;
    std::shared_ptr<const StaticField> torsion;

    void validate() const;
    double alpha_eff() const { return alpha > 0.0 ? alpha : 1.0 / (4.0 * m); }
    double gamma_eff() const { return gamma > 0.0 ? gamma : 1.0 / (2.0 * m); }
    /// b for SubSeed7 and TorsionLower12, a for EarliestLower10 and
    /// TorsionUpper12, d for LowerLog8.
    double derived_constant() const;
};

/// Claimed residual sign: +1 supersolution (>= 0), -1 subsolution (<= 0).
int claimed_sign(BarrierKind k);

double evaluate(const BarrierSpec& spec, const Point& x, double t);

struct ResidualValue {
    double value = 0.0;
    double scale = 0.0;  // sum of magnitudes of the terms
    bool excluded = false;
};

/// Closed-form dt(w) - Lap(w^m).
ResidualValue residual(const BarrierSpec& spec, const Point& x, double t);

struct SamplingPolicy {
    bool include_nodes = true;
    int jitter_per_node = 10;
    std::uint64_t seed = 0;
    double rel_tol = 1e-10;
    /// Radius (in cells) around x0 excluded for LowerLog8.
    double exclude_cells_near_origin = 1.0;
};

struct SignViolation {
    Point x;
    double t;
    double residual;
};

struct SignReport {
    double min_residual = 0.0;
    double max_residual = 0.0;
    std::vector<SignViolation> violating_samples;
    std::size_t samples_checked = 0;
    std::size_t samples_excluded = 0;
    int claimed_sign = 0;
    double tolerance = 0.0;

    bool passed() const { return violating_samples.empty(); }
};

SignReport verify_sign(const BarrierSpec& spec, const SpaceTimeDomain& region,
                       const SamplingPolicy& policy = {});

struct MinJOptions {
    double alpha = 0.0;
    double gamma = 0.0;
    long cap = 10'000'000;
};

/// Smallest j satisfying the sufficient condition of the kind's proof.
long min_valid_j(BarrierKind kind, double c, double m, int n, double diam, const MinJOptions& opt = {});
/// The inequality scanned by min_valid_j, evaluated at a single j.
bool min_j_condition(BarrierKind kind, double c, double m, int n, double diam, long j,
                     const MinJOptions& opt = {});

double barenblatt(const Point& x, double t, double m, int n, double C);
double barenblatt_beta(double m, int n);

}  // namespace pmelab
