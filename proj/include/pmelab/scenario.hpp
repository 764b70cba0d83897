#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pmelab/barriers.hpp"
#include "pmelab/capacity.hpp"
#include "pmelab/perron.hpp"
#include "pmelab/report.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

/// Schema violation; `field()` is the dotted location, e.g. "domain.cylinders[0].base.radius".
class ScenarioError : public std::invalid_argument {
public:
    ScenarioError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ShapeSpec {
    std::string type;  // box, ball, box-minus-segment, punctured-ball, mask
    Point lo{}, hi{}, center{}, a{}, b{}, puncture{};
    double radius = 0.0;
    std::vector<int> dims;           // mask: pixel counts per axis (x fastest)
    std::vector<std::uint8_t> cells;  // mask: flattened, x fastest
};

struct DataSpec {
    std::string type;  // constant, linear, affine-power, barenblatt, spot, bump, smooth-random, sum, scaled
    std::string label;
    double value = 0.0, a = 0.0, C = 0.0, t_shift = 0.0;
    double radius = 0.0, height = 1.0, t_begin = 0.0, ramp = 0.0;
    double base = 1.0, amplitude = 0.5, max_wavenumber = 6.0, factor = 1.0;
    int modes = 4;
    Point b{}, center{};
    std::string stream = "smooth";
    std::vector<DataSpec> terms;
};

struct TimeSpec {
    double t0 = 0.0;
    double t_end = 1.0;
    int steps = 1;
    /// Steps scale as (resolution / base resolution)^steps_scale.
    double steps_scale = 1.0;
};

struct CylinderSpec {
    ShapeSpec base;
    double t1 = 0.0, t2 = 0.0;
};

struct DomainSpec {
    int n = 2;
    bool has_box = false;
    Point lo{}, hi{};
    bool has_time = false;
    TimeSpec time;
    std::vector<CylinderSpec> cylinders;
};

struct PointCase {
    Point x{};
    double t = 0.0;
    std::optional<double> truncation;
    std::string expect;  // verdict or branch; empty means no declared expectation
};

struct FamilySpec {
    bool use_default = true;
    std::vector<DataSpec> members;
};

struct SolveOp {
    std::string output = "final";  // final, none
    struct Compare {
        DataSpec data;
        ComparisonMode mode = ComparisonMode::Parabolic;
    };
    std::optional<Compare> compare;
    struct Trials {
        int count = 100;
        ComparisonMode mode = ComparisonMode::Parabolic;
        double base = 1.0, amplitude = 0.5;
        double offset_base = 0.3, offset_amplitude = 0.25;
        int modes = 4;
        double max_wavenumber = 6.0;
    };
    std::optional<Trials> trials;
    struct Scaling {
        std::vector<double> a;
        double tol = 0.0;  // 0 selects the solver's linear_tol
    };
    std::optional<Scaling> scaling;
};

struct BarrierCase {
    std::string label;
    BarrierKind kind = BarrierKind::SubSeed7;
    std::vector<double> c;
    std::vector<long> j;  // empty: use min_valid_j
    double m = 2.0;
    int n = 2;
    double diam = 0.0;  // 0: diameter of the domain
    double alpha = 0.0, gamma = 0.0;
    Point x0{};
    double t0 = 0.0;
    bool torsion = false;
    std::string expect = "pass";  // pass, violation, violation-if-insufficient
};

struct MinJCase {
    BarrierKind kind = BarrierKind::EarliestUpper10;
    double c = 1.0, m = 2.0, diam = 1.0;
    int n = 2;
    std::optional<long> expect;
};

struct BarrierOp {
    std::vector<BarrierCase> cases;
    std::vector<MinJCase> min_j;
    SamplingPolicy policy;
};

struct PerronOp {
    std::vector<double> eps;
    bool with_coarse = true;
    double gap_factor = 3.0;
};

struct ProbeOp {
    std::vector<PointCase> points;
    FamilySpec family;
    ProbeOptions options;
    bool check_gaps_decrease = false;
    std::optional<double> intercept_factor;
};

struct DichotomyOp {
    std::vector<PointCase> points;
    std::optional<DataSpec> data;
    ProbeOptions options;
};

struct FutureOp {
    std::vector<PointCase> points;
    FamilySpec family;
    ProbeOptions options;
};

struct CapacityOp {
    ShapeSpec ambient;
    std::vector<ShapeSpec> sets;
    bool nested = false;
    std::vector<ShapeSpec> ambient_ladder;
    CapacityOptions options;
};

struct WienerCase {
    std::string label;
    ShapeSpec domain;
    Point x0{};
    std::string expect;
};

struct WienerOp {
    std::vector<WienerCase> cases;
    WienerOptions options;
    ThicknessOptions thickness;
};

struct TorsionOp {
    ShapeSpec domain;
    Point x0{};
    std::vector<double> radii;
    bool expect_vanishing = false;
};

struct DeGiorgiOp {
    Point x0{};
    double t0 = 0.0, rho = 0.1, sigma = 0.5;
    double k_fraction = 0.5;
    std::vector<double> M_fractions{0.0, 0.25, 0.5};
    std::vector<int> resolutions;  // empty: {resolution / 2, resolution}
    double stability_tol = 0.2;
    int j_max = 20;
};

struct BarenblattOp {
    double C = 0.0625;
    std::vector<int> resolutions;
    double min_order = 0.8;
    double max_seconds = 60.0;
};

using OperationSpec = std::variant<SolveOp, BarrierOp, PerronOp, ProbeOp, DichotomyOp, FutureOp, CapacityOp,
                                   WienerOp, TorsionOp, DeGiorgiOp, BarenblattOp>;

struct Scenario {
    std::string name;
    std::string description;
    std::uint64_t seed = 0;
    int resolution = 64;
    std::string output;
    DomainSpec domain;
    std::optional<DataSpec> data;
    SolverConfig solver;
    std::string operation;
    OperationSpec op;
    json raw;
};

/// Operation names in schema order.
const std::vector<std::string>& operation_names();

Scenario parse_scenario(const json& j);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<input>");
/// A file path, or the name of a bundled scenario.
Scenario load_scenario(const std::string& path_or_name);

std::string bundled_dir();
/// (name, description) of every bundled scenario, sorted by name.
std::vector<std::pair<std::string, std::string>> list_bundled();

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunOptions {
    std::string out_dir;  // empty: no files written
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
    int threads = 1;
};

struct RunReport {
    std::string name;
    std::string operation;
    std::uint64_t seed = 0;
    int resolution = 0;
    double wall_time = 0.0;
    std::vector<Check> checks;
    std::vector<std::string> artifacts;
    json results;
    json scenario;

    bool passed() const;
    json to_json() const;
};

RunReport run_scenario(const Scenario& s, const RunOptions& opt = {});

// Builders, exposed for tests and tools.
Grid build_grid(const DomainSpec& d, double h, const std::vector<const ShapeSpec*>& shapes);
SpatialDomain build_shape(const ShapeSpec& s, const Grid& g);
std::shared_ptr<const SpaceTimeDomain> build_domain(const DomainSpec& d, int resolution, int base_resolution);
BoundaryData build_data(const DataSpec& s, double m, int n, std::uint64_t seed, double t0);

}  // namespace pmelab
