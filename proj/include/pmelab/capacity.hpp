#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"

namespace pmelab {

/// Voxel set E inside an ambient domain V on the same grid.
class CompactMask {
public:
    CompactMask(SpatialDomain ambient, std::vector<std::uint8_t> cells);

    const SpatialDomain& ambient() const { return ambient_; }
    const Grid& grid() const { return ambient_.grid(); }
    const std::vector<std::uint8_t>& cells() const { return cells_; }
    bool empty() const { return count_ == 0; }
    std::size_t count() const { return count_; }

private:
    SpatialDomain ambient_;
    std::vector<std::uint8_t> cells_;
    std::size_t count_ = 0;
};

struct CapacityOptions {
    double tol = 1e-10;
    int max_iter = 100000;
};

struct CapacityResult {
    double value = 0.0;
    int iterations = 0;
    double relative_residual = 0.0;
    std::size_t free_nodes = 0;
};

/// Discrete minimum of sum_edges h^{n-2}(u_i - u_j)^2 + sum h^n u_i^2 with
/// u = 1 on E dilated by one cell and u = 0 on the ambient boundary.
CapacityResult capacity(const CompactMask& E, const CapacityOptions& opt = {});

/// Box grid of half-width `half_cells` cells around the node nearest x0 of `like`.
Grid centered_box_grid(const Grid& like, const Point& x0, int half_cells);

struct WienerOptions {
    int k_min = 0;
    int k_max = -1;  // automatic: smallest radius still >= 2 cells
    /// Ambient box side as a multiple of the diameter of the largest ball.
    double box_factor = 4.0;
    CapacityOptions cap;
};

struct CapacityProfile {
    Point x0{0.0, 0.0, 0.0};
    int n = 2;
    double h = 0.0;
    std::vector<int> k;
    std::vector<double> radii;
    std::vector<double> cap_values;
    std::vector<double> integrands;
    std::vector<double> partial_sums;
    /// Capacity of the single cell at x0 in the same ambient box.
    double cell_floor = 0.0;
    /// (cap - cell_floor)_+ / r^{n-2}, and their dyadic sums.
    std::vector<double> resolved_integrands;
    std::vector<double> resolved_partial_sums;
    std::vector<std::size_t> complement_cells;
    double box_half_width = 0.0;
};

CapacityProfile wiener_profile(const SpatialDomain& U, const Point& x0, const WienerOptions& opt = {});

enum class Thickness { Thick, Thin, Inconclusive };
std::string to_string(Thickness t);

struct ThicknessOptions {
    double slope_tol = 0.1;
    /// <= 0 selects 10x the single-cell capacity of the profile.
    double sum_tol = 0.0;
};

struct ThicknessReport {
    Thickness verdict = Thickness::Inconclusive;
    double slope = 0.0;
    double total = 0.0;
    bool summands_nonincreasing = false;
    std::string confidence;  // "high" or "low"
    double slope_tol = 0.0;
    double sum_tol = 0.0;
};

ThicknessReport classify_thickness(const CapacityProfile& p, const ThicknessOptions& opt = {});

struct TorsionResult {
    StaticField field;
    double min_excess = 0.0;  // min over interior cells of v - |x - x0|
    int iterations = 0;
};

/// -Lap_h v = 1 on interior cells, v = |x - x0| on boundary cells.
TorsionResult torsion_profile(const SpatialDomain& U, const Point& x0, const CapacityOptions& opt = {});

/// True when the nearest grid position to x0 is a boundary cell of U or an
/// exterior cell face-adjacent to U.
bool on_boundary(const SpatialDomain& U, const Point& x0);
bool is_connected(const SpatialDomain& U);

}  // namespace pmelab
