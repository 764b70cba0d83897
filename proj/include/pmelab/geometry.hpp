#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmelab {

using Point = std::array<double, 3>;
using Index3 = std::array<int, 3>;

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Node-aligned voxel grid. Cell `i` along an axis has center origin + i*h.
/// Unused axes (beyond n) have extent 1.
class Grid {
public:
    Grid(int n, double h, Point origin, Index3 extents);

    /// Grid of spacing h whose nodes cover the box [lo, hi] (hi snapped down).
    static Grid covering(int n, double h, const Point& lo, const Point& hi);

    int n() const { return n_; }
    double h() const { return h_; }
    const Point& origin() const { return origin_; }
    const Index3& extents() const { return extents_; }
    std::size_t size() const { return size_; }
    double cell_volume() const;

    Index3 index(std::size_t cell) const;
    std::size_t linear(const Index3& idx) const;
    bool in_range(const Index3& idx) const;
    Point center(std::size_t cell) const;
    Point center(const Index3& idx) const;
    /// Nearest cell to x, or nullopt when x lies outside the grid by more than h/2.
    std::optional<std::size_t> nearest(const Point& x) const;

    /// Face neighbours inside the grid; returns the count of missing neighbours.
    template <class F>
    int for_each_neighbor(std::size_t cell, F&& f) const {
        Index3 idx = index(cell);
        int missing = 0;
        for (int a = 0; a < n_; ++a) {
            if (idx[a] > 0) f(cell - stride_[a]); else ++missing;
            if (idx[a] + 1 < extents_[a]) f(cell + stride_[a]); else ++missing;
        }
        return missing;
    }

    bool same_as(const Grid& o) const;
    /// Every other node along each axis; spacing doubles.
    Grid coarsened() const;

private:
    int n_;
    double h_;
    Point origin_;
    Index3 extents_;
    std::array<std::size_t, 3> stride_{};
    std::size_t size_;
};

double distance(const Point& a, const Point& b, int n);

/// Voxel set U. `inside` marks the closure; boundary cells are inside cells
/// with a face neighbour outside the mask or outside the grid.
class SpatialDomain {
public:
    SpatialDomain(Grid grid, std::vector<std::uint8_t> mask, bool allow_empty = false);

    static SpatialDomain from_predicate(const Grid& grid,
                                        const std::function<bool(const Point&)>& pred);

    const Grid& grid() const { return grid_; }
    bool inside(std::size_t cell) const { return mask_[cell] != 0; }
    bool is_boundary(std::size_t cell) const { return kind_[cell] == 2; }
    bool is_interior(std::size_t cell) const { return kind_[cell] == 1; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    const std::vector<std::size_t>& boundary_cells() const { return boundary_; }
    std::size_t count() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool subset_of(const SpatialDomain& o) const;
    bool same_cells(const SpatialDomain& o) const;
    SpatialDomain united(const SpatialDomain& o) const;
    /// Restriction to the coarsened grid (even-index nodes).
    SpatialDomain coarsened() const;

private:
    Grid grid_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::uint8_t> kind_;  // 0 outside, 1 interior, 2 boundary
    std::vector<std::size_t> boundary_;
    std::size_t count_ = 0;
};

// Named primitives. Nodes within h*1e-9 of the shape's closure are included.
SpatialDomain make_ball(const Grid& g, const Point& center, double radius);
SpatialDomain make_box(const Grid& g, const Point& lo, const Point& hi);
/// Box minus the nodes within h/2 of the segment [a, b].
SpatialDomain make_box_minus_segment(const Grid& g, const Point& lo, const Point& hi,
                                     const Point& a, const Point& b);
/// Ball minus the single node nearest to `puncture`.
SpatialDomain make_punctured_ball(const Grid& g, const Point& center, double radius,
                                  const Point& puncture);

struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    int steps = 1;

    int levels() const { return steps + 1; }
    double time(int k) const { return t0 + k * dt; }
    /// Level at time t; throws unless t is within 1e-6*dt of a level.
    int level_of(double t) const;
    int nearest_level(double t) const;
};

class Cylinder {
public:
    Cylinder(SpatialDomain base, double t1, double t2);
    const SpatialDomain& base() const { return base_; }
    double t1() const { return t1_; }
    double t2() const { return t2_; }

private:
    SpatialDomain base_;
    double t1_, t2_;
};

enum class SampleKind : std::uint8_t { Outside = 0, Interior = 1, Boundary = 2 };

struct Sample {
    std::size_t cell;
    int level;
    bool operator==(const Sample&) const = default;
};

struct SectionViolation {
    int level_before;
    int level_after;
    double time_before;
    double time_after;
    std::size_t lost_cell;
};

struct MonotoneCheck {
    bool monotone = true;
    std::optional<SectionViolation> first_violation;
};

struct TimeSection {
    std::optional<SpatialDomain> domain;  // nullopt when the section is empty
    bool out_of_range = false;
};

/// Finite union of cylinders on a shared grid and uniform time grid.
/// Cylinder times snap to levels; a cylinder U x (t1, t2] owns the levels
/// k1 < k <= k2, and the samples in its discrete parabolic boundary are all
/// closure cells at k1 plus boundary cells at k1 < k <= k2.
class SpaceTimeDomain {
public:
    SpaceTimeDomain(Grid grid, TimeGrid time, std::vector<Cylinder> cylinders);

    const Grid& grid() const { return grid_; }
    const TimeGrid& time() const { return time_; }
    const std::vector<Cylinder>& cylinders() const { return cylinders_; }
    int level_begin(std::size_t c) const { return k1_[c]; }
    int level_end(std::size_t c) const { return k2_[c]; }
    double t_min() const;
    double t_max() const;

    SampleKind kind(std::size_t cell, int level) const {
        return static_cast<SampleKind>(kinds_[static_cast<std::size_t>(level) * grid_.size() + cell]);
    }
    bool defined(std::size_t cell, int level) const { return kind(cell, level) != SampleKind::Outside; }
    std::size_t sample_index(std::size_t cell, int level) const {
        return static_cast<std::size_t>(level) * grid_.size() + cell;
    }
    std::size_t sample_count() const { return kinds_.size(); }
    bool empty() const { return cylinders_.empty(); }

    /// Copy restricted to times <= T (cylinders cut at T, dropped if they start at or after T).
    SpaceTimeDomain truncated(double T) const;
    /// Half resolution in space and time; requires even cylinder levels.
    SpaceTimeDomain coarsened() const;

private:
    Grid grid_;
    TimeGrid time_;
    std::vector<Cylinder> cylinders_;
    std::vector<int> k1_, k2_;
    std::vector<std::uint8_t> kinds_;
};

std::vector<Sample> parabolic_boundary(const SpaceTimeDomain& d);
TimeSection time_section(const SpaceTimeDomain& d, double T);
/// Section at a time level (cells of cylinders with k1 < level <= k2).
std::vector<std::uint8_t> section_mask(const SpaceTimeDomain& d, int level);
MonotoneCheck check_monotone_sections(const SpaceTimeDomain& d);

double diameter(const SpatialDomain& s);

/// Time-independent grid function on a spatial domain.
struct StaticField {
    std::shared_ptr<const SpatialDomain> domain;
    std::vector<double> values;

    /// Value at the nearest cell of the domain's closure; throws outside it.
    double at(const Point& x) const;
};

double diameter(const SpaceTimeDomain& d);

}  // namespace pmelab
