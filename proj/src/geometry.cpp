#include "pmelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmelab {

Grid::Grid(int n, double h, Point origin, Index3 extents)
    : n_(n), h_(h), origin_(origin), extents_(extents) {
    if (n < 1 || n > 3) throw GeometryError("grid dimension must be 1, 2 or 3");
    if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("grid spacing must be positive");
    for (int a = 0; a < 3; ++a) {
        if (a >= n) {
            extents_[a] = 1;
            origin_[a] = 0.0;
        }
        if (extents_[a] < 1) throw GeometryError("grid extents must be >= 1 per axis");
    }
    stride_ = {1, static_cast<std::size_t>(extents_[0]),
               static_cast<std::size_t>(extents_[0]) * static_cast<std::size_t>(extents_[1])};
    size_ = stride_[2] * static_cast<std::size_t>(extents_[2]);
}

Grid Grid::covering(int n, double h, const Point& lo, const Point& hi) {
    Index3 ext{1, 1, 1};
    for (int a = 0; a < n; ++a) {
        if (hi[a] < lo[a]) throw GeometryError("box upper corner below lower corner");
        ext[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / h + 1e-9)) + 1;
    }
    return Grid(n, h, lo, ext);
}

double Grid::cell_volume() const { return std::pow(h_, n_); }

Index3 Grid::index(std::size_t cell) const {
    Index3 idx{0, 0, 0};
    idx[2] = static_cast<int>(cell / stride_[2]);
    std::size_t r = cell % stride_[2];
    idx[1] = static_cast<int>(r / stride_[1]);
    idx[0] = static_cast<int>(r % stride_[1]);
    return idx;
}

std::size_t Grid::linear(const Index3& idx) const {
    return static_cast<std::size_t>(idx[0]) + stride_[1] * static_cast<std::size_t>(idx[1]) +
           stride_[2] * static_cast<std::size_t>(idx[2]);
}

bool Grid::in_range(const Index3& idx) const {
    for (int a = 0; a < 3; ++a)
        if (idx[a] < 0 || idx[a] >= extents_[a]) return false;
    return true;
}

Point Grid::center(const Index3& idx) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < n_; ++a) p[a] = origin_[a] + idx[a] * h_;
    return p;
}

Point Grid::center(std::size_t cell) const { return center(index(cell)); }

std::optional<std::size_t> Grid::nearest(const Point& x) const {
    Index3 idx{0, 0, 0};
    for (int a = 0; a < n_; ++a) {
        double s = (x[a] - origin_[a]) / h_;
        long r = std::lround(s);
        if (r < 0 || r >= extents_[a]) {
            if (s < -0.5 - 1e-9 || s > extents_[a] - 0.5 + 1e-9) return std::nullopt;
            r = std::clamp<long>(r, 0, extents_[a] - 1);
        }
        idx[a] = static_cast<int>(r);
    }
    return linear(idx);
}

bool Grid::same_as(const Grid& o) const {
    if (n_ != o.n_ || extents_ != o.extents_) return false;
    if (std::abs(h_ - o.h_) > 1e-12 * h_) return false;
    for (int a = 0; a < n_; ++a)
        if (std::abs(origin_[a] - o.origin_[a]) > 1e-9 * h_) return false;
    return true;
}

Grid Grid::coarsened() const {
    Index3 ext = extents_;
    for (int a = 0; a < n_; ++a) ext[a] = (extents_[a] + 1) / 2;
    return Grid(n_, 2.0 * h_, origin_, ext);
}

double distance(const Point& a, const Point& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

SpatialDomain::SpatialDomain(Grid grid, std::vector<std::uint8_t> mask, bool allow_empty)
    : grid_(std::move(grid)), mask_(std::move(mask)) {
    if (mask_.size() != grid_.size()) throw GeometryError("mask size does not match grid");
    kind_.assign(mask_.size(), 0);
    for (std::size_t c = 0; c < mask_.size(); ++c) {
        if (!mask_[c]) continue;
        mask_[c] = 1;
        ++count_;
        bool edge = false;
        int missing = grid_.for_each_neighbor(c, [&](std::size_t nb) {
            if (!mask_[nb]) edge = true;
        });
        if (missing > 0) edge = true;
        kind_[c] = edge ? 2 : 1;
        if (edge) boundary_.push_back(c);
    }
    if (count_ == 0 && !allow_empty) throw GeometryError("spatial domain mask is empty");
}

SpatialDomain SpatialDomain::from_predicate(const Grid& grid,
                                            const std::function<bool(const Point&)>& pred) {
    std::vector<std::uint8_t> mask(grid.size(), 0);
    for (std::size_t c = 0; c < grid.size(); ++c) mask[c] = pred(grid.center(c)) ? 1 : 0;
    return SpatialDomain(grid, std::move(mask));
}

bool SpatialDomain::subset_of(const SpatialDomain& o) const {
    if (!grid_.same_as(o.grid_)) throw GeometryError("domains live on different grids");
    for (std::size_t c = 0; c < mask_.size(); ++c)
        if (mask_[c] && !o.mask_[c]) return false;
    return true;
}

bool SpatialDomain::same_cells(const SpatialDomain& o) const {
    return grid_.same_as(o.grid_) && mask_ == o.mask_;
}

SpatialDomain SpatialDomain::united(const SpatialDomain& o) const {
    if (!grid_.same_as(o.grid_)) throw GeometryError("domains live on different grids");
    std::vector<std::uint8_t> m(mask_.size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = (mask_[c] || o.mask_[c]) ? 1 : 0;
    return SpatialDomain(grid_, std::move(m), true);
}

SpatialDomain SpatialDomain::coarsened() const {
    Grid cg = grid_.coarsened();
    std::vector<std::uint8_t> m(cg.size(), 0);
    for (std::size_t c = 0; c < cg.size(); ++c) {
        Index3 idx = cg.index(c);
        for (int a = 0; a < grid_.n(); ++a) idx[a] *= 2;
        m[c] = mask_[grid_.linear(idx)];
    }
    return SpatialDomain(cg, std::move(m), true);
}

SpatialDomain make_ball(const Grid& g, const Point& center, double radius) {
    if (!(radius > 0.0)) throw GeometryError("ball radius must be positive");
    double tol = 1e-9 * g.h();
    return SpatialDomain::from_predicate(
        g, [&](const Point& x) { return distance(x, center, g.n()) <= radius + tol; });
}

SpatialDomain make_box(const Grid& g, const Point& lo, const Point& hi) {
    double tol = 1e-9 * g.h();
    for (int a = 0; a < g.n(); ++a)
        if (hi[a] < lo[a]) throw GeometryError("box upper corner below lower corner");
    return SpatialDomain::from_predicate(g, [&](const Point& x) {
        for (int a = 0; a < g.n(); ++a)
            if (x[a] < lo[a] - tol || x[a] > hi[a] + tol) return false;
        return true;
    });
}

namespace {

double segment_distance(const Point& x, const Point& a, const Point& b, int n) {
    double len2 = 0.0, dot = 0.0;
    for (int i = 0; i < n; ++i) {
        len2 += (b[i] - a[i]) * (b[i] - a[i]);
        dot += (x[i] - a[i]) * (b[i] - a[i]);
    }
    double s = len2 > 0.0 ? std::clamp(dot / len2, 0.0, 1.0) : 0.0;
    Point p{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) p[i] = a[i] + s * (b[i] - a[i]);
    return distance(x, p, n);
}

}  // namespace

SpatialDomain make_box_minus_segment(const Grid& g, const Point& lo, const Point& hi,
                                     const Point& a, const Point& b) {
    SpatialDomain box = make_box(g, lo, hi);
    std::vector<std::uint8_t> m = box.mask();
    double reach = 0.5 * g.h() + 1e-9 * g.h();
    for (std::size_t c = 0; c < g.size(); ++c)
        if (m[c] && segment_distance(g.center(c), a, b, g.n()) <= reach) m[c] = 0;
    return SpatialDomain(g, std::move(m));
}

SpatialDomain make_punctured_ball(const Grid& g, const Point& center, double radius,
                                  const Point& puncture) {
    SpatialDomain ball = make_ball(g, center, radius);
    auto hole = g.nearest(puncture);
    if (!hole || !ball.inside(*hole)) throw GeometryError("puncture lies outside the ball");
    std::vector<std::uint8_t> m = ball.mask();
    m[*hole] = 0;
    return SpatialDomain(g, std::move(m));
}

int TimeGrid::nearest_level(double t) const {
    return static_cast<int>(std::lround((t - t0) / dt));
}

int TimeGrid::level_of(double t) const {
    double s = (t - t0) / dt;
    long k = std::lround(s);
    if (std::abs(s - static_cast<double>(k)) > 1e-6)
        throw GeometryError("time " + std::to_string(t) + " does not lie on the time grid");
    if (k < 0 || k > steps)
        throw GeometryError("time " + std::to_string(t) + " outside the time grid");
    return static_cast<int>(k);
}

Cylinder::Cylinder(SpatialDomain base, double t1, double t2)
    : base_(std::move(base)), t1_(t1), t2_(t2) {
    if (!(t1 < t2)) throw GeometryError("cylinder requires t1 < t2");
    if (base_.empty()) throw GeometryError("cylinder base is empty");
}

SpaceTimeDomain::SpaceTimeDomain(Grid grid, TimeGrid time, std::vector<Cylinder> cylinders)
    : grid_(std::move(grid)), time_(time), cylinders_(std::move(cylinders)) {
    if (!(time_.dt > 0.0) || time_.steps < 1) throw GeometryError("time grid needs dt > 0 and steps >= 1");
    kinds_.assign(grid_.size() * static_cast<std::size_t>(time_.levels()), 0);
    for (const auto& cyl : cylinders_) {
        if (!cyl.base().grid().same_as(grid_))
            throw GeometryError("cylinder base grid differs from the domain grid");
        int k1 = time_.level_of(cyl.t1());
        int k2 = time_.level_of(cyl.t2());
        if (k2 <= k1) throw GeometryError("cylinder spans no time step");
        k1_.push_back(k1);
        k2_.push_back(k2);
    }
    // Interior wins over boundary: a sample inside any cylinder's discrete
    // interior is not on the parabolic boundary of the union.
    for (std::size_t ci = 0; ci < cylinders_.size(); ++ci) {
        const SpatialDomain& b = cylinders_[ci].base();
        for (int k = k1_[ci]; k <= k2_[ci]; ++k) {
            std::uint8_t* row = kinds_.data() + static_cast<std::size_t>(k) * grid_.size();
            for (std::size_t c = 0; c < grid_.size(); ++c) {
                if (!b.inside(c)) continue;
                if (k > k1_[ci] && b.is_interior(c)) {
                    row[c] = 1;
                } else if (row[c] == 0) {
                    row[c] = 2;
                }
            }
        }
    }
}

double SpaceTimeDomain::t_min() const {
    if (cylinders_.empty()) return time_.t0;
    return time_.time(*std::min_element(k1_.begin(), k1_.end()));
}

double SpaceTimeDomain::t_max() const {
    if (cylinders_.empty()) return time_.t0;
    return time_.time(*std::max_element(k2_.begin(), k2_.end()));
}

SpaceTimeDomain SpaceTimeDomain::truncated(double T) const {
    int kt = time_.nearest_level(T);
    std::vector<Cylinder> cut;
    for (std::size_t ci = 0; ci < cylinders_.size(); ++ci) {
        if (k1_[ci] >= kt) continue;
        int k2 = std::min(k2_[ci], kt);
        cut.emplace_back(cylinders_[ci].base(), time_.time(k1_[ci]), time_.time(k2));
    }
    TimeGrid tg = time_;
    tg.steps = std::clamp(kt, 1, time_.steps);
    return SpaceTimeDomain(grid_, tg, std::move(cut));
}

SpaceTimeDomain SpaceTimeDomain::coarsened() const {
    for (std::size_t ci = 0; ci < cylinders_.size(); ++ci)
        if (k1_[ci] % 2 != 0 || k2_[ci] % 2 != 0)
            throw GeometryError("coarsening needs cylinder times on even levels");
    TimeGrid tg{time_.t0, 2.0 * time_.dt, time_.steps / 2};
    if (tg.steps < 1) throw GeometryError("too few time steps to coarsen");
    std::vector<Cylinder> cyls;
    for (const auto& c : cylinders_) cyls.emplace_back(c.base().coarsened(), c.t1(), c.t2());
    return SpaceTimeDomain(grid_.coarsened(), tg, std::move(cyls));
}

std::vector<Sample> parabolic_boundary(const SpaceTimeDomain& d) {
    std::vector<Sample> out;
    const std::size_t N = d.grid().size();
    for (int k = 0; k < d.time().levels(); ++k)
        for (std::size_t c = 0; c < N; ++c)
            if (d.kind(c, k) == SampleKind::Boundary) out.push_back({c, k});
    return out;
}

std::vector<std::uint8_t> section_mask(const SpaceTimeDomain& d, int level) {
    std::vector<std::uint8_t> m(d.grid().size(), 0);
    for (std::size_t ci = 0; ci < d.cylinders().size(); ++ci) {
        if (!(d.level_begin(ci) < level && level <= d.level_end(ci))) continue;
        const auto& bm = d.cylinders()[ci].base().mask();
        for (std::size_t c = 0; c < m.size(); ++c)
            if (bm[c]) m[c] = 1;
    }
    return m;
}

TimeSection time_section(const SpaceTimeDomain& d, double T) {
    TimeSection s;
    const TimeGrid& tg = d.time();
    if (d.empty() || T < d.t_min() - 1e-9 * tg.dt || T > d.t_max() + 1e-9 * tg.dt) {
        s.out_of_range = true;
        return s;
    }
    int k = tg.nearest_level(T);
    if (std::abs(tg.time(k) - T) > 1e-6 * tg.dt)
        k = static_cast<int>(std::ceil((T - tg.t0) / tg.dt));
    auto m = section_mask(d, k);
    if (std::none_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; })) return s;
    s.domain = SpatialDomain(d.grid(), std::move(m));
    return s;
}

MonotoneCheck check_monotone_sections(const SpaceTimeDomain& d) {
    MonotoneCheck r;
    if (d.empty()) return r;
    const TimeGrid& tg = d.time();
    int kmin = tg.level_of(d.t_min());
    int kmax = tg.level_of(d.t_max());
    std::vector<std::uint8_t> prev;
    for (int k = kmin + 1; k < kmax; ++k) {
        auto cur = section_mask(d, k);
        if (!prev.empty()) {
            for (std::size_t c = 0; c < cur.size(); ++c) {
                if (prev[c] && !cur[c]) {
                    r.monotone = false;
                    r.first_violation = SectionViolation{k - 1, k, tg.time(k - 1), tg.time(k), c};
                    return r;
                }
            }
        }
        prev = std::move(cur);
    }
    return r;
}

namespace {

double max_pair_distance2(const SpatialDomain& a, const SpatialDomain& b) {
    const Grid& g = a.grid();
    const auto& ba = a.boundary_cells();
    const auto& bb = b.boundary_cells();
    std::vector<Point> pb;
    pb.reserve(bb.size());
    for (auto c : bb) pb.push_back(g.center(c));
    double best = 0.0;
    for (auto ca : ba) {
        Point x = g.center(ca);
        for (const auto& y : pb) {
            double s = 0.0;
            for (int i = 0; i < g.n(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
            best = std::max(best, s);
        }
    }
    return best;
}

}  // namespace

// The farthest pair of a finite set is formed by extreme points, and every
// extreme cell of a voxel set is a boundary cell.
double diameter(const SpatialDomain& s) {
    if (s.empty()) throw GeometryError("diameter of an empty domain");
    return std::sqrt(max_pair_distance2(s, s));
}

double diameter(const SpaceTimeDomain& d) {
    if (d.empty()) throw GeometryError("diameter of an empty domain");
    const auto& cyl = d.cylinders();
    const TimeGrid& tg = d.time();
    double best = 0.0;
    for (std::size_t i = 0; i < cyl.size(); ++i) {
        for (std::size_t j = i; j < cyl.size(); ++j) {
            double dx2 = max_pair_distance2(cyl[i].base(), cyl[j].base());
            double dt = std::max(tg.time(d.level_end(i)) - tg.time(d.level_begin(j)),
                                 tg.time(d.level_end(j)) - tg.time(d.level_begin(i)));
            best = std::max(best, dx2 + dt * dt);
        }
    }
    return std::sqrt(best);
}

double StaticField::at(const Point& x) const {
    if (!domain) throw GeometryError("static field without a domain");
    auto c = domain->grid().nearest(x);
    if (!c || !domain->inside(*c)) throw GeometryError("point outside the static field's domain");
    return values[*c];
}

}  // namespace pmelab
