#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace obscert {

/// A point or vector in the plane. In one dimension only `x` is used and `y`
/// stays zero.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point, Point) = default;
};

double dot(Point a, Point b);
double norm(Point a);

enum class DomainKind { box, disk, torus };

const char* to_string(DomainKind kind);

/// The ambient region. Boxes and tori span [0, extent) on each axis; a disk
/// of radius R is centred at (R, R) inside the square [0, 2R]^2.
///
/// Boxes and disks are convex and the torus has no boundary, so a ray from an
/// interior point leaves the region at most once.
class Domain {
 public:
  static Domain interval(double length);
  static Domain box(double lx, double ly);
  static Domain disk(double radius);
  static Domain circle(double period);
  static Domain torus(double lx, double ly);
  static Domain make(DomainKind kind, int dimension, std::array<double, 2> extent);

  [[nodiscard]] DomainKind kind() const { return kind_; }
  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] double extent(int axis) const { return extent_[axis]; }
  [[nodiscard]] bool periodic() const { return kind_ == DomainKind::torus; }
  [[nodiscard]] double diameter() const;
  /// Exact Lebesgue measure of the continuum region.
  [[nodiscard]] double volume() const;

  [[nodiscard]] bool contains(Point p) const;
  /// Shortest displacement from `a` to `b` (periodic on the torus).
  [[nodiscard]] Point displacement(Point a, Point b) const;
  [[nodiscard]] double distance(Point a, Point b) const;
  /// Canonical representative of `p` (wraps on the torus, identity otherwise).
  [[nodiscard]] Point wrap(Point p) const;
  /// Largest t such that p + s*dir stays in the closed region for s in [0, t].
  /// Infinite on the torus. `dir` must be a unit vector and `p` inside.
  [[nodiscard]] double exit_parameter(Point p, Point dir) const;
  /// Closest point of the closed region to `p`.
  [[nodiscard]] Point clamp(Point p) const;

 private:
  DomainKind kind_ = DomainKind::box;
  int dim_ = 1;
  std::array<double, 2> extent_{1.0, 1.0};
};

/// Cell-centred discretization of a domain's bounding box.
class Grid {
 public:
  Grid(Domain domain, int cells_per_axis);
  Grid(Domain domain, std::array<int, 2> cells);

  [[nodiscard]] const Domain& domain() const { return domain_; }
  [[nodiscard]] int dimension() const { return domain_.dimension(); }
  [[nodiscard]] int cells(int axis) const { return cells_[axis]; }
  [[nodiscard]] double h(int axis) const { return h_[axis]; }
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
  }
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0]) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] std::array<int, 2> coords(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(cells_[0])),
            static_cast<int>(idx / static_cast<std::size_t>(cells_[0]))};
  }
  [[nodiscard]] Point center(std::size_t idx) const;
  [[nodiscard]] Point center(int i, int j) const;
  /// Cell-centre membership; exterior cells never belong to a set.
  [[nodiscard]] bool interior(std::size_t idx) const { return interior_[idx] != 0; }
  [[nodiscard]] std::size_t interior_count() const { return interior_count_; }
  /// Cell-counting measure of the domain.
  [[nodiscard]] double domain_measure() const {
    return static_cast<double>(interior_count_) * cell_volume();
  }
  /// Cell containing p (p is wrapped on the torus); clamped to the grid.
  [[nodiscard]] std::size_t locate(Point p) const;
  /// Visits every interior cell whose centre lies in the closed ball, in
  /// increasing index order.
  void for_each_cell_in_ball(Point center, double radius,
                             const std::function<void(std::size_t)>& visit) const;

 private:
  Domain domain_;
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> h_{1.0, 1.0};
  std::vector<std::uint8_t> interior_;
  std::size_t interior_count_ = 0;
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// A set E given as a cell-indicator mask over a grid.
class MeasurableSet {
 public:
  explicit MeasurableSet(Grid grid);  // empty set
  MeasurableSet(Grid grid, std::vector<std::uint8_t> mask);

  static MeasurableSet full(const Grid& grid);
  /// Cells whose centre satisfies the predicate.
  static MeasurableSet from_predicate(const Grid& grid,
                                     const std::function<bool(Point)>& inside);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] bool contains_cell(std::size_t idx) const { return mask_[idx] != 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& mask() const { return mask_; }
  [[nodiscard]] std::size_t count() const { return count_; }
  /// Whether the point lies in a true cell (half-open cell convention).
  [[nodiscard]] bool contains_point(Point p) const;

 private:
  Grid grid_;
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

/// Cell-counting measure: count of true cells times h^d.
double measure(const MeasurableSet& set);

/// w + t*direction for t in [0, t_max].
struct Segment {
  Point origin;
  Point direction;
  double t_max = 0.0;

  [[nodiscard]] Point at(double t) const { return origin + t * direction; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double length() const { return hi - lo; }
};

/// Sorted, pairwise disjoint closed subintervals of [0, t_max].
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Sorts and merges overlapping or touching intervals; drops empty ones.
  explicit IntervalSet(std::vector<Interval> intervals);

  [[nodiscard]] const std::vector<Interval>& intervals() const { return intervals_; }
  [[nodiscard]] bool empty() const { return intervals_.empty(); }
  [[nodiscard]] double total_length() const;
  /// Smallest point p >= a such that every right-neighbourhood of p meets
  /// the set in positive length; nullopt-like NaN when none exists.
  [[nodiscard]] double essential_infimum_from(double a) const;

 private:
  std::vector<Interval> intervals_;
};

/// Lattice cover of the domain by closed balls of radius r, spacing r/sqrt(d).
std::vector<Ball> cover_domain(const Domain& domain, double r);

/// Upper bound on the cover size, (ceil(diam*sqrt(d)/r) + 1)^d.
std::size_t cover_count_bound(const Domain& domain, double r);

struct DensestBall {
  Ball ball;
  std::size_t index = 0;     ///< position in the cover
  std::size_t cells = 0;     ///< true cells of E with centre in the ball
  double measure = 0.0;      ///< cells * h^d
};

/// Cells of `set` whose centre lies in the closed ball.
std::size_t count_cells_in_ball(const MeasurableSet& set, const Ball& ball);

DensestBall densest_ball(const MeasurableSet& set, const std::vector<Ball>& cover);

struct BallChain {
  std::vector<Point> centers;   ///< centers.front() == from, centers.back() == to
  double radius = 0.0;
  double path_length = 0.0;     ///< length of the polyline the centres sit on
  [[nodiscard]] int steps() const { return static_cast<int>(centers.size()) - 1; }
};

/// Overlapping chain of radius-r balls from `from` to `to`, consecutive
/// centres at most r/2 apart. Connectivity is checked by a breadth-first
/// search over interior cells; centres are then spaced evenly along the
/// shortest (periodic) segment, which stays in every supported domain.
BallChain chain_of_balls(const Grid& grid, Point from, Point to, double r);

struct RayChoice {
  Segment segment;          ///< L = ray from w clipped to the ball and domain
  IntervalSet trace;        ///< parameters t of L with w + t*mu in E
  std::size_t direction_index = 0;
  std::size_t direction_count = 0;
  [[nodiscard]] double measure() const { return trace.total_length(); }
};

/// Unit directions sampled for the ray search: +-x in 1D, `count` evenly
/// spaced angles in 2D starting at angle 0.
std::vector<Point> direction_fan(int dimension, int count);

/// Picks the direction from w whose ray inside `ball` meets E in the largest
/// 1D measure. Ties go to the smallest direction index.
RayChoice best_ray_interval(const Ball& ball, const MeasurableSet& set, Point w,
                            int directions = 64);

/// Exact trace of the mask along the segment: each cell crossed contributes
/// its entry/exit parameters when it is a true cell.
IntervalSet restrict_to_segment(const MeasurableSet& set, const Segment& seg);

/// Plain-PBM (P1) raster with a `# cell hx hy` comment. Row j = 0 is written
/// first and holds the cells with the smallest y.
void write_mask(std::ostream& out, const MeasurableSet& set);
MeasurableSet read_mask(std::istream& in, const Grid& grid);

}  // namespace obscert
