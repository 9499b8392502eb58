#include "obscert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "obscert/errors.hpp"

namespace obscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_coordinate(double v, double period) {
  double r = std::fmod(v, period);
  if (r < 0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

double wrap_difference(double d, double period) {
  d = std::fmod(d, period);
  if (d >= 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

int positive_mod(int v, int n) {
  int r = v % n;
  return r < 0 ? r + n : r;
}

}  // namespace

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double norm(Point a) { return std::hypot(a.x, a.y); }

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::box: return "box";
    case DomainKind::disk: return "disk";
    case DomainKind::torus: return "torus";
  }
  return "unknown";
}

// ---------------------------------------------------------------- Domain

Domain Domain::make(DomainKind kind, int dimension, std::array<double, 2> extent) {
  if (dimension != 1 && dimension != 2)
    throw Error(Stage::config, "domain dimension must be 1 or 2");
  if (kind == DomainKind::disk && dimension != 2)
    throw Error(Stage::config, "disk domains are two-dimensional");
  if (dimension == 1) extent[1] = 1.0;
  if (kind == DomainKind::disk) extent[1] = extent[0];
  for (int a = 0; a < dimension; ++a)
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
      throw Error(Stage::config, "domain extent must be positive and finite");
  Domain d;
  d.kind_ = kind;
  d.dim_ = dimension;
  d.extent_ = extent;
  return d;
}

Domain Domain::interval(double length) { return make(DomainKind::box, 1, {length, 1.0}); }
Domain Domain::box(double lx, double ly) { return make(DomainKind::box, 2, {lx, ly}); }
Domain Domain::disk(double radius) {
  return make(DomainKind::disk, 2, {2.0 * radius, 2.0 * radius});
}
Domain Domain::circle(double period) { return make(DomainKind::torus, 1, {period, 1.0}); }
Domain Domain::torus(double lx, double ly) { return make(DomainKind::torus, 2, {lx, ly}); }

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::box:
      return dim_ == 1 ? extent_[0] : std::hypot(extent_[0], extent_[1]);
    case DomainKind::disk:
      return extent_[0];
    case DomainKind::torus:
      return dim_ == 1 ? 0.5 * extent_[0] : 0.5 * std::hypot(extent_[0], extent_[1]);
  }
  return 0.0;
}

double Domain::volume() const {
  if (kind_ == DomainKind::disk) {
    const double r = 0.5 * extent_[0];
    return std::numbers::pi * r * r;
  }
  return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1];
}

bool Domain::contains(Point p) const {
  switch (kind_) {
    case DomainKind::torus:
      return true;
    case DomainKind::box:
      if (p.x < 0.0 || p.x > extent_[0]) return false;
      return dim_ == 1 || (p.y >= 0.0 && p.y <= extent_[1]);
    case DomainKind::disk: {
      const double r = 0.5 * extent_[0];
      return std::hypot(p.x - r, p.y - r) <= r;
    }
  }
  return false;
}

Point Domain::displacement(Point a, Point b) const {
  Point d = b - a;
  if (kind_ == DomainKind::torus) {
    d.x = wrap_difference(d.x, extent_[0]);
    if (dim_ == 2) d.y = wrap_difference(d.y, extent_[1]);
  }
  if (dim_ == 1) d.y = 0.0;
  return d;
}

double Domain::distance(Point a, Point b) const { return norm(displacement(a, b)); }

Point Domain::wrap(Point p) const {
  if (kind_ != DomainKind::torus) return p;
  Point q{wrap_coordinate(p.x, extent_[0]), 0.0};
  if (dim_ == 2) q.y = wrap_coordinate(p.y, extent_[1]);
  return q;
}

double Domain::exit_parameter(Point p, Point dir) const {
  switch (kind_) {
    case DomainKind::torus:
      return kInf;
    case DomainKind::box: {
      double t = kInf;
      const double comps[2] = {dir.x, dir.y};
      const double pos[2] = {p.x, p.y};
      for (int a = 0; a < dim_; ++a) {
        if (comps[a] > 0) t = std::min(t, (extent_[a] - pos[a]) / comps[a]);
        if (comps[a] < 0) t = std::min(t, -pos[a] / comps[a]);
      }
      return std::max(t, 0.0);
    }
    case DomainKind::disk: {
      const double r = 0.5 * extent_[0];
      const Point q{p.x - r, p.y - r};
      const double b = dot(q, dir);
      const double c = dot(q, q) - r * r;
      const double disc = std::max(b * b - c, 0.0);
      return std::max(-b + std::sqrt(disc), 0.0);
    }
  }
  return 0.0;
}

Point Domain::clamp(Point p) const {
  switch (kind_) {
    case DomainKind::torus:
      return wrap(p);
    case DomainKind::box:
      return {std::clamp(p.x, 0.0, extent_[0]),
              dim_ == 1 ? 0.0 : std::clamp(p.y, 0.0, extent_[1])};
    case DomainKind::disk: {
      const double r = 0.5 * extent_[0];
      const Point q{p.x - r, p.y - r};
      const double len = norm(q);
      if (len <= r) return p;
      double s = r / len;
      Point c = Point{r, r} + s * q;
      while (!contains(c)) {
        s = std::nextafter(s, 0.0);
        c = Point{r, r} + s * q;
      }
      return c;
    }
  }
  return p;
}

// ------------------------------------------------------------------ Grid

Grid::Grid(Domain domain, int cells_per_axis)
    : Grid(domain, {cells_per_axis, domain.dimension() == 2 ? cells_per_axis : 1}) {}

Grid::Grid(Domain domain, std::array<int, 2> cells) : domain_(domain), cells_(cells) {
  if (domain_.dimension() == 1) cells_[1] = 1;
  for (int a = 0; a < domain_.dimension(); ++a)
    if (cells_[a] <= 0) throw Error(Stage::config, "grid needs a positive cell count per axis");
  h_[0] = domain_.extent(0) / cells_[0];
  h_[1] = domain_.dimension() == 2 ? domain_.extent(1) / cells_[1] : 1.0;
  interior_.assign(size(), 0);
  for (std::size_t idx = 0; idx < size(); ++idx) {
    if (domain_.contains(center(idx))) {
      interior_[idx] = 1;
      ++interior_count_;
    }
  }
}

double Grid::cell_volume() const { return dimension() == 1 ? h_[0] : h_[0] * h_[1]; }

Point Grid::center(int i, int j) const {
  return {(i + 0.5) * h_[0], dimension() == 1 ? 0.0 : (j + 0.5) * h_[1]};
}

Point Grid::center(std::size_t idx) const {
  const auto [i, j] = coords(idx);
  return center(i, j);
}

std::size_t Grid::locate(Point p) const {
  p = domain_.wrap(p);
  const int i = std::clamp(static_cast<int>(std::floor(p.x / h_[0])), 0, cells_[0] - 1);
  const int j = dimension() == 1
                    ? 0
                    : std::clamp(static_cast<int>(std::floor(p.y / h_[1])), 0, cells_[1] - 1);
  return index(i, j);
}

void Grid::for_each_cell_in_ball(Point c, double radius,
                                 const std::function<void(std::size_t)>& visit) const {
  const bool periodic = domain_.periodic();
  auto axis_range = [&](int axis, double coord) {
    std::vector<int> out;
    const double hh = h_[axis];
    const int n = cells_[axis];
    const int lo = static_cast<int>(std::ceil((coord - radius) / hh - 0.5));
    const int hi = static_cast<int>(std::floor((coord + radius) / hh - 0.5));
    if (periodic) {
      if (hi - lo + 1 >= n) {
        for (int i = 0; i < n; ++i) out.push_back(i);
        return out;
      }
      for (int i = lo; i <= hi; ++i) out.push_back(positive_mod(i, n));
      std::sort(out.begin(), out.end());
      return out;
    }
    for (int i = std::max(lo, 0); i <= std::min(hi, n - 1); ++i) out.push_back(i);
    return out;
  };
  const std::vector<int> is = axis_range(0, c.x);
  const std::vector<int> js = dimension() == 1 ? std::vector<int>{0} : axis_range(1, c.y);
  const double r2 = radius * radius;
  for (int j : js) {
    for (int i : is) {
      const std::size_t idx = index(i, j);
      if (!interior_[idx]) continue;
      const Point d = domain_.displacement(c, center(i, j));
      if (dot(d, d) <= r2) visit(idx);
    }
  }
}

// --------------------------------------------------------- MeasurableSet

MeasurableSet::MeasurableSet(Grid grid) : grid_(std::move(grid)), mask_(grid_.size(), 0) {}

MeasurableSet::MeasurableSet(Grid grid, std::vector<std::uint8_t> mask)
    : grid_(std::move(grid)), mask_(std::move(mask)) {
  if (mask_.size() != grid_.size())
    throw Error(Stage::config, "mask size does not match the grid");
  for (std::size_t idx = 0; idx < mask_.size(); ++idx) {
    mask_[idx] = (mask_[idx] != 0 && grid_.interior(idx)) ? 1 : 0;
    count_ += mask_[idx];
  }
}

MeasurableSet MeasurableSet::full(const Grid& grid) {
  return MeasurableSet(grid, std::vector<std::uint8_t>(grid.size(), 1));
}

MeasurableSet MeasurableSet::from_predicate(const Grid& grid,
                                            const std::function<bool(Point)>& inside) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) mask[idx] = inside(grid.center(idx)) ? 1 : 0;
  return MeasurableSet(grid, std::move(mask));
}

bool MeasurableSet::contains_point(Point p) const {
  const Domain& dom = grid_.domain();
  if (!dom.periodic()) {
    if (p.x < 0.0 || p.x >= dom.extent(0)) return false;
    if (grid_.dimension() == 2 && (p.y < 0.0 || p.y >= dom.extent(1))) return false;
  }
  return mask_[grid_.locate(p)] != 0;
}

double measure(const MeasurableSet& set) {
  return static_cast<double>(set.count()) * set.grid().cell_volume();
}

// ----------------------------------------------------------- IntervalSet

IntervalSet::IntervalSet(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& iv) { return !(iv.hi > iv.lo); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const Interval& iv : intervals) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi) {
      intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
    } else {
      intervals_.push_back(iv);
    }
  }
}

double IntervalSet::total_length() const {
  double total = 0.0;
  for (const Interval& iv : intervals_) total += iv.length();
  return total;
}

double IntervalSet::essential_infimum_from(double a) const {
  for (const Interval& iv : intervals_)
    if (a < iv.hi) return std::max(a, iv.lo);
  return std::numeric_limits<double>::quiet_NaN();
}

// ----------------------------------------------------------------- cover

std::size_t cover_count_bound(const Domain& domain, double r) {
  const int d = domain.dimension();
  const double per_axis = std::ceil(domain.diameter() * std::sqrt(static_cast<double>(d)) / r) + 1.0;
  return static_cast<std::size_t>(std::pow(per_axis, d));
}

std::vector<Ball> cover_domain(const Domain& domain, double r) {
  if (!(r > 0.0)) throw Error(Stage::config, "cover radius must be positive");
  const int d = domain.dimension();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  // Cubes of side r/sqrt(d) (diameter r); on the torus 2r/sqrt(d), unclipped.
  const double spacing = domain.periodic() ? 2.0 * r / sqrt_d : r / sqrt_d;
  std::array<int, 2> m{1, 1};
  std::array<double, 2> step{domain.extent(0), domain.extent(1)};
  for (int a = 0; a < d; ++a) {
    m[a] = std::max(1, static_cast<int>(std::ceil(domain.extent(a) / spacing)));
    step[a] = domain.extent(a) / m[a];
  }
  std::vector<Ball> cover;
  for (int j = 0; j < m[1]; ++j) {
    for (int i = 0; i < m[0]; ++i) {
      Point c{(i + 0.5) * step[0], d == 1 ? 0.0 : (j + 0.5) * step[1]};
      if (domain.kind() == DomainKind::disk) {
        // keep the cube only if it meets the disk
        const Point lo{c.x - 0.5 * step[0], c.y - 0.5 * step[1]};
        const Point hi{c.x + 0.5 * step[0], c.y + 0.5 * step[1]};
        const double rad = 0.5 * domain.extent(0);
        const Point nearest{std::clamp(rad, lo.x, hi.x), std::clamp(rad, lo.y, hi.y)};
        if (std::hypot(nearest.x - rad, nearest.y - rad) > rad) continue;
        c = domain.clamp(c);
      }
      cover.push_back(Ball{c, r});
    }
  }
  return cover;
}

std::size_t count_cells_in_ball(const MeasurableSet& set, const Ball& ball) {
  std::size_t count = 0;
  set.grid().for_each_cell_in_ball(ball.center, ball.radius, [&](std::size_t idx) {
    count += set.contains_cell(idx) ? 1 : 0;
  });
  return count;
}

DensestBall densest_ball(const MeasurableSet& set, const std::vector<Ball>& cover) {
  if (set.count() == 0) throw Error(Stage::infeasible, "densest_ball: set has zero measure");
  if (cover.empty()) throw Error(Stage::config, "densest_ball: empty cover");
  DensestBall best;
  bool first = true;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const std::size_t cells = count_cells_in_ball(set, cover[k]);
    if (first || cells > best.cells) {
      best.ball = cover[k];
      best.index = k;
      best.cells = cells;
      first = false;
    }
  }
  best.measure = static_cast<double>(best.cells) * set.grid().cell_volume();
  return best;
}

// ----------------------------------------------------------------- chain

BallChain chain_of_balls(const Grid& grid, Point from, Point to, double r) {
  if (!(r > 0.0)) throw Error(Stage::config, "chain radius must be positive");
  const Domain& domain = grid.domain();
  from = domain.wrap(from);
  to = domain.wrap(to);
  if (!domain.contains(from) || !domain.contains(to))
    throw Error(Stage::config, "chain endpoints must lie in the domain");
  BallChain chain;
  chain.radius = r;
  if (domain.distance(from, to) == 0.0) {
    chain.centers = {from};
    return chain;
  }

  // Breadth-first search over interior cells (8-neighbourhood in 2D).
  const std::size_t start = grid.locate(from);
  const std::size_t goal = grid.locate(to);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(grid.size(), kNone);
  std::deque<std::size_t> queue{start};
  parent[start] = start;
  const bool periodic = domain.periodic();
  const int d = grid.dimension();
  while (!queue.empty() && parent[goal] == kNone) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    const auto [ci, cj] = grid.coords(cur);
    for (int dj = (d == 2 ? -1 : 0); dj <= (d == 2 ? 1 : 0); ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        int ni = ci + di;
        int nj = cj + dj;
        if (periodic) {
          ni = positive_mod(ni, grid.cells(0));
          nj = positive_mod(nj, grid.cells(1));
        } else if (ni < 0 || nj < 0 || ni >= grid.cells(0) || nj >= grid.cells(1)) {
          continue;
        }
        const std::size_t nb = grid.index(ni, nj);
        if (parent[nb] != kNone) continue;
        if (!grid.interior(nb) && nb != goal) continue;
        parent[nb] = cur;
        queue.push_back(nb);
      }
    }
  }
  if (parent[goal] == kNone)
    throw Error(Stage::resolution, "chain_of_balls: grid too coarse to connect the endpoints");

  // Boxes and disks are convex and the torus is flat, so once the endpoints
  // are connected through interior cells the shortest path is the straight
  // (periodic) segment between them.
  const Point delta = domain.displacement(from, to);
  chain.path_length = norm(delta);
  const int steps = std::max(1, static_cast<int>(std::ceil(chain.path_length / (0.5 * r))));
  chain.centers.reserve(static_cast<std::size_t>(steps) + 1);
  chain.centers.push_back(from);
  for (int s = 1; s < steps; ++s)
    chain.centers.push_back(domain.wrap(from + (static_cast<double>(s) / steps) * delta));
  chain.centers.push_back(to);
  return chain;
}

// ------------------------------------------------------------------- rays

std::vector<Point> direction_fan(int dimension, int count) {
  if (dimension == 1) return {Point{1.0, 0.0}, Point{-1.0, 0.0}};
  if (count < 1) throw Error(Stage::config, "direction fan needs at least one direction");
  std::vector<Point> fan;
  fan.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * k / count;
    fan.push_back({std::cos(a), std::sin(a)});
  }
  return fan;
}

IntervalSet restrict_to_segment(const MeasurableSet& set, const Segment& seg) {
  const Grid& grid = set.grid();
  const Domain& domain = grid.domain();
  const bool periodic = domain.periodic();
  const int d = grid.dimension();
  if (!(seg.t_max > 0.0)) return {};

  const Point p = domain.wrap(seg.origin);
  const double pos[2] = {p.x, p.y};
  const double dir[2] = {seg.direction.x, d == 2 ? seg.direction.y : 0.0};
  int cell[2] = {0, 0};
  int step[2] = {0, 0};
  double t_next[2] = {std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  double t_delta[2] = {std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
  for (int a = 0; a < d; ++a) {
    const double hh = grid.h(a);
    cell[a] = std::clamp(static_cast<int>(std::floor(pos[a] / hh)), 0, grid.cells(a) - 1);
    if (dir[a] > 0) {
      step[a] = 1;
      t_next[a] = ((cell[a] + 1) * hh - pos[a]) / dir[a];
      t_delta[a] = hh / dir[a];
    } else if (dir[a] < 0) {
      step[a] = -1;
      t_next[a] = (cell[a] * hh - pos[a]) / dir[a];
      t_delta[a] = -hh / dir[a];
    }
  }

  std::vector<Interval> out;
  double t_enter = 0.0;
  while (t_enter < seg.t_max) {
    const int axis = (t_next[0] <= t_next[1]) ? 0 : 1;
    const double t_exit = std::min(t_next[axis], seg.t_max);
    int ci = cell[0];
    int cj = cell[1];
    bool in_grid = true;
    if (periodic) {
      ci = positive_mod(ci, grid.cells(0));
      cj = positive_mod(cj, grid.cells(1));
    } else {
      in_grid = ci >= 0 && cj >= 0 && ci < grid.cells(0) && cj < grid.cells(1);
    }
    if (!in_grid) break;
    if (set.contains_cell(grid.index(ci, cj)) && t_exit > t_enter) out.push_back({t_enter, t_exit});
    if (t_exit >= seg.t_max) break;
    t_enter = t_next[axis];
    cell[axis] += step[axis];
    t_next[axis] += t_delta[axis];
  }
  return IntervalSet(std::move(out));
}

RayChoice best_ray_interval(const Ball& ball, const MeasurableSet& set, Point w, int directions) {
  const Grid& grid = set.grid();
  const Domain& domain = grid.domain();
  const double r = ball.radius;
  const Point q = domain.displacement(ball.center, w);
  if (norm(q) > 2.0 * r * (1.0 + 1e-12))
    throw Error(Stage::config, "best_ray_interval: w must lie within 2r of the ball centre");
  const std::vector<Point> fan = direction_fan(grid.dimension(), directions);

  RayChoice best;
  best.direction_count = fan.size();
  double best_measure = -1.0;
  for (std::size_t k = 0; k < fan.size(); ++k) {
    const Point mu = fan[k];
    const double b = dot(q, mu);
    const double c = dot(q, q) - r * r;
    const double disc = b * b - c;
    Segment seg{w, mu, 0.0};
    if (disc > 0.0) {
      const double root = std::sqrt(disc);
      const double t_lo = std::max(0.0, -b - root);
      const double t_hi = std::min({-b + root, 2.0 * r, domain.exit_parameter(domain.wrap(w), mu)});
      if (t_hi > t_lo) seg = Segment{domain.wrap(w + t_lo * mu), mu, t_hi - t_lo};
    }
    IntervalSet trace = restrict_to_segment(set, seg);
    const double m = trace.total_length();
    if (m > best_measure) {
      best_measure = m;
      best.segment = seg;
      best.trace = std::move(trace);
      best.direction_index = k;
    }
  }
  if (!(best_measure > 0.0))
    throw Error(Stage::resolution,
                "best_ray_interval: every sampled direction misses the set");
  return best;
}

}  // namespace obscert
