#include "geoextremes/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <queue>

#include "geoextremes/error.hpp"
#include "geoextremes/integral.hpp"
#include "geoextremes/numerics.hpp"
#include "geoextremes/parallel.hpp"

namespace geoextremes {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Points of a configuration in increasing distance from x, read ring by ring
 * from the grid index. A point is released only once no unread ring can hold
 * anything closer.
 */
class NeighborStream {
 public:
  NeighborStream(const PointConfiguration &config, const Point &x, std::size_t exclude)
      : config_(config), x_(x), exclude_(exclude), home_(config.index().cell_of(x)),
        last_(config.index().max_ring(home_))
  {
  }

  /// Distance of the next point, or infinity when exhausted.
  double peek()
  {
    settle();
    return heap_.empty() ? kInf : std::sqrt(heap_.top().d2);
  }

  /// Index of the next point; call only after peek() returned a finite value.
  std::size_t pop()
  {
    const std::size_t j = heap_.top().j;
    heap_.pop();
    return j;
  }

 private:
  struct Item {
    double d2;
    std::size_t j;
    bool operator>(const Item &o) const
    {
      return d2 > o.d2 || (d2 == o.d2 && j > o.j);
    }
  };

  double unread_bound() const
  {
    if (ring_ > last_) {
      return kInf;
    }
    const double b = std::max(0, ring_ - 1) * config_.index().cell_width();
    return b * b;
  }

  void settle()
  {
    while (ring_ <= last_ && (heap_.empty() || heap_.top().d2 > unread_bound())) {
      config_.index().for_each_in_ring(home_, ring_, [&](std::size_t j) {
        if (j != exclude_) {
          heap_.push({distance2(config_[j], x_), j});
        }
      });
      ++ring_;
    }
  }

  const PointConfiguration &config_;
  Point x_;
  std::size_t exclude_;
  std::array<int, 3> home_;
  int last_;
  int ring_ = 0;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
};

double max_norm2(const std::vector<Point> &poly)
{
  double m = 0.0;
  for (const Point &p : poly) {
    m = std::max(m, norm2(p));
  }
  return m;
}

/// Intersection of a convex polygon with {p : <p, y> <= |y|^2 / 2}. Unchanged if nothing is cut.
bool clip_bisector(std::vector<Point> &poly, const Point &y, std::vector<Point> &scratch)
{
  const double c = 0.5 * norm2(y);
  bool cut = false;
  for (const Point &p : poly) {
    if (dot(p, y) > c) {
      cut = true;
      break;
    }
  }
  if (!cut) {
    return false;
  }
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t a = 0; a < n; ++a) {
    const Point &P = poly[a];
    const Point &Q = poly[(a + 1) % n];
    const double sp = dot(P, y) - c;
    const double sq = dot(Q, y) - c;
    if (sp <= 0.0) {
      scratch.push_back(P);
    }
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
      scratch.push_back(P + (Q - P) * (sp / (sp - sq)));
    }
  }
  poly.swap(scratch);
  return true;
}

ConvexCell voronoi_cell_impl(const PointConfiguration &config, std::size_t i, CellMode mode, double half_width)
{
  const Point x = config[i];
  const double H = half_width;
  std::vector<Point> poly{{-H, -H, 0.0}, {H, -H, 0.0}, {H, H, 0.0}, {-H, H, 0.0}};
  std::vector<Point> scratch;
  NeighborStream stream(config, x, i);
  double r2 = max_norm2(poly);
  for (;;) {
    const double next = stream.peek();
    if (4.0 * r2 <= next * next || poly.size() < 3) {
      break;
    }
    const Point y = config[stream.pop()] - x;
    if (norm2(y) == 0.0) {
      continue;
    }
    if (clip_bisector(poly, y, scratch)) {
      r2 = max_norm2(poly);
    }
  }
  if (poly.size() < 3) {
    throw UnboundedCell("voronoi_cell: degenerate cell");
  }
  for (const Point &p : poly) {
    if (std::max(std::abs(p.x), std::abs(p.y)) >= H * (1.0 - 1e-12)) {
      throw UnboundedCell("voronoi_cell: cell reaches the initial bounding square");
    }
  }
  if (mode == CellMode::windowed && 2.0 * std::sqrt(r2) > config.region().inner_distance(x)) {
    throw UnboundedCell("voronoi_cell: cell not certified by the sampling region");
  }
  return ConvexCell(std::move(poly), CellKind::voronoi_polytope);
}

double initial_half_width(const PointConfiguration &config, std::size_t i, CellMode mode)
{
  const Point &x = config[i];
  if (mode == CellMode::windowed) {
    const double inner = config.region().inner_distance(x);
    if (!(inner > 0.0)) {
      throw UnboundedCell("voronoi_cell: nucleus outside the sampling region");
    }
    return inner;
  }
  double m = 0.0;
  for (const Point &p : config.points()) {
    m = std::max(m, distance2(p, x));
  }
  return 1e4 * (1.0 + std::sqrt(m));
}

int cone_of(const Point &y)
{
  double a = std::atan2(y.y, y.x);
  if (a < 0.0) {
    a += 2.0 * kPi;
  }
  return std::min(kStabilizationCones - 1, static_cast<int>(a / (2.0 * kPi / kStabilizationCones)));
}

// Planar predicates with a floating-point filter and an extended-precision retry.

double orient2(const Point &a, const Point &b, const Point &c)
{
  const double l = (b.x - a.x) * (c.y - a.y);
  const double r = (b.y - a.y) * (c.x - a.x);
  const double det = l - r;
  if (std::abs(det) > 3.3306690738754716e-16 * (std::abs(l) + std::abs(r))) {
    return det;
  }
  using L = long double;
  return static_cast<double>((L(b.x) - L(a.x)) * (L(c.y) - L(a.y)) - (L(b.y) - L(a.y)) * (L(c.x) - L(a.x)));
}

/// Positive iff d lies inside the circle through the counter-clockwise a, b, c.
double incircle(const Point &a, const Point &b, const Point &c, const Point &d)
{
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double al = adx * adx + ady * ady;
  const double bl = bdx * bdx + bdy * bdy;
  const double cl = cdx * cdx + cdy * cdy;
  const double det = al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady);
  const double perm = (std::abs(bdx * cdy) + std::abs(cdx * bdy)) * al +
                      (std::abs(cdx * ady) + std::abs(adx * cdy)) * bl +
                      (std::abs(adx * bdy) + std::abs(bdx * ady)) * cl;
  if (std::abs(det) > 1.1102230246251577e-15 * perm) {
    return det;
  }
  using L = long double;
  const L Adx = L(a.x) - L(d.x), Ady = L(a.y) - L(d.y);
  const L Bdx = L(b.x) - L(d.x), Bdy = L(b.y) - L(d.y);
  const L Cdx = L(c.x) - L(d.x), Cdy = L(c.y) - L(d.y);
  const L det2 = (Adx * Adx + Ady * Ady) * (Bdx * Cdy - Cdx * Bdy) + (Bdx * Bdx + Bdy * Bdy) * (Cdx * Ady - Adx * Cdy) +
                 (Cdx * Cdx + Cdy * Cdy) * (Adx * Bdy - Bdx * Ady);
  return static_cast<double>(det2);
}

std::uint64_t hilbert_index(std::uint32_t n, std::uint32_t x, std::uint32_t y)
{
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

std::vector<std::size_t> hilbert_order(std::span<const Point> pts)
{
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    order[i] = i;
  }
  if (pts.empty()) {
    return order;
  }
  double lox = pts[0].x, hix = pts[0].x, loy = pts[0].y, hiy = pts[0].y;
  for (const Point &p : pts) {
    lox = std::min(lox, p.x);
    hix = std::max(hix, p.x);
    loy = std::min(loy, p.y);
    hiy = std::max(hiy, p.y);
  }
  const double span = std::max({hix - lox, hiy - loy, 1e-300});
  constexpr std::uint32_t n = 1u << 16;
  std::vector<std::uint64_t> key(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto qx = static_cast<std::uint32_t>(std::min((pts[i].x - lox) / span * n, n - 1.0));
    const auto qy = static_cast<std::uint32_t>(std::min((pts[i].y - loy) / span * n, n - 1.0));
    key[i] = hilbert_index(n, qx, qy);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return order;
}

/// Bowyer-Watson state. Triangles are vertex cycles; vertex kInfinite closes the hull.
class BowyerWatson {
 public:
  static constexpr int kInfinite = -1;

  explicit BowyerWatson(std::span<const Point> pts) : pts_(pts) {}

  Triangulation run()
  {
    Triangulation out;
    const auto order = hilbert_order(pts_);
    const std::size_t n = order.size();
    // Seed triangle: first point, first distinct point, first point off their line.
    std::size_t ia = 0, ib = n, ic = n;
    for (std::size_t s = 1; s < n && ib == n; ++s) {
      if (!(pts_[order[s]] == pts_[order[0]])) {
        ib = s;
      }
    }
    for (std::size_t s = ib + 1; s < n && ic == n; ++s) {
      if (orient2(pts_[order[ia]], pts_[order[ib]], pts_[order[s]]) != 0.0) {
        ic = s;
      }
    }
    if (ic >= n) {
      return out;
    }
    tris_.reserve(2 * n + 8);
    int a = static_cast<int>(order[ia]), b = static_cast<int>(order[ib]), c = static_cast<int>(order[ic]);
    if (orient2(pts_[a], pts_[b], pts_[c]) < 0.0) {
      std::swap(b, c);
    }
    const int t0 = add({a, b, c});
    const int g0 = add({b, a, kInfinite});
    const int g1 = add({c, b, kInfinite});
    const int g2 = add({a, c, kInfinite});
    link_all({t0, g0, g1, g2});
    last_ = t0;
    for (std::size_t s = 0; s < n; ++s) {
      if (s == ia || s == ib || s == ic) {
        continue;
      }
      insert(static_cast<int>(order[s]));
    }
    for (const Tri &t : tris_) {
      if (t.alive && t.v[0] != kInfinite && t.v[1] != kInfinite && t.v[2] != kInfinite) {
        out.triangles.push_back({static_cast<std::size_t>(t.v[0]), static_cast<std::size_t>(t.v[1]),
                                 static_cast<std::size_t>(t.v[2])});
      }
    }
    out.incircle_ties = ties_;
    out.duplicates = duplicates_;
    return out;
  }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb{-1, -1, -1};
    bool alive = true;
    unsigned mark = 0;
  };

  bool is_ghost(const Tri &t) const
  {
    return t.v[0] == kInfinite || t.v[1] == kInfinite || t.v[2] == kInfinite;
  }

  int add(std::array<int, 3> v)
  {
    Tri t;
    t.v = v;
    if (!free_.empty()) {
      const int id = free_.back();
      free_.pop_back();
      tris_[id] = t;
      return id;
    }
    tris_.push_back(t);
    return static_cast<int>(tris_.size()) - 1;
  }

  void link_all(const std::vector<int> &ids)
  {
    for (int s : ids) {
      for (int e = 0; e < 3; ++e) {
        const int u = tris_[s].v[(e + 1) % 3], w = tris_[s].v[(e + 2) % 3];
        for (int o : ids) {
          for (int f = 0; f < 3; ++f) {
            if (tris_[o].v[(f + 1) % 3] == w && tris_[o].v[(f + 2) % 3] == u) {
              tris_[s].nb[e] = o;
            }
          }
        }
      }
    }
  }

  /// Ghost triangle as hull edge (p, q): points strictly left of p -> q lie outside.
  void ghost_edge(const Tri &t, int &p, int &q) const
  {
    if (t.v[0] == kInfinite) {
      p = t.v[1];
      q = t.v[2];
    }
    else if (t.v[1] == kInfinite) {
      p = t.v[2];
      q = t.v[0];
    }
    else {
      p = t.v[0];
      q = t.v[1];
    }
  }

  bool conflict(int id, const Point &x)
  {
    const Tri &t = tris_[id];
    if (is_ghost(t)) {
      int p, q;
      ghost_edge(t, p, q);
      const double o = orient2(pts_[p], pts_[q], x);
      if (o > 0.0) {
        return true;
      }
      if (o < 0.0) {
        return false;
      }
      // On the hull line: in conflict only on the open edge.
      const Point &P = pts_[p];
      const Point &Q = pts_[q];
      const double s = dot(x - P, Q - P);
      return s > 0.0 && s < norm2(Q - P);
    }
    const double ic = incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], x);
    if (ic == 0.0) {
      ++ties_;
    }
    return ic > 0.0;
  }

  int locate(const Point &x)
  {
    int t = last_;
    if (!tris_[t].alive) {
      for (t = 0; !tris_[t].alive; ++t) {
      }
    }
    if (is_ghost(tris_[t])) {
      const Tri &g = tris_[t];
      for (int e = 0; e < 3; ++e) {
        if (g.v[e] == kInfinite) {
          t = g.nb[e];
        }
      }
    }
    int rot = 0;
    for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      const Tri &cur = tris_[t];
      if (is_ghost(cur)) {
        return t;
      }
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int e = (k + rot) % 3;
        if (orient2(pts_[cur.v[(e + 1) % 3]], pts_[cur.v[(e + 2) % 3]], x) < 0.0) {
          t = cur.nb[e];
          moved = true;
          break;
        }
      }
      rot = (rot + 1) % 3;
      if (!moved) {
        return t;
      }
    }
    throw Error("delaunay_triangulate: point location did not terminate");
  }

  void insert(int vi)
  {
    const Point &x = pts_[vi];
    const int start = locate(x);
    if (!conflict(start, x)) {
      ++duplicates_;
      return;
    }
    ++stamp_;
    cavity_.clear();
    boundary_.clear();
    cavity_.push_back(start);
    tris_[start].mark = stamp_;
    for (std::size_t s = 0; s < cavity_.size(); ++s) {
      const int id = cavity_[s];
      for (int e = 0; e < 3; ++e) {
        const int nb = tris_[id].nb[e];
        if (tris_[nb].mark == stamp_) {
          continue;
        }
        if (conflict(nb, x)) {
          tris_[nb].mark = stamp_;
          cavity_.push_back(nb);
        }
        else {
          boundary_.push_back({tris_[id].v[(e + 1) % 3], tris_[id].v[(e + 2) % 3], nb});
        }
      }
    }
    for (int id : cavity_) {
      tris_[id].alive = false;
      free_.push_back(id);
    }
    fresh_.clear();
    for (const Edge &be : boundary_) {
      const int id = add({be.u, be.w, vi});
      tris_[id].nb[2] = be.outside;
      Tri &o = tris_[be.outside];
      for (int f = 0; f < 3; ++f) {
        if (o.v[(f + 1) % 3] == be.w && o.v[(f + 2) % 3] == be.u) {
          o.nb[f] = id;
        }
      }
      fresh_.push_back(id);
    }
    for (int id : fresh_) {
      Tri &t = tris_[id];
      for (int other : fresh_) {
        if (tris_[other].v[0] == t.v[1]) {
          t.nb[0] = other;
        }
        if (tris_[other].v[1] == t.v[0]) {
          t.nb[1] = other;
        }
      }
    }
    last_ = fresh_.front();
  }

  struct Edge {
    int u;
    int w;
    int outside;
  };

  std::span<const Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> cavity_;
  std::vector<int> fresh_;
  std::vector<Edge> boundary_;
  unsigned stamp_ = 0;
  int last_ = 0;
  std::size_t ties_ = 0;
  std::size_t duplicates_ = 0;
};

/// Square [c - h, c + h]^2 with h = r / sqrt(2): the largest box inside B(c, r).
Box inscribed_box(const Point &c, double r)
{
  const double h = r / std::numbers::sqrt2;
  Box b;
  b.d = 2;
  b.lo = {c.x - h, c.y - h, 0.0};
  b.hi = {c.x + h, c.y + h, 0.0};
  return b;
}

Box square(const Point &c, double h)
{
  Box b;
  b.d = 2;
  b.lo = {c.x - h, c.y - h, 0.0};
  b.hi = {c.x + h, c.y + h, 0.0};
  return b;
}

struct CellRecord {
  ConvexCell cell;
  double sigma = 0.0;
  double deviation = std::numeric_limits<double>::quiet_NaN();
  double rho_o = 0.0;
  double r_o = 0.0;
  double area = 0.0;
};

CellRecord describe(const MosaicSpec &spec, ConvexCell cell, bool with_deviation)
{
  CellRecord r;
  r.sigma = cell_sigma(spec, cell);
  if (with_deviation) {
    r.deviation = cell_deviation(spec, cell);
  }
  try {
    r.rho_o = centered_inradius(cell);
  }
  catch (const OriginNotInterior &) {
    r.rho_o = 0.0;
  }
  r.r_o = centered_circumradius(cell);
  r.area = cell.area();
  r.cell = std::move(cell);
  return r;
}

void append(TypicalCellSample &out, CellRecord &&r, bool keep_cells)
{
  out.sigma_values.push_back(r.sigma);
  out.deviation_values.push_back(r.deviation);
  out.rho_o.push_back(r.rho_o);
  out.r_o.push_back(r.r_o);
  out.area.push_back(r.area);
  if (keep_cells) {
    out.cells.push_back(std::move(r.cell));
  }
}

void check_exact_supported(const MosaicSpec &spec)
{
  if (!has_exact_law(spec)) {
    throw DomainError(std::string("no exact law for ") + to_string(spec.kind) + " x " + to_string(spec.functional));
  }
}

/// Circumcenter tuples helper for the overlap check.
struct Circle {
  Point z;
  double r = 0.0;
  bool ok = false;
};

Circle circle_through(const Point &a, const Point &b, const Point &c)
{
  const std::array<Point, 3> pts{a, b, c};
  const Sphere s = circumsphere(pts);
  Circle out;
  if (s.degenerate) {
    return out;
  }
  const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
  if (std::abs(orient2(a, b, c)) <= 1e-9 * scale * scale) {
    return out;
  }
  out.z = s.center;
  out.r = s.radius;
  out.ok = true;
  return out;
}

}  // namespace

const char *to_string(MosaicKind kind)
{
  return kind == MosaicKind::voronoi ? "voronoi" : "delaunay";
}

MosaicKind mosaic_kind_from_string(const std::string &name)
{
  if (name == "voronoi") {
    return MosaicKind::voronoi;
  }
  if (name == "delaunay") {
    return MosaicKind::delaunay;
  }
  throw ConfigError("unknown mosaic '" + name + "'");
}

// Voronoi cells.

ConvexCell voronoi_cell(const PointConfiguration &config, std::size_t i, CellMode mode)
{
  if (config.dim() != 2) {
    throw DomainError("voronoi_cell: only d = 2 is supported");
  }
  if (i >= config.size()) {
    throw DomainError("voronoi_cell: nucleus index out of range");
  }
  return voronoi_cell_impl(config, i, mode, initial_half_width(config, i, mode));
}

ConvexCell voronoi_cell(const PointConfiguration &config, const Point &nucleus, CellMode mode)
{
  const std::size_t i = config.find(nucleus);
  if (i == PointConfiguration::npos) {
    throw DomainError("voronoi_cell: nucleus is not a point of the configuration");
  }
  return voronoi_cell(config, i, mode);
}

std::array<double, kStabilizationCones> cone_distances(const PointConfiguration &config, std::size_t i)
{
  std::array<double, kStabilizationCones> r;
  r.fill(kInf);
  const Point x = config[i];
  NeighborStream stream(config, x, i);
  int missing = kStabilizationCones;
  while (missing > 0) {
    const double d = stream.peek();
    if (!std::isfinite(d)) {
      break;
    }
    const Point y = config[stream.pop()] - x;
    if (d == 0.0) {
      continue;
    }
    const int c = cone_of(y);
    if (!std::isfinite(r[c])) {
      r[c] = d;
      --missing;
    }
  }
  return r;
}

double stabilization_radius_voronoi(const PointConfiguration &config, std::size_t i, CellMode mode)
{
  const auto r = cone_distances(config, i);
  const double m = *std::max_element(r.begin(), r.end());
  if (!std::isfinite(m)) {
    return kInf;
  }
  if (mode == CellMode::windowed && m > config.region().inner_distance(config[i])) {
    return kInf;
  }
  return 2.0 * m;
}

// Delaunay.

Triangulation delaunay_triangulate(std::span<const Point> points)
{
  if (points.size() >= static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw DomainError("delaunay_triangulate: too many points");
  }
  return BowyerWatson(points).run();
}

std::vector<DelaunayCell> delaunay_cells(const PointConfiguration &config, const Box &core, CellMode mode)
{
  if (config.dim() != 2) {
    throw DomainError("delaunay_cells: only d = 2 is supported");
  }
  const auto pts = config.points();
  const Triangulation tri = delaunay_triangulate(pts);
  std::vector<DelaunayCell> out;
  for (const auto &t : tri.triangles) {
    const std::array<Point, 3> v{pts[t[0]], pts[t[1]], pts[t[2]]};
    const Sphere s = circumsphere(v);
    if (s.degenerate || !core.contains(s.center)) {
      continue;
    }
    if (mode == CellMode::windowed && s.radius > config.region().inner_distance(s.center)) {
      throw UnboundedCell("delaunay_cells: circumdisk leaves the sampling region");
    }
    for (std::size_t j : config.query_ball_indices(s.center, s.radius)) {
      if (j == t[0] || j == t[1] || j == t[2]) {
        continue;
      }
      if (incircle(v[0], v[1], v[2], pts[j]) > 0.0) {
        throw Error("delaunay_cells: empty circumdisk check failed");
      }
    }
    DelaunayCell cell;
    cell.vertices = t;
    cell.circle = s;
    cell.cell = ConvexCell({v[0] - s.center, v[1] - s.center, v[2] - s.center}, CellKind::delaunay_simplex);
    out.push_back(std::move(cell));
  }
  return out;
}

// Model.

void MosaicSpec::validate() const
{
  if (d != 2) {
    throw DomainError("mosaic: only d = 2 is supported");
  }
  if (!(gamma > 0.0) || !(t > 0.0) || !(c > 0.0)) {
    throw DomainError("mosaic: gamma, t and c must be positive");
  }
  if (!(buffer_factor >= 0.0)) {
    throw DomainError("mosaic: buffer factor must be nonnegative");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("mosaic: epsilon must lie in (0, 1)");
  }
  const bool ok = kind == MosaicKind::voronoi
                      ? (functional == SizeKind::volume || functional == SizeKind::centered_inradius ||
                         functional == SizeKind::intrinsic_v1)
                      : (functional == SizeKind::volume || functional == SizeKind::inradius ||
                         functional == SizeKind::circumradius);
  if (!ok) {
    throw DomainError(std::string("mosaic: functional ") + to_string(functional) + " is not supported for " +
                      to_string(kind));
  }
}

double beta_d(int d, double gamma)
{
  const double dd = d;
  const double c = std::pow(2.0, dd + 1.0) * std::pow(kPi, (dd - 1.0) / 2.0) / (dd * dd * (dd + 1.0));
  const double g = std::exp(std::lgamma((dd * dd + 1.0) / 2.0) - std::lgamma(dd * dd / 2.0));
  const double h = std::exp(dd * (std::lgamma(1.0 + dd / 2.0) - std::lgamma((dd + 1.0) / 2.0)));
  return c * g * h * gamma;
}

double cell_rate(const MosaicSpec &spec)
{
  return spec.kind == MosaicKind::voronoi ? spec.gamma : beta_d(spec.d, spec.gamma);
}

double b_t(const MosaicSpec &spec)
{
  const double lt = std::max(std::log(spec.t), 0.0);
  if (spec.kind == MosaicKind::voronoi) {
    return 2.0 * std::pow(3.0 * kStabilizationCones * lt / spec.gamma, 1.0 / spec.d);
  }
  return std::pow(3.0 * lt / (spec.gamma * unit_ball_volume(spec.d)), 1.0 / spec.d);
}

double tau_constant(const MosaicSpec &spec)
{
  const double d = spec.d;
  if (spec.kind == MosaicKind::voronoi) {
    switch (spec.functional) {
      case SizeKind::centered_inradius:
        return 1.0 / d;
      case SizeKind::volume:
        return 1.0 / (d * unit_ball_volume(spec.d));
      case SizeKind::intrinsic_v1: {
        // (1/d) (kappa_{d-1} / (d kappa_d))^d for k = 1.
        return std::pow(unit_ball_volume(spec.d - 1) / (d * unit_ball_volume(spec.d)), d) / d;
      }
      default:
        break;
    }
  }
  else {
    switch (spec.functional) {
      case SizeKind::volume:
        return 3.0 * std::sqrt(3.0) / 4.0;
      case SizeKind::inradius:
        return 0.5;
      case SizeKind::circumradius:
        return 1.0;
      default:
        break;
    }
  }
  throw DomainError("tau_constant: unsupported functional");
}

double threshold_rate_limit(const MosaicSpec &spec)
{
  const double tau = tau_constant(spec);
  const double kd = unit_ball_volume(spec.d);
  if (spec.kind == MosaicKind::voronoi) {
    return std::pow(2.0, spec.d) * spec.d * kd * tau * spec.gamma;
  }
  return kd * std::pow(tau, -static_cast<double>(spec.d) / spec.k()) * spec.gamma;
}

double target_level(const MosaicSpec &spec)
{
  return spec.c / (cell_rate(spec) * spec.t);
}

double cell_sigma(const MosaicSpec &spec, const ConvexCell &cell)
{
  (void)spec.kind;
  return size_functional(spec.functional, cell);
}

double cell_deviation(const MosaicSpec &spec, const ConvexCell &cell)
{
  return spec.kind == MosaicKind::voronoi ? deviation_voronoi(cell) : deviation_delaunay(cell);
}

// Typical cells.

TypicalCellSample sample_typical_voronoi(const MosaicSpec &spec, std::size_t n, const SeedSpec &seed,
                                         const TypicalOptions &opts)
{
  spec.validate();
  if (spec.kind != MosaicKind::voronoi) {
    throw DomainError("sample_typical_voronoi: spec is not a Voronoi spec");
  }
  const IntensitySpec intensity = IntensitySpec::constant(spec.gamma, 2);
  std::vector<CellRecord> records(n);
  parallel_for(n, opts.workers, [&](std::size_t i) {
    Rng rng = seed.child(10, i).engine(0);
    double rho = 6.0 / std::sqrt(spec.gamma);
    std::vector<Point> pts{Point{}};
    for (const Point &p : sample_poisson_points(intensity, Ball{Point{}, rho, 2}, rng)) {
      pts.push_back(p);
    }
    for (;;) {
      const PointConfiguration config(2, pts, square(Point{}, rho));
      const double R = stabilization_radius_voronoi(config, 0, CellMode::complete);
      if (R <= rho) {
        records[i] = describe(spec, voronoi_cell_impl(config, 0, CellMode::complete, R), opts.deviation);
        return;
      }
      for (const Point &p : sample_poisson_points(intensity, Shell{Point{}, rho, 2.0 * rho, 2}, rng)) {
        pts.push_back(p);
      }
      rho *= 2.0;
    }
  });
  TypicalCellSample out;
  for (auto &r : records) {
    append(out, std::move(r), opts.keep_cells);
  }
  return out;
}

TypicalCellSample sample_typical_delaunay(const MosaicSpec &spec, std::size_t n, const SeedSpec &seed,
                                          const TypicalOptions &opts)
{
  spec.validate();
  if (spec.kind != MosaicKind::delaunay) {
    throw DomainError("sample_typical_delaunay: spec is not a Delaunay spec");
  }
  const IntensitySpec intensity = IntensitySpec::constant(spec.gamma, 2);
  const double beta = beta_d(2, spec.gamma);
  const double side = std::sqrt(2000.0 / spec.gamma);
  const double buffer = 5.0 / std::sqrt(spec.gamma);
  const Box core = Box::cube(2, 0.0, side);
  const double per_window = beta * side * side;

  std::vector<std::vector<CellRecord>> windows;
  std::size_t total = 0;
  while (total < n || windows.empty()) {
    const std::size_t first = windows.size();
    const std::size_t more = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(n - std::min(n, total)) / per_window)));
    windows.resize(first + more);
    parallel_for(more, opts.workers, [&](std::size_t k) {
      const std::size_t w = first + k;
      const PointConfiguration config = sample_poisson(intensity, core.inflated(buffer), seed.child(11, w));
      for (auto &cell : delaunay_cells(config, core, CellMode::windowed)) {
        windows[w].push_back(describe(spec, std::move(cell.cell), opts.deviation));
      }
    });
    total = 0;
    for (const auto &w : windows) {
      total += w.size();
    }
  }

  TypicalCellSample out;
  double s1 = 0.0, s2 = 0.0;
  for (auto &w : windows) {
    const double cnt = static_cast<double>(w.size());
    s1 += cnt;
    s2 += cnt * cnt;
    for (auto &r : w) {
      append(out, std::move(r), opts.keep_cells);
    }
  }
  const double W = static_cast<double>(windows.size());
  const double area = side * side;
  out.observed_volume = W * area;
  out.beta_hat = s1 / out.observed_volume;
  if (W > 1.0) {
    const double mean = s1 / W;
    const double var = std::max(0.0, (s2 - W * mean * mean) / (W - 1.0));
    out.beta_se = std::sqrt(var / W) / area;
  }
  return out;
}

void write_typical_csv(std::ostream &os, const TypicalCellSample &sample)
{
  os << "sigma,deviation,rho_o,r_o,area\n";
  char buf[160];
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", sample.sigma_values[i],
                  sample.deviation_values[i], sample.rho_o[i], sample.r_o[i], sample.area[i]);
    os << buf;
  }
}

// Exact laws.

bool has_exact_law(const MosaicSpec &spec)
{
  if (spec.d != 2) {
    return false;
  }
  if (spec.kind == MosaicKind::voronoi) {
    return spec.functional == SizeKind::centered_inradius;
  }
  return spec.functional == SizeKind::volume || spec.functional == SizeKind::circumradius;
}

std::optional<double> typical_survival_exact(const MosaicSpec &spec, double v)
{
  if (!has_exact_law(spec)) {
    return std::nullopt;
  }
  if (v <= 0.0) {
    return 1.0;
  }
  if (spec.kind == MosaicKind::voronoi) {
    // rho_o(Z) > v iff eta has no point in B(o, 2v).
    return std::exp(-spec.gamma * kPi * 4.0 * v * v);
  }
  if (spec.functional == SizeKind::volume) {
    return rathie_survival(v, spec.gamma);
  }
  // Circumradius density proportional to r^3 exp(-gamma pi r^2).
  const double x = spec.gamma * kPi * v * v;
  return std::exp(-x) * (1.0 + x);
}

std::function<double(double)> typical_survival(const MosaicSpec &spec, const TypicalCellSample *sample)
{
  if (has_exact_law(spec)) {
    return [spec](double v) { return *typical_survival_exact(spec, v); };
  }
  if (sample == nullptr || sample->size() == 0) {
    throw InsufficientSample("typical_survival: no exact law and no typical sample");
  }
  auto sorted = std::make_shared<std::vector<double>>(sample->sigma_values);
  std::sort(sorted->begin(), sorted->end());
  return [sorted](double v) {
    const auto above = sorted->end() - std::upper_bound(sorted->begin(), sorted->end(), v);
    return static_cast<double>(above) / static_cast<double>(sorted->size());
  };
}

// Threshold.

CalibratedThreshold calibrate_v_t(const MosaicSpec &spec, const TypicalCellSample &typical)
{
  spec.validate();
  CalibratedThreshold out;
  out.mode = CalibrationMode::empirical;
  out.target_level = target_level(spec);
  out.n_typical = typical.size();
  const double p = std::min(out.target_level, 1.0);
  const double n = static_cast<double>(out.n_typical);
  if (out.n_typical == 0 || n < 50.0 / p) {
    throw InsufficientSample("calibrate_v_t: need at least 50 / target_level typical cells");
  }
  std::vector<double> v = typical.sigma_values;
  std::sort(v.begin(), v.end());
  const auto clampi = [&](double i) {
    return static_cast<std::size_t>(std::clamp(i, 0.0, n - 1.0));
  };
  const double idx = std::floor(n * (1.0 - p));
  out.v_t = v[clampi(idx)];
  const double sd = std::ceil(std::sqrt(n * p * (1.0 - p)));
  out.se = 0.5 * (v[clampi(idx + sd)] - v[clampi(idx - sd)]);
  return out;
}

CalibratedThreshold calibrate_v_t_exact(const MosaicSpec &spec)
{
  spec.validate();
  check_exact_supported(spec);
  CalibratedThreshold out;
  out.mode = CalibrationMode::exact;
  out.target_level = target_level(spec);
  const double p = out.target_level;
  if (p >= 1.0) {
    out.v_t = 0.0;
    return out;
  }
  if (spec.kind == MosaicKind::voronoi) {
    out.v_t = std::sqrt(-std::log(p) / (4.0 * kPi * spec.gamma));
  }
  else if (spec.functional == SizeKind::volume) {
    out.v_t = rathie_quantile(p, spec.gamma);
  }
  else {
    const double x = bisect([p](double x) { return std::exp(-x) * (1.0 + x) - p; }, 0.0, 1000.0, 1e-14);
    out.v_t = std::sqrt(x / (spec.gamma * kPi));
  }
  return out;
}

CalibratedThreshold fixed_threshold(const MosaicSpec &spec, double v_t)
{
  CalibratedThreshold out;
  out.v_t = v_t;
  out.target_level = target_level(spec);
  out.mode = CalibrationMode::exact;
  return out;
}

// Center processes.

CenterProcessOutput build_center_process(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                         const SeedSpec &seed)
{
  spec.validate();
  const Window window{spec.t, spec.d, spec.buffer_factor * b_t(spec)};
  const PointConfiguration config =
      sample_poisson(IntensitySpec::constant(spec.gamma, spec.d), window.sampling(), seed);
  return build_center_process(spec, threshold.v_t, config);
}

CenterProcessOutput build_center_process(const MosaicSpec &spec, double v_t, const PointConfiguration &config)
{
  spec.validate();
  const Window window{spec.t, spec.d, 0.0};
  const Box core = window.core();
  const double scale = 1.0 / window.side();
  CenterProcessOutput out;
  out.sampled_points = config.size();
  out.max_sigma = -kInf;
  auto keep = [&](const Point &z, double sigma, double stab) {
    out.centers.push_back(z);
    out.scaled_centers.push_back(z * scale);
    out.sigma.push_back(sigma);
    out.stabilization.push_back(stab);
  };
  if (spec.kind == MosaicKind::voronoi) {
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (!core.contains(config[i])) {
        continue;
      }
      ++out.candidates;
      const double sigma = cell_sigma(spec, voronoi_cell(config, i, CellMode::windowed));
      out.max_sigma = std::max(out.max_sigma, sigma);
      if (sigma > v_t) {
        keep(config[i], sigma, stabilization_radius_voronoi(config, i, CellMode::windowed));
      }
    }
  }
  else {
    for (const auto &cell : delaunay_cells(config, core, CellMode::windowed)) {
      ++out.candidates;
      const double sigma = cell_sigma(spec, cell.cell);
      out.max_sigma = std::max(out.max_sigma, sigma);
      if (sigma > v_t) {
        keep(cell.circle.center, sigma, cell.circle.radius);
      }
    }
  }
  out.count = out.centers.size();
  return out;
}

double gumbel_statistic_mosaic(const MosaicSpec &spec, double max_sigma,
                               const std::function<double(double)> &survival)
{
  if (!std::isfinite(max_sigma) && max_sigma < 0.0) {
    return -kInf;
  }
  const double s = survival(max_sigma);
  if (!(s > 0.0)) {
    return kInf;
  }
  return -std::log(cell_rate(spec) * spec.t * s);
}

// Bound checks.

PairBoundReport check_pair_bound_voronoi(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                         std::size_t pairs, const SeedSpec &seed,
                                         const std::function<double(double)> &survival,
                                         std::vector<double> distances)
{
  spec.validate();
  if (spec.kind != MosaicKind::voronoi) {
    throw DomainError("check_pair_bound_voronoi: spec is not a Voronoi spec");
  }
  PairBoundReport rep;
  rep.epsilon = spec.epsilon;
  rep.a = (1.0 - spec.epsilon) / (1.0 + spec.epsilon);
  rep.tau = tau_constant(spec);
  rep.v = threshold.v_t;
  const double d = spec.d;
  const double k = spec.k();
  if (survival) {
    rep.p_single = survival(rep.v);
  }
  else {
    const auto exact = typical_survival_exact(spec, rep.v);
    if (!exact) {
      throw DomainError("check_pair_bound_voronoi: no exact law; pass a survival function");
    }
    rep.p_single = *exact;
  }
  const double shape = 1.0 - std::acos(std::sqrt(1.0 - rep.a * rep.a)) / kPi;
  const double rhs = rep.p_single * std::exp(-spec.gamma * std::pow(rep.a, d) * rep.tau * shape *
                                             std::pow(std::max(rep.v, 0.0), d / k));
  const double unit = 1.0 / std::sqrt(spec.gamma);
  if (distances.empty()) {
    if (rep.v > 0.0) {
      for (double f : {1.5, 2.5, 3.0, 4.0, 6.0, 10.0}) {
        distances.push_back(f * rep.v);
      }
      distances.push_back(10.0 * rep.v + 20.0 * unit);
    }
    else {
      distances = {0.5 * unit, unit, 2.0 * unit, 4.0 * unit};
    }
  }
  const IntensitySpec intensity = IntensitySpec::constant(spec.gamma, 2);
  const std::size_t per_row = std::max<std::size_t>(1, pairs / distances.size());
  for (std::size_t row = 0; row < distances.size(); ++row) {
    const double delta = distances[row];
    const Point x{};
    const Point y{delta, 0.0, 0.0};
    const Point mid{0.5 * delta, 0.0, 0.0};
    std::size_t hits = 0;
    for (std::size_t s = 0; s < per_row; ++s) {
      Rng rng = seed.child(20 + row, s).engine(0);
      double rho = std::numbers::sqrt2 * (0.5 * delta + 6.0 * unit);
      std::vector<Point> pts{x, y};
      for (const Point &p : sample_poisson_points(intensity, Ball{mid, rho, 2}, rng)) {
        pts.push_back(p);
      }
      bool event = false;
      for (;;) {
        const PointConfiguration config(2, pts, inscribed_box(mid, rho));
        try {
          const ConvexCell cx = voronoi_cell(config, 0, CellMode::windowed);
          event = cell_sigma(spec, cx) > rep.v && cell_deviation(spec, cx) < spec.epsilon;
          if (event) {
            const ConvexCell cy = voronoi_cell(config, 1, CellMode::windowed);
            event = cell_sigma(spec, cy) > rep.v && cell_deviation(spec, cy) < spec.epsilon;
          }
          break;
        }
        catch (const UnboundedCell &) {
          for (const Point &p : sample_poisson_points(intensity, Shell{mid, rho, 2.0 * rho, 2}, rng)) {
            pts.push_back(p);
          }
          rho *= 2.0;
        }
      }
      hits += event ? 1 : 0;
    }
    PairBoundRow r;
    r.distance = delta;
    r.samples = per_row;
    r.lhs = static_cast<double>(hits) / static_cast<double>(per_row);
    r.lhs_se = std::sqrt(r.lhs * (1.0 - r.lhs) / static_cast<double>(per_row));
    r.rhs = rhs;
    r.violation = r.lhs > r.rhs + 3.0 * r.lhs_se;
    rep.violations += r.violation ? 1 : 0;
    rep.rows.push_back(r);
  }
  return rep;
}

double delaunay_overlap_epsilon()
{
  // Cap of half central angle alpha has area r^2 (alpha - sin(2 alpha) / 2); it reaches pi r^2 / 3 at alpha*.
  const double alpha = bisect([](double a) { return a - 0.5 * std::sin(2.0 * a) - kPi / 3.0; }, kPi / 3.0,
                              kPi / 2.0, 1e-15);
  // Vertices within eps (chord) of the regular positions move by at most 2 asin(eps / 2) in angle.
  return 2.0 * std::sin(0.5 * (alpha - kPi / 3.0));
}

OverlapReport check_overlap_bound_delaunay(std::size_t samples, const SeedSpec &seed, std::size_t max_attempts)
{
  OverlapReport rep;
  rep.epsilon = delaunay_overlap_epsilon();
  rep.requested = samples;
  const double max_shift = 2.0 * std::asin(0.5 * rep.epsilon);
  const double kappa2 = kPi;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng = seed.child(30, s).engine(0);
    const int ell = 1 + static_cast<int>(s % 3);
    // Near-regular triangle (x, u) on a circle of random radius and center.
    const double r1 = std::exp(2.0 * uniform01(rng) - 1.0);
    const Point c1{4.0 * uniform01(rng) - 2.0, 4.0 * uniform01(rng) - 2.0, 0.0};
    const double phase = 2.0 * kPi * uniform01(rng);
    std::array<Point, 3> tri;
    for (int i = 0; i < 3; ++i) {
      const double a = phase + 2.0 * kPi * i / 3.0 + 0.95 * max_shift * (2.0 * uniform01(rng) - 1.0);
      tri[i] = c1 + Point{r1 * std::cos(a), r1 * std::sin(a), 0.0};
    }
    std::shuffle(tri.begin(), tri.end(), rng);
    const Circle cx = circle_through(tri[0], tri[1], tri[2]);
    const ConvexCell simplex({tri[0] - cx.z, tri[1] - cx.z, tri[2] - cx.z}, CellKind::delaunay_simplex);
    if (!cx.ok || !(deviation_delaunay(simplex) < rep.epsilon)) {
      ++rep.generation_failures;
      continue;
    }
    bool found = false;
    for (std::size_t attempt = 0; attempt < max_attempts && !found; ++attempt) {
      std::array<Point, 3> other = tri;
      for (int i = 0; i < ell; ++i) {
        const double rr = 3.0 * r1 * std::sqrt(uniform01(rng));
        const double a = 2.0 * kPi * uniform01(rng);
        other[i] = c1 + Point{rr * std::cos(a), rr * std::sin(a), 0.0};
      }
      const Circle cy = circle_through(other[0], other[1], other[2]);
      if (!cy.ok || cy.r < cx.r) {
        continue;
      }
      bool outside = true;
      for (int i = 0; i < ell; ++i) {
        outside = outside && distance(tri[i], cy.z) > cy.r;
      }
      if (!outside) {
        continue;
      }
      found = true;
      const double lens = disk_intersection_area(cx.r, cy.r, distance(cx.z, cy.z));
      const double bound = 2.0 * kappa2 / 3.0 * cy.r * cy.r;
      rep.max_ratio = std::max(rep.max_ratio, lens / bound);
      if (lens > bound * (1.0 + 1e-12)) {
        ++rep.violations;
      }
      ++rep.checked;
      ++rep.per_ell[ell - 1];
    }
    if (!found) {
      ++rep.generation_failures;
    }
  }
  return rep;
}

}  // namespace geoextremes
