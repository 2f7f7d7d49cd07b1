#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace oracle {

namespace {

bool ring_crossing(const std::vector<AngularPoint>& ring, AngularPoint p) {
  bool in = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const AngularPoint a = ring[i];
    const AngularPoint b = ring[j];
    if ((a.v > p.v) != (b.v > p.v)) {
      const double h = a.h + (p.v - a.v) * (b.h - a.h) / (b.v - a.v);
      if (p.h < h) in = !in;
    }
  }
  return in;
}

struct Bbox {
  double h0 = std::numeric_limits<double>::infinity();
  double h1 = -std::numeric_limits<double>::infinity();
  double v0 = std::numeric_limits<double>::infinity();
  double v1 = -std::numeric_limits<double>::infinity();
};

Bbox bbox_of(const Polygon2D& polygon) {
  Bbox b;
  for (const auto& p : polygon.vertices) {
    b.h0 = std::min(b.h0, p.h);
    b.h1 = std::max(b.h1, p.h);
    b.v0 = std::min(b.v0, p.v);
    b.v1 = std::max(b.v1, p.v);
  }
  return b;
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, eps, 40);
}

}  // namespace

bool inside(const Polygon2D& polygon, AngularPoint p) {
  if (polygon.vertices.size() < 3 || !ring_crossing(polygon.vertices, p)) return false;
  for (const auto& hole : polygon.holes)
    if (hole.size() >= 3 && ring_crossing(hole, p)) return false;
  return true;
}

RasterStats rasterize(const Polygon2D& polygon, int n) {
  RasterStats out;
  if (polygon.vertices.size() < 3) return out;
  const Bbox b = bbox_of(polygon);
  const double dh = (b.h1 - b.h0) / n;
  const double dv = (b.v1 - b.v0) / n;
  double sh = 0.0, sv = 0.0;
  long count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const AngularPoint p{b.h0 + (i + 0.5) * dh, b.v0 + (j + 0.5) * dv};
      if (!inside(polygon, p)) continue;
      ++count;
      sh += p.h;
      sv += p.v;
    }
  }
  out.area = count * dh * dv;
  if (count > 0) out.centroid = {sh / count, sv / count};
  return out;
}

double raster_difference_area(const Polygon2D& subject, std::span<const Polygon2D> clips, int n) {
  if (subject.vertices.size() < 3) return 0.0;
  const Bbox b = bbox_of(subject);
  const double dh = (b.h1 - b.h0) / n;
  const double dv = (b.v1 - b.v0) / n;
  long count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const AngularPoint p{b.h0 + (i + 0.5) * dh, b.v0 + (j + 0.5) * dv};
      if (!inside(subject, p)) continue;
      const bool covered = std::any_of(clips.begin(), clips.end(), [&](const Polygon2D& c) { return inside(c, p); });
      if (!covered) ++count;
    }
  }
  return count * dh * dv;
}

double raster_difference_largest_piece(const Polygon2D& subject, std::span<const Polygon2D> clips, int n) {
  if (subject.vertices.size() < 3) return 0.0;
  const Bbox b = bbox_of(subject);
  const double dh = (b.h1 - b.h0) / n;
  const double dv = (b.v1 - b.v0) / n;
  std::vector<char> cell(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const AngularPoint p{b.h0 + (i + 0.5) * dh, b.v0 + (j + 0.5) * dv};
      if (!inside(subject, p)) continue;
      const bool covered = std::any_of(clips.begin(), clips.end(), [&](const Polygon2D& c) { return inside(c, p); });
      cell[static_cast<std::size_t>(i) * n + j] = covered ? 0 : 1;
    }
  }
  long best = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < cell.size(); ++start) {
    if (cell[start] != 1) continue;
    long count = 0;
    cell[start] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      ++count;
      const int i = static_cast<int>(k / n);
      const int j = static_cast<int>(k % n);
      const int di[] = {1, -1, 0, 0};
      const int dj[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const int a = i + di[d];
        const int c = j + dj[d];
        if (a < 0 || a >= n || c < 0 || c >= n) continue;
        const std::size_t m = static_cast<std::size_t>(a) * n + c;
        if (cell[m] == 1) {
          cell[m] = 2;
          stack.push_back(m);
        }
      }
    }
    best = std::max(best, count);
  }
  return best * dh * dv;
}

std::vector<AngularPoint> brute_hull_vertices(std::span<const AngularPoint> points) {
  std::vector<AngularPoint> out;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const AngularPoint a = points[i];
      const AngularPoint b = points[j];
      if (i == j || (a.h == b.h && a.v == b.v)) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        const AngularPoint c = points[k];
        const double cr = (b.h - a.h) * (c.v - a.v) - (b.v - a.v) * (c.h - a.h);
        if (cr < 0.0) {
          edge = false;
        } else if (cr == 0.0) {
          const double t = (c.h - a.h) * (b.h - a.h) + (c.v - a.v) * (b.v - a.v);
          const double len2 = (b.h - a.h) * (b.h - a.h) + (b.v - a.v) * (b.v - a.v);
          if (t < 0.0 || t > len2) edge = false;
        }
      }
      if (edge) {
        out.push_back(a);
        out.push_back(b);
      }
    }
  }
  auto less = [](AngularPoint x, AngularPoint y) { return x.h < y.h || (x.h == y.h && x.v < y.v); };
  std::sort(out.begin(), out.end(), less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t nearest_site(std::span<const AngularPoint> sites, AngularPoint p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double d = std::hypot(sites[i].h - p.h, sites[i].v - p.v);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t nearest_site(std::span<const Eigen::Vector3d> sites, const Eigen::Vector3d& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double d = (sites[i] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double series_erf(double x) {
  const long double xl = x;
  long double term = xl;
  long double sum = xl;
  for (int n = 1; n < 400; ++n) {
    term *= -xl * xl / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-22L) break;
  }
  return static_cast<double>(2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum);
}

double quadrature_box_mass(double mu, double sx, double sy, double x_lo, double x_hi, double y_lo, double y_hi) {
  const double kTail = 12.0;
  x_lo = std::max(x_lo, mu - kTail * sx);
  x_hi = std::min(x_hi, mu + kTail * sx);
  y_lo = std::max(y_lo, -kTail * sy);
  y_hi = std::min(y_hi, kTail * sy);
  if (x_lo >= x_hi || y_lo >= y_hi) return 0.0;
  const double norm = 1.0 / (2.0 * std::numbers::pi * sx * sy);
  auto inner = [&](double x) {
    const double ex = std::exp(-0.5 * (x - mu) * (x - mu) / (sx * sx));
    auto pdf = [&](double y) { return norm * ex * std::exp(-0.5 * y * y / (sy * sy)); };
    return integrate(pdf, y_lo, y_hi, 1e-12);
  };
  return integrate(inner, x_lo, x_hi, 1e-10);
}

double straight_arm_torque(std::span<const Segment> segments, double elevation, double g) {
  const double c = std::cos(elevation * std::numbers::pi / 180.0);
  double start = 0.0;
  double torque = 0.0;
  for (const auto& s : segments) {
    torque += s.mass * g * (start + s.com) * c;
    start += s.length;
  }
  return std::abs(torque);
}

}  // namespace oracle
